//! Bare and renormalized string order, and the check that ties the limit
//! fidelity to the order parameters.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use sptmqc::toymodel::{self, ToyModelParams};
use sptmqc::{orderparam, renorm, BufferAxis};

fn main() -> sptmqc::Result<()> {
    for (theta, phi) in [(FRAC_PI_2, FRAC_PI_4), (1.0, 0.3), (FRAC_PI_2, FRAC_PI_2)] {
        let f = toymodel::toy_tensor(ToyModelParams::new(theta, phi))?;
        let bare = orderparam::string_order_bare(&f.tensor(), BufferAxis::Z, orderparam::DEFAULT_N_MAX)?;
        print!("(θ, φ) = ({theta:.3}, {phi:.3})  bare O_z = {:.6}", bare.limit);
        match renorm::fixed_point(&f, BufferAxis::Z) {
            Ok(r) => println!("  renormalized O_z = {:.6}", orderparam::string_order_renormalized(&r)?.limit),
            Err(e) => println!("  ({e})"),
        }
        let rep = orderparam::theorem2_check(&f)?;
        println!(
            "    F_limit = {:.6}  O_x = {:.6}  O_z = {:.6}  stalled {}  consistent {}",
            rep.f_limit, rep.o_x, rep.o_z, rep.stalled, rep.consistent
        );
    }
    Ok(())
}
