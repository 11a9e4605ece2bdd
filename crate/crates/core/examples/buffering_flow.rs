//! Follow the buffered tensor as the number of buffer sites grows, compare
//! with the fixed point, and look at the critical point where the flow
//! becomes pathological.

use sptmqc::renorm;
use sptmqc::toymodel::{self, ToyModelParams};
use sptmqc::BufferAxis;

fn main() -> sptmqc::Result<()> {
    let f = toymodel::toy_tensor(ToyModelParams::new(1.2, 0.4))?;
    let js = renorm::junk_spectrum(f.junk(BufferAxis::Z.index()), f.junk_symmetry(BufferAxis::Z).unwrap())?;
    let eig: Vec<String> = js.eigenvalues.iter().map(|z| format!("{z:.5}")).collect();
    println!("junk eigenvalues [{}]  ζ_z = {}", eig.join(", "), js.zeta);

    let limit = renorm::fixed_point(&f, BufferAxis::Z)?;
    println!("fixed point: ξ̃ = {}", limit.xi_tilde);
    for m in [0, 1, 2, 4, 8, 16] {
        let r = renorm::buffer(&f, BufferAxis::Z, m)?;
        println!("m = {m:2}  ξ̃ = {:<24}  distance to limit {:.3e}", r.xi_tilde.to_string(), renorm::phase_aligned_distance(r.tensor_m.junk_parts(), limit.tensor_m.junk_parts()));
    }

    let crit = toymodel::toy_tensor(ToyModelParams::new(toymodel::critical_theta(), 0.0))?;
    println!("at θ_c:");
    for m in [1, 2, 4, 8, 16] {
        let r = renorm::buffer(&crit, BufferAxis::Z, m)?;
        println!("  m = {m:2}  ξ̃ = {}  degenerate {}", r.xi_tilde, r.degenerate);
    }
    Ok(())
}
