//! The AKLT state needs no buffering: every rotation is implemented exactly
//! and the string order sits at its maximum.

use std::f64::consts::PI;

use sptmqc::{mqc, orderparam, renorm, toymodel, BufferAxis};

fn main() -> sptmqc::Result<()> {
    let state = toymodel::aklt_factorized();
    for axis in BufferAxis::ALL {
        let bare = renorm::buffer(&state, axis, 0)?;
        for k in 0..=4 {
            let theta = k as f64 * PI / 4.0;
            let f = mqc::gate_fidelity(&bare, theta, None, None)?.fidelity;
            println!("axis {} Θ = {theta:.4}  F = {f:.15}", axis.name());
        }
    }
    let o = orderparam::string_order_bare(&toymodel::aklt(), BufferAxis::Z, 30)?;
    println!("string order O_z = {:.15} (n = 1: {:.6})", o.limit, o.values_by_n[1].re);
    Ok(())
}
