//! Gate fidelity of a π/2 rotation as a function of buffer depth, and the
//! resource estimate that goes with it.

use std::f64::consts::FRAC_PI_2;

use sptmqc::toymodel::{self, ToyModelParams};
use sptmqc::{linalg, mqc, renorm, BufferAxis, Length};

fn main() -> sptmqc::Result<()> {
    let f = toymodel::toy_tensor(ToyModelParams::new(FRAC_PI_2, 0.9))?;
    let Length::Finite(zeta) = renorm::junk_spectrum(f.junk(2), f.junk_symmetry(BufferAxis::Z).unwrap())?.zeta else {
        unreachable!("generic point")
    };
    println!("ζ_z = {zeta:.4}");
    for m in 0..=12 {
        let r = renorm::buffer(&f, BufferAxis::Z, m)?;
        let fid = mqc::gate_fidelity(&r, FRAC_PI_2, None, None)?.fidelity;
        let p = mqc::postselect_probability(&f, BufferAxis::Z, m as u64)?;
        println!("m = {m:2}  1 - F = {:.3e}  p_succ = {p:.3e}", 1.0 - fid);
    }
    let lambda1 = linalg::eigenvalues(f.junk(2))[0];
    for eps in [1e-2, 1e-4, 1e-6] {
        println!("ε = {eps:.0e}: ~{:.3e} sites per gate", mqc::overhead_estimate(zeta, lambda1, eps)?);
    }
    Ok(())
}
