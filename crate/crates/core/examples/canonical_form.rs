//! Bring a random-looking MPS tensor to canonical form and inspect its
//! transfer-channel spectrum and correlation length.

use sptmqc::linalg;
use sptmqc::mps;
use sptmqc::toymodel::{self, ToyModelParams};

fn main() -> sptmqc::Result<()> {
    let a = toymodel::toy_tensor(ToyModelParams::new(2.3, 4.1))?.tensor();
    let c = mps::canonicalize(&a)?;
    let t = &c.tensor;

    let right = t.apply_identity_channel(&linalg::identity(t.bond_dim()));
    let left = t.apply_dual_channel(&c.left_fixed_point);
    println!("|E(I) - I|     = {:.2e}", linalg::max_abs(&(right - linalg::identity(t.bond_dim()))));
    println!("|E*(Λ) - Λ|    = {:.2e}", linalg::max_abs(&(left - &c.left_fixed_point)));
    println!("correlation length ξ = {}", c.xi);
    for (k, z) in c.spectrum.iter().take(6).enumerate() {
        println!("  λ_{k} = {z:.6}  |λ| = {:.6}", z.norm());
    }
    Ok(())
}
