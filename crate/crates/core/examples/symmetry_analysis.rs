//! Recover the virtual symmetry operators of a toy-model state, classify its
//! D2 phase and split the bond into protected and junk factors.

use sptmqc::symmetry::{self, Axis};
use sptmqc::toymodel::{self, ToyModelParams};

fn main() -> sptmqc::Result<()> {
    let f = toymodel::toy_tensor(ToyModelParams::new(1.1, 0.7))?;
    let a = f.tensor();
    println!("bond dimension {}, physical dimension {}", a.bond_dim(), a.physical_dim());

    let label = symmetry::classify_d2_phase(&a)?;
    println!("phase {:?}, group commutator {:.6}", label.value, label.commutator_sign);

    let s4 = symmetry::verify_s4_invariance(&a);
    println!("quarter-turn residuals x {:.2e}  z {:.2e}  accepted {}", s4.residual_x, s4.residual_z, s4.accepted);

    let rz = symmetry::extract_virtual_symmetry(&a, &symmetry::spin1_rotation(Axis::Z, std::f64::consts::PI))?;
    println!("π rotation about z: χ = {:.6}, residual {:.2e}", rz.character, rz.residual);

    let split = symmetry::factorize_protected_junk(&a)?;
    println!("junk dimension {}, reconstruction error {:.2e}", split.junk_dim(), split.reconstruction_error());
    Ok(())
}
