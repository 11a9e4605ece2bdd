//! The AKLT state and the two-parameter S4-symmetric family
//! `a_μ(θ, φ) = (cos(θ/2) I + e^{iφ} sin(θ/2) n_μ·σ) / √3`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat};
use crate::mps::MPSTensor;
use crate::symmetry::{BufferAxis, FactorizedTensor};
use crate::Result;

/// A point on the `(θ, φ)` sphere of the toy model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyModelParams {
    pub theta: f64,
    pub phi: f64,
}

impl ToyModelParams {
    /// Wraps onto `θ ∈ [0, π]`, `φ ∈ [0, 2π)`.
    ///
    /// `θ = π` is kept as the South pole. Angles past it are reflected
    /// through the pole, which shifts `φ` by π. A warning is logged whenever
    /// the input was changed.
    pub fn new(theta: f64, phi: f64) -> Self {
        let tau = 2.0 * PI;
        let mut t = theta.rem_euclid(tau);
        let mut p = phi;
        if t > PI {
            t = tau - t;
            p += PI;
        }
        p = p.rem_euclid(tau);
        if (t - theta).abs() > 1e-15 || (p - phi).abs() > 1e-15 {
            log::debug!("toy-model parameters ({theta}, {phi}) wrapped to ({t}, {p})");
        }
        ToyModelParams { theta: t, phi: p }
    }
}

/// Junk-space triad `n_x·σ, n_y·σ, n_z·σ`.
pub fn triad() -> [CMat; 3] {
    let [sx, sy, _] = linalg::pauli();
    let h = 3f64.sqrt() / 2.0;
    [
        &sx * linalg::real(-0.5) + &sy * linalg::real(h),
        &sx * linalg::real(-0.5) - &sy * linalg::real(h),
        sx,
    ]
}

/// Junk parts `a_μ(θ, φ)` in `(x, y, z)` order.
pub fn junk_operators(p: ToyModelParams) -> [CMat; 3] {
    let (s, c) = (p.theta / 2.0).sin_cos();
    let phase = linalg::C64::from_polar(s, p.phi);
    let norm = linalg::real(1.0 / 3f64.sqrt());
    triad().map(|n| (linalg::identity(2) * linalg::real(c) + n * phase) * norm)
}

/// Junk factors of the π/2 rotations: `σ_x` for the z turn (it swaps `n_x`
/// and `n_y`) and `(σ_x - √3 σ_y)/2` for the x turn (it swaps `n_y` and
/// `n_z`).
pub fn junk_symmetries() -> BTreeMap<BufferAxis, CMat> {
    let [sx, sy, _] = linalg::pauli();
    let rx = &sx * linalg::real(0.5) - &sy * linalg::real(3f64.sqrt() / 2.0);
    BTreeMap::from([(BufferAxis::Z, sx), (BufferAxis::X, rx)])
}

/// `A_μ = σ_μ ⊗ a_μ(θ, φ)`; already in canonical form with `Λ = I/4`.
pub fn toy_tensor(p: ToyModelParams) -> Result<FactorizedTensor> {
    let p = ToyModelParams::new(p.theta, p.phi);
    FactorizedTensor::from_parts(junk_operators(p).to_vec(), junk_symmetries())
}

/// Unnormalized AKLT tensor `A_μ = σ_μ`.
pub fn aklt() -> MPSTensor {
    MPSTensor::pauli_basis(linalg::pauli().to_vec()).expect("Pauli matrices share a shape")
}

/// AKLT as a factorized tensor with one-dimensional junk space.
pub fn aklt_factorized() -> FactorizedTensor {
    let junk = vec![CMat::from_element(1, 1, linalg::real(1.0 / 3f64.sqrt())); 3];
    let syms = BufferAxis::ALL.iter().map(|&b| (b, linalg::identity(1))).collect();
    FactorizedTensor::from_parts(junk, syms).expect("scalar junk parts are consistent")
}

/// `θ_c = 2 arctan 2`, where `cos(θ/2) = ½ sin(θ/2)` and the buffered
/// tensor loses its off-axis junk parts.
pub fn critical_theta() -> f64 {
    2.0 * 2f64.atan()
}
