//! Buffering renormalization: conjugating the computational-site tensor by
//! `m` postselected buffer outcomes on each side, and the `m → ∞` fixed
//! point of that flow.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::extended;
use crate::length::Length;
use crate::linalg::{self, CMat, C64};
use crate::mps::{self, MPSTensor, DEGENERACY_TOL};
use crate::symmetry::{BufferAxis, FactorizedTensor};
use crate::{Error, Result};

/// Buffering depth. `Infinite` stands for the analytic fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Depth {
    Finite(u64),
    Infinite,
}

impl Depth {
    /// Signed encoding used in tables and configs: `-1` is infinite.
    pub fn from_signed(m: i64) -> Result<Depth> {
        match m {
            -1 => Ok(Depth::Infinite),
            m if m >= 0 => Ok(Depth::Finite(m as u64)),
            m => Err(Error::Domain(format!("buffering depth {m} is negative"))),
        }
    }

    pub fn to_signed(self) -> i64 {
        match self {
            Depth::Finite(m) => m as i64,
            Depth::Infinite => -1,
        }
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Depth::Finite(m) => write!(f, "{m}"),
            Depth::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Depth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i64(self.to_signed())
    }
}

impl<'de> Deserialize<'de> for Depth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = i64::deserialize(d)?;
        Depth::from_signed(m).map_err(serde::de::Error::custom)
    }
}

/// One eigenvalue cluster of a junk operator restricted to a single
/// eigenvalue `χ = ±1` of the junk symmetry.
#[derive(Debug, Clone)]
pub struct JordanBlock {
    pub eigenvalue: C64,
    pub dim: usize,
    pub chi: i8,
}

/// Block structure of a junk operator.
///
/// Block sizes are eigenvalue-cluster sizes (relative gap `1e-8`), not
/// literal Jordan block sizes; for normal operators the two coincide.
#[derive(Debug, Clone)]
pub struct JordanSpectrum {
    pub eigenvalues: Vec<C64>,
    pub block_dims: Vec<usize>,
    pub chi_labels: Vec<i8>,
    pub zeta: Length,
    pub normal: bool,
    pub blocks: Vec<JordanBlock>,
}

/// Clusters the eigenvalues of `a`, splits each cluster by the eigenvalues
/// of `u_junk`, and derives `ζ` from the two leading blocks.
pub fn junk_spectrum(a: &CMat, u_junk: &CMat) -> Result<JordanSpectrum> {
    let n = a.nrows();
    if a.ncols() != n || u_junk.nrows() != n || u_junk.ncols() != n {
        return Err(Error::Shape("junk operator and symmetry must be square of equal size".into()));
    }
    let scale = linalg::max_abs(a).max(1e-300);
    let comm = linalg::max_abs(&linalg::commutator(u_junk, a));
    if comm > 1e-8 * scale {
        return Err(Error::SymmetryMismatch(comm));
    }
    let normal = linalg::max_abs(&linalg::commutator(a, &a.adjoint())) < 1e-10;
    let ev = linalg::eigenvalues(a);
    let top = ev.first().map_or(0.0, |z| z.norm()).max(1e-300);

    let mut clusters: Vec<Vec<C64>> = Vec::new();
    for z in ev {
        match clusters.iter_mut().find(|c| (c[0] - z).norm() <= DEGENERACY_TOL * top) {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }

    let mut blocks = Vec::new();
    for cluster in clusters {
        let k = cluster.len();
        let lambda = cluster.iter().sum::<C64>() / linalg::real(k as f64);
        let shifted = a - linalg::identity(n) * lambda;
        let mut power = linalg::identity(n);
        for _ in 0..k {
            power = &power * &shifted;
        }
        let v = linalg::null_space(&power, k);
        let restricted = v.adjoint() * u_junk * &v;
        let (vals, _) = linalg::hermitian_eigen(&restricted);
        let plus = vals.iter().filter(|&&x| x > 0.0).count();
        for (chi, dim) in [(1i8, plus), (-1i8, k - plus)] {
            if dim > 0 {
                blocks.push(JordanBlock { eigenvalue: lambda, dim, chi });
            }
        }
    }

    let zeta = match blocks.get(1) {
        None => Length::Finite(0.0),
        Some(second) => {
            let first = blocks[0].eigenvalue.norm();
            if first == 0.0 {
                Length::Infinite
            } else {
                Length::from_ratio(second.eigenvalue.norm() / first, DEGENERACY_TOL)
            }
        }
    };
    Ok(JordanSpectrum {
        eigenvalues: blocks.iter().map(|b| b.eigenvalue).collect(),
        block_dims: blocks.iter().map(|b| b.dim).collect(),
        chi_labels: blocks.iter().map(|b| b.chi).collect(),
        zeta,
        normal,
        blocks,
    })
}

/// Result of buffering to depth `m` (or to the fixed point).
#[derive(Debug, Clone)]
pub struct RenormResult {
    pub m: Depth,
    pub axis: BufferAxis,
    /// `σ_μ ⊗ ã_μ` with junk parts in the original junk basis, rescaled to
    /// unit channel spectral radius.
    pub tensor_m: FactorizedTensor,
    pub a_plus: CMat,
    pub a_minus: CMat,
    /// Support projector `Π` of the right fixed point of the junk channel.
    pub pi_projector: CMat,
    /// Left fixed point of the junk channel in the gauge where the right
    /// fixed point is `Π`; trace one.
    pub lambda_tilde: CMat,
    pub xi_tilde: Length,
    /// `Π U^(J) Π`.
    pub u_tilde: CMat,
    /// True when the largest eigenvalue of the buffered channel is not
    /// unique (`ξ̃ = ∞`).
    pub degenerate: bool,
    /// Junk parts in the canonical gauge, embedded back into the full junk
    /// space through the support of `Π`.
    pub canonical_junk: Vec<CMat>,
    /// Eigenvalues of the buffered channel on the full virtual space.
    pub channel_spectrum: Vec<C64>,
}

impl RenormResult {
    /// `I_P ⊗ ·` lift of a junk-space operator.
    pub fn lift(op: &CMat) -> CMat {
        linalg::kron(&linalg::identity(2), op)
    }

    /// `σ_μ ⊗ ã_μ` in the canonical gauge.
    pub fn canonical_tensor(&self) -> MPSTensor {
        let mats = linalg::pauli().iter().zip(&self.canonical_junk).map(|(s, a)| linalg::kron(s, a)).collect();
        MPSTensor::pauli_basis(mats).expect("consistent shapes")
    }

    pub fn junk_dim(&self) -> usize {
        self.tensor_m.junk_dim()
    }
}

fn junk_tensor(parts: &[CMat]) -> MPSTensor {
    MPSTensor::pauli_basis(parts.to_vec()).expect("junk parts share a shape")
}

fn junk_channel_radius(parts: &[CMat]) -> Result<f64> {
    let ch = mps::transfer_channel(&junk_tensor(parts), None)?;
    Ok(ch.spectrum().first().map_or(0.0, |z| z.norm()))
}

/// Buffers `F` to depth `m` along `axis`: `ã_μ = a_axis^m a_μ a_axis^m`.
///
/// The protected parts stay `σ_μ`; the sign `(±1)^m` that `σ_axis^m`
/// leaves on the off-axis components is a known Pauli frame and is dropped.
pub fn buffer(f: &FactorizedTensor, axis: BufferAxis, m: i64) -> Result<RenormResult> {
    let m = match Depth::from_signed(m)? {
        Depth::Finite(m) => m,
        Depth::Infinite => return Err(Error::Domain("buffering depth -1 is not a finite depth".into())),
    };
    let a = f.junk(axis.index());
    let parts: Vec<CMat> = if m == 0 {
        f.junk_parts().to_vec()
    } else {
        let (power, _) = linalg::normalized_power(a, m);
        f.junk_parts().iter().map(|x| &power * x * &power).collect()
    };
    assemble(f, axis, Depth::Finite(m), parts)
}

/// The `m → ∞` limit of [`buffer`].
///
/// `a_axis^m / λ₁^m` converges to `(a - λ₁)^s P₁` up to scale, where `P₁` is
/// the spectral projector onto the leading block (of a single junk
/// symmetry label) and `s` its nilpotency index minus one. Fails with
/// [`Error::StalledFlow`] when `ζ` diverges. A limit whose channel is
/// degenerate is returned with the `degenerate` flag set.
pub fn fixed_point(f: &FactorizedTensor, axis: BufferAxis) -> Result<RenormResult> {
    let a = f.junk(axis.index());
    let u = f
        .junk_symmetry(axis)
        .ok_or_else(|| Error::Factorization(format!("no junk symmetry for axis {}", axis.name())))?;
    let spec = junk_spectrum(a, u)?;
    if !spec.zeta.is_finite() {
        return Err(Error::StalledFlow);
    }
    let n = a.nrows();
    let top = &spec.blocks[0];
    let cluster_dim: usize = spec.blocks.iter().filter(|b| b.eigenvalue == top.eigenvalue).map(|b| b.dim).sum();
    let cluster = linalg::spectral_projector(a, top.eigenvalue, cluster_dim).ok_or_else(|| {
        Error::NumericalDegeneracy {
            message: "leading junk eigenvalue is not isolated".into(),
            spectrum: spec.eigenvalues.iter().map(|z| z.norm()).collect(),
        }
    })?;
    let chi = linalg::real(top.chi as f64);
    let p1 = (linalg::identity(n) + u * chi) * linalg::real(0.5) * cluster;
    let shifted = a - linalg::identity(n) * top.eigenvalue;
    let mut t = p1.clone();
    loop {
        let next = &shifted * &t;
        if linalg::max_abs(&next) <= 1e-10 * linalg::max_abs(&t) {
            break;
        }
        t = next;
    }
    let parts = f.junk_parts().iter().map(|x| &t * x * &t).collect();
    assemble(f, axis, Depth::Infinite, parts)
}

fn assemble(f: &FactorizedTensor, axis: BufferAxis, m: Depth, parts: Vec<CMat>) -> Result<RenormResult> {
    let rho = junk_channel_radius(&parts)?;
    if rho <= 0.0 || !rho.is_finite() {
        return Err(Error::NumericalDegeneracy {
            message: "buffered junk channel vanishes".into(),
            spectrum: vec![rho],
        });
    }
    let parts: Vec<CMat> = if (rho - 1.0).abs() < 1e-13 {
        parts
    } else {
        let s = linalg::real(1.0 / rho.sqrt());
        parts.into_iter().map(|x| x * s).collect()
    };
    let tensor_m = f.with_junk(parts.clone())?;

    let sectors = sector_spectra(&parts);
    let mut labelled: Vec<(usize, C64)> =
        sectors.iter().enumerate().flat_map(|(k, s)| s.eigenvalues.iter().map(move |&z| (k, z))).collect();
    labelled.sort_by(|a, b| linalg::cmp_eigen(&a.1, &b.1));
    let channel_spectrum: Vec<C64> = labelled.iter().map(|&(_, z)| z).collect();
    let lead = channel_spectrum[0].norm();
    let second = channel_spectrum.get(1).map_or(0.0, |z| z.norm()) / lead;
    let degenerate = second >= 1.0 - DEGENERACY_TOL;
    let xi_tilde = match m {
        Depth::Finite(depth) if second >= 1.0 - REFINE_GAP => {
            refined_xi(f, axis, depth, &sectors, labelled[0], labelled[1]).unwrap_or(Length::Infinite)
        }
        _ => Length::from_ratio(second, DEGENERACY_TOL),
    };

    let canon = mps::canonicalize_with(&junk_tensor(&parts), true)?;
    let iso = linalg::polar_unitary(&canon.gauge);
    let embed = |x: &CMat| &iso * x * iso.adjoint();
    let pi_projector = &iso * iso.adjoint();
    let lambda_tilde = embed(&canon.left_fixed_point);
    let canonical_junk = canon.tensor.matrices().iter().map(embed).collect();
    let u = f
        .junk_symmetry(axis)
        .ok_or_else(|| Error::Factorization(format!("no junk symmetry for axis {}", axis.name())))?;
    let u_tilde = &pi_projector * u * &pi_projector;

    let (p, q) = axis.partners();
    let half = linalg::real(0.5);
    let a_plus = (&parts[p] + &parts[q]) * half;
    let a_minus = (&parts[p] - &parts[q]) * half;
    Ok(RenormResult {
        m,
        axis,
        tensor_m,
        a_plus,
        a_minus,
        pi_projector,
        lambda_tilde,
        xi_tilde,
        u_tilde,
        degenerate,
        canonical_junk,
        channel_spectrum,
    })
}

/// Relative gap below which the leading channel eigenvalues of a finite-depth
/// buffered tensor are re-resolved in extended precision.
const REFINE_GAP: f64 = 1e-6;

/// `s_kμ` with `σ_μ σ_k σ_μ = s_kμ σ_k`, for `k = I, x, y, z`.
const SECTOR_SIGNS: [[i8; 3]; 4] = [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]];

struct Sector {
    matrix: CMat,
    eigenvalues: Vec<C64>,
}

/// Spectra of the four Pauli sectors `X ↦ Σ_μ s_kμ ã_μ X ã_μ†`, whose union
/// is the spectrum of the full buffered channel.
fn sector_spectra(parts: &[CMat]) -> Vec<Sector> {
    let q = parts[0].nrows();
    SECTOR_SIGNS
        .iter()
        .map(|signs| {
            let mut matrix = CMat::zeros(q * q, q * q);
            for (a, &s) in parts.iter().zip(signs) {
                matrix += linalg::kron(&a.conjugate(), a) * linalg::real(s as f64);
            }
            let eigenvalues = linalg::eigenvalues(&matrix);
            Sector { matrix, eigenvalues }
        })
        .collect()
}

/// `ξ̃` when the two leading eigenvalues agree to within [`REFINE_GAP`].
///
/// A tie inside one sector is a genuine degeneracy. A near tie between the
/// isolated leading eigenvalues of two sectors is resolved by recomputing
/// both in extended precision from the unbuffered junk parts.
fn refined_xi(
    f: &FactorizedTensor,
    axis: BufferAxis,
    depth: u64,
    sectors: &[Sector],
    first: (usize, C64),
    second: (usize, C64),
) -> Option<Length> {
    if first.0 == second.0 {
        return None;
    }
    let q = f.junk_dim();
    let mut starts = Vec::new();
    for (k, lambda) in [first, second] {
        let ev = &sectors[k].eigenvalues;
        if (ev[0] - lambda).norm() > 1e-12 * lambda.norm() {
            return None;
        }
        if ev.len() > 1 && ev[1].norm() > (1.0 - 1e-3) * ev[0].norm() {
            return None;
        }
        let shifted = &sectors[k].matrix - linalg::identity(q * q) * lambda;
        let v = linalg::null_space(&shifted, 1);
        starts.push(linalg::unvec(&v.column(0).into_owned(), q));
    }
    let gap = extended::sector_gap(
        f.junk_parts(),
        axis.index(),
        depth,
        SECTOR_SIGNS[first.0],
        &starts[0],
        SECTOR_SIGNS[second.0],
        &starts[1],
    )?
    .abs();
    if gap == 0.0 {
        return None;
    }
    // |λ₂/λ₁| = sqrt(1 - gap)
    Some(Length::Finite(-2.0 / (-gap).ln_1p()))
}

/// Depths standing in for `m → ∞` when the flow stalls.
pub const STALLED_WINDOW: std::ops::Range<u64> = 64..128;
const STALLED_STEP: usize = 4;

/// Representatives of the `m → ∞` limit: the fixed point, or for a stalled
/// flow (which never converges) the buffered tensors over
/// [`STALLED_WINDOW`]. Callers take the supremum of a figure of merit over
/// the window, which bounds what any depth in it can reach.
pub fn limit_candidates(f: &FactorizedTensor, axis: BufferAxis) -> Result<Vec<RenormResult>> {
    match fixed_point(f, axis) {
        Ok(r) => Ok(vec![r]),
        Err(Error::StalledFlow) => STALLED_WINDOW.step_by(STALLED_STEP).map(|m| buffer(f, axis, m as i64)).collect(),
        Err(e) => Err(e),
    }
}

pub fn xi_tilde(r: &RenormResult) -> Length {
    r.xi_tilde
}

/// `min_α ‖x - e^{iα} y‖` over the stacked junk parts. Buffered junk parts
/// pick up a global phase `arg λ₁^{2m}`, which has no physical effect.
pub fn phase_aligned_distance(x: &[CMat], y: &[CMat]) -> f64 {
    let overlap: C64 = x.iter().zip(y).map(|(a, b)| b.iter().zip(a.iter()).map(|(p, q)| p.conj() * q).sum::<C64>()).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { linalg::ONE };
    x.iter().zip(y).map(|(a, b)| linalg::max_abs(&(a - b * phase))).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, real};
    use crate::toymodel::{aklt_factorized, critical_theta, toy_tensor, ToyModelParams};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn toy(theta: f64, phi: f64) -> FactorizedTensor {
        toy_tensor(ToyModelParams::new(theta, phi)).unwrap()
    }

    #[test]
    fn depth_encoding() {
        assert_eq!(Depth::from_signed(-1).unwrap(), Depth::Infinite);
        assert_eq!(Depth::from_signed(3).unwrap(), Depth::Finite(3));
        assert!(matches!(Depth::from_signed(-2), Err(Error::Domain(_))));
        assert!(Depth::Finite(1000) < Depth::Infinite);
    }

    #[test]
    fn diagonal_spectrum() {
        let a = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![real(1.0), real(0.5)]));
        let s = junk_spectrum(&a, &linalg::identity(2)).unwrap();
        assert!((s.eigenvalues[0] - real(1.0)).norm() < 1e-15);
        assert!((s.eigenvalues[1] - real(0.5)).norm() < 1e-15);
        assert_eq!(s.chi_labels, vec![1, 1]);
        assert!((s.zeta.finite().unwrap() - 1.0 / 2f64.ln()).abs() < 1e-12);
        assert!(s.normal);
    }

    #[test]
    fn closed_form_zeta() {
        let f = toy(FRAC_PI_3, 0.0);
        let s = junk_spectrum(f.junk(2), f.junk_symmetry(BufferAxis::Z).unwrap()).unwrap();
        let c = (FRAC_PI_3 / 2.0).cos();
        let sn = (FRAC_PI_3 / 2.0).sin();
        assert!((s.eigenvalues[0] - real((c + sn) / 3f64.sqrt())).norm() < 1e-12);
        assert!((s.eigenvalues[1] - real((c - sn) / 3f64.sqrt())).norm() < 1e-12);
        let zeta = s.zeta.finite().unwrap();
        assert!((zeta + 1.0 / (2.0 - 3f64.sqrt()).ln()).abs() < 1e-10);
        assert!((zeta - 0.7593).abs() < 1e-4);
        assert_eq!(s.chi_labels, vec![1, -1]);
    }

    #[test]
    fn quarter_phase_stalls() {
        let f = toy(FRAC_PI_2, FRAC_PI_2);
        let s = junk_spectrum(f.junk(2), f.junk_symmetry(BufferAxis::Z).unwrap()).unwrap();
        assert_eq!(s.zeta, Length::Infinite);
        assert!(matches!(fixed_point(&f, BufferAxis::Z), Err(Error::StalledFlow)));
    }

    #[test]
    fn non_commuting_symmetry_is_rejected() {
        let f = toy(1.0, 0.3);
        let bad = linalg::pauli()[2].clone();
        assert!(matches!(junk_spectrum(f.junk(2), &bad), Err(Error::SymmetryMismatch(_))));
    }

    #[test]
    fn non_normal_cluster() {
        // Jordan block at 1 followed by 0.25
        let a = linalg::real_matrix(3, 3, &[1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25]);
        let s = junk_spectrum(&a, &linalg::identity(3)).unwrap();
        assert!(!s.normal);
        assert_eq!(s.block_dims, vec![2, 1]);
        assert!((s.zeta.finite().unwrap() - 1.0 / 4f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn zero_depth_is_identity() {
        let f = toy(1.3, 0.7);
        let r = buffer(&f, BufferAxis::Z, 0).unwrap();
        for (a, b) in r.tensor_m.junk_parts().iter().zip(f.junk_parts()) {
            assert!(max_abs(&(a - b)) < 1e-15);
        }
        assert!(matches!(buffer(&f, BufferAxis::Z, -3), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_one_buffer_projects_in_one_step() {
        let r = buffer(&toy(FRAC_PI_2, 0.0), BufferAxis::Z, 1).unwrap();
        let j = r.tensor_m.junk_parts();
        assert!(max_abs(&(&j[0] - &j[1])) < 1e-10);
        assert!(max_abs(&r.a_minus) < 1e-10);
    }

    #[test]
    fn stalled_flow_keeps_junk_split() {
        let f = toy(FRAC_PI_2, FRAC_PI_2);
        let first = max_abs(&buffer(&f, BufferAxis::Z, 1).unwrap().a_minus);
        for m in [5, 20, 80] {
            let r = buffer(&f, BufferAxis::Z, m).unwrap();
            assert!(max_abs(&r.a_minus) > 0.1 * first, "m = {m}");
        }
    }

    #[test]
    fn generic_fixed_point() {
        let t = FRAC_PI_2;
        let r = fixed_point(&toy(t, FRAC_PI_4), BufferAxis::Z).unwrap();
        let j = r.tensor_m.junk_parts();
        assert!(max_abs(&(&j[0] - &j[1])) < 1e-12);
        // ã_x ∝ [cos(θ/2) - ½ e^{iφ} sin(θ/2)] |+⟩⟨+|
        let coeff = real((t / 2.0).cos()) - C64::from_polar(0.5 * (t / 2.0).sin(), FRAC_PI_4);
        let plus = linalg::real_matrix(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let expected = &plus * coeff;
        let ratio = j[0][(0, 0)] / expected[(0, 0)];
        assert!(max_abs(&(&j[0] - expected * ratio)) < 1e-12);
        assert!(!r.degenerate);
        assert!(r.xi_tilde.is_finite());
        assert!(max_abs(&(&r.pi_projector - plus)) < 1e-10);
    }

    #[test]
    fn critical_fixed_point_is_degenerate() {
        let r = fixed_point(&toy(critical_theta(), 0.0), BufferAxis::Z).unwrap();
        let j = r.tensor_m.junk_parts();
        assert!(max_abs(&j[0]) < 1e-10);
        assert!(max_abs(&j[1]) < 1e-10);
        assert!(max_abs(&j[2]) > 0.1);
        assert!(r.degenerate);
        assert_eq!(r.xi_tilde, Length::Infinite);
    }

    #[test]
    fn critical_xi_grows() {
        let f = toy(critical_theta(), 0.0);
        let xs: Vec<f64> = [2, 4, 6, 8].iter().map(|&m| buffer(&f, BufferAxis::Z, m).unwrap().xi_tilde.as_f64()).collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]), "{xs:?}");
    }

    #[test]
    fn aklt_is_its_own_fixed_point() {
        let f = aklt_factorized();
        let r = fixed_point(&f, BufferAxis::Z).unwrap();
        assert!(max_abs(&(&r.pi_projector - linalg::identity(1))) < 1e-12);
        assert!((r.xi_tilde.finite().unwrap() - 1.0 / 3f64.ln()).abs() < 1e-10);
        for (a, b) in r.tensor_m.junk_parts().iter().zip(f.junk_parts()) {
            assert!(max_abs(&(a - b)) < 1e-12);
        }
    }

    #[test]
    fn fixed_point_invariants() {
        for (t, p) in [(FRAC_PI_2, FRAC_PI_4), (1.0, 0.3), (2.5, 4.0)] {
            for axis in BufferAxis::ALL {
                let r = fixed_point(&toy(t, p), axis).unwrap();
                let canon = r.canonical_tensor();
                let pi = RenormResult::lift(&r.pi_projector);
                let lam = RenormResult::lift(&r.lambda_tilde);
                assert!(max_abs(&(canon.apply_identity_channel(&pi) - &pi)) < 1e-8);
                assert!(max_abs(&(canon.apply_dual_channel(&lam) - &lam)) < 1e-8);
                assert!(max_abs(&(&r.u_tilde * &r.u_tilde - &r.pi_projector)) < 1e-8);
                let j = r.tensor_m.junk_parts();
                let (pp, qq) = axis.partners();
                assert!(max_abs(&(&r.a_plus + &r.a_minus - &j[pp])) < 1e-10);
                assert!(max_abs(&(&r.a_plus - &r.a_minus - &j[qq])) < 1e-10);
            }
        }
    }

    #[test]
    fn finite_depth_approaches_fixed_point() {
        let f = toy(1.0, 0.3);
        let spec = junk_spectrum(f.junk(2), f.junk_symmetry(BufferAxis::Z).unwrap()).unwrap();
        let m = (20.0 * spec.zeta.finite().unwrap()).ceil() as i64;
        let r = buffer(&f, BufferAxis::Z, m).unwrap();
        let lim = fixed_point(&f, BufferAxis::Z).unwrap();
        let d = phase_aligned_distance(r.tensor_m.junk_parts(), lim.tensor_m.junk_parts());
        assert!(d < 1e-8, "distance {d} at m = {m}");
    }

    #[test]
    fn semigroup() {
        let f = toy(1.7, 0.9);
        let (m1, m2) = (3, 4);
        let r1 = buffer(&f, BufferAxis::Z, m1).unwrap();
        let r12 = buffer(&f, BufferAxis::Z, m1 + m2).unwrap();
        let (p, _) = linalg::normalized_power(f.junk(2), m2 as u64);
        let manual: Vec<CMat> = r1.tensor_m.junk_parts().iter().map(|x| &p * x * &p).collect();
        let rho = junk_channel_radius(&manual).unwrap();
        let manual: Vec<CMat> = manual.into_iter().map(|x| x / real(rho.sqrt())).collect();
        assert!(phase_aligned_distance(&manual, r12.tensor_m.junk_parts()) < 1e-10);
    }
}
