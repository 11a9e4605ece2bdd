//! Spin-1 octahedral generators, virtual symmetry extraction, D2 phase
//! classification and the protected ⊗ junk factorization of the virtual
//! space.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat, C64};
use crate::mps::{self, MPSTensor};
use crate::{Error, Result};

/// Tolerance on `| |λ| - 1 |` for the mixed-channel eigenvalue that carries
/// a virtual symmetry.
pub const SYMMETRY_EIGEN_TOL: f64 = 1e-6;

/// Largest residual of the symmetry relation for an accepted action.
pub const ACCEPT_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn unit(self) -> [f64; 3] {
        match self {
            Axis::X => [1.0, 0.0, 0.0],
            Axis::Y => [0.0, 1.0, 0.0],
            Axis::Z => [0.0, 0.0, 1.0],
        }
    }
}

/// Axis along which buffer sites are postselected.
///
/// Each buffer axis comes with an ordered pair `(p, q)` of the other two
/// directions, taken cyclically: `z → (x, y)` and `x → (y, z)`. Rotations
/// about the axis are implemented on the computational site by outcomes in
/// the `p`–`q` plane, with `σ_p` as the byproduct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BufferAxis {
    X,
    Z,
}

impl BufferAxis {
    pub const ALL: [BufferAxis; 2] = [BufferAxis::Z, BufferAxis::X];

    pub fn axis(self) -> Axis {
        match self {
            BufferAxis::X => Axis::X,
            BufferAxis::Z => Axis::Z,
        }
    }

    /// Position of the axis in the `(x, y, z)` physical basis.
    pub fn index(self) -> usize {
        match self {
            BufferAxis::X => 0,
            BufferAxis::Z => 2,
        }
    }

    /// Physical indices of the cyclic partner pair `(p, q)`.
    pub fn partners(self) -> (usize, usize) {
        match self {
            BufferAxis::Z => (0, 1),
            BufferAxis::X => (1, 2),
        }
    }

    /// The π/2 rotation whose string order detects this axis.
    pub fn quarter_turn(self) -> CMat {
        spin1_rotation(self.axis(), FRAC_PI_2)
    }

    pub fn name(self) -> &'static str {
        match self {
            BufferAxis::X => "x",
            BufferAxis::Z => "z",
        }
    }
}

impl std::str::FromStr for BufferAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(BufferAxis::X),
            "z" | "Z" => Ok(BufferAxis::Z),
            other => Err(Error::Config(format!("unknown buffer axis `{other}` (expected x or z)"))),
        }
    }
}

/// Rotation of the spin-1 Cartesian basis `(|x⟩, |y⟩, |z⟩)`.
///
/// This is the ordinary SO(3) matrix (Rodrigues form), so `(z, π/2)` sends
/// `|x⟩ ↦ |y⟩` and `|y⟩ ↦ -|x⟩`.
pub fn spin1_rotation(axis: Axis, angle: f64) -> CMat {
    let n = axis.unit();
    let (s, c) = angle.sin_cos();
    let cross = [[0.0, -n[2], n[1]], [n[2], 0.0, -n[0]], [-n[1], n[0], 0.0]];
    CMat::from_fn(3, 3, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        linalg::real(c * id + (1.0 - c) * n[i] * n[j] + s * cross[i][j])
    })
}

/// A physical symmetry `u` together with the virtual operator `U`
/// satisfying `Σ_j u_ij A_j = χ U A_i U†`.
#[derive(Debug, Clone)]
pub struct SymmetryAction {
    pub physical: CMat,
    pub virtual_op: CMat,
    /// One-dimensional character `χ` picked up by the tensor.
    pub character: C64,
    pub residual: f64,
}

impl SymmetryAction {
    pub fn accepted(&self) -> bool {
        self.residual < ACCEPT_RESIDUAL
    }
}

/// Virtual operator of the physical symmetry `u`, read off from the
/// unit-modulus eigenvector of the mixed transfer channel.
///
/// The tensor is only rescaled to unit spectral radius, not regauged, so
/// the returned operator acts on the caller's virtual basis. A non-identity
/// right fixed point `R` is harmless: the eigenvector is then `U R` and the
/// polar factor recovers `U`.
pub fn extract_virtual_symmetry(a: &MPSTensor, u: &CMat) -> Result<SymmetryAction> {
    let rho = mps::transfer_channel(a, None)?.spectrum()[0].norm();
    if rho <= 0.0 {
        return Err(Error::NotASymmetry(0.0));
    }
    let t = a.scaled(1.0 / rho.sqrt());
    let mixed = mps::transfer_channel(&t, Some(u))?;
    let ev = mixed.spectrum();
    let unit: Vec<C64> = ev.iter().copied().filter(|z| (z.norm() - 1.0).abs() < SYMMETRY_EIGEN_TOL).collect();
    match unit.len() {
        0 => return Err(Error::NotASymmetry(ev.first().map_or(0.0, |z| z.norm()))),
        1 => {}
        k => return Err(Error::AmbiguousSymmetry(k)),
    }
    let chi = unit[0] / unit[0].norm();
    let dim = t.bond_dim();
    let shifted = &mixed.matrix_form - linalg::identity(dim * dim) * unit[0];
    let v = linalg::null_space(&shifted, 1);
    let raw = linalg::unvec(&v.column(0).into_owned(), dim);
    let virtual_op = linalg::fix_phase_first_entry(&linalg::polar_unitary(&raw), 1e-8);
    let transformed = t.physically_transformed(u);
    let residual = transformed
        .iter()
        .zip(t.matrices())
        .map(|(lhs, ai)| linalg::max_abs(&(lhs - &virtual_op * ai * virtual_op.adjoint() * chi)))
        .fold(0.0, f64::max);
    Ok(SymmetryAction { physical: u.clone(), virtual_op, character: chi, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Trivial,
    D2Spto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseLabel {
    pub value: Phase,
    /// `tr(U_x U_z U_x† U_z†) / D` for the two π rotations.
    pub commutator_sign: C64,
}

fn pi_rotation_ops(a: &MPSTensor) -> Result<(SymmetryAction, SymmetryAction)> {
    let ux = extract_virtual_symmetry(a, &spin1_rotation(Axis::X, PI))?;
    let uz = extract_virtual_symmetry(a, &spin1_rotation(Axis::Z, PI))?;
    Ok((ux, uz))
}

/// Projective class of the D2 representation on the virtual space.
pub fn classify_d2_phase(a: &MPSTensor) -> Result<PhaseLabel> {
    let (ux, uz) = pi_rotation_ops(a)?;
    let (x, z) = (&ux.virtual_op, &uz.virtual_op);
    let group_commutator = x * z * x.adjoint() * z.adjoint();
    let dim = a.bond_dim();
    let sign = linalg::trace(&group_commutator) / linalg::real(dim as f64);
    let spread = linalg::max_abs(&(&group_commutator - linalg::identity(dim) * sign));
    if spread > 1e-6 {
        return Err(Error::ReducibleVirtualSpace(spread));
    }
    let value = if (sign + linalg::ONE).norm() < 1e-6 {
        Phase::D2Spto
    } else if (sign - linalg::ONE).norm() < 1e-6 {
        Phase::Trivial
    } else {
        return Err(Error::ReducibleVirtualSpace((sign.norm() - 1.0).abs().max((sign.im).abs())));
    };
    Ok(PhaseLabel { value, commutator_sign: sign })
}

/// A tensor written as `A_μ = σ_μ ⊗ a_μ` in a fixed virtual basis.
#[derive(Debug, Clone)]
pub struct FactorizedTensor {
    protected_parts: Vec<CMat>,
    junk_parts: Vec<CMat>,
    parent: MPSTensor,
    /// Columns of the factorizing basis in the parent's virtual space.
    basis: CMat,
    protected_symmetries: BTreeMap<BufferAxis, CMat>,
    junk_symmetries: BTreeMap<BufferAxis, CMat>,
}

impl FactorizedTensor {
    /// Builds `σ_μ ⊗ a_μ` directly. `junk_symmetries` are the junk factors
    /// of the π/2 rotations; the protected factors are taken to be
    /// `e^{iπ/4 σ_axis}`, which is what the symmetry relation forces for
    /// Pauli protected parts.
    pub fn from_parts(junk_parts: Vec<CMat>, junk_symmetries: BTreeMap<BufferAxis, CMat>) -> Result<Self> {
        if junk_parts.len() != 3 {
            return Err(Error::Shape(format!("expected 3 junk parts, got {}", junk_parts.len())));
        }
        let q = junk_parts[0].nrows();
        if junk_parts.iter().any(|m| m.nrows() != q || m.ncols() != q) || q == 0 {
            return Err(Error::Shape("junk parts must share one square shape".into()));
        }
        let sigma = linalg::pauli().to_vec();
        let parent = MPSTensor::pauli_basis(sigma.iter().zip(&junk_parts).map(|(s, a)| linalg::kron(s, a)).collect())?;
        let protected_symmetries = BufferAxis::ALL.iter().map(|&b| (b, protected_quarter_turn(b))).collect();
        Ok(FactorizedTensor {
            protected_parts: sigma,
            junk_parts,
            basis: linalg::identity(2 * q),
            parent,
            protected_symmetries,
            junk_symmetries,
        })
    }

    pub fn protected_parts(&self) -> &[CMat] {
        &self.protected_parts
    }

    pub fn junk_parts(&self) -> &[CMat] {
        &self.junk_parts
    }

    pub fn junk(&self, i: usize) -> &CMat {
        &self.junk_parts[i]
    }

    pub fn junk_dim(&self) -> usize {
        self.junk_parts[0].nrows()
    }

    /// The tensor that was factorized, in its own virtual basis.
    pub fn parent(&self) -> &MPSTensor {
        &self.parent
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// `σ_μ ⊗ a_μ` in the factorizing basis.
    pub fn tensor(&self) -> MPSTensor {
        let mats = self.protected_parts.iter().zip(&self.junk_parts).map(|(s, a)| linalg::kron(s, a)).collect();
        MPSTensor::pauli_basis(mats).expect("factorized parts have consistent shapes")
    }

    /// Junk factor `U^(J)` of the π/2 rotation about `axis`, normalized to
    /// square to the identity.
    pub fn junk_symmetry(&self, axis: BufferAxis) -> Option<&CMat> {
        self.junk_symmetries.get(&axis)
    }

    pub fn protected_symmetry(&self, axis: BufferAxis) -> Option<&CMat> {
        self.protected_symmetries.get(&axis)
    }

    /// Largest deviation of `σ_μ ⊗ a_μ` from the parent matrices expressed
    /// in the factorizing basis.
    pub fn reconstruction_error(&self) -> f64 {
        self.parent
            .matrices()
            .iter()
            .zip(self.tensor().matrices())
            .map(|(p, k)| linalg::max_abs(&(self.basis.adjoint() * p * &self.basis - k)))
            .fold(0.0, f64::max)
    }

    /// Replaces the junk parts, keeping symmetries and protected parts.
    pub fn with_junk(&self, junk_parts: Vec<CMat>) -> Result<Self> {
        FactorizedTensor::from_parts(junk_parts, self.junk_symmetries.clone()).map(|mut f| {
            f.protected_symmetries = self.protected_symmetries.clone();
            f
        })
    }
}

fn protected_quarter_turn(axis: BufferAxis) -> CMat {
    let s = &linalg::pauli()[axis.index()];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    linalg::identity(2) * linalg::real(h) + s * linalg::c(0.0, h)
}

/// Makes `U² = +I` and the first significant entry real-positive (by real
/// part, since the remaining freedom is a sign).
fn involution_gauge(u: &CMat) -> Result<CMat> {
    let n = u.nrows();
    let sq = u * u;
    let s = linalg::trace(&sq) / linalg::real(n as f64);
    if linalg::max_abs(&(&sq - linalg::identity(n) * s)) > 1e-6 {
        return Err(Error::Factorization("π-rotation operator does not square to a scalar".into()));
    }
    let fixed = u / s.sqrt();
    Ok(positive_first_entry(&fixed))
}

fn positive_first_entry(u: &CMat) -> CMat {
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            let z = u[(i, j)];
            if z.norm() > 1e-8 {
                return if z.re < 0.0 || (z.re.abs() < 1e-12 && z.im < 0.0) { -u.clone() } else { u.clone() };
            }
        }
    }
    u.clone()
}

/// Orthonormal basis of the column space of a projector, by Gram–Schmidt
/// over its columns in order.
fn range_basis(p: &CMat) -> CMat {
    let mut cols: Vec<nalgebra::DVector<C64>> = Vec::new();
    for j in 0..p.ncols() {
        let mut v = p.column(j).into_owned();
        for e in &cols {
            let overlap = e.dotc(&v);
            v -= e * overlap;
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v / linalg::real(n));
        }
    }
    CMat::from_columns(&cols)
}

/// Finds the basis in which every `A_μ` is `σ_μ ⊗ a_μ`.
///
/// The π rotations about `x` and `z` are brought to `σ_x ⊗ I` and `σ_z ⊗ I`;
/// with Pauli-basis tensors this forces the Kronecker form. The junk factors
/// of the π/2 rotations are then read off by nearest-Kronecker
/// factorization.
pub fn factorize_protected_junk(a: &MPSTensor) -> Result<FactorizedTensor> {
    let dim = a.bond_dim();
    if a.physical_dim() != 3 {
        return Err(Error::Factorization(format!("physical dimension {} is not 3", a.physical_dim())));
    }
    if !dim.is_multiple_of(2) {
        return Err(Error::Factorization(format!("odd bond dimension {dim}")));
    }
    let label = classify_d2_phase(a)?;
    if label.value != Phase::D2Spto {
        return Err(Error::Factorization("state is in the trivial D2 phase".into()));
    }
    let (ux, uz) = pi_rotation_ops(a)?;
    for s in [&ux, &uz] {
        if (s.character - linalg::ONE).norm() > 1e-6 {
            return Err(Error::Factorization(format!("π rotation carries character {}", s.character)));
        }
    }
    let vx = involution_gauge(&ux.virtual_op)?;
    let vz = involution_gauge(&uz.virtual_op)?;
    let q = dim / 2;
    let plus = (linalg::identity(dim) + &vz) * linalg::real(0.5);
    let e = range_basis(&plus);
    if e.ncols() != q {
        return Err(Error::Factorization(format!("+1 eigenspace of U_z has dimension {}, expected {q}", e.ncols())));
    }
    let f = &vx * &e;
    let mut basis = CMat::zeros(dim, dim);
    basis.view_mut((0, 0), (dim, q)).copy_from(&e);
    basis.view_mut((0, q), (dim, q)).copy_from(&f);

    let rho = mps::transfer_channel(a, None)?.spectrum()[0].norm();
    let scale = linalg::real(1.0 / rho.sqrt());
    let local: Vec<CMat> = a.matrices().iter().map(|m| basis.adjoint() * m * &basis * scale).collect();
    let block01 = |m: &CMat| m.view((0, q), (q, q)).into_owned();
    let junk_parts = vec![
        block01(&local[0]),
        block01(&local[1]) * linalg::I,
        local[2].view((0, 0), (q, q)).into_owned(),
    ];

    let mut protected_symmetries = BTreeMap::new();
    let mut junk_symmetries = BTreeMap::new();
    for axis in BufferAxis::ALL {
        let action = extract_virtual_symmetry(a, &axis.quarter_turn())?;
        let local_u = basis.adjoint() * &action.virtual_op * &basis;
        let (p, j, residual) = linalg::kron_factor(&local_u, 2, q);
        if residual > 1e-8 {
            return Err(Error::Factorization(format!(
                "π/2 rotation about {} does not factorize (residual {residual:e})",
                axis.name()
            )));
        }
        let sq = &j * &j;
        let s = linalg::trace(&sq) / linalg::real(q as f64);
        let root = s.sqrt();
        let junk = positive_first_entry(&(&j / root));
        let sign = if (&junk - &j / root).norm() < 1e-9 { root } else { -root };
        junk_symmetries.insert(axis, junk);
        protected_symmetries.insert(axis, linalg::fix_phase_first_entry(&(p * sign), 1e-8));
    }

    let factorized = FactorizedTensor {
        protected_parts: linalg::pauli().to_vec(),
        junk_parts,
        parent: a.scaled(1.0 / rho.sqrt()),
        basis,
        protected_symmetries,
        junk_symmetries,
    };
    let err = factorized.reconstruction_error();
    if err > 1e-8 {
        return Err(Error::Factorization(format!("Kronecker reconstruction error {err:e}")));
    }
    Ok(factorized)
}

#[derive(Debug, Clone, Copy)]
pub struct S4Report {
    pub residual_x: f64,
    pub residual_z: f64,
    pub max_residual: f64,
    pub accepted: bool,
}

/// Checks both π/2 generators. A generator whose virtual operator cannot be
/// extracted counts as an infinite residual.
pub fn verify_s4_invariance(a: &MPSTensor) -> S4Report {
    let residual = |axis: BufferAxis| {
        extract_virtual_symmetry(a, &axis.quarter_turn()).map_or(f64::INFINITY, |s| s.residual)
    };
    let residual_x = residual(BufferAxis::X);
    let residual_z = residual(BufferAxis::Z);
    let max_residual = residual_x.max(residual_z);
    S4Report { residual_x, residual_z, max_residual, accepted: max_residual < ACCEPT_RESIDUAL }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, pauli, real};

    fn aklt() -> MPSTensor {
        MPSTensor::pauli_basis(pauli().to_vec()).unwrap()
    }

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        max_abs(&(a - b)) < tol
    }

    #[test]
    fn quarter_turn_matrix() {
        let r = spin1_rotation(Axis::Z, FRAC_PI_2);
        let expected = linalg::real_matrix(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(close(&r, &expected, 1e-15));
        assert!(close(&spin1_rotation(Axis::Z, 0.0), &linalg::identity(3), 1e-15));
        let r4 = &r * &r * &r * &r;
        assert!(close(&r4, &linalg::identity(3), 1e-15));
        let rx = spin1_rotation(Axis::X, FRAC_PI_2);
        // |y⟩ ↦ |z⟩
        assert!((rx[(2, 1)] - real(1.0)).norm() < 1e-15);
    }

    #[test]
    fn aklt_quarter_turn_virtual_operator() {
        let s = extract_virtual_symmetry(&aklt(), &spin1_rotation(Axis::Z, FRAC_PI_2)).unwrap();
        assert!(s.accepted());
        let [sx, sy, sz] = pauli();
        let u = &s.virtual_op;
        assert!(close(&(u * u.adjoint()), &linalg::identity(2), 1e-10));
        assert!(close(&(u * &sz * u.adjoint()), &sz, 1e-10));
        // the literal symmetry relation fixes the sign: U σ_x U† = -σ_y
        assert!(close(&(u * &sx * u.adjoint()), &(-sy), 1e-10));
        let trace = linalg::trace(u);
        assert!((trace.norm_sqr() - 2.0).abs() < 1e-10);
        let u4 = u * u * u * u;
        let ph = u4[(0, 0)];
        assert!(close(&u4, &(linalg::identity(2) * ph), 1e-8));
    }

    #[test]
    fn identity_symmetry() {
        let s = extract_virtual_symmetry(&aklt(), &linalg::identity(3)).unwrap();
        assert!(close(&s.virtual_op, &linalg::identity(2), 1e-10));
        assert!((s.character - linalg::ONE).norm() < 1e-12);
    }

    #[test]
    fn aklt_is_d2_spto() {
        let label = classify_d2_phase(&aklt()).unwrap();
        assert_eq!(label.value, Phase::D2Spto);
        assert!((label.commutator_sign + linalg::ONE).norm() < 1e-10);
    }

    #[test]
    fn product_state_is_trivial() {
        let z = MPSTensor::pauli_basis(vec![CMat::zeros(1, 1), CMat::zeros(1, 1), linalg::identity(1)]).unwrap();
        let label = classify_d2_phase(&z).unwrap();
        assert_eq!(label.value, Phase::Trivial);
        assert!((label.commutator_sign - linalg::ONE).norm() < 1e-12);
        assert!(matches!(factorize_protected_junk(&z), Err(Error::Factorization(_))));
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let mut mats = pauli().to_vec();
        mats[0] *= real(1.1);
        let report = verify_s4_invariance(&MPSTensor::pauli_basis(mats).unwrap());
        assert!(!report.accepted);
        assert!(verify_s4_invariance(&aklt()).accepted);
    }

    #[test]
    fn aklt_factorization_has_trivial_junk() {
        let f = factorize_protected_junk(&aklt()).unwrap();
        for a in f.junk_parts() {
            assert_eq!(a.nrows(), 1);
            assert!((a[(0, 0)] - real(1.0 / 3f64.sqrt())).norm() < 1e-12);
        }
        for axis in BufferAxis::ALL {
            let u = f.junk_symmetry(axis).unwrap();
            assert!((u[(0, 0)] - real(1.0)).norm() < 1e-10);
            let p = f.protected_symmetry(axis).unwrap();
            assert!(close(&(p * p.adjoint()), &linalg::identity(2), 1e-10));
        }
        assert!(f.reconstruction_error() < 1e-10);
    }

    #[test]
    fn buffer_axis_partners_are_cyclic() {
        assert_eq!(BufferAxis::Z.partners(), (0, 1));
        assert_eq!(BufferAxis::X.partners(), (1, 2));
        assert_eq!("x".parse::<BufferAxis>().unwrap(), BufferAxis::X);
        assert!("y".parse::<BufferAxis>().is_err());
    }
}
