//! Translation-invariant matrix product states.
//!
//! A tensor is a list of `d` square `D × D` matrices `A_i`, one per physical
//! basis vector. Two boundary conventions are used:
//!
//! * [`amplitude`] is the periodic-chain amplitude `tr(A_{i1} ⋯ A_{in})`;
//! * every infinite-chain expectation value contracts with the canonical
//!   fixed points instead: `Λ` on the left and the right fixed point (the
//!   identity in canonical gauge) on the right.

use crate::length::Length;
use crate::linalg::{self, CMat, C64};
use crate::{Error, Result};

/// Relative gap below which the two largest channel eigenvalues count as
/// degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Largest number of sites accepted by [`brute_force_string_expectation`].
pub const MAX_BRUTE_FORCE_SITES: usize = 10;

/// Largest number of sites for which the explicit sum over outcome strings
/// is evaluated.
pub const MAX_EXPLICIT_SUM_SITES: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct MPSTensor {
    matrices: Vec<CMat>,
    labels: Vec<String>,
}

impl MPSTensor {
    pub fn new(matrices: Vec<CMat>, labels: Vec<String>) -> Result<Self> {
        build_mps(matrices, labels)
    }

    /// Tensor over the spin-1 Pauli basis `(x, y, z)`.
    pub fn pauli_basis(matrices: Vec<CMat>) -> Result<Self> {
        build_mps(matrices, ["x", "y", "z"].iter().map(|s| s.to_string()).collect())
    }

    pub fn matrices(&self) -> &[CMat] {
        &self.matrices
    }

    pub fn matrix(&self, i: usize) -> &CMat {
        &self.matrices[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn physical_dim(&self) -> usize {
        self.matrices.len()
    }

    pub fn bond_dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Label(label.to_string()))
    }

    pub fn scaled(&self, factor: f64) -> MPSTensor {
        self.map(|m| m * linalg::real(factor))
    }

    /// Applies `f` to every component matrix, keeping the labels.
    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> MPSTensor {
        MPSTensor {
            matrices: self.matrices.iter().map(f).collect(),
            labels: self.labels.clone(),
        }
    }

    /// `X ↦ Σ_i A_i X A_i†`.
    pub fn apply_identity_channel(&self, x: &CMat) -> CMat {
        self.matrices.iter().map(|a| a * x * a.adjoint()).fold(CMat::zeros(x.nrows(), x.ncols()), |acc, m| acc + m)
    }

    /// `Y ↦ Σ_i A_i† Y A_i`.
    pub fn apply_dual_channel(&self, y: &CMat) -> CMat {
        self.matrices.iter().map(|a| a.adjoint() * y * a).fold(CMat::zeros(y.nrows(), y.ncols()), |acc, m| acc + m)
    }

    /// `Σ_j u_{ij} A_j` for every `i`: the tensor after the on-site operator
    /// `u` acts on the physical index.
    pub fn physically_transformed(&self, u: &CMat) -> Vec<CMat> {
        let d = self.physical_dim();
        let dim = self.bond_dim();
        (0..d)
            .map(|i| (0..d).fold(CMat::zeros(dim, dim), |acc, j| acc + &self.matrices[j] * u[(i, j)]))
            .collect()
    }
}

pub fn build_mps(matrices: Vec<CMat>, labels: Vec<String>) -> Result<MPSTensor> {
    let first = matrices.first().ok_or(Error::Empty("no component matrices"))?;
    let dim = first.nrows();
    if dim == 0 {
        return Err(Error::Shape("bond dimension must be at least 1".into()));
    }
    for (k, m) in matrices.iter().enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::Shape(format!(
                "matrix {k} is {}x{}, expected {dim}x{dim}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    if labels.len() != matrices.len() {
        return Err(Error::Shape(format!("{} labels for {} matrices", labels.len(), matrices.len())));
    }
    Ok(MPSTensor { matrices, labels })
}

/// Transfer channel `X ↦ Σ_{ν,η} u_{νη} A_η X A_ν†` in matrix form on
/// column-major vectorized operators.
#[derive(Debug, Clone)]
pub struct TransferChannel {
    pub source: MPSTensor,
    pub insert: Option<CMat>,
    pub matrix_form: CMat,
}

impl TransferChannel {
    pub fn apply(&self, x: &CMat) -> CMat {
        linalg::unvec(&(&self.matrix_form * linalg::vec(x)), x.nrows())
    }

    /// Hilbert–Schmidt adjoint of the channel.
    pub fn apply_adjoint(&self, y: &CMat) -> CMat {
        linalg::unvec(&(self.matrix_form.adjoint() * linalg::vec(y)), y.nrows())
    }

    pub fn spectrum(&self) -> Vec<C64> {
        linalg::eigenvalues(&self.matrix_form)
    }
}

pub fn transfer_channel(a: &MPSTensor, insert: Option<&CMat>) -> Result<TransferChannel> {
    let d = a.physical_dim();
    let dim = a.bond_dim();
    if let Some(u) = insert {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Shape(format!("insert is {}x{}, physical dimension is {d}", u.nrows(), u.ncols())));
        }
    }
    let mut matrix_form = CMat::zeros(dim * dim, dim * dim);
    match insert {
        None => {
            for m in a.matrices() {
                matrix_form += linalg::kron(&m.conjugate(), m);
            }
        }
        Some(u) => {
            for nu in 0..d {
                let bra = a.matrix(nu).conjugate();
                for eta in 0..d {
                    let w = u[(nu, eta)];
                    if w != linalg::ZERO {
                        matrix_form += linalg::kron(&bra, a.matrix(eta)) * w;
                    }
                }
            }
        }
    }
    Ok(TransferChannel { source: a.clone(), insert: insert.cloned(), matrix_form })
}

/// Spectral data of the identity transfer channel, normalized to unit
/// spectral radius.
#[derive(Debug, Clone)]
pub struct ChannelFixedPoints {
    /// Spectral radius of the unnormalized channel.
    pub spectral_radius: f64,
    /// Eigenvalues of the normalized channel, sorted.
    pub spectrum: Vec<C64>,
    /// Right fixed point, normalized so that `tr(left · right) = 1`.
    pub right: CMat,
    /// Left fixed point, trace one.
    pub left: CMat,
    /// Number of eigenvalues equal to one (within tolerance).
    pub top_multiplicity: usize,
    pub degenerate: bool,
    pub xi: Length,
}

/// Fixed points of the identity channel of `a` after rescaling to unit
/// spectral radius.
///
/// When the eigenvalue one is degenerate, the returned fixed points are the
/// images of the identity under the spectral projector onto that eigenspace
/// (the Cesàro limit of the channel powers), which is a deterministic choice
/// of positive fixed points.
pub fn fixed_points(a: &MPSTensor) -> Result<ChannelFixedPoints> {
    let channel = transfer_channel(a, None)?;
    let raw = channel.spectrum();
    let rho = raw.first().map_or(0.0, |z| z.norm());
    if rho <= 0.0 || !rho.is_finite() {
        return Err(Error::NumericalDegeneracy {
            message: "transfer channel is nilpotent".into(),
            spectrum: raw.iter().map(|z| z.norm()).collect(),
        });
    }
    let scale = linalg::real(1.0 / rho);
    let normalized = &channel.matrix_form * scale;
    let spectrum: Vec<C64> = raw.iter().map(|z| z * scale).collect();
    let top_multiplicity = spectrum.iter().filter(|z| (*z - linalg::ONE).norm() < DEGENERACY_TOL).count().max(1);
    let second = spectrum.get(1).map_or(0.0, |z| z.norm());
    let degenerate = second >= 1.0 - DEGENERACY_TOL;
    let xi = Length::from_ratio(second, DEGENERACY_TOL);

    let projector = linalg::spectral_projector(&normalized, linalg::ONE, top_multiplicity).ok_or_else(|| {
        Error::NumericalDegeneracy {
            message: "top eigenspace of the transfer channel is not diagonalizable".into(),
            spectrum: spectrum.iter().map(|z| z.norm()).collect(),
        }
    })?;
    let dim = a.bond_dim();
    let id = linalg::vec(&linalg::identity(dim));
    let mut right = linalg::hermitian_part(&linalg::unvec(&(&projector * &id), dim));
    let mut left = linalg::hermitian_part(&linalg::unvec(&(projector.adjoint() * &id), dim));
    let tl = linalg::trace(&left).re;
    if tl.abs() < 1e-300 {
        return Err(Error::NumericalDegeneracy {
            message: "left fixed point has vanishing trace".into(),
            spectrum: spectrum.iter().map(|z| z.norm()).collect(),
        });
    }
    left /= linalg::real(tl);
    let overlap = linalg::trace(&(&left * &right)).re;
    right /= linalg::real(overlap);
    Ok(ChannelFixedPoints { spectral_radius: rho, spectrum, right, left, top_multiplicity, degenerate, xi })
}

/// Tensor in canonical gauge: `Σ A_i A_i† = I` and `Σ A_i† Λ A_i = Λ`.
#[derive(Debug, Clone)]
pub struct CanonicalData {
    pub tensor: MPSTensor,
    pub right_fixed_point: CMat,
    pub left_fixed_point: CMat,
    /// Eigenvalues of the canonical channel, sorted.
    pub spectrum: Vec<C64>,
    pub xi: Length,
    pub degenerate: bool,
    /// Factor `1/√ρ` applied to the input matrices.
    pub normalization: f64,
    /// `G` with `A'_i = G⁺ A_i G / √ρ`; an isometry onto the support of the
    /// right fixed point when that is rank deficient.
    pub gauge: CMat,
}

/// Strict canonical form: fails when the largest channel eigenvalue is not
/// unique.
pub fn canonicalize(a: &MPSTensor) -> Result<CanonicalData> {
    canonicalize_with(a, false)
}

pub fn canonicalize_with(a: &MPSTensor, allow_degenerate: bool) -> Result<CanonicalData> {
    let fp = fixed_points(a)?;
    if fp.degenerate && !allow_degenerate {
        return Err(Error::NumericalDegeneracy {
            message: "largest transfer-channel eigenvalue is not unique".into(),
            spectrum: fp.spectrum.iter().map(|z| z.norm()).collect(),
        });
    }
    let normalization = 1.0 / fp.spectral_radius.sqrt();
    let scaled = a.scaled(normalization);
    let dim = a.bond_dim();
    let (vals, vecs) = linalg::hermitian_eigen(&fp.right);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let kept: Vec<usize> = (0..dim).filter(|&k| vals[k] > 1e-10 * top).collect();

    if kept.len() == dim {
        let root = linalg::hermitian_fn(&fp.right, |v| v.max(0.0).sqrt());
        let root_inv = linalg::hermitian_fn(&fp.right, |v| 1.0 / v.max(0.0).sqrt());
        let tensor = scaled.map(|m| &root_inv * m * &root);
        let mut left = &root * &fp.left * &root;
        left = linalg::hermitian_part(&left);
        let tr = linalg::trace(&left).re;
        left /= linalg::real(tr);
        return Ok(CanonicalData {
            tensor,
            right_fixed_point: linalg::identity(dim),
            left_fixed_point: left,
            spectrum: fp.spectrum,
            xi: fp.xi,
            degenerate: fp.degenerate,
            normalization,
            gauge: root,
        });
    }

    // Rank-deficient right fixed point: restrict to its support, which every
    // A_i leaves invariant, and canonicalize the reduced tensor.
    let iso = CMat::from_fn(dim, kept.len(), |i, j| vecs[(i, kept[j])]);
    let reduced = scaled.map(|m| iso.adjoint() * m * &iso);
    let inner = canonicalize_with(&reduced, allow_degenerate)?;
    let gauge = &iso * &inner.gauge;
    Ok(CanonicalData {
        normalization: normalization * inner.normalization,
        gauge,
        ..inner
    })
}

/// Periodic-chain amplitude `tr(A_{i1} ⋯ A_{in})`.
pub fn amplitude(a: &MPSTensor, outcome: &[&str]) -> Result<C64> {
    if outcome.is_empty() {
        return Err(Error::Empty("outcome string"));
    }
    let mut product = linalg::identity(a.bond_dim());
    for label in outcome {
        product *= a.matrix(a.index_of(label)?);
    }
    Ok(linalg::trace(&product))
}

/// `⟨ψ|u^{⊗n}|ψ⟩` on an `n`-site window of the infinite canonical chain.
///
/// Evaluated twice: by `n`-fold application of the mixed transfer channel
/// and, for `n ≤ 6`, by an explicit double sum over all `dⁿ` bra and ket
/// outcome strings. The two must agree within `1e-9`.
pub fn brute_force_string_expectation(a: &MPSTensor, u: &CMat, n: usize) -> Result<C64> {
    if n > MAX_BRUTE_FORCE_SITES {
        return Err(Error::Resource(format!("{n} sites exceeds the limit of {MAX_BRUTE_FORCE_SITES}")));
    }
    let d = a.physical_dim();
    if u.nrows() != d || u.ncols() != d {
        return Err(Error::Shape(format!("operator is {}x{}, physical dimension is {d}", u.nrows(), u.ncols())));
    }
    let canon = canonicalize_with(a, true)?;
    let t = &canon.tensor;
    let lambda = &canon.left_fixed_point;
    let dim = t.bond_dim();

    let mut x = canon.right_fixed_point.clone();
    for _ in 0..n {
        let mut next = CMat::zeros(dim, dim);
        for nu in 0..d {
            for eta in 0..d {
                let w = u[(nu, eta)];
                if w != linalg::ZERO {
                    next += t.matrix(eta) * &x * t.matrix(nu).adjoint() * w;
                }
            }
        }
        x = next;
    }
    let by_channel = linalg::trace(&(lambda * x));
    if n > MAX_EXPLICIT_SUM_SITES {
        return Ok(by_channel);
    }

    let strings = d.pow(n as u32);
    let digits = |mut s: usize| -> Vec<usize> {
        let mut out = vec![0; n];
        for k in (0..n).rev() {
            out[k] = s % d;
            s /= d;
        }
        out
    };
    let products: Vec<CMat> = (0..strings)
        .map(|s| digits(s).iter().fold(linalg::identity(dim), |acc, &i| acc * t.matrix(i)))
        .collect();
    let weighted: Vec<CMat> = products.iter().map(|m| lambda * m).collect();
    let all_digits: Vec<Vec<usize>> = (0..strings).map(digits).collect();
    let mut by_sum = linalg::ZERO;
    for (bra, bra_digits) in all_digits.iter().enumerate() {
        for (ket, ket_digits) in all_digits.iter().enumerate() {
            let mut coeff = linalg::ONE;
            for k in 0..n {
                coeff *= u[(bra_digits[k], ket_digits[k])];
                if coeff == linalg::ZERO {
                    break;
                }
            }
            if coeff == linalg::ZERO {
                continue;
            }
            // tr(Λ M_ket M_bra†) as a Frobenius inner product
            let overlap: C64 =
                weighted[ket].iter().zip(products[bra].iter()).map(|(p, q)| p * q.conj()).sum();
            by_sum += coeff * overlap;
        }
    }
    if (by_sum - by_channel).norm() > 1e-9 {
        return Err(Error::OracleMismatch(format!(
            "channel contraction {by_channel} vs explicit sum {by_sum} at n = {n}"
        )));
    }
    Ok(by_sum)
}
