//! Gates from measurements: rotation outcomes, gate fidelity of a buffered
//! computational site, postselection statistics and the repeat-until-success
//! protocol with byproduct bookkeeping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{self, CMat, C64};
use crate::mps::{self, MPSTensor};
use crate::renorm::{Depth, RenormResult};
use crate::symmetry::{BufferAxis, FactorizedTensor};
use crate::{Error, Result};

/// Below this Born weight an outcome is treated as impossible.
pub const NULL_OUTCOME_TOL: f64 = 1e-14;

/// Attempts after which [`simulate_protocol`] gives up.
pub const MAX_ATTEMPTS: u64 = 10_000_000;

/// A single-site measurement outcome `|ψ⟩ = Σ ψ_μ |μ⟩` and the virtual
/// operator `A[ψ] = Σ ψ*_μ A_μ` it induces.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub coefficients: Vec<C64>,
    pub operator: Option<CMat>,
}

impl MeasurementOutcome {
    pub fn new(coefficients: Vec<C64>) -> Result<Self> {
        let norm: f64 = coefficients.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Domain("measurement outcome has zero norm".into()));
        }
        let coefficients = coefficients.into_iter().map(|z| z / norm).collect();
        Ok(MeasurementOutcome { coefficients, operator: None })
    }

    /// Attaches `A[ψ]` for the given tensor.
    pub fn on(mut self, a: &MPSTensor) -> Result<Self> {
        self.operator = Some(self.operator_for(a)?);
        Ok(self)
    }

    pub fn operator_for(&self, a: &MPSTensor) -> Result<CMat> {
        if a.physical_dim() != self.coefficients.len() {
            return Err(Error::Shape(format!(
                "outcome has {} components, tensor has physical dimension {}",
                self.coefficients.len(),
                a.physical_dim()
            )));
        }
        let n = a.bond_dim();
        Ok(self.coefficients.iter().zip(a.matrices()).fold(CMat::zeros(n, n), |acc, (w, m)| acc + m * w.conj()))
    }
}

/// Outcome implementing a rotation by `theta` about `axis`:
/// `cos(Θ/2)|p⟩ - sin(Θ/2)|q⟩` for the partner pair `(p, q)`.
///
/// On `σ_μ` protected parts this gives `σ_p e^{-iΘσ_axis/2}`.
pub fn rotation_outcome(theta: f64, axis: BufferAxis) -> MeasurementOutcome {
    let (s, c) = (theta / 2.0).sin_cos();
    let (p, q) = axis.partners();
    let mut coefficients = vec![linalg::ZERO; 3];
    coefficients[p] = linalg::real(c);
    coefficients[q] = linalg::real(-s);
    MeasurementOutcome { coefficients, operator: None }
}

/// `σ_p e^{-iΘσ_axis/2}`: the intended rotation with its known byproduct.
pub fn target_operation(theta: f64, axis: BufferAxis) -> CMat {
    let sigma = linalg::pauli();
    let (p, _) = axis.partners();
    let (s, c) = (theta / 2.0).sin_cos();
    let rot = linalg::identity(2) * linalg::real(c) - &sigma[axis.index()] * linalg::c(0.0, s);
    &sigma[p] * rot
}

#[derive(Debug, Clone)]
pub struct FidelityReport {
    pub theta: f64,
    pub axis: BufferAxis,
    pub m: Depth,
    pub fidelity: f64,
    pub rho_protected: CMat,
    pub rho_junk: CMat,
    /// Nearest Kronecker factor of `A[ψ]` on the protected qubit, scaled to
    /// `tr(V†V) = 2`.
    pub effective_protected_op: CMat,
}

fn check_density(rho: &CMat, n: usize, name: &str) -> Result<()> {
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::Shape(format!("{name} must be {n}x{n}")));
    }
    if linalg::max_abs(&(rho - rho.adjoint())) > 1e-10 {
        return Err(Error::Domain(format!("{name} is not Hermitian")));
    }
    if (linalg::trace(rho) - linalg::ONE).norm() > 1e-10 {
        return Err(Error::Domain(format!("{name} does not have unit trace")));
    }
    let (vals, _) = linalg::hermitian_eigen(rho);
    if vals[0] < -1e-10 {
        return Err(Error::Domain(format!("{name} is not positive semidefinite")));
    }
    Ok(())
}

/// Default protected input: the `+1` eigenstate of `σ_p`.
pub fn default_rho_protected(axis: BufferAxis) -> CMat {
    let (p, _) = axis.partners();
    (linalg::identity(2) + &linalg::pauli()[p]) * linalg::real(0.5)
}

/// `F = tr_P{tr_J[𝒟(ρ)] V ρ_P V†}` with `𝒟(ρ) = AρA†/tr(AρA†)`, `A` the
/// buffered site's response to [`rotation_outcome`] and `V` the
/// [`target_operation`].
///
/// Defaults: `ρ_P = |+⟩⟨+|` of `σ_p`, `ρ_J = Π/tr Π`.
pub fn gate_fidelity(r: &RenormResult, theta: f64, rho_p: Option<&CMat>, rho_j: Option<&CMat>) -> Result<FidelityReport> {
    let q = r.junk_dim();
    let rho_protected = rho_p.cloned().unwrap_or_else(|| default_rho_protected(r.axis));
    let rho_junk = match rho_j {
        Some(x) => x.clone(),
        None => &r.pi_projector / linalg::trace(&r.pi_projector),
    };
    check_density(&rho_protected, 2, "protected input state")?;
    check_density(&rho_junk, q, "junk input state")?;

    let a = rotation_outcome(theta, r.axis).operator_for(&r.tensor_m.tensor())?;
    let rho = linalg::kron(&rho_protected, &rho_junk);
    let out = &a * rho * a.adjoint();
    let weight = linalg::trace(&out).re;
    if weight < NULL_OUTCOME_TOL {
        return Err(Error::NullOutcome(weight));
    }
    let reduced = linalg::trace_out_second(&(out / linalg::real(weight)), 2);
    let v = target_operation(theta, r.axis);
    let ideal = &v * &rho_protected * v.adjoint();
    let fidelity = linalg::trace(&(reduced * ideal)).re.clamp(0.0, 1.0);

    let (p, _, _) = linalg::kron_factor(&a, 2, q);
    let pn = (linalg::trace(&(p.adjoint() * &p)).re / 2.0).sqrt();
    let effective_protected_op = if pn > 0.0 { p / linalg::real(pn) } else { p };
    Ok(FidelityReport { theta, axis: r.axis, m: r.m, fidelity, rho_protected, rho_junk, effective_protected_op })
}

/// Canonical tensor, its left fixed point and `A_μ A_μ†`.
struct ChainModel {
    mats: Vec<CMat>,
    weights: Vec<CMat>,
    left: CMat,
}

impl ChainModel {
    fn new(f: &FactorizedTensor) -> Result<Self> {
        let canon = mps::canonicalize_with(&f.tensor(), true)?;
        let mats = canon.tensor.matrices().to_vec();
        let weights = mats.iter().map(|m| m * m.adjoint()).collect();
        Ok(ChainModel { mats, weights, left: canon.left_fixed_point })
    }

    /// `L ↦ A_μ† L A_μ`.
    fn step(&self, l: &CMat, mu: usize) -> CMat {
        self.mats[mu].adjoint() * l * &self.mats[mu]
    }

    /// `L ↦ Σ_μ A_μ† L A_μ`.
    fn trace_site(&self, l: &CMat) -> CMat {
        self.mats.iter().map(|a| a.adjoint() * l * a).fold(CMat::zeros(l.nrows(), l.ncols()), |acc, x| acc + x)
    }

    /// Born weight of outcome `μ` given the environment `L`.
    fn weight(&self, l: &CMat, mu: usize) -> f64 {
        frobenius(l, &self.weights[mu])
    }
}

/// `Re tr(x y)` for Hermitian `y`.
fn frobenius(x: &CMat, y: &CMat) -> f64 {
    x.iter().zip(y.transpose().iter()).map(|(a, b)| (a * b).re).sum()
}

fn normalize(mut l: CMat) -> CMat {
    let t = linalg::trace(&l).re;
    l /= linalg::real(t);
    l
}

/// Probability of `m` buffer outcomes along `axis` on each side of an
/// unmeasured computational site, on the infinite chain.
pub fn postselect_probability(f: &FactorizedTensor, axis: BufferAxis, m: u64) -> Result<f64> {
    Ok(postselect_log_probability(f, axis, m)?.exp())
}

/// Natural logarithm of [`postselect_probability`], computed with running
/// renormalization so that it stays finite for large `m`.
pub fn postselect_log_probability(f: &FactorizedTensor, axis: BufferAxis, m: u64) -> Result<f64> {
    let chain = ChainModel::new(f)?;
    let mut l = chain.left.clone();
    let mut log_p = 0.0;
    let mu = axis.index();
    for k in 0..2 * m {
        if k == m {
            l = chain.trace_site(&l);
        }
        l = chain.step(&l, mu);
        let t = linalg::trace(&l).re;
        if t <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        log_p += t.ln();
        l /= linalg::real(t);
    }
    Ok(log_p)
}

/// Expected number of measured sites per gate to reach error `epsilon`:
/// `ζ (1/ε)^{4ζ ln(1/|λ₁|)} ln(1/ε)`. An order-of-magnitude estimate with
/// unit constant.
pub fn overhead_estimate(zeta: f64, lambda1: C64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} is outside (0, 1)")));
    }
    if !zeta.is_finite() || zeta < 0.0 {
        return Err(Error::Domain(format!("zeta = {zeta} must be finite and non-negative")));
    }
    let modulus = lambda1.norm();
    if !(modulus > 0.0 && modulus <= 1.0) {
        return Err(Error::Domain(format!("|lambda1| = {modulus} is outside (0, 1]")));
    }
    let inv = 1.0 / epsilon;
    Ok(zeta * inv.powf(4.0 * zeta * (1.0 / modulus).ln()) * inv.ln())
}

/// One site of a protocol run, in chain order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Byproduct {
    /// Pauli-basis outcome; contributes `σ_μ` to the protected space.
    X,
    Y,
    Z,
    /// The computational site measured in the rotation basis.
    Rotation,
}

impl Byproduct {
    fn pauli(mu: usize) -> Byproduct {
        [Byproduct::X, Byproduct::Y, Byproduct::Z][mu]
    }

    pub fn index(self) -> Option<usize> {
        match self {
            Byproduct::X => Some(0),
            Byproduct::Y => Some(1),
            Byproduct::Z => Some(2),
            Byproduct::Rotation => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTrace {
    pub attempts: u64,
    /// Every measured site in chain order.
    pub byproducts: Vec<Byproduct>,
    pub sites_consumed: u64,
    pub succeeded: bool,
    pub rng_seed: u64,
    pub theta: f64,
    pub axis: BufferAxis,
}

impl ProtocolTrace {
    /// Product of the protected-space operators of all measured sites,
    /// with `σ_p e^{-iΘσ_axis/2}` at the computational site.
    pub fn net_protected_operator(&self) -> CMat {
        let sigma = linalg::pauli();
        let rot = target_operation(self.theta, self.axis);
        self.byproducts.iter().fold(linalg::identity(2), |acc, b| match b.index() {
            Some(mu) => acc * &sigma[mu],
            None => acc * &rot,
        })
    }
}

fn sample(rng: &mut ChaCha8Rng, weights: &[f64; 3]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random::<f64>() * total;
    for (k, w) in weights.iter().enumerate() {
        if x < *w {
            return k;
        }
        x -= w;
    }
    2
}

/// Runs the repeat-until-success protocol: `m` buffer sites, the
/// computational site, `m` buffer sites. If every buffer outcome equals
/// `axis` the computational site is measured in the rotation basis;
/// otherwise it is measured in the Pauli basis and the next `2m + 1` sites
/// are tried.
///
/// Outcomes are drawn by the Born rule on the infinite chain, so the
/// computational site's outcome is sampled after the right buffer with the
/// buffer's operator product carried along.
pub fn simulate_protocol(f: &FactorizedTensor, axis: BufferAxis, m: u64, theta: f64, seed: u64) -> Result<ProtocolTrace> {
    let chain = ChainModel::new(f)?;
    if chain.mats.len() != 3 {
        return Err(Error::Shape("protocol needs a three-outcome Pauli basis".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = axis.index();
    let mut env = chain.left.clone();
    let mut byproducts = Vec::new();
    let mut attempts = 0;
    let dim = env.nrows();
    loop {
        attempts += 1;
        let mut ok = true;
        for _ in 0..m {
            let w = [0, 1, 2].map(|k| chain.weight(&env, k));
            let mu = sample(&mut rng, &w);
            ok &= mu == target;
            byproducts.push(Byproduct::pauli(mu));
            env = normalize(chain.step(&env, mu));
        }
        let before_site = env.clone();
        let slot = byproducts.len();
        byproducts.push(Byproduct::Rotation);
        let mut right = normalize(chain.trace_site(&before_site));
        let mut product = linalg::identity(dim);
        for _ in 0..m {
            let w = [0, 1, 2].map(|k| chain.weight(&right, k));
            let mu = sample(&mut rng, &w);
            ok &= mu == target;
            byproducts.push(Byproduct::pauli(mu));
            right = normalize(chain.step(&right, mu));
            product *= &chain.mats[mu];
        }
        if ok {
            return Ok(ProtocolTrace { attempts, byproducts, sites_consumed: attempts * (2 * m + 1), succeeded: true, rng_seed: seed, theta, axis });
        }
        let outcomes = [0, 1, 2].map(|k| product.adjoint() * chain.step(&before_site, k) * &product);
        let w = outcomes.clone().map(|x| linalg::trace(&x).re.max(0.0));
        let c = sample(&mut rng, &w);
        byproducts[slot] = Byproduct::pauli(c);
        env = normalize(outcomes[c].clone());
        if attempts >= MAX_ATTEMPTS {
            return Ok(ProtocolTrace { attempts, byproducts, sites_consumed: attempts * (2 * m + 1), succeeded: false, rng_seed: seed, theta, axis });
        }
    }
}

/// Aggregate of many independent protocol runs.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolStats {
    pub runs: u64,
    pub successes: u64,
    pub total_attempts: u64,
    pub mean_attempts: f64,
    /// Successes per attempt. Attempts after a failure start from a
    /// conditioned environment, so this differs from `predicted_success`
    /// whenever the junk space carries correlations.
    pub success_rate: f64,
    /// Binomial standard error of `success_rate`.
    pub success_rate_sigma: f64,
    /// Fraction of runs that succeed on the first attempt; estimates
    /// `predicted_success` without bias.
    pub first_attempt_rate: f64,
    pub first_attempt_sigma: f64,
    pub mean_sites: f64,
    pub predicted_success: f64,
    pub seed: u64,
}

/// SplitMix64 step, used to derive independent per-run seeds.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `runs` protocols in parallel with seeds derived from `seed`.
/// Results do not depend on the number of threads.
pub fn simulate_many(f: &FactorizedTensor, axis: BufferAxis, m: u64, theta: f64, runs: u64, seed: u64) -> Result<ProtocolStats> {
    let traces: Vec<(u64, u64, bool)> = (0..runs)
        .into_par_iter()
        .map(|k| simulate_protocol(f, axis, m, theta, splitmix64(seed ^ splitmix64(k))).map(|t| (t.attempts, t.sites_consumed, t.succeeded)))
        .collect::<Result<_>>()?;
    let total_attempts: u64 = traces.iter().map(|t| t.0).sum();
    let sites: u64 = traces.iter().map(|t| t.1).sum();
    let successes = traces.iter().filter(|t| t.2).count() as u64;
    let rate = successes as f64 / total_attempts.max(1) as f64;
    let first = traces.iter().filter(|t| t.0 == 1 && t.2).count() as f64 / runs.max(1) as f64;
    Ok(ProtocolStats {
        runs,
        successes,
        total_attempts,
        mean_attempts: total_attempts as f64 / runs.max(1) as f64,
        success_rate: rate,
        success_rate_sigma: (rate * (1.0 - rate) / total_attempts.max(1) as f64).sqrt(),
        first_attempt_rate: first,
        first_attempt_sigma: (first * (1.0 - first) / runs.max(1) as f64).sqrt(),
        mean_sites: sites as f64 / runs.max(1) as f64,
        predicted_success: postselect_probability(f, axis, m)?,
        seed,
    })
}
