//! Small dense complex linear algebra helpers on top of `nalgebra`.
//!
//! Operators are vectorized column-major, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use std::cmp::Ordering;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_rows(rows: &[&[C64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn real_matrix(n: usize, m: usize, data: &[f64]) -> CMat {
    CMat::from_fn(n, m, |i, j| real(data[i * m + j]))
}

/// Pauli matrices σ_x, σ_y, σ_z.
pub fn pauli() -> [CMat; 3] {
    [
        from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]),
        from_rows(&[&[ZERO, -I], &[I, ZERO]]),
        from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]]),
    ]
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn vec(m: &CMat) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &DVector<C64>, n: usize) -> CMat {
    CMat::from_column_slice(n, n, v.as_slice())
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub(crate) fn cmp_eigen(a: &C64, b: &C64) -> Ordering {
    const TIE: f64 = 1e-12;
    let (ma, mb) = (a.norm(), b.norm());
    if (ma - mb).abs() > TIE {
        return mb.partial_cmp(&ma).unwrap_or(Ordering::Equal);
    }
    if (a.re - b.re).abs() > TIE {
        return b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal);
    }
    b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal)
}

/// Eigenvalues sorted by modulus (descending), then real part, then
/// imaginary part.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let dense = faer::Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    let mut ev = dense.eigenvalues().expect("eigenvalue iteration did not converge");
    ev.sort_by(cmp_eigen);
    ev
}

pub fn sort_eigenvalues(ev: &mut [C64]) {
    ev.sort_by(cmp_eigen);
}

/// Singular value decomposition with singular values sorted descending.
/// Returns `(u, s, v)` with `m = u diag(s) v†`.
pub fn svd_sorted(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    let s = svd.singular_values;
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(Ordering::Equal));
    let u_sorted = CMat::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v_sorted = CMat::from_fn(vt.ncols(), order.len(), |i, j| vt[(order[j], i)].conj());
    let s_sorted = order.iter().map(|&k| s[k]).collect();
    (u_sorted, s_sorted, v_sorted)
}

/// Orthonormal basis (as columns) of the `k`-dimensional approximate null
/// space of a square matrix: the right singular vectors belonging to the `k`
/// smallest singular values.
pub fn null_space(m: &CMat, k: usize) -> CMat {
    let n = m.ncols();
    let (_, _, v) = svd_sorted(m);
    CMat::from_fn(n, k, |i, j| v[(i, n - k + j)])
}

/// Spectral projector onto the generalized eigenspace of `m` at eigenvalue
/// `lambda` with algebraic multiplicity `k`, along the complementary
/// invariant subspace.
///
/// Uses `ker (m - λ)^k` for the range and `ker (m† - λ̄)^k` for the
/// annihilator, so it works for non-normal `m` as long as `λ` is isolated.
pub fn spectral_projector(m: &CMat, lambda: C64, k: usize) -> Option<CMat> {
    let n = m.nrows();
    let shifted = m - identity(n) * lambda;
    let mut power = identity(n);
    for _ in 0..k {
        power = &power * &shifted;
    }
    let right = null_space(&power, k);
    let left = null_space(&power.adjoint(), k);
    let overlap = left.adjoint() * &right;
    let inv = overlap.try_inverse()?;
    let p = &right * inv * left.adjoint();
    if p.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(p)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let vals = eig.eigenvalues;
    let vecs = eig.eigenvectors;
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[a].partial_cmp(&vals[b]).unwrap_or(Ordering::Equal));
    let sorted_vecs = CMat::from_fn(vecs.nrows(), order.len(), |i, j| vecs[(i, order[j])]);
    (order.iter().map(|&k| vals[k]).collect(), sorted_vecs)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let diag = CMat::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&v| real(f(v)))));
    &vecs * diag * vecs.adjoint()
}

/// Orthogonal projector onto the eigenvectors of a positive semidefinite
/// matrix whose eigenvalues exceed `rel_tol` times the largest.
pub fn support_projector(m: &CMat, rel_tol: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let n = m.nrows();
    let mut p = CMat::zeros(n, n);
    for (k, &v) in vals.iter().enumerate() {
        if v > rel_tol * top {
            let col = vecs.column(k);
            p += col * col.adjoint();
        }
    }
    p
}

/// Unitary factor of the polar decomposition.
pub fn polar_unitary(m: &CMat) -> CMat {
    let (u, _, v) = svd_sorted(m);
    u * v.adjoint()
}

/// Multiplies by a phase so that the first entry (row-major) with modulus
/// above `tol` is real and positive.
pub fn fix_phase_first_entry(m: &CMat, tol: f64) -> CMat {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.norm() > tol {
                return m * (z.conj() / z.norm());
            }
        }
    }
    m.clone()
}

/// `a^m` rescaled to unit Frobenius norm, together with `ln ‖a^m‖`.
///
/// Uses repeated squaring with renormalization so large powers neither
/// overflow nor underflow. A nilpotent power returns the zero matrix and
/// `-inf`.
pub fn normalized_power(a: &CMat, m: u64) -> (CMat, f64) {
    let n = a.nrows();
    let mut result = identity(n);
    let mut log_scale = 0.0;
    let norm = result.norm();
    result /= real(norm);
    log_scale += norm.ln();
    let mut base = a.clone();
    let mut base_log = 0.0;
    let mut e = m;
    while e > 0 {
        let bn = base.norm();
        if bn == 0.0 {
            return (CMat::zeros(n, n), f64::NEG_INFINITY);
        }
        base /= real(bn);
        base_log += bn.ln();
        if e & 1 == 1 {
            result = &result * &base;
            log_scale += base_log;
            let rn = result.norm();
            if rn == 0.0 {
                return (CMat::zeros(n, n), f64::NEG_INFINITY);
            }
            result /= real(rn);
            log_scale += rn.ln();
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
            base_log *= 2.0;
        }
    }
    (result, log_scale)
}

/// Nearest Kronecker product `a ⊗ b` (Van Loan–Pitsianis rank-one
/// rearrangement) for `m` of size `(p q) × (p q)` with `a` of size `p × p`.
/// Returns `(a, b, residual)` where residual is the max-norm of
/// `m - a ⊗ b`.
pub fn kron_factor(m: &CMat, p: usize, q: usize) -> (CMat, CMat, f64) {
    assert_eq!(m.nrows(), p * q);
    // Row (i, j) of the rearrangement holds vec of block (i, j).
    let r = CMat::from_fn(p * p, q * q, |row, col| {
        let (bi, bj) = (row % p, row / p);
        let (ki, kj) = (col % q, col / q);
        m[(bi * q + ki, bj * q + kj)]
    });
    let (u, s, v) = svd_sorted(&r);
    let sigma = s.first().copied().unwrap_or(0.0);
    let a = CMat::from_fn(p, p, |i, j| u[(i + j * p, 0)] * sigma);
    let b = CMat::from_fn(q, q, |i, j| v[(i + j * q, 0)].conj());
    let residual = max_abs(&(m - kron(&a, &b)));
    (a, b, residual)
}

/// Partial trace over the first (outer) tensor factor of dimension `p`.
pub fn trace_out_first(m: &CMat, p: usize) -> CMat {
    let q = m.nrows() / p;
    CMat::from_fn(q, q, |i, j| (0..p).map(|k| m[(k * q + i, k * q + j)]).sum())
}

/// Partial trace over the second (inner) tensor factor, leaving the outer
/// factor of dimension `p`.
pub fn trace_out_second(m: &CMat, p: usize) -> CMat {
    let q = m.nrows() / p;
    CMat::from_fn(p, p, |a, b| (0..q).map(|k| m[(a * q + k, b * q + k)]).sum())
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
