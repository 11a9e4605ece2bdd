//! Extended-precision refinement of transfer-channel spectral gaps.
//!
//! The buffered channel splits exactly into four Pauli sectors,
//! `E(σ_k ⊗ X) = σ_k ⊗ E_k(X)` with `E_k(X) = Σ_μ s_kμ ã_μ X ã_μ†`. Near
//! pathological points two sector-leading eigenvalues can agree to far more
//! than 16 digits while still being distinct, so their ratio is recomputed
//! here in block-floating-point complex arithmetic on big integers.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::linalg::{CMat, C64};

#[derive(Clone, Debug)]
struct Fx {
    re: BigInt,
    im: BigInt,
}

/// Fixed-point context: every value is an integer times `2^-bits`.
#[derive(Clone, Copy)]
struct Ctx {
    bits: usize,
}

fn f64_to_fixed(x: f64, bits: usize) -> BigInt {
    if x == 0.0 || !x.is_finite() {
        return BigInt::zero();
    }
    let raw = x.to_bits();
    let sign = if raw >> 63 == 1 { -1 } else { 1 };
    let exp = ((raw >> 52) & 0x7ff) as i64;
    let frac = raw & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
    let shift = e + bits as i64;
    let m = BigInt::from(mant) * sign;
    if shift >= 0 {
        m << shift as usize
    } else {
        m >> (-shift) as usize
    }
}

impl Ctx {
    fn fixed_c64(self, z: C64) -> Fx {
        Fx { re: f64_to_fixed(z.re, self.bits), im: f64_to_fixed(z.im, self.bits) }
    }

    fn mul(self, a: &Fx, b: &Fx) -> Fx {
        Fx {
            re: (&a.re * &b.re - &a.im * &b.im) >> self.bits,
            im: (&a.re * &b.im + &a.im * &b.re) >> self.bits,
        }
    }

    fn abs2(self, a: &Fx) -> BigInt {
        (&a.re * &a.re + &a.im * &a.im) >> self.bits
    }

    fn div(self, a: &Fx, b: &Fx) -> Fx {
        let den = &b.re * &b.re + &b.im * &b.im;
        let nre = &a.re * &b.re + &a.im * &b.im;
        let nim = &a.im * &b.re - &a.re * &b.im;
        Fx { re: (nre << self.bits) / &den, im: (nim << self.bits) / &den }
    }
}

fn add(a: &Fx, b: &Fx) -> Fx {
    Fx { re: &a.re + &b.re, im: &a.im + &b.im }
}

fn sub(a: &Fx, b: &Fx) -> Fx {
    Fx { re: &a.re - &b.re, im: &a.im - &b.im }
}

fn zero() -> Fx {
    Fx { re: BigInt::zero(), im: BigInt::zero() }
}

/// Square matrix, row-major.
#[derive(Clone)]
struct FxMat {
    n: usize,
    data: Vec<Fx>,
}

impl FxMat {
    fn from_cmat(ctx: Ctx, m: &CMat) -> FxMat {
        let n = m.nrows();
        FxMat { n, data: (0..n * n).map(|k| ctx.fixed_c64(m[(k / n, k % n)])).collect() }
    }

    fn at(&self, i: usize, j: usize) -> &Fx {
        &self.data[i * self.n + j]
    }

    fn mul(&self, ctx: Ctx, other: &FxMat) -> FxMat {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = zero();
                for k in 0..n {
                    acc = add(&acc, &ctx.mul(self.at(i, k), other.at(k, j)));
                }
                data.push(acc);
            }
        }
        FxMat { n, data }
    }

    fn adjoint(&self) -> FxMat {
        let n = self.n;
        let data = (0..n * n)
            .map(|k| {
                let z = self.at(k % n, k / n);
                Fx { re: z.re.clone(), im: -z.im.clone() }
            })
            .collect();
        FxMat { n, data }
    }

    fn max_bits(&self) -> u64 {
        self.data.iter().map(|z| z.re.bits().max(z.im.bits())).max().unwrap_or(0)
    }

    /// Exact rescale by a power of two so the largest entry has `bits` bits.
    fn renormalize(&mut self, ctx: Ctx) {
        let top = self.max_bits() as i64;
        if top == 0 {
            return;
        }
        let shift = ctx.bits as i64 - top;
        for z in &mut self.data {
            if shift >= 0 {
                z.re <<= shift as usize;
                z.im <<= shift as usize;
            } else {
                z.re >>= (-shift) as usize;
                z.im >>= (-shift) as usize;
            }
        }
    }
}

/// `a^m` up to a power-of-two factor.
fn scaled_power(ctx: Ctx, a: &FxMat, mut m: u64) -> FxMat {
    let n = a.n;
    let one = Fx { re: BigInt::from(1) << ctx.bits, im: BigInt::zero() };
    let mut result = FxMat { n, data: (0..n * n).map(|k| if k / n == k % n { one.clone() } else { zero() }).collect() };
    let mut base = a.clone();
    base.renormalize(ctx);
    while m > 0 {
        if m & 1 == 1 {
            result = result.mul(ctx, &base);
            result.renormalize(ctx);
        }
        m >>= 1;
        if m > 0 {
            base = base.mul(ctx, &base);
            base.renormalize(ctx);
        }
    }
    result
}

fn apply_sector(ctx: Ctx, parts: &[(FxMat, FxMat)], signs: &[i8; 3], x: &FxMat) -> FxMat {
    let n = x.n;
    let mut out = FxMat { n, data: vec![zero(); n * n] };
    for ((a, a_dag), &s) in parts.iter().zip(signs) {
        let term = a.mul(ctx, x).mul(ctx, a_dag);
        for (o, t) in out.data.iter_mut().zip(&term.data) {
            *o = if s > 0 { add(o, t) } else { sub(o, t) };
        }
    }
    out
}

/// Leading eigenvalue of one sector by power iteration from a double
/// precision starting vector. Values share one unknown power-of-two scale.
fn sector_top(ctx: Ctx, parts: &[(FxMat, FxMat)], signs: &[i8; 3], start: &CMat) -> Option<Fx> {
    let mut x = FxMat::from_cmat(ctx, start);
    x.renormalize(ctx);
    let mut previous: Option<Fx> = None;
    for _ in 0..20_000 {
        let y = apply_sector(ctx, parts, signs, &x);
        let (pivot, _) = x
            .data
            .iter()
            .enumerate()
            .max_by(|(_, p), (_, q)| ctx.abs2(p).cmp(&ctx.abs2(q)))?;
        if x.data[pivot].re.is_zero() && x.data[pivot].im.is_zero() {
            return None;
        }
        let mu = ctx.div(&y.data[pivot], &x.data[pivot]);
        if let Some(prev) = &previous {
            let change = ctx.abs2(&sub(&mu, prev));
            let size = ctx.abs2(&mu);
            if (change << (2 * (ctx.bits - 64))) <= size && !size.is_zero() {
                return Some(mu);
            }
        }
        previous = Some(mu);
        x = y;
        x.renormalize(ctx);
    }
    None
}

/// `1 - |μ_b|² / |μ_a|²` for the leading eigenvalues of two sectors, or
/// `None` when it cannot be resolved at the largest precision tried.
///
/// `signs_*` are the `s_kμ` of each sector and `start_*` double-precision
/// approximations of the leading eigenvectors (as junk-space operators).
pub(crate) fn sector_gap(
    junk: &[CMat],
    axis_index: usize,
    m: u64,
    signs_a: [i8; 3],
    start_a: &CMat,
    signs_b: [i8; 3],
    start_b: &CMat,
) -> Option<f64> {
    for bits in [192usize, 384, 768, 1536, 3072] {
        let ctx = Ctx { bits };
        let raw: Vec<FxMat> = junk.iter().map(|a| FxMat::from_cmat(ctx, a)).collect();
        let p = scaled_power(ctx, &raw[axis_index], m);
        let mut scaled: Vec<FxMat> = raw.iter().map(|a| p.mul(ctx, a).mul(ctx, &p)).collect();
        // one common power-of-two scale for all three parts
        let top = scaled.iter().map(FxMat::max_bits).max().unwrap_or(0) as i64;
        if top == 0 {
            return None;
        }
        let shift = ctx.bits as i64 - top;
        for t in &mut scaled {
            for z in &mut t.data {
                if shift >= 0 {
                    z.re <<= shift as usize;
                    z.im <<= shift as usize;
                } else {
                    z.re >>= (-shift) as usize;
                    z.im >>= (-shift) as usize;
                }
            }
        }
        let parts: Vec<(FxMat, FxMat)> = scaled.into_iter().map(|t| {
            let dag = t.adjoint();
            (t, dag)
        }).collect();
        let mu_a = sector_top(ctx, &parts, &signs_a, start_a)?;
        let mu_b = sector_top(ctx, &parts, &signs_b, start_b)?;
        let (na, nb) = (ctx.abs2(&mu_a), ctx.abs2(&mu_b));
        if na.is_zero() {
            return None;
        }
        let ratio = (nb << bits) / &na;
        let gap = (BigInt::from(1) << bits) - ratio;
        let resolved = gap.abs().bits() as i64 > 80;
        if resolved {
            let shift = gap.bits().saturating_sub(60) as i64;
            let mant = (&gap >> shift as usize).to_f64()?;
            return Some(mant * f64::exp2((shift - bits as i64) as f64));
        }
    }
    None
}
