//! Theoretical error bounds: the `C_n` sequence, the two-sided bounds for
//! scaled Gauss–Hermite rules in one and several dimensions, bounds on the
//! n-th minimal error, and the constant-dependent bounds for optimal weights
//! on the nested sets `X_k`.
//!
//! The one-dimensional upper bound is reported in two forms. `upper_paper`
//! bounds the weighted l1 sum over the even basis coefficients by its first
//! term; `upper_corrected` uses the Cauchy–Schwarz value of that supremum,
//! which multiplies by `(1 - rho^2)^{-1/2}` with `rho = beta^2 / ell^2`.

use std::fmt;

use rug::Integer;

use crate::error::{Error, Result};
use crate::hpcore::{exact_factorial, HpReal, NumericContext};
use crate::point_sets::{BoundConstants, NBarRule};
use crate::rkhs::representer_norm;
use crate::scaled_rules::{beta, check_specs, KernelSpec, MeasureSpec};

fn quarter_root(x: HpReal) -> HpReal {
    x.sqrt().sqrt()
}

fn pow_u(x: &HpReal, n: usize, ctx: &NumericContext) -> HpReal {
    let mut out = ctx.one();
    let mut base = ctx.real(x);
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            out *= &base;
        }
        base.square_mut();
        e >>= 1;
    }
    out
}

fn positive(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter(format!("{what} must be at least 1")));
    }
    Ok(())
}

/// `C_n = 2^n n! / sqrt((2n)!) n^{-1/4} = 2^n / sqrt(binom(2n, n)) n^{-1/4}`.
pub fn c_n(n: usize, ctx: &NumericContext) -> Result<HpReal> {
    positive(n, "n")?;
    let binom = Integer::from(Integer::binomial_u(2 * n as u32, n as u32));
    let mut v = ctx.real(&binom).sqrt().recip();
    v <<= n as u32;
    Ok(v / quarter_root(ctx.real(n as u64)))
}

/// `alpha^2 / (alpha^2 + ell^2)` and `ell / sqrt(alpha^2 + ell^2)`.
fn ratios(alpha: &HpReal, ell: &HpReal, ctx: &NumericContext) -> (HpReal, HpReal) {
    let a2 = ctx.real(alpha.square_ref());
    let l2 = ctx.real(ell.square_ref());
    let s = ctx.real(&a2 + &l2);
    (a2 / &s, ctx.real(ell) / s.sqrt())
}

/// Which bound a [`BoundReport`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    ScaledGh1d,
    ScaledGhTensor,
    MinimalError1d,
    MinimalErrorTensor,
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSource::ScaledGh1d => "scaled-GH sandwich, d = 1",
            BoundSource::ScaledGhTensor => "scaled-GH tensor sandwich",
            BoundSource::MinimalError1d => "n-th minimal error, d = 1",
            BoundSource::MinimalErrorTensor => "N-th minimal error, tensor",
        })
    }
}

/// Lower and upper bounds at one index.
#[derive(Debug, Clone)]
pub struct BoundReport {
    /// `n`, or the multi-index `(n_1, ..., n_d)`.
    pub index: Vec<usize>,
    pub lower: HpReal,
    pub upper_paper: HpReal,
    pub upper_corrected: Option<HpReal>,
    pub constant_dependent: bool,
    pub source: BoundSource,
}

/// Upper factor `pi^{-1/4} (ell / sqrt(alpha^2 + ell^2)) (alpha^2 / (alpha^2 + ell^2))^n n^{-1/4}`.
fn gh_upper_1d(alpha: &HpReal, ell: &HpReal, n: usize, ctx: &NumericContext) -> HpReal {
    let (r, amp) = ratios(alpha, ell, ctx);
    quarter_root(ctx.pi()).recip() * amp * pow_u(&r, n, ctx) / quarter_root(ctx.real(n as u64))
}

/// `(1 - rho^2)^{-1/2}` with `rho = alpha^2 / (alpha^2 + ell^2) = beta^2 / ell^2`.
fn correction(alpha: &HpReal, ell: &HpReal, ctx: &NumericContext) -> HpReal {
    let (r, _) = ratios(alpha, ell, ctx);
    (ctx.one() - r.square()).sqrt().recip()
}

/// `C_n (alpha^2 / (2 (alpha^2 + ell^2)))^n n^{1/4}`, without the amplitude.
fn gh_lower_core(alpha: &HpReal, ell: &HpReal, n: usize, ctx: &NumericContext) -> Result<HpReal> {
    let (r, _) = ratios(alpha, ell, ctx);
    Ok(c_n(n, ctx)? * pow_u(&(r / 2u32), n, ctx) * quarter_root(ctx.real(n as u64)))
}

/// Two-sided bound on the worst-case error of the scaled Gauss–Hermite rule.
pub fn gh1d_bounds(alpha: &HpReal, ell: &HpReal, n: usize, ctx: &NumericContext) -> Result<BoundReport> {
    positive(n, "n")?;
    let (_, amp) = ratios(alpha, ell, ctx);
    let lower = amp * gh_lower_core(alpha, ell, n, ctx)?;
    let upper_paper = gh_upper_1d(alpha, ell, n, ctx);
    let upper_corrected = upper_paper.clone() * correction(alpha, ell, ctx);
    Ok(BoundReport {
        index: vec![n],
        lower,
        upper_paper,
        upper_corrected: Some(upper_corrected),
        constant_dependent: false,
        source: BoundSource::ScaledGh1d,
    })
}

/// Two-sided bound for the tensor product of scaled Gauss–Hermite rules.
pub fn gh_tensor_bounds(alpha: &MeasureSpec, ell: &KernelSpec, n: &[usize], ctx: &NumericContext) -> Result<BoundReport> {
    check_specs(alpha, ell, n.len())?;
    for &ni in n {
        positive(ni, "every n_i")?;
    }
    let (upper_paper, upper_corrected) = tensor_upper(alpha, ell, n, ctx);
    let mut amp = ctx.one();
    let mut min_core: Option<HpReal> = None;
    for ((a, l), &ni) in alpha.stddevs().iter().zip(ell.lengthscales()).zip(n) {
        amp *= ratios(a, l, ctx).1;
        let core = gh_lower_core(a, l, ni, ctx)?;
        min_core = Some(match min_core {
            Some(m) => m.min(&core),
            None => core,
        });
    }
    Ok(BoundReport {
        index: n.to_vec(),
        lower: amp * min_core.expect("d >= 1"),
        upper_paper,
        upper_corrected: Some(upper_corrected),
        constant_dependent: false,
        source: BoundSource::ScaledGhTensor,
    })
}

/// `hat C_i = (ell_i / sqrt(alpha_i^2 + ell_i^2)) prod_{j != i} ||I_j||`.
fn tensor_upper(alpha: &MeasureSpec, ell: &KernelSpec, n: &[usize], ctx: &NumericContext) -> (HpReal, HpReal) {
    let norms: Vec<HpReal> = alpha
        .stddevs()
        .iter()
        .zip(ell.lengthscales())
        .map(|(a, l)| representer_norm(a, l, ctx))
        .collect();
    let mut paper = ctx.zero();
    let mut corrected = ctx.zero();
    for (i, ((a, l), &ni)) in alpha.stddevs().iter().zip(ell.lengthscales()).zip(n).enumerate() {
        let mut term = gh_upper_1d(a, l, ni, ctx);
        for (j, nj) in norms.iter().enumerate() {
            if j != i {
                term *= nj;
            }
        }
        corrected += term.clone() * correction(a, l, ctx);
        paper += term;
    }
    (paper, corrected)
}

/// `omega_gamma = 2 gamma^2 / (1 + 2 gamma^2 + sqrt(1 + 4 gamma^2))`.
pub fn omega(gamma: &HpReal, ctx: &NumericContext) -> HpReal {
    let g2 = ctx.real(gamma.square_ref());
    let root = (g2.clone() * 4u32 + 1u32).sqrt();
    g2.clone() * 2u32 / (g2 * 2u32 + 1u32 + root)
}

/// `sqrt(2 (1 + 4 gamma^2)^{1/4} / ((1 + 2 gamma^2 + sqrt(1 + 4 gamma^2)) e))`.
fn kuo_prefactor(gamma: &HpReal, ctx: &NumericContext) -> HpReal {
    let g2 = ctx.real(gamma.square_ref());
    let s = g2.clone() * 4u32 + 1u32;
    let num = quarter_root(s.clone()) * 2u32;
    let den = (g2 * 2u32 + 1u32 + s.sqrt()) * ctx.e();
    (num / den).sqrt()
}

/// `bar C_n(gamma) = kuo_prefactor n! / (2n)! (e / (4n))^{-n}`.
pub fn c_bar(n: usize, gamma: &HpReal, ctx: &NumericContext) -> Result<HpReal> {
    positive(n, "n")?;
    let ratio = ctx.real(&exact_factorial(n as u32)) / ctx.real(&exact_factorial(2 * n as u32));
    let base = ctx.real(4 * n as u64) / ctx.e();
    Ok(kuo_prefactor(gamma, ctx) * ratio * pow_u(&base, n, ctx))
}

/// Lower bound on the n-th minimal error in the form
/// `kuo_prefactor omega^n n! / ((n + 1) (2n)!)`.
pub fn minimal_error_lower_direct(alpha: &HpReal, ell: &HpReal, n: usize, ctx: &NumericContext) -> Result<HpReal> {
    positive(n, "n")?;
    let gamma = ctx.real(alpha / ell);
    let ratio = ctx.real(&exact_factorial(n as u32)) / ctx.real(&exact_factorial(2 * n as u32));
    Ok(kuo_prefactor(&gamma, ctx) * pow_u(&omega(&gamma, ctx), n, ctx) * ratio / (n as u64 + 1))
}

fn minimal_lower_factor(alpha: &HpReal, ell: &HpReal, n: usize, ctx: &NumericContext) -> Result<HpReal> {
    let gamma = ctx.real(alpha / ell);
    let base = omega(&gamma, ctx) * ctx.e() / (4 * n as u64);
    Ok(c_bar(n, &gamma, ctx)? * pow_u(&base, n, ctx))
}

/// Bounds on the n-th minimal error over all n-point rules.
pub fn minimal_error_bounds_1d(alpha: &HpReal, ell: &HpReal, n: usize, ctx: &NumericContext) -> Result<BoundReport> {
    positive(n, "n")?;
    let lower = minimal_lower_factor(alpha, ell, n, ctx)? / (n as u64 + 1);
    let upper_paper = gh_upper_1d(alpha, ell, n, ctx);
    let upper_corrected = upper_paper.clone() * correction(alpha, ell, ctx);
    Ok(BoundReport {
        index: vec![n],
        lower,
        upper_paper,
        upper_corrected: Some(upper_corrected),
        constant_dependent: false,
        source: BoundSource::MinimalError1d,
    })
}

/// Bounds on the N-th minimal error with `N + 1 = prod_i (n_i + 1)`.
pub fn minimal_error_bounds_d(
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    n: &[usize],
    ctx: &NumericContext,
) -> Result<BoundReport> {
    check_specs(alpha, ell, n.len())?;
    let mut lower = ctx.one();
    let mut n_plus_one = Integer::from(1);
    for ((a, l), &ni) in alpha.stddevs().iter().zip(ell.lengthscales()).zip(n) {
        positive(ni, "every n_i")?;
        lower *= minimal_lower_factor(a, l, ni, ctx)?;
        n_plus_one *= ni as u64 + 1;
    }
    lower /= ctx.real(&n_plus_one);
    let (upper_paper, upper_corrected) = tensor_upper(alpha, ell, n, ctx);
    Ok(BoundReport {
        index: n.to_vec(),
        lower,
        upper_paper,
        upper_corrected: Some(upper_corrected),
        constant_dependent: false,
        source: BoundSource::MinimalErrorTensor,
    })
}

/// `N = prod_i (n_i + 1) - 1`, the point count a multi-index refers to.
pub fn minimal_error_point_count(n: &[usize]) -> Integer {
    n.iter().fold(Integer::from(1), |acc, &ni| acc * (ni as u64 + 1)) - 1u32
}

/// `C_n (beta / alpha) (beta^2 / (2 ell^2))^n n^{1/4}`, the exact error of
/// the n-point scaled rule on `phi_{2n}`.
pub fn basis_error_at_2n(alpha: &HpReal, ell: &HpReal, n: usize, ctx: &NumericContext) -> Result<HpReal> {
    let b = beta(alpha, ell, ctx);
    let rho = ctx.real(b.square_ref()) / ctx.real(ell.square_ref()) / 2u32;
    Ok(c_n(n, ctx)? * (b / alpha) * pow_u(&rho, n, ctx) * quarter_root(ctx.real(n as u64)))
}

/// `C_q^{-1} (beta / alpha) (beta^2 / ell^2)^q q^{-1/4}`, an upper bound on
/// the error on `phi_{2q}` for any number of nodes.
pub fn basis_error_envelope(alpha: &HpReal, ell: &HpReal, q: usize, ctx: &NumericContext) -> Result<HpReal> {
    let b = beta(alpha, ell, ctx);
    let rho = ctx.real(b.square_ref()) / ctx.real(ell.square_ref());
    Ok(c_n(q, ctx)?.recip() * (b / alpha) * pow_u(&rho, q, ctx) / quarter_root(ctx.real(q as u64)))
}

/// `C_{n_i} prod_j (beta_j / alpha_j) (beta_i^2 / (2 ell_i^2))^{n_i} n_i^{1/4}`,
/// the tensor rule's error on `phi_0 x .. x phi_{2 n_i} x .. x phi_0`.
pub fn tensor_basis_error(
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    n: &[usize],
    i: usize,
    ctx: &NumericContext,
) -> Result<HpReal> {
    check_specs(alpha, ell, n.len())?;
    if i >= n.len() {
        return Err(Error::InvalidParameter(format!("coordinate {i} out of range")));
    }
    let mut v = basis_error_at_2n(&alpha.stddevs()[i], &ell.lengthscales()[i], n[i], ctx)?;
    for (j, (a, l)) in alpha.stddevs().iter().zip(ell.lengthscales()).enumerate() {
        if j != i {
            v *= beta(a, l, ctx) / a;
        }
    }
    Ok(v)
}

/// The constant-dependent bound for optimal weights on `X_k`, with its parts.
#[derive(Debug, Clone)]
pub struct KqGenericBound {
    pub k: usize,
    pub g: usize,
    pub c1: HpReal,
    pub c2: HpReal,
    /// `exp(-g(k)^2 / (2 alpha^2))`.
    pub tail: HpReal,
    /// `C_1 sum_{m=k-g(k)+1}^{k} exp(-[(k - m)^2 / (2 alpha^2) + C_2 nbar_m log nbar_m])`.
    pub sum: HpReal,
    pub value: HpReal,
    pub constants: BoundConstants,
    pub constant_dependent: bool,
}

/// Bound for the optimal rule on `X_k` valid when `k >= c_qu / hbar0`.
pub fn kq_bound_generic(
    k: usize,
    alpha: &HpReal,
    constants: &BoundConstants,
    nbar: &NBarRule,
    ctx: &NumericContext,
) -> Result<KqGenericBound> {
    let threshold = ctx.real(&constants.c_qu) / &constants.hbar0;
    if ctx.real(k as u64) < threshold {
        return Err(Error::BelowValidityThreshold {
            k,
            threshold: crate::hpcore::format_real(&threshold, 10),
        });
    }
    let g_real = (ctx.real(k as u64 + 1) - &threshold).floor();
    let g = g_real.to_f64() as usize;
    let two_a2 = ctx.real(alpha.square_ref()) * 2u32;
    let c1 = ctx.real(2).sqrt() / ctx.pi().sqrt() / alpha;
    let c2 = ctx.real(&constants.big_c) / (ctx.real(&constants.c_qu) * 2u32);
    let tail = (-(ctx.real((g as u64) * (g as u64)) / &two_a2)).exp();
    let mut sum = ctx.zero();
    for m in (k + 1 - g)..=k {
        let nb = nbar.value(m)? as u64;
        let d = (k - m) as u64;
        let arg = ctx.real(d * d) / &two_a2 + ctx.real(&c2) * nb * ctx.real(nb).ln();
        sum += (-arg).exp();
    }
    let sum = sum * &c1;
    Ok(KqGenericBound {
        k,
        g,
        value: ctx.real(&tail + &sum),
        c1,
        c2,
        tail,
        sum,
        constants: constants.clone(),
        constant_dependent: true,
    })
}

/// `C exp(-sqrt(n_1) / (2 sqrt(2) alpha^2))` for the optimal rule on a grid
/// of `n = n_1^d` points, `n_1 = k (k + 1)`.
#[derive(Debug, Clone)]
pub struct KqBound {
    pub n: u64,
    pub n_per_dim: u64,
    pub k: u64,
    pub value: HpReal,
    pub constant_dependent: bool,
}

pub fn kq_bound(n: u64, alpha: &HpReal, big_c: &HpReal, dim: usize, ctx: &NumericContext) -> Result<KqBound> {
    let malformed = |reason: &str| Error::MalformedPointCount {
        n,
        dim,
        reason: reason.to_string(),
    };
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    if n < 2 {
        return Err(malformed("at least two points are needed"));
    }
    let root = Integer::from(n).root(dim as u32);
    if Integer::from(rug::ops::Pow::pow(&root, dim as u32)) != n {
        return Err(malformed("not a perfect d-th power"));
    }
    let n1 = root.to_u64().expect("fits");
    let k = Integer::from(4 * n1 + 1).sqrt().to_u64().expect("fits") / 2;
    if k == 0 || k * (k + 1) != n1 {
        return Err(malformed("per-dimension count is not of the form k(k+1)"));
    }
    let exponent = ctx.real(n1).sqrt() / (ctx.real(8).sqrt() * ctx.real(alpha.square_ref()));
    Ok(KqBound {
        n,
        n_per_dim: n1,
        k,
        value: ctx.real(big_c) * (-exponent).exp(),
        constant_dependent: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn ctx() -> NumericContext {
        NumericContext::new(60).unwrap()
    }

    fn close(x: &HpReal, v: f64, tol: f64) -> bool {
        (x.to_f64() - v).abs() <= tol
    }

    #[test]
    fn c_n_values() {
        let ctx = ctx();
        let c1 = c_n(1, &ctx).unwrap();
        assert!((c1.clone() - ctx.real(2).sqrt()).abs() < ctx.tolerance(55));
        let c2 = c_n(2, &ctx).unwrap();
        let expected = ctx.real(4) / ctx.real(6).sqrt() / quarter_root(ctx.real(2));
        assert!((c2.clone() - expected).abs() < ctx.tolerance(55));
        assert!(close(&c2, 1.373_178_096, 1e-9));
        // oracle: the factorial form
        for n in [3usize, 17, 60] {
            let direct = ctx.real(&exact_factorial(n as u32)) * ctx.real(2).pow(n as u32)
                / ctx.real(&exact_factorial(2 * n as u32)).sqrt()
                / quarter_root(ctx.real(n as u64));
            assert!((c_n(n, &ctx).unwrap() - direct).abs() < ctx.tolerance(55));
        }
        assert!(c_n(0, &ctx).is_err());
    }

    #[test]
    fn c_n_lemma_properties() {
        let ctx = ctx();
        let lo = quarter_root(ctx.pi());
        let hi = ctx.e() / quarter_root(ctx.pi() * 2u32);
        let mut prev = c_n(1, &ctx).unwrap();
        assert!(prev <= hi);
        for n in 2..=500 {
            let c = c_n(n, &ctx).unwrap();
            assert!(c < prev && c > lo);
            prev = c;
        }
        let far = c_n(10_000, &ctx).unwrap();
        assert!((far - lo).abs() < 1e-2);
    }

    #[test]
    fn gh1d_examples() {
        let ctx = ctx();
        let one = ctx.one();
        let r = gh1d_bounds(&one, &one, 1, &ctx).unwrap();
        assert!((r.lower.clone() - ctx.ratio(1, 4)).abs() < ctx.tolerance(55));
        assert!(close(&r.upper_paper, 0.265_57, 1e-5));
        assert!(close(r.upper_corrected.as_ref().unwrap(), 0.306_645_719, 1e-9));
        let r = gh1d_bounds(&one, &one, 2, &ctx).unwrap();
        assert!(close(&r.lower, 0.072_17, 1e-5));
        assert!(close(&r.upper_paper, 0.111_65, 1e-5));
        let tiny = gh1d_bounds(&ctx.tolerance(20), &one, 3, &ctx).unwrap();
        assert!(tiny.upper_paper < ctx.tolerance(100) && tiny.lower < tiny.upper_paper);
    }

    #[test]
    fn tensor_examples() {
        let ctx = ctx();
        let one = ctx.one();
        for (a, l, n) in [(1.0, 1.0, 3usize), (0.5, 2.0, 1), (2.0, 0.5, 7)] {
            let (a, l) = (ctx.real(a), ctx.real(l));
            let t = gh_tensor_bounds(
                &MeasureSpec::new(vec![a.clone()]).unwrap(),
                &KernelSpec::new(vec![l.clone()]).unwrap(),
                &[n],
                &ctx,
            )
            .unwrap();
            let s = gh1d_bounds(&a, &l, n, &ctx).unwrap();
            assert_eq!(t.lower, s.lower);
            assert_eq!(t.upper_paper, s.upper_paper);
        }
        let a = MeasureSpec::isotropic(one.clone(), 2).unwrap();
        let l = KernelSpec::isotropic(one, 2).unwrap();
        let t = gh_tensor_bounds(&a, &l, &[1, 1], &ctx).unwrap();
        assert!(close(&t.upper_paper, 0.403_57, 1e-5));
        assert!(close(&t.lower, 0.176_78, 1e-5));
        // isotropic corollary form
        let corollary_upper = quarter_root(ctx.pi()).recip() * 2u32 / ctx.real(2).sqrt() / quarter_root(ctx.real(3)) / 2u32;
        assert!((t.upper_paper.clone() - corollary_upper).abs() < ctx.tolerance(55));
    }

    #[test]
    fn minimal_error_examples() {
        let ctx = ctx();
        let one = ctx.one();
        let w = omega(&one, &ctx);
        let expected = ctx.real(2) / (ctx.real(5).sqrt() + 3u32);
        assert!((w.clone() - expected).abs() < ctx.tolerance(55));
        assert!(close(&w, 0.381_97, 1e-5));

        let limit = (quarter_root(ctx.real(5)) / ((ctx.real(5).sqrt() + 3u32) * ctx.e())).sqrt();
        let far = c_bar(20_000, &one, &ctx).unwrap();
        assert!((far.clone() - &limit).abs() < limit.clone() * 1e-4);
        let floor = (ctx.pi() * 2u32 * quarter_root(ctx.real(5)) / ((ctx.real(5).sqrt() + 3u32) * ctx.e().pow(3u32))).sqrt();
        for n in [1usize, 2, 5, 40] {
            assert!(c_bar(n, &one, &ctx).unwrap() >= floor);
        }

        for (a, l) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.5)] {
            let (a, l) = (ctx.real(a), ctx.real(l));
            for n in 1..=12 {
                let r = minimal_error_bounds_1d(&a, &l, n, &ctx).unwrap();
                let direct = minimal_error_lower_direct(&a, &l, n, &ctx).unwrap();
                assert!((r.lower.clone() - &direct).abs() < direct * ctx.tolerance(50));
                assert!(r.lower < r.upper_paper);
            }
        }

        let a = MeasureSpec::isotropic(one.clone(), 2).unwrap();
        let l = KernelSpec::isotropic(one.clone(), 2).unwrap();
        let r = minimal_error_bounds_d(&a, &l, &[1, 1], &ctx).unwrap();
        let c = c_bar(1, &one, &ctx).unwrap();
        let expected = c.square() * (w * ctx.e() / 4u32).square() / 4u32;
        assert!((r.lower - expected).abs() < ctx.tolerance(55));
        assert_eq!(minimal_error_point_count(&[1, 1]), 3);
        let single = minimal_error_bounds_d(
            &MeasureSpec::new(vec![ctx.real(2)]).unwrap(),
            &KernelSpec::new(vec![ctx.ratio(1, 2)]).unwrap(),
            &[4],
            &ctx,
        )
        .unwrap();
        let one_d = minimal_error_bounds_1d(&ctx.real(2), &ctx.ratio(1, 2), 4, &ctx).unwrap();
        assert!((single.lower - one_d.lower).abs() < ctx.tolerance(55));
    }

    #[test]
    fn kq_generic_parts() {
        let ctx = ctx();
        let one = ctx.one();
        let c1 = kq_bound_generic(5, &one, &BoundConstants::defaults(&ctx), &NBarRule::Identity, &ctx).unwrap();
        assert!(close(&c1.c1, 0.797_88, 1e-5));
        assert_eq!(c1.g, 2);
        assert!(c1.constant_dependent);
        assert!(matches!(
            kq_bound_generic(3, &one, &BoundConstants::defaults(&ctx), &NBarRule::Identity, &ctx),
            Err(Error::BelowValidityThreshold { k: 3, .. })
        ));

        let ideal = BoundConstants::new(one.clone(), one.clone(), one.clone()).unwrap();
        for k in 1..8 {
            let b = kq_bound_generic(k, &one, &ideal, &NBarRule::Identity, &ctx).unwrap();
            assert_eq!(b.g, k);
            let expected = (-(ctx.real((k * k) as u64)) / 2u32).exp();
            assert!((b.tail - expected).abs() < ctx.tolerance(55));
        }

        let mut prev: Option<HpReal> = None;
        for k in 5..=30 {
            let b = kq_bound_generic(k, &one, &BoundConstants::defaults(&ctx), &NBarRule::Identity, &ctx).unwrap();
            if let Some(p) = prev {
                assert!(b.value < p, "k = {k}");
            }
            prev = Some(b.value);
        }
    }

    #[test]
    fn kq_bound_values() {
        let ctx = ctx();
        let one = ctx.one();
        let b = kq_bound(42, &one, &one, 1, &ctx).unwrap();
        assert_eq!(b.k, 6);
        // oracle: exp(-sqrt(42) / (2 sqrt 2)) evaluated in f64
        let oracle = (-(42f64).sqrt() / (2.0 * 2f64.sqrt())).exp();
        assert!(close(&b.value, oracle, 1e-14));
        assert!(close(&b.value, 0.101_136_13, 1e-9));

        let grid = kq_bound(1764, &one, &one, 2, &ctx).unwrap();
        assert_eq!(grid.n_per_dim, 42);
        assert_eq!(grid.value, b.value);

        let two = kq_bound(42, &ctx.real(2), &one, 1, &ctx).unwrap();
        let ratio = two.value.ln() / b.value.ln();
        assert!((ratio - ctx.ratio(1, 4)).abs() < ctx.tolerance(50));

        assert!(matches!(kq_bound(41, &one, &one, 1, &ctx), Err(Error::MalformedPointCount { .. })));
        assert!(matches!(kq_bound(42, &one, &one, 2, &ctx), Err(Error::MalformedPointCount { .. })));
        assert!(kq_bound(1, &one, &one, 1, &ctx).is_err());
    }

    #[test]
    fn helper_identities() {
        let ctx = ctx();
        let (a, l) = (ctx.real(2), ctx.ratio(1, 2));
        let am = MeasureSpec::new(vec![a.clone(), ctx.one()]).unwrap();
        let lm = KernelSpec::new(vec![l.clone(), ctx.one()]).unwrap();
        let t = tensor_basis_error(&am, &lm, &[3, 2], 0, &ctx).unwrap();
        let one_d = basis_error_at_2n(&a, &l, 3, &ctx).unwrap();
        let factor = beta(&ctx.one(), &ctx.one(), &ctx);
        assert!((t - one_d * factor).abs() < ctx.tolerance(55));
        // at q = n the envelope dominates the exact error
        for n in 1..10 {
            assert!(basis_error_envelope(&a, &l, n, &ctx).unwrap() >= basis_error_at_2n(&a, &l, n, &ctx).unwrap());
        }
    }
}
