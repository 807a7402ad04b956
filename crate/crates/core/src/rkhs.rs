//! The Gaussian kernel, its RKHS orthonormal basis, integral representers,
//! and the worst-case error of a quadrature rule.
//!
//! The worst-case error is computed by two independent routes:
//!
//! * [`wce_closed_form`] expands the squared RKHS distance between the
//!   integral and rule representers into kernel integrals,
//!   `||I||^2 - 2 sum_i w_i I(x_i) + sum_ij w_i w_j K(x_i, x_j)`;
//! * [`wce_basis_oracle`] sums `(I(phi_m) - Q(phi_m))^2` over the orthonormal
//!   basis `phi_m(x) = x^m exp(-x^2 / (2 ell^2)) / (ell^m sqrt(m!))` up to a
//!   truncation order and bounds the discarded tail analytically.

use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::hpcore::{exact_factorial, format_real, HpReal, NumericContext};
use crate::scaled_rules::{beta, check_specs, KernelSpec, MeasureSpec, QuadratureRule};

/// `exp(-(x - y)^2 / (2 ell^2))`.
pub fn kernel_eval_1d(ell: &HpReal, x: &HpReal, y: &HpReal, ctx: &NumericContext) -> HpReal {
    let d = ctx.real(x - y);
    let arg = ctx.real(d.square_ref()) / ctx.real(ell.square_ref()) / 2u32;
    (-arg).exp()
}

pub(crate) fn kernel_unchecked(inv_two_ell_sq: &[HpReal], x: &[HpReal], y: &[HpReal], prec: u32) -> HpReal {
    let mut arg = Float::new(prec);
    for ((a, b), s) in x.iter().zip(y).zip(inv_two_ell_sq) {
        let d = Float::with_val(prec, a - b);
        arg += Float::with_val(prec, d.square_ref()) * s;
    }
    (-arg).exp()
}

/// `1 / (2 ell_i^2)` per dimension.
pub(crate) fn inv_two_ell_sq(ell: &KernelSpec, ctx: &NumericContext) -> Vec<HpReal> {
    ell.lengthscales()
        .iter()
        .map(|l| (ctx.real(l.square_ref()) * 2u32).recip())
        .collect()
}

/// Product Gaussian kernel `prod_i exp(-(x_i - y_i)^2 / (2 ell_i^2))`.
pub fn kernel_eval(ell: &KernelSpec, x: &[HpReal], y: &[HpReal], ctx: &NumericContext) -> Result<HpReal> {
    for v in [x, y] {
        if v.len() != ell.dim() {
            return Err(Error::DimensionMismatch {
                expected: ell.dim(),
                found: v.len(),
            });
        }
    }
    Ok(kernel_unchecked(&inv_two_ell_sq(ell, ctx), x, y, ctx.prec()))
}

/// Unnormalised basis function `psi_m(x) = x^m exp(-x^2 / (2 ell^2))`.
pub fn psi_eval_1d(ell: &HpReal, m: u32, x: &HpReal, ctx: &NumericContext) -> HpReal {
    let envelope = (-(ctx.real(x.square_ref()) / ctx.real(ell.square_ref()) / 2u32)).exp();
    let mut xm = ctx.one();
    for _ in 0..m {
        xm *= x;
    }
    xm * envelope
}

/// Orthonormal basis function `phi_m = psi_m / (ell^m sqrt(m!))`.
pub fn basis_eval_1d(ell: &HpReal, m: u32, x: &HpReal, ctx: &NumericContext) -> HpReal {
    let mut norm = ctx.real(&exact_factorial(m)).sqrt();
    for _ in 0..m {
        norm *= ell;
    }
    psi_eval_1d(ell, m, x, ctx) / norm
}

/// Multivariate basis function `phi_m(x) = prod_i phi_{m_i}(x_i)`.
pub fn basis_eval(ell: &KernelSpec, m: &[u32], x: &[HpReal], ctx: &NumericContext) -> Result<HpReal> {
    if m.len() != ell.dim() || x.len() != ell.dim() {
        return Err(Error::DimensionMismatch {
            expected: ell.dim(),
            found: if m.len() != ell.dim() { m.len() } else { x.len() },
        });
    }
    Ok(ell
        .lengthscales()
        .iter()
        .zip(m)
        .zip(x)
        .fold(ctx.one(), |acc, ((l, &mi), xi)| acc * basis_eval_1d(l, mi, xi, ctx)))
}

/// `I_alpha(phi_m)`: zero for odd `m`, and for `m = 2q`
/// `(beta / alpha) (beta^2 / ell^2)^q sqrt((2q)!) / (2^q q!)`.
pub fn basis_integral(alpha: &HpReal, ell: &HpReal, m: u32, ctx: &NumericContext) -> HpReal {
    if m % 2 == 1 {
        return ctx.zero();
    }
    let q = m / 2;
    let b = beta(alpha, ell, ctx);
    let rho = ctx.real(b.square_ref()) / ctx.real(ell.square_ref());
    let mut value = ctx.real(&b / alpha);
    for _ in 0..q {
        value *= &rho;
    }
    let mut denom = ctx.real(&exact_factorial(q));
    denom <<= q;
    value * ctx.real(&exact_factorial(m)).sqrt() / denom
}

/// Product of one-dimensional [`basis_integral`]s.
pub fn basis_integral_d(alpha: &MeasureSpec, ell: &KernelSpec, m: &[u32], ctx: &NumericContext) -> Result<HpReal> {
    check_specs(alpha, ell, m.len())?;
    Ok(alpha
        .stddevs()
        .iter()
        .zip(ell.lengthscales())
        .zip(m)
        .fold(ctx.one(), |acc, ((a, l), &mi)| acc * basis_integral(a, l, mi, ctx)))
}

/// Integral representer `sqrt(ell^2 / (alpha^2 + ell^2)) exp(-x^2 / (2 (alpha^2 + ell^2)))`.
pub fn representer_eval(alpha: &HpReal, ell: &HpReal, x: &HpReal, ctx: &NumericContext) -> HpReal {
    let l2 = ctx.real(ell.square_ref());
    let s = ctx.real(alpha.square_ref()) + &l2;
    let amp = (l2 / &s).sqrt();
    let arg = ctx.real(x.square_ref()) / (s * 2u32);
    amp * (-arg).exp()
}

/// Product of one-dimensional integral representers.
pub fn representer_eval_d(alpha: &MeasureSpec, ell: &KernelSpec, x: &[HpReal], ctx: &NumericContext) -> Result<HpReal> {
    check_specs(alpha, ell, x.len())?;
    Ok(RepresenterTable::new(alpha, ell, ctx).eval(x, ctx.prec()))
}

/// Precomputed constants for evaluating the d-dimensional representer.
pub(crate) struct RepresenterTable {
    amplitude: HpReal,
    inv_two_s: Vec<HpReal>,
}

impl RepresenterTable {
    pub(crate) fn new(alpha: &MeasureSpec, ell: &KernelSpec, ctx: &NumericContext) -> Self {
        let mut amplitude = ctx.one();
        let mut inv_two_s = Vec::with_capacity(ell.dim());
        for (a, l) in alpha.stddevs().iter().zip(ell.lengthscales()) {
            let l2 = ctx.real(l.square_ref());
            let s = ctx.real(a.square_ref()) + &l2;
            amplitude *= (l2 / &s).sqrt();
            inv_two_s.push((s * 2u32).recip());
        }
        Self { amplitude, inv_two_s }
    }

    pub(crate) fn eval(&self, x: &[HpReal], prec: u32) -> HpReal {
        let mut arg = Float::new(prec);
        for (xi, c) in x.iter().zip(&self.inv_two_s) {
            arg += Float::with_val(prec, xi.square_ref()) * c;
        }
        Float::with_val(prec, &self.amplitude) * (-arg).exp()
    }
}

/// `||I_{alpha,ell}|| = (1 + 2 alpha^2 / ell^2)^{-1/4}`.
pub fn representer_norm(alpha: &HpReal, ell: &HpReal, ctx: &NumericContext) -> HpReal {
    let ratio = ctx.real(alpha.square_ref()) / ctx.real(ell.square_ref());
    (ratio * 2u32 + 1u32).sqrt().sqrt().recip()
}

/// Product of one-dimensional representer norms.
pub fn representer_norm_d(alpha: &MeasureSpec, ell: &KernelSpec, ctx: &NumericContext) -> Result<HpReal> {
    check_specs(alpha, ell, alpha.dim())?;
    Ok(alpha
        .stddevs()
        .iter()
        .zip(ell.lengthscales())
        .fold(ctx.one(), |acc, (a, l)| acc * representer_norm(a, l, ctx)))
}

/// `||I||^2 = prod_i (1 + 2 alpha_i^2 / ell_i^2)^{-1/2}`, the double
/// integral of the kernel.
pub fn representer_norm_sq_d(alpha: &MeasureSpec, ell: &KernelSpec, ctx: &NumericContext) -> Result<HpReal> {
    Ok(representer_norm_d(alpha, ell, ctx)?.square())
}

/// How the worst-case error in a [`WceReport`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WceMethod {
    ClosedForm,
    BasisTruncation,
    OptimalWeights,
}

/// Worst-case error of a rule together with how it was computed.
#[derive(Debug, Clone)]
pub struct WceReport {
    pub wce: HpReal,
    pub method: WceMethod,
    pub truncation_order: Option<usize>,
    /// Upper bound on the discarded part of the squared error (basis route).
    pub tail_bound: Option<HpReal>,
    pub rule_size: usize,
    pub alpha: MeasureSpec,
    pub ell: KernelSpec,
}

/// Clamps a squared error that rounding pushed slightly below zero, or
/// reports precision exhaustion when the deficit exceeds `10^{-digits/2}`.
pub(crate) fn clamped_sqrt(e2: HpReal, quantity: &'static str, ctx: &NumericContext) -> Result<HpReal> {
    if e2 >= 0 {
        return Ok(e2.sqrt());
    }
    let threshold_digits = ctx.digits() / 2;
    if ctx.real(e2.abs_ref()) <= ctx.tolerance(threshold_digits as i32) {
        Ok(ctx.zero())
    } else {
        Err(Error::PrecisionExhausted {
            quantity,
            value: format_real(&e2, 20),
            threshold_digits,
        })
    }
}

/// Sums the terms in increasing order of magnitude.
pub(crate) fn ordered_sum(mut terms: Vec<HpReal>, ctx: &NumericContext) -> HpReal {
    terms.sort_by(|a, b| {
        let (a, b) = (ctx.real(a.abs_ref()), ctx.real(b.abs_ref()));
        a.partial_cmp(&b).expect("finite terms")
    });
    terms.into_iter().fold(ctx.zero(), |acc, t| acc + t)
}

/// `sum_ij w_i w_j K(x_i, x_j)`, the squared norm of the rule representer.
pub fn quadrature_representer_norm_sq(
    points: &[Vec<HpReal>],
    weights: &[HpReal],
    ell: &KernelSpec,
    ctx: &NumericContext,
) -> HpReal {
    let scales = inv_two_ell_sq(ell, ctx);
    let prec = ctx.prec();
    let rows: Vec<HpReal> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            // diagonal once, off-diagonal twice
            let mut row = Float::with_val(prec, &weights[i]);
            for j in (i + 1)..points.len() {
                let k = kernel_unchecked(&scales, &points[i], &points[j], prec);
                row += Float::with_val(prec, &weights[j] * &k) * 2u32;
            }
            row * &weights[i]
        })
        .collect();
    rows.into_iter().fold(ctx.zero(), |acc, r| acc + r)
}

/// Worst-case error from explicit points and weights. An empty point list
/// is the zero rule, whose error is the representer norm.
pub fn wce_closed_form_parts(
    points: &[Vec<HpReal>],
    weights: &[HpReal],
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    ctx: &NumericContext,
) -> Result<HpReal> {
    check_specs(alpha, ell, alpha.dim())?;
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: weights.len(),
        });
    }
    if let Some(p) = points.iter().find(|p| p.len() != alpha.dim()) {
        return Err(Error::DimensionMismatch {
            expected: alpha.dim(),
            found: p.len(),
        });
    }
    let initial = representer_norm_sq_d(alpha, ell, ctx)?;
    if points.is_empty() {
        return Ok(initial.sqrt());
    }
    let table = RepresenterTable::new(alpha, ell, ctx);
    let prec = ctx.prec();
    let cross = points
        .iter()
        .zip(weights)
        .fold(ctx.zero(), |acc, (x, w)| acc + table.eval(x, prec) * w);
    let quad = quadrature_representer_norm_sq(points, weights, ell, ctx);
    let e2 = ordered_sum(vec![initial, cross * -2i32, quad], ctx);
    clamped_sqrt(e2, "squared worst-case error", ctx)
}

/// Worst-case error of `rule` from the kernel-integral expansion.
pub fn wce_closed_form(
    rule: &QuadratureRule,
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    ctx: &NumericContext,
) -> Result<WceReport> {
    check_specs(alpha, ell, rule.dim())?;
    let wce = wce_closed_form_parts(rule.points(), rule.weights(), alpha, ell, ctx)?;
    Ok(WceReport {
        wce,
        method: WceMethod::ClosedForm,
        truncation_order: None,
        tail_bound: None,
        rule_size: rule.len(),
        alpha: alpha.clone(),
        ell: ell.clone(),
    })
}

/// Truncation policy for [`wce_basis_oracle`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Keep multi-indices with `max_i m_i <= M`.
    Fixed(usize),
    /// Double `M` until the tail contributes less than `10^{-digits/3}` to
    /// the worst-case error.
    Adaptive,
}

const ADAPTIVE_START: usize = 32;
/// Cap on `(M + 1)^d` for the adaptive search.
const MAX_BOX: usize = 1 << 22;

/// Worst-case error of `rule` by Parseval over the orthonormal basis.
pub fn wce_basis_oracle(
    rule: &QuadratureRule,
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    truncation: Truncation,
    ctx: &NumericContext,
) -> Result<WceReport> {
    check_specs(alpha, ell, rule.dim())?;
    let (order, sum, tail) = match truncation {
        Truncation::Fixed(m) => {
            let (s, t) = truncated_series(rule, alpha, ell, m, ctx);
            (m, s, t)
        }
        Truncation::Adaptive => {
            let target = ctx.tolerance(2 * (ctx.digits() / 3) as i32);
            let mut m = ADAPTIVE_START;
            loop {
                let (s, t) = truncated_series(rule, alpha, ell, m, ctx);
                if t.is_finite() && t <= target {
                    break (m, s, t);
                }
                let next = 2 * m;
                if (next + 1).checked_pow(rule.dim() as u32).is_none_or(|b| b > MAX_BOX) {
                    return Err(Error::TailNotConverged {
                        order: m,
                        tail_bound: format_real(&t, 10),
                    });
                }
                m = next;
            }
        }
    };
    Ok(WceReport {
        wce: sum.sqrt(),
        method: WceMethod::BasisTruncation,
        truncation_order: Some(order),
        tail_bound: Some(tail),
        rule_size: rule.len(),
        alpha: alpha.clone(),
        ell: ell.clone(),
    })
}

/// Values `phi_0(x), ..., phi_M(x)` via `phi_{m+1} = phi_m x / (ell sqrt(m + 1))`.
fn basis_column(ell: &HpReal, x: &HpReal, order: usize, ctx: &NumericContext) -> Vec<HpReal> {
    let mut out = Vec::with_capacity(order + 1);
    let mut cur = psi_eval_1d(ell, 0, x, ctx);
    let step = ctx.real(x / ell);
    for m in 0..=order {
        let next = ctx.real(&cur * &step) / ctx.real(m as u32 + 1).sqrt();
        out.push(std::mem::replace(&mut cur, next));
    }
    out
}

/// `I(phi_0), ..., I(phi_M)` via the ratio
/// `I(phi_{2q+2}) / I(phi_{2q}) = rho sqrt((2q+1) / (2q+2))`.
fn integral_column(alpha: &HpReal, ell: &HpReal, order: usize, ctx: &NumericContext) -> Vec<HpReal> {
    let b = beta(alpha, ell, ctx);
    let rho = ctx.real(b.square_ref()) / ctx.real(ell.square_ref());
    let mut even = ctx.real(&b / alpha);
    let mut out = Vec::with_capacity(order + 1);
    for m in 0..=order {
        if m % 2 == 1 {
            out.push(ctx.zero());
            let q = (m / 2) as u32;
            let factor = (ctx.real(2 * q + 1) / (2 * q + 2)).sqrt() * &rho;
            even *= factor;
        } else {
            out.push(even.clone());
        }
    }
    out
}

/// `sum_{m > M} phi_m(x)^2`, bounded by a geometric series once the ratio
/// `x^2 / (ell^2 (m + 1))` drops below one.
fn basis_tail_sq(ell: &HpReal, x: &HpReal, last: &HpReal, order: usize, ctx: &NumericContext) -> HpReal {
    let r2 = ctx.real(x.square_ref()) / ctx.real(ell.square_ref());
    let first = ctx.real(last.square_ref()) * &r2 / (order as u32 + 1);
    let ratio = r2 / (order as u32 + 2);
    if ratio >= 1 {
        return ctx.real(rug::float::Special::Infinity);
    }
    first / (ctx.one() - ratio)
}

/// `sum_{m > M} I(phi_m)^2 <= I(phi_{2q0})^2 / (1 - rho^2)` with `2 q0` the
/// first even index above `M`.
fn integral_tail_sq(alpha: &HpReal, ell: &HpReal, order: usize, ctx: &NumericContext) -> HpReal {
    let q0 = order / 2 + 1;
    let first = basis_integral(alpha, ell, 2 * q0 as u32, ctx);
    let b = beta(alpha, ell, ctx);
    let rho = ctx.real(b.square_ref()) / ctx.real(ell.square_ref());
    first.square() / (ctx.one() - rho.square())
}

/// Truncated Parseval sum over the box `max_i m_i <= order` and a bound on
/// the squared-error tail outside the box.
fn truncated_series(
    rule: &QuadratureRule,
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    order: usize,
    ctx: &NumericContext,
) -> (HpReal, HpReal) {
    let dim = rule.dim();
    let prec = ctx.prec();
    let ells = ell.lengthscales();
    let alphas = alpha.stddevs();

    // phi[i][j][m] = phi_m(x_ij)
    let phi: Vec<Vec<Vec<HpReal>>> = rule
        .points()
        .par_iter()
        .map(|x| (0..dim).map(|j| basis_column(&ells[j], &x[j], order, ctx)).collect())
        .collect();
    let integrals: Vec<Vec<HpReal>> = (0..dim)
        .map(|j| integral_column(&alphas[j], &ells[j], order, ctx))
        .collect();

    let box_size = (order + 1).pow(dim as u32);
    let terms: Vec<HpReal> = (0..box_size)
        .into_par_iter()
        .map(|flat| {
            let mut idx = vec![0usize; dim];
            let mut rest = flat;
            for j in (0..dim).rev() {
                idx[j] = rest % (order + 1);
                rest /= order + 1;
            }
            let mut exact = Float::with_val(prec, 1);
            for j in 0..dim {
                exact *= &integrals[j][idx[j]];
            }
            let mut approx = Float::new(prec);
            for (w, table) in rule.weights().iter().zip(&phi) {
                let mut term = Float::with_val(prec, w);
                for j in 0..dim {
                    term *= &table[j][idx[j]];
                }
                approx += term;
            }
            let diff = exact - approx;
            diff.square()
        })
        .collect();
    let sum = terms.into_iter().fold(ctx.zero(), |acc, t| acc + t);

    // Integral part: sum over indices outside the box of prod_j I(phi)^2 is
    // at most sum_j tail_j prod_{k != j} ||I_k||^2.
    let norms_sq: Vec<HpReal> = alphas
        .iter()
        .zip(ells)
        .map(|(a, l)| representer_norm(a, l, ctx).square())
        .collect();
    let mut tail_integral = ctx.zero();
    for j in 0..dim {
        let mut t = integral_tail_sq(&alphas[j], &ells[j], order, ctx);
        for (k, n) in norms_sq.iter().enumerate() {
            if k != j {
                t *= n;
            }
        }
        tail_integral += t;
    }
    // Rule part: Cauchy–Schwarz with sum_m phi_m(x)^2 = K(x, x) = 1.
    let abs_sum = rule
        .weights()
        .iter()
        .fold(ctx.zero(), |acc, w| acc + ctx.real(w.abs_ref()));
    let mut weighted = ctx.zero();
    for (w, (x, table)) in rule.weights().iter().zip(rule.points().iter().zip(&phi)) {
        let mut t = ctx.zero();
        for j in 0..dim {
            t += basis_tail_sq(&ells[j], &x[j], &table[j][order], order, ctx);
        }
        weighted += t * ctx.real(w.abs_ref());
    }
    let tail_rule = abs_sum * weighted;
    let tail = (tail_integral + tail_rule) * 2u32;
    (sum, tail)
}
