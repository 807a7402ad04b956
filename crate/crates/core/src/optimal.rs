//! Worst-case-optimal weights, the kernel interpolant and the power function.
//!
//! For distinct points `X` the optimal weights solve `K_X w = z` with
//! `z_i = I(x_i)` the integral representer. The Gram matrix of a Gaussian
//! kernel is positive definite but becomes numerically singular quickly, so
//! the only solver is a Cholesky factorisation at the working precision. A
//! non-positive pivot is reported together with an estimate of the digits
//! that would be needed; nothing is ever added to the diagonal.

use rayon::prelude::*;
use rug::Float;

use crate::error::{Error, Result};
use crate::hpcore::{format_real, HpReal, NumericContext};
use crate::rkhs::{
    clamped_sqrt, inv_two_ell_sq, kernel_unchecked, ordered_sum, representer_norm_sq_d, RepresenterTable,
    WceMethod, WceReport,
};
use crate::scaled_rules::{check_specs, lexicographic, tensor_rule, KernelSpec, MeasureSpec, Provenance, QuadratureRule};

/// Kernel matrix `K_ij = K(x_i, x_j)` of a point set with its Cholesky
/// factor, and optionally the representer vector `z`.
#[derive(Debug, Clone)]
pub struct GramSystem {
    points: Vec<Vec<HpReal>>,
    ell: KernelSpec,
    gram: Vec<Vec<HpReal>>,
    /// Row `i` holds `L_i0 .. L_ii`.
    chol: Vec<Vec<HpReal>>,
    rhs: Option<Vec<HpReal>>,
    min_pivot_sq: HpReal,
}

fn check_points(points: &[Vec<HpReal>], dim: usize) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.len(),
        });
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("points must be finite".into()));
    }
    Ok(())
}

fn has_duplicates(points: &[Vec<HpReal>]) -> bool {
    let mut sorted: Vec<&Vec<HpReal>> = points.iter().collect();
    sorted.sort_by(|a, b| lexicographic(a, b));
    sorted
        .windows(2)
        .any(|w| lexicographic(w[0], w[1]) == std::cmp::Ordering::Equal)
}

/// Removes exact duplicates, keeping first occurrences in input order.
pub fn dedup_points(points: &[Vec<HpReal>]) -> Vec<Vec<HpReal>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| lexicographic(&points[i], &points[j]).then(i.cmp(&j)));
    let mut keep = vec![false; points.len()];
    let mut last: Option<usize> = None;
    for i in order {
        match last {
            Some(l) if lexicographic(&points[l], &points[i]) == std::cmp::Ordering::Equal => {}
            _ => {
                keep[i] = true;
                last = Some(i);
            }
        }
    }
    points
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k).map(|(p, _)| p.clone())
        .collect()
}

impl GramSystem {
    /// Assembles and factors the Gram matrix of distinct `points`.
    pub fn new(points: Vec<Vec<HpReal>>, ell: &KernelSpec, ctx: &NumericContext) -> Result<Self> {
        check_points(&points, ell.dim())?;
        if has_duplicates(&points) {
            return Err(Error::InvalidParameter("Gram system points must be pairwise distinct".into()));
        }
        let gram = assemble(&points, ell, ctx);
        let (chol, min_pivot_sq) = cholesky(&gram, ctx)?;
        Ok(Self {
            points,
            ell: ell.clone(),
            gram,
            chol,
            rhs: None,
            min_pivot_sq,
        })
    }

    /// Attaches `z_i = I_{alpha,ell}(x_i)`.
    pub fn with_representer(mut self, alpha: &MeasureSpec, ctx: &NumericContext) -> Result<Self> {
        check_specs(alpha, &self.ell, self.ell.dim())?;
        let table = RepresenterTable::new(alpha, &self.ell, ctx);
        self.rhs = Some(self.points.iter().map(|x| table.eval(x, ctx.prec())).collect());
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<HpReal>] {
        &self.points
    }

    pub fn gram(&self) -> &[Vec<HpReal>] {
        &self.gram
    }

    /// Lower Cholesky factor, row `i` holding `L_i0 .. L_ii`.
    pub fn cholesky_factor(&self) -> &[Vec<HpReal>] {
        &self.chol
    }

    pub fn rhs(&self) -> Option<&[HpReal]> {
        self.rhs.as_deref()
    }

    /// Smallest squared pivot `L_ii^2` met during the factorisation.
    pub fn min_pivot_sq(&self) -> &HpReal {
        &self.min_pivot_sq
    }

    /// `L^{-1} b`.
    pub fn forward(&self, b: &[HpReal], ctx: &NumericContext) -> Vec<HpReal> {
        let n = self.len();
        let mut y: Vec<HpReal> = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = ctx.real(&b[i]);
            for (l, yk) in self.chol[i][..i].iter().zip(&y) {
                s -= l * yk;
            }
            s /= &self.chol[i][i];
            y.push(s);
        }
        y
    }

    /// `K^{-1} b` by forward and back substitution.
    pub fn solve(&self, b: &[HpReal], ctx: &NumericContext) -> Result<Vec<HpReal>> {
        if b.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: b.len(),
            });
        }
        let n = self.len();
        let mut x = self.forward(b, ctx);
        for i in (0..n).rev() {
            let mut s = x[i].clone();
            for k in (i + 1)..n {
                s -= &self.chol[k][i] * &x[k];
            }
            s /= &self.chol[i][i];
            x[i] = s;
        }
        Ok(x)
    }

    /// `max_i |(K w - b)_i|`.
    pub fn residual_inf(&self, w: &[HpReal], b: &[HpReal], ctx: &NumericContext) -> HpReal {
        let prec = ctx.prec();
        self.gram
            .par_iter()
            .zip(b)
            .map(|(row, bi)| {
                let mut s = Float::with_val(prec, -bi);
                for (k, wj) in row.iter().zip(w) {
                    s += k * wj;
                }
                s.abs()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(ctx.zero(), |acc, r| acc.max(&r))
    }

    /// Solves and verifies `||K x - b||_inf <= 10^{-digits/2}`.
    pub fn solve_checked(&self, b: &[HpReal], ctx: &NumericContext) -> Result<Vec<HpReal>> {
        let x = self.solve(b, ctx)?;
        let residual = self.residual_inf(&x, b, ctx);
        let threshold_digits = ctx.digits() / 2;
        if residual > ctx.tolerance(threshold_digits as i32) {
            return Err(Error::ResidualTooLarge {
                residual: format_real(&residual, 10),
                threshold_digits,
            });
        }
        Ok(x)
    }

    /// Kernel vector `k_X(x)`.
    pub fn kernel_vector(&self, x: &[HpReal], ctx: &NumericContext) -> Vec<HpReal> {
        let scales = inv_two_ell_sq(&self.ell, ctx);
        self.points
            .iter()
            .map(|p| kernel_unchecked(&scales, p, x, ctx.prec()))
            .collect()
    }
}

fn assemble(points: &[Vec<HpReal>], ell: &KernelSpec, ctx: &NumericContext) -> Vec<Vec<HpReal>> {
    let scales = inv_two_ell_sq(ell, ctx);
    let prec = ctx.prec();
    let upper: Vec<Vec<HpReal>> = (0..points.len())
        .into_par_iter()
        .map(|i| {
            (i..points.len())
                .map(|j| {
                    if i == j {
                        Float::with_val(prec, 1)
                    } else {
                        kernel_unchecked(&scales, &points[i], &points[j], prec)
                    }
                })
                .collect()
        })
        .collect();
    (0..points.len())
        .map(|i| {
            (0..points.len())
                .map(|j| {
                    if j >= i {
                        upper[i][j - i].clone()
                    } else {
                        upper[j][i - j].clone()
                    }
                })
                .collect()
        })
        .collect()
}

fn digits_needed(pivot_sq: &HpReal, ctx: &NumericContext) -> u32 {
    let p = pivot_sq.clone().abs();
    let lost = if p.is_zero() {
        ctx.digits() as f64
    } else {
        (-p.log10().to_f64()).max(0.0)
    };
    (lost.ceil() as u32 + crate::hpcore::display_digits(ctx) as u32).max(ctx.digits() + 1)
}

fn cholesky(a: &[Vec<HpReal>], ctx: &NumericContext) -> Result<(Vec<Vec<HpReal>>, HpReal)> {
    let n = a.len();
    let mut l: Vec<Vec<HpReal>> = Vec::with_capacity(n);
    let mut min_pivot_sq = ctx.one();
    for i in 0..n {
        let mut row: Vec<HpReal> = Vec::with_capacity(i + 1);
        for j in 0..=i {
            let mut s = ctx.real(&a[i][j]);
            let lj: &[HpReal] = if j < i { &l[j] } else { &row };
            for (x, y) in row[..j].iter().zip(&lj[..j]) {
                s -= x * y;
            }
            if j == i {
                if s <= 0 {
                    let smallest = if s.is_zero() { min_pivot_sq.clone() } else { min_pivot_sq.clone().min(&s.clone().abs()) };
                    return Err(Error::CholeskyBreakdown {
                        row: i,
                        pivot: format_real(&s, 10),
                        digits: ctx.digits(),
                        digits_needed: digits_needed(&smallest, ctx),
                    });
                }
                if s < min_pivot_sq {
                    min_pivot_sq = s.clone();
                }
                row.push(s.sqrt());
            } else {
                s /= &l[j][j];
                row.push(s);
            }
        }
        l.push(row);
    }
    Ok((l, min_pivot_sq))
}

/// Rule with worst-case-optimal weights on `points` (exact duplicates
/// removed).
pub fn optimal_rule(
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    points: &[Vec<HpReal>],
    ctx: &NumericContext,
) -> Result<QuadratureRule> {
    check_specs(alpha, ell, alpha.dim())?;
    check_points(points, alpha.dim())?;
    let system = GramSystem::new(dedup_points(points), ell, ctx)?.with_representer(alpha, ctx)?;
    let z = system.rhs().expect("representer attached");
    let w = system.solve_checked(z, ctx)?;
    QuadratureRule::new(system.points, w, Provenance::Optimal)
}

/// Optimal weights on a tensor grid `X_1 x ... x X_d`. The Gram matrix and
/// representer vector both factor as Kronecker products, so the weights are
/// the products of the one-dimensional optimal weights.
#[derive(Debug, Clone)]
pub struct TensorOptimal {
    factors: Vec<QuadratureRule>,
    /// `||I_i||^2 - sum_j w_ij z_ij` factors: `(A_i, w_i . z_i)`.
    parts: Vec<(HpReal, HpReal)>,
}

impl TensorOptimal {
    pub fn factors(&self) -> &[QuadratureRule] {
        &self.factors
    }

    /// Full tensor-product rule, last coordinate varying fastest.
    pub fn rule(&self) -> Result<QuadratureRule> {
        tensor_rule(&self.factors)
    }

    /// `e^2 = prod_i A_i - prod_i (w_i . z_i)`.
    pub fn wce(&self, ctx: &NumericContext) -> Result<HpReal> {
        let a = self.parts.iter().fold(ctx.one(), |acc, (a, _)| acc * a);
        let b = self.parts.iter().fold(ctx.one(), |acc, (_, b)| acc * b);
        clamped_sqrt(a - b, "squared worst-case error", ctx)
    }

    pub fn len(&self) -> usize {
        self.factors.iter().map(QuadratureRule::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Optimal weights on the product of one-dimensional point sets.
pub fn optimal_tensor_rule(
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    sets: &[Vec<HpReal>],
    ctx: &NumericContext,
) -> Result<TensorOptimal> {
    check_specs(alpha, ell, sets.len())?;
    if sets.is_empty() {
        return Err(Error::EmptyInput("tensor grid factors"));
    }
    let solved: Vec<Result<(QuadratureRule, (HpReal, HpReal))>> = sets
        .par_iter()
        .enumerate()
        .map(|(i, set)| {
            let a = MeasureSpec::new(vec![alpha.stddevs()[i].clone()])?;
            let l = KernelSpec::new(vec![ell.lengthscales()[i].clone()])?;
            let pts: Vec<Vec<HpReal>> = set.iter().map(|x| vec![x.clone()]).collect();
            let rule = optimal_rule(&a, &l, &pts, ctx)?;
            let table = RepresenterTable::new(&a, &l, ctx);
            let dot = rule
                .points()
                .iter()
                .zip(rule.weights())
                .fold(ctx.zero(), |acc, (x, w)| acc + table.eval(x, ctx.prec()) * w);
            Ok((rule, (representer_norm_sq_d(&a, &l, ctx)?, dot)))
        })
        .collect();
    let mut factors = Vec::with_capacity(sets.len());
    let mut parts = Vec::with_capacity(sets.len());
    for r in solved {
        let (rule, p) = r?;
        factors.push(rule);
        parts.push(p);
    }
    Ok(TensorOptimal { factors, parts })
}

/// Worst-case error of a rule whose weights solve `K w = z`:
/// `e^2 = ||I||^2 - sum_i w_i z_i`.
pub fn wce_optimal(
    rule: &QuadratureRule,
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    ctx: &NumericContext,
) -> Result<WceReport> {
    check_specs(alpha, ell, rule.dim())?;
    let wce = wce_optimal_parts(rule.points(), rule.weights(), alpha, ell, ctx)?;
    Ok(WceReport {
        wce,
        method: WceMethod::OptimalWeights,
        truncation_order: None,
        tail_bound: None,
        rule_size: rule.len(),
        alpha: alpha.clone(),
        ell: ell.clone(),
    })
}

/// As [`wce_optimal`] on raw parts; the empty set gives the representer norm.
pub fn wce_optimal_parts(
    points: &[Vec<HpReal>],
    weights: &[HpReal],
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    ctx: &NumericContext,
) -> Result<HpReal> {
    check_specs(alpha, ell, alpha.dim())?;
    let initial = representer_norm_sq_d(alpha, ell, ctx)?;
    let table = RepresenterTable::new(alpha, ell, ctx);
    let prec = ctx.prec();
    let terms: Vec<HpReal> = points
        .par_iter()
        .zip(weights)
        .map(|(x, w)| -(table.eval(x, prec) * w))
        .collect();
    let dot = ordered_sum(terms, ctx);
    clamped_sqrt(initial + dot, "squared worst-case error", ctx)
}

/// Minimum-norm interpolant `s(x) = k_X(x)^T K_X^{-1} f(X)`.
#[derive(Debug, Clone)]
pub struct Interpolant {
    system: GramSystem,
    coefficients: Vec<HpReal>,
}

impl Interpolant {
    pub fn new(ell: &KernelSpec, points: Vec<Vec<HpReal>>, values: &[HpReal], ctx: &NumericContext) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: values.len(),
            });
        }
        let system = GramSystem::new(points, ell, ctx)?;
        let coefficients = system.solve_checked(values, ctx)?;
        Ok(Self { system, coefficients })
    }

    /// `c = K_X^{-1} f(X)`.
    pub fn coefficients(&self) -> &[HpReal] {
        &self.coefficients
    }

    pub fn eval(&self, x: &[HpReal], ctx: &NumericContext) -> HpReal {
        self.system
            .kernel_vector(x, ctx)
            .iter()
            .zip(&self.coefficients)
            .fold(ctx.zero(), |acc, (k, c)| acc + k * c)
    }

    /// `I_alpha(s) = sum_i c_i I(x_i)`.
    pub fn integral(&self, alpha: &MeasureSpec, ctx: &NumericContext) -> Result<HpReal> {
        check_specs(alpha, &self.system.ell, self.system.ell.dim())?;
        let table = RepresenterTable::new(alpha, &self.system.ell, ctx);
        Ok(self
            .system
            .points()
            .iter()
            .zip(&self.coefficients)
            .fold(ctx.zero(), |acc, (x, c)| acc + table.eval(x, ctx.prec()) * c))
    }
}

/// One-shot interpolant evaluation at `x`.
pub fn interpolant_eval(
    ell: &KernelSpec,
    points: &[Vec<HpReal>],
    values: &[HpReal],
    x: &[HpReal],
    ctx: &NumericContext,
) -> Result<HpReal> {
    Ok(Interpolant::new(ell, points.to_vec(), values, ctx)?.eval(x, ctx))
}

/// Power function `P(x) = sqrt(1 - ||L^{-1} k_X(x)||^2)` with the point set
/// factored once.
#[derive(Debug, Clone)]
pub struct PowerFunction {
    system: Option<GramSystem>,
    dim: usize,
}

impl PowerFunction {
    /// An empty point set is allowed and gives `P = 1`.
    pub fn new(ell: &KernelSpec, points: &[Vec<HpReal>], ctx: &NumericContext) -> Result<Self> {
        let system = if points.is_empty() {
            None
        } else {
            check_points(points, ell.dim())?;
            Some(GramSystem::new(dedup_points(points), ell, ctx)?)
        };
        Ok(Self { system, dim: ell.dim() })
    }

    pub fn eval(&self, x: &[HpReal], ctx: &NumericContext) -> Result<HpReal> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        let Some(system) = &self.system else {
            return Ok(ctx.one());
        };
        let y = system.forward(&system.kernel_vector(x, ctx), ctx);
        let q = y.iter().fold(ctx.zero(), |acc, v| acc + v.clone().square());
        let p2 = ctx.one() - q;
        // rounding near the points may push the radicand slightly negative
        Ok(if p2 <= 0 { ctx.zero() } else { p2.sqrt() })
    }
}

/// One-shot power-function evaluation at `x`.
pub fn power_function(ell: &KernelSpec, points: &[Vec<HpReal>], x: &[HpReal], ctx: &NumericContext) -> Result<HpReal> {
    PowerFunction::new(ell, points, ctx)?.eval(x, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rkhs::{representer_eval, wce_closed_form, wce_closed_form_parts};
    use crate::scaled_rules::{scaled_gh_rule, tensor_rule};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx() -> NumericContext {
        NumericContext::new(100).unwrap()
    }

    fn one_d(a: &HpReal, l: &HpReal) -> (MeasureSpec, KernelSpec) {
        (
            MeasureSpec::new(vec![a.clone()]).unwrap(),
            KernelSpec::new(vec![l.clone()]).unwrap(),
        )
    }

    fn pts(xs: &[f64], ctx: &NumericContext) -> Vec<Vec<HpReal>> {
        xs.iter().map(|&x| vec![ctx.real(x)]).collect()
    }

    #[test]
    fn single_point_examples() {
        let ctx = ctx();
        let one = ctx.one();
        let (a, l) = one_d(&one, &one);
        let rule = optimal_rule(&a, &l, &pts(&[0.0], &ctx), &ctx).unwrap();
        assert_eq!(rule.provenance(), Provenance::Optimal);
        assert!((rule.weights()[0].clone() - ctx.ratio(1, 2).sqrt()).abs() < ctx.tolerance(95));
        let gh = scaled_gh_rule(&one, &one, 1, &ctx).unwrap();
        assert!((rule.weights()[0].clone() - &gh.weights()[0]).abs() < ctx.tolerance(95));

        let e = wce_optimal(&rule, &a, &l, &ctx).unwrap().wce;
        let expected = (ctx.real(3).sqrt().recip() - ctx.ratio(1, 2)).sqrt();
        assert!((e.clone() - expected).abs() < ctx.tolerance(45));
        assert!((e.to_f64() - 0.278_12).abs() < 1e-5);

        let empty = wce_optimal_parts(&[], &[], &a, &l, &ctx).unwrap();
        assert!((empty.to_f64() - 0.759_84).abs() < 1e-5);
    }

    #[test]
    fn duplicates_are_merged() {
        let ctx = ctx();
        let (a, l) = one_d(&ctx.one(), &ctx.one());
        let rule = optimal_rule(&a, &l, &pts(&[0.5, -1.0, 0.5, 2.0, -1.0], &ctx), &ctx).unwrap();
        assert_eq!(rule.len(), 3);
        assert_eq!(rule.points()[0][0], 0.5);
        assert_eq!(rule.points()[1][0], -1.0);
        assert_eq!(rule.points()[2][0], 2.0);
    }

    #[test]
    fn symmetric_sets_give_symmetric_weights() {
        let ctx = ctx();
        let (a, l) = one_d(&ctx.one(), &ctx.ratio(1, 2));
        let rule = optimal_rule(&a, &l, &pts(&[-2.0, -0.75, -0.25, 0.25, 0.75, 2.0], &ctx), &ctx).unwrap();
        let w = rule.weights();
        for i in 0..3 {
            assert!((w[i].clone() - &w[5 - i]).abs() < ctx.tolerance(80));
        }
    }

    #[test]
    fn beats_scaled_gh_on_its_own_points() {
        let ctx = ctx();
        let one = ctx.one();
        let (a, l) = one_d(&one, &one);
        let gh = scaled_gh_rule(&one, &one, 5, &ctx).unwrap();
        let opt = optimal_rule(&a, &l, gh.points(), &ctx).unwrap();
        let e_opt = wce_optimal(&opt, &a, &l, &ctx).unwrap().wce;
        let e_gh = wce_closed_form(&gh, &a, &l, &ctx).unwrap().wce;
        assert!(e_opt <= e_gh);
    }

    #[test]
    fn optimal_closed_form_and_pythagoras_agree() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for (a, l) in [(1.0, 1.0), (2.0, 0.5), (0.5, 2.0)] {
            let (ma, kl) = one_d(&ctx.real(a), &ctx.real(l));
            for n in [1usize, 3, 7, 12] {
                let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let rule = optimal_rule(&ma, &kl, &pts(&xs, &ctx), &ctx).unwrap();
                let e_opt = wce_optimal(&rule, &ma, &kl, &ctx).unwrap().wce;
                let e_cf = wce_closed_form(&rule, &ma, &kl, &ctx).unwrap().wce;
                assert!((e_opt.clone() - &e_cf).abs() < ctx.tolerance(33));
                let dot = rule
                    .points()
                    .iter()
                    .zip(rule.weights())
                    .fold(ctx.zero(), |acc, (x, w)| acc + representer_eval(&ctx.real(a), &ctx.real(l), &x[0], &ctx) * w);
                assert!(dot >= 0);
                let a2 = representer_norm_sq_d(&ma, &kl, &ctx).unwrap();
                assert!((e_opt.square() + dot - a2).abs() < ctx.tolerance(33));
            }
        }
    }

    #[test]
    fn perturbing_a_weight_never_helps() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (ma, kl) = one_d(&ctx.one(), &ctx.one());
        for n in [2usize, 6, 12] {
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.5..2.5)).collect();
            let rule = optimal_rule(&ma, &kl, &pts(&xs, &ctx), &ctx).unwrap();
            let base = wce_closed_form(&rule, &ma, &kl, &ctx).unwrap().wce;
            for i in 0..n {
                for sign in [-1i32, 1] {
                    let mut w = rule.weights().to_vec();
                    w[i] += ctx.tolerance(5) * sign;
                    let e = wce_closed_form_parts(rule.points(), &w, &ma, &kl, &ctx).unwrap();
                    assert!(e >= base);
                }
            }
        }
    }

    #[test]
    fn interpolant_reproduces_and_integrates() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (ma, kl) = one_d(&ctx.one(), &ctx.one());
        let points = pts(&[-2.0, -1.1, -0.3, 0.4, 1.0, 2.2, 3.0], &ctx);
        let rule = optimal_rule(&ma, &kl, &points, &ctx).unwrap();
        for _ in 0..20 {
            let values: Vec<HpReal> = (0..points.len()).map(|_| ctx.real(rng.gen_range(-1.0..1.0f64))).collect();
            let s = Interpolant::new(&kl, points.clone(), &values, &ctx).unwrap();
            for (p, v) in points.iter().zip(&values) {
                assert!((s.eval(p, &ctx) - v).abs() < ctx.tolerance(50));
            }
            let q = rule.weights().iter().zip(&values).fold(ctx.zero(), |acc, (w, v)| acc + w.clone() * v);
            assert!((s.integral(&ma, &ctx).unwrap() - q).abs() < ctx.tolerance(50));
        }
        // f in the span of K(., x_j) is reproduced everywhere
        let f = |x: &HpReal| {
            let k = |c: f64| (-(x.clone() - c).square() / 2u32).exp();
            k(-1.1) * 3u32 - k(2.2) / 2u32
        };
        let values: Vec<HpReal> = points.iter().map(|p| f(&p[0])).collect();
        let s = Interpolant::new(&kl, points.clone(), &values, &ctx).unwrap();
        for t in [-4.0, -0.7, 0.0, 1.3, 5.0] {
            let x = ctx.real(t);
            assert!((s.eval(std::slice::from_ref(&x), &ctx) - f(&x)).abs() < ctx.tolerance(50));
        }
        assert!(interpolant_eval(&kl, &points, &values[..3], &[ctx.zero()], &ctx).is_err());
    }

    #[test]
    fn power_function_properties() {
        let ctx = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (_, kl) = one_d(&ctx.one(), &ctx.one());
        for t in [-3.0, 0.0, 1.7] {
            assert_eq!(power_function(&kl, &[], &[ctx.real(t)], &ctx).unwrap(), 1);
        }
        let points = pts(&[-1.0, 0.0, 0.5, 2.0], &ctx);
        let p = PowerFunction::new(&kl, &points, &ctx).unwrap();
        for x in &points {
            assert!(p.eval(x, &ctx).unwrap() < ctx.tolerance(40));
        }
        let mut growing: Vec<Vec<HpReal>> = Vec::new();
        let probes: Vec<Vec<HpReal>> = (0..15).map(|_| vec![ctx.real(rng.gen_range(-4.0..4.0f64))]).collect();
        let mut prev: Vec<HpReal> = vec![ctx.one(); probes.len()];
        for _ in 0..8 {
            growing.push(vec![ctx.real(rng.gen_range(-3.0..3.0f64))]);
            let pf = PowerFunction::new(&kl, &growing, &ctx).unwrap();
            for (x, pv) in probes.iter().zip(prev.iter_mut()) {
                let v = pf.eval(x, &ctx).unwrap();
                assert!(v <= 1 && v <= pv.clone() + ctx.tolerance(40));
                *pv = v;
            }
        }
    }

    #[test]
    fn tensor_kronecker_matches_full_gram() {
        let ctx = NumericContext::new(80).unwrap();
        let alpha = MeasureSpec::new(vec![ctx.one(), ctx.ratio(1, 2)]).unwrap();
        let ell = KernelSpec::new(vec![ctx.one(), ctx.real(2)]).unwrap();
        let sets = vec![
            vec![ctx.ratio(-1, 2), ctx.ratio(1, 2), ctx.ratio(3, 2)],
            vec![ctx.real(-1), ctx.ratio(1, 4), ctx.ratio(1, 3), ctx.real(2)],
        ];
        let tensor = optimal_tensor_rule(&alpha, &ell, &sets, &ctx).unwrap();
        let rule = tensor.rule().unwrap();
        assert_eq!(rule.len(), 12);
        let full = optimal_rule(&alpha, &ell, rule.points(), &ctx).unwrap();
        for (a, b) in rule.weights().iter().zip(full.weights()) {
            assert!((a.clone() - b).abs() < ctx.tolerance(30));
        }
        let e_t = tensor.wce(&ctx).unwrap();
        let e_full = wce_optimal(&full, &alpha, &ell, &ctx).unwrap().wce;
        let e_cf = wce_closed_form(&rule, &alpha, &ell, &ctx).unwrap().wce;
        assert!((e_t.clone() - &e_full).abs() < ctx.tolerance(30));
        assert!((e_t - e_cf).abs() < ctx.tolerance(25));
        let _ = tensor_rule(tensor.factors()).unwrap();
    }

    #[test]
    fn near_duplicates_break_down_with_guidance() {
        let ctx = NumericContext::new(30).unwrap();
        let (ma, kl) = one_d(&ctx.one(), &ctx.one());
        let close = vec![vec![ctx.zero()], vec![ctx.tolerance(20)], vec![ctx.one()]];
        match optimal_rule(&ma, &kl, &close, &ctx) {
            Err(e @ Error::CholeskyBreakdown { digits_needed, .. }) => {
                assert!(digits_needed > 30);
                assert!(e.is_precision_exhaustion());
            }
            other => panic!("expected breakdown, got {other:?}"),
        }
    }
}
