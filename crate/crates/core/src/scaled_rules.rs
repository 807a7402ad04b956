//! Quadrature rules, the kernel-adapted scaled Gauss–Hermite construction
//! and tensor products.
//!
//! The scaled rule for the measure `N(0, alpha^2)` and the length-scale `ell`
//! is a Gauss–Hermite rule for the narrower density `N(0, beta^2)`,
//! `beta^2 = alpha^2 ell^2 / (alpha^2 + ell^2)`, with every weight multiplied
//! by `(beta / alpha) exp(beta^2 x^2 / (2 ell^2))`. It integrates the first
//! `2n` orthonormal basis functions of the Gaussian RKHS exactly.

use std::cmp::Ordering;
use std::fmt;

use rug::Float;

use crate::error::{Error, Result};
use crate::gauss_hermite::gauss_hermite_rule;
use crate::hpcore::{HpReal, NumericContext};

fn positive_vector(values: Vec<HpReal>, what: &str) -> Result<Vec<HpReal>> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} must have at least one entry")));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v <= 0) {
        return Err(Error::InvalidParameter(format!("{what} must be positive and finite, got {bad}")));
    }
    Ok(values)
}

/// Per-dimension kernel length-scales.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    lengthscales: Vec<HpReal>,
}

impl KernelSpec {
    pub fn new(lengthscales: Vec<HpReal>) -> Result<Self> {
        Ok(Self {
            lengthscales: positive_vector(lengthscales, "length-scales")?,
        })
    }

    pub fn isotropic(ell: HpReal, dim: usize) -> Result<Self> {
        Self::new(vec![ell; dim])
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn lengthscales(&self) -> &[HpReal] {
        &self.lengthscales
    }
}

/// Per-dimension standard deviations of the Gaussian integration measure.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    stddevs: Vec<HpReal>,
}

impl MeasureSpec {
    pub fn new(stddevs: Vec<HpReal>) -> Result<Self> {
        Ok(Self {
            stddevs: positive_vector(stddevs, "standard deviations")?,
        })
    }

    pub fn isotropic(alpha: HpReal, dim: usize) -> Result<Self> {
        Self::new(vec![alpha; dim])
    }

    pub fn dim(&self) -> usize {
        self.stddevs.len()
    }

    pub fn stddevs(&self) -> &[HpReal] {
        &self.stddevs
    }
}

pub(crate) fn check_specs(alpha: &MeasureSpec, ell: &KernelSpec, dim: usize) -> Result<()> {
    if alpha.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: alpha.dim(),
        });
    }
    if ell.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: ell.dim(),
        });
    }
    Ok(())
}

/// Where a rule's points and weights came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ScaledGh,
    StandardGh,
    Optimal,
    Custom,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::ScaledGh => "scaled-GH",
            Provenance::StandardGh => "standard-GH",
            Provenance::Optimal => "optimal",
            Provenance::Custom => "custom",
        })
    }
}

/// A `d`-dimensional rule `Q(f) = sum_i w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    dim: usize,
    points: Vec<Vec<HpReal>>,
    weights: Vec<HpReal>,
    provenance: Provenance,
}

pub(crate) fn lexicographic(a: &[HpReal], b: &[HpReal]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) => continue,
            Some(o) => return o,
            None => return Ordering::Equal,
        }
    }
    Ordering::Equal
}

impl QuadratureRule {
    /// Validating constructor: at least one point, consistent dimensions,
    /// finite weights, pairwise distinct points, and strictly positive
    /// weights for scaled Gauss–Hermite rules.
    pub fn new(points: Vec<Vec<HpReal>>, weights: Vec<HpReal>, provenance: Provenance) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("a quadrature rule needs at least one point"));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: weights.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidParameter("points must have dimension >= 1".into()));
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
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite".into()));
        }
        if provenance == Provenance::ScaledGh && weights.iter().any(|w| *w <= 0) {
            return Err(Error::InvalidParameter("scaled Gauss–Hermite weights must be positive".into()));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| lexicographic(&points[i], &points[j]));
        if order
            .windows(2)
            .any(|w| lexicographic(&points[w[0]], &points[w[1]]) == Ordering::Equal)
        {
            return Err(Error::InvalidParameter("rule points must be pairwise distinct".into()));
        }
        Ok(Self {
            dim,
            points,
            weights,
            provenance,
        })
    }

    /// Same rule with every weight replaced; used for worst-case error
    /// comparisons on a fixed point set.
    pub fn with_weights(&self, weights: Vec<HpReal>, provenance: Provenance) -> Result<Self> {
        Self::new(self.points.clone(), weights, provenance)
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    pub fn weights(&self) -> &[HpReal] {
        &self.weights
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `sum_i w_i f(x_i)`.
    pub fn apply<F>(&self, mut f: F) -> HpReal
    where
        F: FnMut(&[HpReal]) -> HpReal,
    {
        let mut acc = Float::new(self.weights[0].prec());
        for (x, w) in self.points.iter().zip(&self.weights) {
            acc += f(x) * w;
        }
        acc
    }

    /// Like [`apply`](Self::apply) for integrands that can fail.
    pub fn try_apply<F, E>(&self, mut f: F) -> std::result::Result<HpReal, E>
    where
        F: FnMut(&[HpReal]) -> std::result::Result<HpReal, E>,
    {
        let mut acc = Float::new(self.weights[0].prec());
        for (x, w) in self.points.iter().zip(&self.weights) {
            acc += f(x)? * w;
        }
        Ok(acc)
    }
}

/// `sum_i w_i f(x_i)`.
pub fn apply<F>(rule: &QuadratureRule, f: F) -> HpReal
where
    F: FnMut(&[HpReal]) -> HpReal,
{
    rule.apply(f)
}

/// `beta = sqrt(alpha^2 ell^2 / (alpha^2 + ell^2))`.
pub fn beta(alpha: &HpReal, ell: &HpReal, ctx: &NumericContext) -> HpReal {
    let a2 = ctx.real(alpha.square_ref());
    let l2 = ctx.real(ell.square_ref());
    let num = ctx.real(&a2 * &l2);
    (num / (a2 + l2)).sqrt()
}

fn check_positive(x: &HpReal, name: &str) -> Result<()> {
    if !x.is_finite() || *x <= 0 {
        return Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

/// The `n`-point scaled Gauss–Hermite rule for the measure `N(0, alpha^2)`
/// and length-scale `ell`.
pub fn scaled_gh_rule(alpha: &HpReal, ell: &HpReal, n: usize, ctx: &NumericContext) -> Result<QuadratureRule> {
    check_positive(alpha, "alpha")?;
    check_positive(ell, "ell")?;
    let gh = gauss_hermite_rule(n, &ctx.one(), ctx)?;
    let b = beta(alpha, ell, ctx);
    let ratio = ctx.real(&b / alpha);
    // beta^2 / (2 ell^2)
    let growth = ctx.real(b.square_ref()) / (ctx.real(ell.square_ref()) * 2u32);

    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (x, w) in gh.nodes.iter().zip(&gh.weights) {
        points.push(vec![ctx.real(&b * x)]);
        let factor = (ctx.real(x.square_ref()) * &growth).exp();
        weights.push(factor * w * &ratio);
    }
    QuadratureRule::new(points, weights, Provenance::ScaledGh)
}

/// The classical `n`-point Gauss–Hermite rule for `N(0, alpha^2)`.
pub fn standard_gh_rule(alpha: &HpReal, n: usize, ctx: &NumericContext) -> Result<QuadratureRule> {
    let gh = gauss_hermite_rule(n, alpha, ctx)?;
    let points = gh.nodes.into_iter().map(|x| vec![x]).collect();
    QuadratureRule::new(points, gh.weights, Provenance::StandardGh)
}

/// Tensor product of one-dimensional rules. Points are enumerated in
/// row-major order over `(i_1, ..., i_d)`, the last index varying fastest.
pub fn tensor_rule(rules: &[QuadratureRule]) -> Result<QuadratureRule> {
    if rules.is_empty() {
        return Err(Error::EmptyInput("tensor_rule needs at least one factor"));
    }
    if let Some(r) = rules.iter().find(|r| r.dim() != 1) {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: r.dim(),
        });
    }
    let prec = rules[0].weights[0].prec();
    let mut points: Vec<Vec<HpReal>> = vec![Vec::new()];
    let mut weights: Vec<HpReal> = vec![Float::with_val(prec, 1)];
    for rule in rules {
        let mut next_points = Vec::with_capacity(points.len() * rule.len());
        let mut next_weights = Vec::with_capacity(points.len() * rule.len());
        for (p, w) in points.iter().zip(&weights) {
            for (x, v) in rule.points.iter().zip(&rule.weights) {
                let mut q = p.clone();
                q.push(x[0].clone());
                next_points.push(q);
                next_weights.push(Float::with_val(prec, w * v));
            }
        }
        points = next_points;
        weights = next_weights;
    }
    let first = rules[0].provenance;
    let provenance = if rules.iter().all(|r| r.provenance == first) {
        first
    } else {
        Provenance::Custom
    };
    // Factors are distinct one-dimensional rules, so the grid is distinct.
    Ok(QuadratureRule {
        dim: rules.len(),
        points,
        weights,
        provenance,
    })
}

/// Tensor product of scaled Gauss–Hermite rules with `n[i]` points in
/// dimension `i`.
pub fn scaled_gh_tensor_rule(
    alpha: &MeasureSpec,
    ell: &KernelSpec,
    n: &[usize],
    ctx: &NumericContext,
) -> Result<QuadratureRule> {
    check_specs(alpha, ell, n.len())?;
    let factors = alpha
        .stddevs()
        .iter()
        .zip(ell.lengthscales())
        .zip(n)
        .map(|((a, l), &ni)| scaled_gh_rule(a, l, ni, ctx))
        .collect::<Result<Vec<_>>>()?;
    tensor_rule(&factors)
}
