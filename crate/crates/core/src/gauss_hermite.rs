//! Probabilists' Hermite polynomials and Gauss–Hermite rules.
//!
//! Nodes and weights come from the Golub–Welsch construction: the symmetric
//! tridiagonal Jacobi matrix of the recurrence `H_{k+1} = x H_k - k H_{k-1}`
//! (zero diagonal, off-diagonal `sqrt(k)`) is diagonalised with implicit-shift
//! QL at full working precision. Only the first row of the eigenvector matrix
//! is accumulated; its squared entries are the weights for the standard
//! normal density. Each node then receives one Newton step on `H_n`.

use rug::Float;

use crate::error::{Error, Result};
use crate::hpcore::{HpReal, NumericContext};

/// `H_n(x)` by the three-term recurrence.
pub fn hermite_eval(n: usize, x: &HpReal, ctx: &NumericContext) -> HpReal {
    hermite_pair(n, x, ctx).0
}

/// `(H_n(x), H_{n-1}(x))`, with `H_{-1} = 0`.
fn hermite_pair(n: usize, x: &HpReal, ctx: &NumericContext) -> (HpReal, HpReal) {
    let mut prev = ctx.zero();
    let mut cur = ctx.one();
    for k in 0..n {
        // H_{k+1} = x H_k - k H_{k-1}
        let next = Float::with_val(ctx.prec(), x * &cur) - Float::with_val(ctx.prec(), &prev * k as u64);
        prev = std::mem::replace(&mut cur, next);
    }
    (cur, prev)
}

/// An `n`-point Gauss–Hermite rule for the `N(0, alpha^2)` density.
#[derive(Debug, Clone)]
pub struct GaussHermiteRule {
    pub n: usize,
    /// `alpha` times the roots of `H_n`, strictly increasing.
    pub nodes: Vec<HpReal>,
    pub weights: Vec<HpReal>,
    pub alpha: HpReal,
}

impl GaussHermiteRule {
    /// `sum_i w_i f(x_i)`.
    pub fn integrate<F>(&self, mut f: F) -> HpReal
    where
        F: FnMut(&HpReal) -> HpReal,
    {
        let prec = self.alpha.prec();
        let mut acc = Float::new(prec);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(x);
        }
        acc
    }
}

/// Builds the `n`-point rule exact for polynomials of degree `2n - 1` against
/// the `N(0, alpha^2)` density.
pub fn gauss_hermite_rule(n: usize, alpha: &HpReal, ctx: &NumericContext) -> Result<GaussHermiteRule> {
    if n == 0 {
        return Err(Error::InvalidParameter("Gauss–Hermite rule needs n >= 1".into()));
    }
    if *alpha <= 0 {
        return Err(Error::InvalidParameter("Gauss–Hermite scale alpha must be positive".into()));
    }
    let (mut roots, mut weights) = golub_welsch(n, ctx)?;

    for x in roots.iter_mut() {
        let (h, h_prev) = hermite_pair(n, x, ctx);
        if !h_prev.is_zero() {
            // H_n' = n H_{n-1}
            let step = h / (h_prev * n as u64);
            *x -= step;
        }
    }
    symmetrize(&mut roots, &mut weights, ctx);

    let nodes = roots.into_iter().map(|x| x * alpha).collect();
    Ok(GaussHermiteRule {
        n,
        nodes,
        weights,
        alpha: ctx.round(alpha),
    })
}

/// Eigenvalues and squared first eigenvector components of the Hermite
/// Jacobi matrix, sorted by eigenvalue.
fn golub_welsch(n: usize, ctx: &NumericContext) -> Result<(Vec<HpReal>, Vec<HpReal>)> {
    let prec = ctx.prec();
    let mut d: Vec<HpReal> = (0..n).map(|_| ctx.zero()).collect();
    // e[i] couples d[i] and d[i+1]; e[n-1] is zero.
    let mut e: Vec<HpReal> = (1..=n)
        .map(|k| if k < n { ctx.real(k as u32).sqrt() } else { ctx.zero() })
        .collect();
    let mut z: Vec<HpReal> = (0..n).map(|i| if i == 0 { ctx.one() } else { ctx.zero() }).collect();

    let tol = ctx.tolerance(ctx.digits() as i32 - 10);
    let budget = 100 * n;
    let mut sweeps = 0usize;

    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = Float::with_val(prec, d[m].abs_ref()) + Float::with_val(prec, d[m + 1].abs_ref());
                let off = Float::with_val(prec, e[m].abs_ref());
                if off <= Float::with_val(prec, &tol * &scale) || off.is_zero() {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if sweeps == budget {
                return Err(Error::NoConvergence { n, sweeps });
            }
            sweeps += 1;

            // Wilkinson-style shift from the leading 2x2 block.
            let mut g = Float::with_val(prec, &d[l + 1] - &d[l]) / Float::with_val(prec, &e[l] * 2u32);
            let mut r = (Float::with_val(prec, g.square_ref()) + 1u32).sqrt();
            let signed_r = if g >= 0 { r.clone() } else { -r.clone() };
            g = Float::with_val(prec, &d[m] - &d[l]) + Float::with_val(prec, &e[l] / (g + signed_r));

            let mut s = ctx.one();
            let mut c = ctx.one();
            let mut p = ctx.zero();

            let mut i = m;
            while i > l {
                i -= 1;
                let f = Float::with_val(prec, &s * &e[i]);
                let b = Float::with_val(prec, &c * &e[i]);
                if Float::with_val(prec, f.abs_ref()) >= Float::with_val(prec, g.abs_ref()) {
                    c = Float::with_val(prec, &g / &f);
                    r = (Float::with_val(prec, c.square_ref()) + 1u32).sqrt();
                    e[i + 1] = Float::with_val(prec, &f * &r);
                    s = Float::with_val(prec, r.recip_ref());
                    c *= &s;
                } else {
                    s = Float::with_val(prec, &f / &g);
                    r = (Float::with_val(prec, s.square_ref()) + 1u32).sqrt();
                    e[i + 1] = Float::with_val(prec, &g * &r);
                    c = Float::with_val(prec, r.recip_ref());
                    s *= &c;
                }
                g = Float::with_val(prec, &d[i + 1] - &p);
                r = Float::with_val(prec, &d[i] - &g) * &s + Float::with_val(prec, &c * &b) * 2u32;
                p = Float::with_val(prec, &s * &r);
                d[i + 1] = Float::with_val(prec, &g + &p);
                g = Float::with_val(prec, &c * &r) - &b;

                let zf = z[i + 1].clone();
                z[i + 1] = Float::with_val(prec, &s * &z[i]) + Float::with_val(prec, &c * &zf);
                z[i] = Float::with_val(prec, &c * &z[i]) - Float::with_val(prec, &s * &zf);
            }
            d[l] -= &p;
            e[l] = g;
            e[m] = ctx.zero();
        }
    }

    let mut pairs: Vec<(HpReal, HpReal)> = d
        .into_iter()
        .zip(z)
        .map(|(x, v)| {
            let w = v.square();
            (x, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite eigenvalues"));
    Ok(pairs.into_iter().unzip())
}

/// Makes the node vector equal its own negated reverse and pairs weights.
fn symmetrize(nodes: &mut [HpReal], weights: &mut [HpReal], ctx: &NumericContext) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = Float::with_val(ctx.prec(), &nodes[j] - &nodes[i]) / 2u32;
        let w = Float::with_val(ctx.prec(), &weights[i] + &weights[j]) / 2u32;
        nodes[i] = -x.clone();
        nodes[j] = x;
        weights[i] = w.clone();
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = ctx.zero();
    }
}

/// Standard normal moment `E[X^m]`: zero for odd `m`, `(m-1)!!` otherwise.
pub fn normal_moment(m: u32, ctx: &NumericContext) -> HpReal {
    if m % 2 == 1 {
        return ctx.zero();
    }
    let mut acc = rug::Integer::from(1);
    let mut k = 1u32;
    while k < m {
        acc *= k;
        k += 2;
    }
    ctx.real(&acc)
}
