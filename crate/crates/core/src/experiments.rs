//! Convergence studies written as CSV, and geometric-rate fitting.
//!
//! Every CSV starts with a block of `# key: value` lines recording the
//! configuration and constants, followed by an ordinary header row and one
//! row per parameter value. Numbers are printed at `min(digits, 50)`
//! significant digits, so identical configurations give identical bytes.

use std::io::{Read, Write};
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{gh1d_bounds, kq_bound};
use crate::error::{Error, Result};
use crate::hpcore::{display_digits, format_real, HpReal, NumericContext};
use crate::optimal::{optimal_tensor_rule, wce_optimal};
use crate::point_sets::{x_k, NBarRule};
use crate::rkhs::{kernel_eval, representer_eval_d, wce_closed_form};
use crate::scaled_rules::{scaled_gh_rule, standard_gh_rule, KernelSpec, MeasureSpec, QuadratureRule};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One row of the scaled versus standard Gauss–Hermite study.
#[derive(Debug, Clone)]
pub struct Figure1Row {
    pub n: usize,
    pub wce_scaled: HpReal,
    pub wce_standard: HpReal,
    pub lower: HpReal,
    pub upper_paper: HpReal,
    pub upper_corrected: HpReal,
}

pub const FIGURE1_COLUMNS: [&str; 6] = ["n", "wce_scaled", "wce_standard_gh", "lower", "upper_paper", "upper_corrected"];

/// Worst-case errors of the scaled and standard rules with the two-sided
/// bounds, one row per `n`.
pub fn figure1_rows(
    alpha: &HpReal,
    ell: &HpReal,
    ns: RangeInclusive<usize>,
    ctx: &NumericContext,
) -> Result<Vec<Figure1Row>> {
    if *ns.start() == 0 || ns.is_empty() {
        return Err(Error::InvalidParameter("the n range must be non-empty and start at 1 or above".into()));
    }
    let ma = MeasureSpec::new(vec![alpha.clone()])?;
    let kl = KernelSpec::new(vec![ell.clone()])?;
    ns.collect::<Vec<_>>()
        .into_par_iter()
        .map(|n| {
            let row = || -> Result<Figure1Row> {
                let scaled = scaled_gh_rule(alpha, ell, n, ctx)?;
                let standard = standard_gh_rule(alpha, n, ctx)?;
                let b = gh1d_bounds(alpha, ell, n, ctx)?;
                Ok(Figure1Row {
                    n,
                    wce_scaled: wce_closed_form(&scaled, &ma, &kl, ctx)?.wce,
                    wce_standard: wce_closed_form(&standard, &ma, &kl, ctx)?.wce,
                    lower: b.lower,
                    upper_paper: b.upper_paper,
                    upper_corrected: b.upper_corrected.expect("one-dimensional bounds carry it"),
                })
            };
            row().map_err(|e| e.context(format!("n = {n}")))
        })
        .collect()
}

/// One row of the optimal-weights study on the grids `X_k^d`.
#[derive(Debug, Clone)]
pub struct Figure2Row {
    pub k: usize,
    pub n_total: u64,
    pub wce_optimal: HpReal,
    pub kq_bound: HpReal,
}

pub const FIGURE2_COLUMNS: [&str; 4] = ["k", "n_total", "wce_optimal", "kq_bound"];

/// Optimal rule on the isotropic grid `X_k x .. x X_k` for each `k`, with
/// the bound `C exp(-sqrt(k (k + 1)) / (2 sqrt 2 alpha^2))`.
pub fn figure2_rows(
    alpha: &HpReal,
    ell: &HpReal,
    dim: usize,
    ks: RangeInclusive<usize>,
    big_c: &HpReal,
    ctx: &NumericContext,
) -> Result<Vec<Figure2Row>> {
    if *ks.start() == 0 || ks.is_empty() {
        return Err(Error::InvalidParameter("the k range must be non-empty and start at 1 or above".into()));
    }
    let ma = MeasureSpec::isotropic(alpha.clone(), dim)?;
    let kl = KernelSpec::isotropic(ell.clone(), dim)?;
    ks.collect::<Vec<_>>()
        .into_par_iter()
        .map(|k| {
            let row = || -> Result<Figure2Row> {
                let set = x_k(k, &NBarRule::Identity, ctx)?;
                let sets = vec![set.points().to_vec(); dim];
                let tensor = optimal_tensor_rule(&ma, &kl, &sets, ctx)?;
                let rule = tensor.rule()?;
                let wce = wce_optimal(&rule, &ma, &kl, ctx)?.wce;
                let n_total = rule.len() as u64;
                Ok(Figure2Row {
                    k,
                    n_total,
                    wce_optimal: wce,
                    kq_bound: kq_bound(n_total, alpha, big_c, dim, ctx)?.value,
                })
            };
            row().map_err(|e| e.context(format!("k = {k}")))
        })
        .collect()
}

/// Writes `# key: value` lines, the column header and the rows.
pub fn write_csv<W: Write>(
    out: W,
    header: &[(String, String)],
    columns: &[&str],
    rows: &[Vec<String>],
) -> Result<()> {
    let mut out = out;
    for (k, v) in header {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn figure1_records(rows: &[Figure1Row], ctx: &NumericContext) -> Vec<Vec<String>> {
    let s = display_digits(ctx);
    rows.iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                format_real(&r.wce_scaled, s),
                format_real(&r.wce_standard, s),
                format_real(&r.lower, s),
                format_real(&r.upper_paper, s),
                format_real(&r.upper_corrected, s),
            ]
        })
        .collect()
}

pub fn figure2_records(rows: &[Figure2Row], ctx: &NumericContext) -> Vec<Vec<String>> {
    let s = display_digits(ctx);
    rows.iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                r.n_total.to_string(),
                format_real(&r.wce_optimal, s),
                format_real(&r.kq_bound, s),
            ]
        })
        .collect()
}

/// Least-squares line `y = slope x + intercept` and the RMS residual.
#[derive(Debug, Clone)]
pub struct LineFit {
    pub slope: HpReal,
    pub intercept: HpReal,
    pub rms: HpReal,
}

pub fn linear_fit(xs: &[HpReal], ys: &[HpReal], ctx: &NumericContext) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::RateFit("at least two points are needed for a line".into()));
    }
    let m = xs.len() as u32;
    let mean = |v: &[HpReal]| v.iter().fold(ctx.zero(), |acc, x| acc + x) / m;
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxx = ctx.zero();
    let mut sxy = ctx.zero();
    for (x, y) in xs.iter().zip(ys) {
        let dx = ctx.real(x - &mx);
        sxy += ctx.real(&dx * &ctx.real(y - &my));
        sxx += dx.square();
    }
    if sxx.is_zero() {
        return Err(Error::RateFit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - ctx.real(&slope * &mx);
    let mut ss = ctx.zero();
    for (x, y) in xs.iter().zip(ys) {
        let r = ctx.real(y - &intercept) - ctx.real(&slope * x);
        ss += r.square();
    }
    Ok(LineFit {
        slope,
        intercept,
        rms: (ss / m).sqrt(),
    })
}

/// Fitted geometric ratio `value_n ~ c r^n`.
#[derive(Debug, Clone)]
pub struct RateFit {
    pub r: HpReal,
    /// Smallest and largest `n` used.
    pub window: (usize, usize),
    /// RMS deviation of `ln(value)` from the fitted line.
    pub residual: HpReal,
    pub points: usize,
}

/// Fits `ln(value) = ln c + n ln r` by least squares.
pub fn fit_rate(series: &[(usize, HpReal)], ctx: &NumericContext) -> Result<RateFit> {
    if series.len() < 3 {
        return Err(Error::RateFit(format!("need at least 3 rows in the window, found {}", series.len())));
    }
    if let Some((n, v)) = series.iter().find(|(_, v)| *v <= 0 || !v.is_finite()) {
        return Err(Error::RateFit(format!("non-positive value {} at n = {n}", format_real(v, 10))));
    }
    let xs: Vec<HpReal> = series.iter().map(|(n, _)| ctx.real(*n as u64)).collect();
    let ys: Vec<HpReal> = series.iter().map(|(_, v)| ctx.real(v.ln_ref())).collect();
    let fit = linear_fit(&xs, &ys, ctx)?;
    let lo = series.iter().map(|(n, _)| *n).min().expect("non-empty");
    let hi = series.iter().map(|(n, _)| *n).max().expect("non-empty");
    Ok(RateFit {
        r: fit.slope.exp(),
        window: (lo, hi),
        residual: fit.rms,
        points: series.len(),
    })
}

/// Reads `(index, value)` pairs from a CSV with `#` comment lines. The index
/// column is `index_column`; rows outside `window` are skipped.
pub fn read_series<R: Read>(
    input: R,
    index_column: &str,
    column: &str,
    window: Option<(usize, usize)>,
    ctx: &NumericContext,
) -> Result<Vec<(usize, HpReal)>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::RateFit(format!("column {name:?} not found; available: {}", headers.iter().collect::<Vec<_>>().join(", "))))
    };
    let (ix, iv) = (find(index_column)?, find(column)?);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let n: usize = record[ix]
            .parse()
            .map_err(|_| Error::RateFit(format!("index {:?} is not a non-negative integer", &record[ix])))?;
        if let Some((lo, hi)) = window {
            if n < lo || n > hi {
                continue;
            }
        }
        out.push((n, ctx.parse(&record[iv])?));
    }
    Ok(out)
}

/// Unit-norm kernel expansion `f = sum_j c_j K(., y_j)` drawn from a seeded
/// generator. Centres are normal with twice the measure's spread.
#[derive(Debug, Clone)]
pub struct RandomKernelFunction {
    centres: Vec<Vec<HpReal>>,
    coefficients: Vec<HpReal>,
    ell: KernelSpec,
}

impl RandomKernelFunction {
    pub fn draw(seed: u64, terms: usize, alpha: &MeasureSpec, ell: &KernelSpec, ctx: &NumericContext) -> Result<Self> {
        if terms == 0 {
            return Err(Error::EmptyInput("kernel expansion terms"));
        }
        if alpha.dim() != ell.dim() {
            return Err(Error::DimensionMismatch {
                expected: alpha.dim(),
                found: ell.dim(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centres: Vec<Vec<HpReal>> = (0..terms)
            .map(|_| {
                alpha
                    .stddevs()
                    .iter()
                    .map(|a| {
                        // Box-Muller on two uniforms
                        let (u, v): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
                        let g = (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos();
                        ctx.real(g) * a * 2u32
                    })
                    .collect()
            })
            .collect();
        let raw: Vec<HpReal> = (0..terms).map(|_| ctx.real(rng.gen_range(-1.0..1.0))).collect();
        let mut norm_sq = ctx.zero();
        for (i, ci) in raw.iter().enumerate() {
            for (j, cj) in raw.iter().enumerate() {
                norm_sq += kernel_eval(ell, &centres[i], &centres[j], ctx)? * ci * cj;
            }
        }
        let norm = norm_sq.sqrt();
        let coefficients = raw.into_iter().map(|c| c / &norm).collect();
        Ok(Self {
            centres,
            coefficients,
            ell: ell.clone(),
        })
    }

    pub fn eval(&self, x: &[HpReal], ctx: &NumericContext) -> Result<HpReal> {
        let mut s = ctx.zero();
        for (y, c) in self.centres.iter().zip(&self.coefficients) {
            s += kernel_eval(&self.ell, x, y, ctx)? * c;
        }
        Ok(s)
    }

    /// Exact Gaussian integral through the kernel mean embedding.
    pub fn integral(&self, alpha: &MeasureSpec, ctx: &NumericContext) -> Result<HpReal> {
        let mut s = ctx.zero();
        for (y, c) in self.centres.iter().zip(&self.coefficients) {
            s += representer_eval_d(alpha, &self.ell, y, ctx)? * c;
        }
        Ok(s)
    }

    /// `|I(f) - Q(f)|`, which never exceeds the worst-case error of `rule`.
    pub fn error(&self, rule: &QuadratureRule, alpha: &MeasureSpec, ctx: &NumericContext) -> Result<HpReal> {
        let q = rule.try_apply(|x| self.eval(x, ctx))?;
        Ok((self.integral(alpha, ctx)? - q).abs())
    }
}
