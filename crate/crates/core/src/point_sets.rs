//! Nested, locally quasi-uniform point sets built from the van der Corput
//! sequence, tensor grids, and fill-distance diagnostics.
//!
//! `Y_p` holds the first `nbar_p` van der Corput points in `(0, 1)`. The set
//! `X_k` places a copy of `Y_{k-m+1}` in each of the unit intervals
//! `(m - 1, m)` and `(-m, -m + 1)` for `m = 1..k`, so intervals close to the
//! origin receive the most points. All coordinates are dyadic rationals and
//! are held exactly.

use std::io::Write;

use rug::Float;

use crate::error::{Error, Result};
use crate::hpcore::{format_real, HpReal, NumericContext};

/// Base-2 radical inverse of `i >= 1`.
pub fn van_der_corput(i: u64, ctx: &NumericContext) -> Result<HpReal> {
    if i == 0 {
        return Err(Error::InvalidParameter("van der Corput index starts at 1".into()));
    }
    let bits = 64 - i.leading_zeros();
    let reversed = i.reverse_bits() >> (64 - bits);
    let mut x = ctx.real(reversed);
    x >>= bits;
    Ok(x)
}

/// Cardinalities `nbar_1, nbar_2, ...` of the sets `Y_m`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum NBarRule {
    /// `nbar_m = m`.
    #[default]
    Identity,
    /// Explicit strictly increasing positive sequence, `values[m - 1] = nbar_m`.
    Sequence(Vec<usize>),
}

impl NBarRule {
    pub fn sequence(values: Vec<usize>) -> Result<Self> {
        if values.first().is_none_or(|&v| v == 0) {
            return Err(Error::InvalidParameter("nbar must start with a positive integer".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("nbar must be strictly increasing".into()));
        }
        Ok(NBarRule::Sequence(values))
    }

    /// `nbar_m` for `m >= 1`.
    pub fn value(&self, m: usize) -> Result<usize> {
        if m == 0 {
            return Err(Error::InvalidParameter("nbar is indexed from 1".into()));
        }
        match self {
            NBarRule::Identity => Ok(m),
            NBarRule::Sequence(v) => v.get(m - 1).copied().ok_or_else(|| {
                Error::InvalidParameter(format!("nbar sequence has {} entries, index {m} requested", v.len()))
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Which block of `X_k` a point came from: the copy of `Y_level` placed in
/// `(interval - 1, interval)` for [`Side::Plus`] or `(-interval, -interval + 1)`
/// for [`Side::Minus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockTag {
    pub interval: usize,
    pub side: Side,
    pub level: usize,
}

/// Sorted, pairwise distinct one-dimensional point set.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet1D {
    points: Vec<HpReal>,
    tags: Option<Vec<BlockTag>>,
}

impl PointSet1D {
    /// Sorts the input and rejects duplicates.
    pub fn new(points: Vec<HpReal>) -> Result<Self> {
        Self::tagged(points.into_iter().map(|p| (p, None)).collect())
    }

    fn tagged(mut items: Vec<(HpReal, Option<BlockTag>)>) -> Result<Self> {
        if items.iter().any(|(p, _)| !p.is_finite()) {
            return Err(Error::InvalidParameter("points must be finite".into()));
        }
        items.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        if items.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("points must be pairwise distinct".into()));
        }
        let tags = if items.iter().all(|(_, t)| t.is_some()) && !items.is_empty() {
            Some(items.iter().map(|(_, t)| t.expect("checked")).collect())
        } else {
            None
        };
        Ok(Self {
            points: items.into_iter().map(|(p, _)| p).collect(),
            tags,
        })
    }

    pub fn points(&self) -> &[HpReal] {
        &self.points
    }

    /// Block of each point, aligned with [`Self::points`], for sets built by [`x_k`].
    pub fn tags(&self) -> Option<&[BlockTag]> {
        self.tags.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact membership test.
    pub fn contains(&self, x: &HpReal) -> bool {
        self.points
            .binary_search_by(|p| p.partial_cmp(x).expect("finite"))
            .is_ok()
    }

    /// Points as one-dimensional vectors.
    pub fn as_vectors(&self) -> Vec<Vec<HpReal>> {
        self.points.iter().map(|p| vec![p.clone()]).collect()
    }
}

/// The first `count` van der Corput points, sorted.
pub fn vdc_prefix(count: usize, ctx: &NumericContext) -> Result<PointSet1D> {
    if count == 0 {
        return Err(Error::InvalidParameter("a point set needs at least one point".into()));
    }
    let pts = (1..=count as u64)
        .map(|i| van_der_corput(i, ctx))
        .collect::<Result<Vec<_>>>()?;
    PointSet1D::new(pts)
}

/// `Y_m`: the first `m` van der Corput points.
pub fn y_set(m: usize, ctx: &NumericContext) -> Result<PointSet1D> {
    vdc_prefix(m, ctx)
}

/// `X_k = union_{m=1..k} (Y_{k-m+1} + m - 1) u (Y_{k-m+1} - m)` with
/// `#Y_p = nbar_p`.
pub fn x_k(k: usize, nbar: &NBarRule, ctx: &NumericContext) -> Result<PointSet1D> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let largest = nbar.value(k)?;
    let base: Vec<HpReal> = (1..=largest as u64)
        .map(|i| van_der_corput(i, ctx))
        .collect::<Result<_>>()?;
    let mut items = Vec::new();
    for m in 1..=k {
        let level = k - m + 1;
        let count = nbar.value(level)?;
        for y in &base[..count] {
            let plus = ctx.real(y) + (m as u32 - 1);
            let minus = ctx.real(y) - m as u32;
            items.push((
                plus,
                Some(BlockTag {
                    interval: m,
                    side: Side::Plus,
                    level,
                }),
            ));
            items.push((
                minus,
                Some(BlockTag {
                    interval: m,
                    side: Side::Minus,
                    level,
                }),
            ));
        }
    }
    PointSet1D::tagged(items)
}

/// `#X_k = 2 sum_{m=1..k} nbar_m`.
pub fn x_k_cardinality(k: usize, nbar: &NBarRule) -> Result<usize> {
    (1..=k).try_fold(0usize, |acc, m| Ok(acc + 2 * nbar.value(m)?))
}

/// Fill distance of a set on an open interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FillDistance {
    pub h: HpReal,
    /// The set has no point in the interval; `h` is then `b - a`.
    pub empty_intersection: bool,
}

/// `sup_{x in (a, b)} min_{x_i in X n (a, b)} |x - x_i|`, from sorted gaps.
pub fn fill_distance(set: &PointSet1D, a: &HpReal, b: &HpReal, ctx: &NumericContext) -> Result<FillDistance> {
    if a >= b {
        return Err(Error::InvalidParameter("interval must satisfy a < b".into()));
    }
    let inside: Vec<&HpReal> = set.points().iter().filter(|p| *p > a && *p < b).collect();
    let (Some(first), Some(last)) = (inside.first(), inside.last()) else {
        return Ok(FillDistance {
            h: ctx.real(b - a),
            empty_intersection: true,
        });
    };
    let mut h = ctx.real(*first - a).max(&ctx.real(b - *last));
    for w in inside.windows(2) {
        let mut half = ctx.real(w[1] - w[0]);
        half >>= 1;
        h.max_mut(&half);
    }
    Ok(FillDistance {
        h,
        empty_intersection: false,
    })
}

/// `max_{m <= m_max} m h(Y_m, (0, 1))`, an empirical quasi-uniformity constant.
pub fn estimate_cqu(m_max: usize, ctx: &NumericContext) -> Result<HpReal> {
    if m_max == 0 {
        return Err(Error::InvalidParameter("m_max must be at least 1".into()));
    }
    let (zero, one) = (ctx.zero(), ctx.one());
    let mut sorted: Vec<HpReal> = Vec::with_capacity(m_max);
    let mut best = ctx.zero();
    for m in 1..=m_max {
        let x = van_der_corput(m as u64, ctx)?;
        let pos = sorted.partition_point(|p| *p < x);
        sorted.insert(pos, x);
        let set = PointSet1D {
            points: sorted.clone(),
            tags: None,
        };
        let h = fill_distance(&set, &zero, &one, ctx)?.h * m as u32;
        best.max_mut(&h);
    }
    Ok(best)
}

/// Cartesian product of one-dimensional sets, last coordinate varying fastest.
pub fn tensor_grid(sets: &[PointSet1D]) -> Result<Vec<Vec<HpReal>>> {
    if sets.is_empty() || sets.iter().any(PointSet1D::is_empty) {
        return Err(Error::EmptyInput("tensor grid factors"));
    }
    let mut grid: Vec<Vec<HpReal>> = vec![Vec::new()];
    for set in sets {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                set.points().iter().map(move |p| {
                    let mut v = prefix.clone();
                    v.push(p.clone());
                    v
                })
            })
            .collect();
    }
    Ok(grid)
}

/// Constants of the local sampling inequality and the quasi-uniformity
/// condition. `big_c` and `h0` have no known values; the defaults are
/// placeholders and any bound that uses them is constant-dependent.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundConstants {
    pub big_c: HpReal,
    pub h0: HpReal,
    pub c_qu: HpReal,
    pub hbar0: HpReal,
}

impl BoundConstants {
    pub fn new(big_c: HpReal, h0: HpReal, c_qu: HpReal) -> Result<Self> {
        for (name, v) in [("C", &big_c), ("h0", &h0), ("c_qu", &c_qu)] {
            if !v.is_finite() || *v <= 0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if h0 > 1 {
            return Err(Error::InvalidParameter("h0 must not exceed 1".into()));
        }
        let inv = Float::with_val(c_qu.prec(), c_qu.recip_ref());
        let hbar0 = h0.clone().min(&inv);
        Ok(Self { big_c, h0, c_qu, hbar0 })
    }

    /// `C = 1`, `h0 = 1`, `c_qu = 2`.
    pub fn defaults(ctx: &NumericContext) -> Self {
        Self::new(ctx.one(), ctx.one(), ctx.real(2)).expect("valid defaults")
    }
}

/// Writes one point per row, columns `x1..xd`, at `significant` digits.
pub fn write_points_csv<W: Write>(points: &[Vec<HpReal>], significant: usize, out: W) -> Result<()> {
    let dim = points.first().map_or(1, Vec::len);
    let mut w = csv::Writer::from_writer(out);
    w.write_record((1..=dim).map(|i| format!("x{i}")))?;
    for p in points {
        w.write_record(p.iter().map(|x| format_real(x, significant)))?;
    }
    w.flush()?;
    Ok(())
}
