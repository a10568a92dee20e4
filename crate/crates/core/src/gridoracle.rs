//! Exhaustive checks of the two-hypothesis maximin results on small discrete
//! models, and slice operators on grid regions.
//!
//! Coordinates take values in `{1, …, m}` and are independent. A coordinate
//! is distributed by the null pmf, the alternative pmf, or a point mass at
//! `m` or `1`; the point masses stand in for `θ_i = ±∞`. Cell values are
//! 1-based everywhere in the public API.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::normal;
use crate::procedures::PairRegion;
use crate::scalar::GridScalar;

/// Largest grid the threshold search accepts.
pub const MAX_SEARCH_M: usize = 12;
/// Largest grid the full monotone-rule enumeration accepts.
pub const MAX_ENUMERATION_M: usize = 3;

fn sum<S: GridScalar>(it: impl IntoIterator<Item = S>) -> S {
    it.into_iter().fold(S::zero(), |a, b| a + b)
}

fn close<S: GridScalar>(x: &S, y: &S) -> bool {
    let s = S::slack();
    x.clone() - y.clone() <= s && y.clone() - x.clone() <= s
}

/// `P(X ≥ t)` for a pmf over `{1, …, m}`; `t` runs over `1..=m+1`.
fn tail<S: GridScalar>(pmf: &[S], t: usize) -> S {
    sum(pmf.iter().skip(t.saturating_sub(1)).cloned())
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridModel<S> {
    m: usize,
    null_pmf: Vec<S>,
    alt_pmf: Vec<S>,
}

impl<S: GridScalar> GridModel<S> {
    pub fn new(null_pmf: Vec<S>, alt_pmf: Vec<S>) -> Result<Self> {
        let m = null_pmf.len();
        if m == 0 {
            return Err(Error::InvalidModel("empty grid".into()));
        }
        if alt_pmf.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: alt_pmf.len() });
        }
        for pmf in [&null_pmf, &alt_pmf] {
            if pmf.iter().any(|p| *p < S::zero()) {
                return Err(Error::InvalidModel("negative probability".into()));
            }
            if !close(&sum(pmf.iter().cloned()), &S::one()) {
                return Err(Error::InvalidModel("pmf does not sum to one".into()));
            }
        }
        for t in 2..=m {
            if tail(&alt_pmf, t) + S::slack() < tail(&null_pmf, t) {
                return Err(Error::InvalidModel(format!(
                    "alternative does not dominate the null at {t}"
                )));
            }
        }
        Ok(Self { m, null_pmf, alt_pmf })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn null_pmf(&self) -> &[S] {
        &self.null_pmf
    }

    pub fn alt_pmf(&self) -> &[S] {
        &self.alt_pmf
    }

    pub fn pmf(&self, c: GridConfig) -> Vec<S> {
        let point = |at: usize| (0..self.m).map(|i| if i == at { S::one() } else { S::zero() }).collect();
        match c {
            GridConfig::Null => self.null_pmf.clone(),
            GridConfig::Alt => self.alt_pmf.clone(),
            GridConfig::AltTop => point(self.m - 1),
            GridConfig::AltBottom => point(0),
        }
    }

    /// The largest single-cell null probability.
    pub fn cell_slack(&self) -> S {
        self.null_pmf
            .iter()
            .cloned()
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }
}

impl GridModel<f64> {
    /// Normal location model binned at `cuts`: value `i` is the interval
    /// `(cuts[i − 2], cuts[i − 1]]`, so `m = cuts.len() + 1`.
    pub fn discretized_normal(cuts: &[f64], shift: f64) -> Result<Self> {
        if cuts.windows(2).any(|w| w[0] >= w[1]) || cuts.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel("cuts must be finite and increasing".into()));
        }
        let bin = |s: f64| -> Vec<f64> {
            let mut edges = vec![0.0];
            edges.extend(cuts.iter().map(|&c| normal::cdf(c - s)));
            edges.push(1.0);
            edges.windows(2).map(|w| w[1] - w[0]).collect()
        };
        Self::new(bin(0.0), bin(shift))
    }
}

/// Grid value whose upper set `{X ≥ i}` best matches `{Z > t}` for the
/// binning of [`GridModel::discretized_normal`].
pub fn threshold_cell(cuts: &[f64], t: f64) -> usize {
    if t.is_nan() {
        return 1;
    }
    if t == f64::INFINITY {
        return cuts.len() + 2;
    }
    let nearest = cuts
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
        .map(|(i, _)| i);
    match nearest {
        Some(i) => i + 2,
        None => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridConfig {
    Null,
    Alt,
    /// Point mass at the top value.
    AltTop,
    /// Point mass at the bottom value; a true null.
    AltBottom,
}

impl GridConfig {
    pub const ALL: [GridConfig; 4] = [Self::Null, Self::Alt, Self::AltTop, Self::AltBottom];

    pub fn is_true_null(self) -> bool {
        matches!(self, Self::Null | Self::AltBottom)
    }
}

/// Pairs of coordinate configurations with at least one true null.
pub fn null_configs() -> Vec<[GridConfig; 2]> {
    let mut out = Vec::new();
    for c1 in GridConfig::ALL {
        for c2 in GridConfig::ALL {
            if c1.is_true_null() || c2.is_true_null() {
                out.push([c1, c2]);
            }
        }
    }
    out
}

/// Two-hypothesis stepdown-shaped rule with integer thresholds.
///
/// Nothing is rejected unless some `X_i ≥ a_i`; both are rejected when
/// additionally both `X_i ≥ b_i`; otherwise the coordinate that passed its
/// `a` threshold is rejected alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThresholdRule {
    pub a: [usize; 2],
    pub b: [usize; 2],
}

impl ThresholdRule {
    pub fn new(a: [usize; 2], b: [usize; 2], m: usize) -> Result<Self> {
        for i in 0..2 {
            if !(1 <= b[i] && b[i] <= a[i] && a[i] <= m + 1) {
                return Err(Error::OutOfRange(format!("need 1 ≤ b ≤ a ≤ {} on axis {}", m + 1, i + 1)));
            }
        }
        Ok(Self { a, b })
    }

    /// Every valid rule on an `m` grid, in lexicographic order of `(a, b)`.
    pub fn all(m: usize) -> Vec<Self> {
        let pairs: Vec<(usize, usize)> =
            (1..=m + 1).flat_map(|a| (1..=a).map(move |b| (a, b))).collect();
        let mut out = Vec::with_capacity(pairs.len() * pairs.len());
        for &(a1, b1) in &pairs {
            for &(a2, b2) in &pairs {
                out.push(Self { a: [a1, a2], b: [b1, b2] });
            }
        }
        out.sort();
        out
    }

    pub fn classify(&self, x: [usize; 2]) -> PairRegion {
        if x[0] < self.a[0] && x[1] < self.a[1] {
            PairRegion::D00
        } else if x[0] >= self.b[0] && x[1] >= self.b[1] {
            PairRegion::D11
        } else if x[0] < self.b[0] {
            PairRegion::D01
        } else {
            PairRegion::D10
        }
    }

    /// Largest per-threshold distance to another rule.
    pub fn distance(&self, other: &Self) -> usize {
        (0..2)
            .flat_map(|i| [self.a[i].abs_diff(other.a[i]), self.b[i].abs_diff(other.b[i])])
            .max()
            .unwrap_or(0)
    }

    fn labels(&self, m: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(m * m);
        for x1 in 1..=m {
            for x2 in 1..=m {
                out.push(region_bits(self.classify([x1, x2])));
            }
        }
        out
    }
}

fn region_bits(r: PairRegion) -> u8 {
    let [r1, r2] = r.rejects();
    r1 as u8 | (r2 as u8) << 1
}

/// Probability that `event(x1, x2)` holds under product pmfs.
fn grid_prob<S: GridScalar>(p1: &[S], p2: &[S], event: impl Fn(usize, usize) -> bool) -> S {
    let mut total = S::zero();
    for (i, q1) in p1.iter().enumerate() {
        if q1.is_zero() {
            continue;
        }
        for (j, q2) in p2.iter().enumerate() {
            if !q2.is_zero() && event(i + 1, j + 1) {
                total = total + q1.clone() * q2.clone();
            }
        }
    }
    total
}

fn fwer_of<S: GridScalar>(model: &GridModel<S>, config: [GridConfig; 2], rejects: impl Fn(usize, usize) -> [bool; 2]) -> S {
    let nulls = config.map(GridConfig::is_true_null);
    grid_prob(&model.pmf(config[0]), &model.pmf(config[1]), |x1, x2| {
        let r = rejects(x1, x2);
        (r[0] && nulls[0]) || (r[1] && nulls[1])
    })
}

/// Exact probability that `rule` rejects some true null under `config`.
pub fn exact_fwer_grid<S: GridScalar>(rule: &ThresholdRule, model: &GridModel<S>, config: [GridConfig; 2]) -> Result<S> {
    ThresholdRule::new(rule.a, rule.b, model.m)?;
    Ok(fwer_of(model, config, |x1, x2| rule.classify([x1, x2]).rejects()))
}

/// Largest FWER over all configurations with a true null.
pub fn max_fwer_grid<S: GridScalar>(rule: &ThresholdRule, model: &GridModel<S>) -> Result<S> {
    ThresholdRule::new(rule.a, rule.b, model.m)?;
    Ok(max_fwer_of(model, |x1, x2| rule.classify([x1, x2]).rejects()))
}

fn max_fwer_of<S: GridScalar>(model: &GridModel<S>, rejects: impl Fn(usize, usize) -> [bool; 2] + Copy) -> S {
    null_configs()
        .into_iter()
        .map(|c| fwer_of(model, c, rejects))
        .fold(S::zero(), |a, b| if b > a { b } else { a })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Least probability of rejecting anything with one coordinate at the
    /// alternative and the other at the bottom.
    A1,
    /// Probability of rejecting both with both coordinates at the alternative.
    A2,
}

fn criterion_of<S: GridScalar>(model: &GridModel<S>, criterion: Criterion, rejects: impl Fn(usize, usize) -> [bool; 2] + Copy) -> S {
    let alt = model.pmf(GridConfig::Alt);
    match criterion {
        Criterion::A1 => {
            let bottom = model.pmf(GridConfig::AltBottom);
            let any = |x1: usize, x2: usize| {
                let r = rejects(x1, x2);
                r[0] || r[1]
            };
            let left = grid_prob(&alt, &bottom, any);
            let right = grid_prob(&bottom, &alt, any);
            if left < right {
                left
            } else {
                right
            }
        }
        Criterion::A2 => grid_prob(&alt, &alt, |x1, x2| rejects(x1, x2) == [true, true]),
    }
}

pub fn criterion_value<S: GridScalar>(rule: &ThresholdRule, model: &GridModel<S>, criterion: Criterion) -> S {
    criterion_of(model, criterion, |x1, x2| rule.classify([x1, x2]).rejects())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaximinResult<S> {
    pub value: S,
    /// Every rule whose value is within the scalar's slack of the best, in
    /// lexicographic order.
    pub maximizers: Vec<ThresholdRule>,
}

impl<S> MaximinResult<S> {
    /// Whether some maximizer is within one cell of `rule` in every threshold.
    pub fn within_one_cell(&self, rule: &ThresholdRule) -> bool {
        self.maximizers.iter().any(|r| r.distance(rule) <= 1)
    }
}

fn best_of<S: GridScalar>(scored: Vec<(ThresholdRule, S)>) -> Result<MaximinResult<S>> {
    let value = scored
        .iter()
        .map(|(_, v)| v.clone())
        .reduce(|a, b| if b > a { b } else { a })
        .ok_or(Error::EmptyFeasibleSet)?;
    let maximizers = scored
        .into_iter()
        .filter(|(_, v)| v.clone() + S::slack() >= value)
        .map(|(r, _)| r)
        .collect();
    Ok(MaximinResult { value, maximizers })
}

fn check_search_m(m: usize) -> Result<()> {
    if m > MAX_SEARCH_M {
        return Err(Error::OutOfRange(format!("m = {m} exceeds {MAX_SEARCH_M}")));
    }
    Ok(())
}

fn feasible_scored<S: GridScalar>(
    model: &GridModel<S>,
    alpha: &S,
    criterion: Criterion,
    keep: impl Fn(&ThresholdRule) -> bool + Sync,
) -> Vec<(ThresholdRule, S)> {
    let limit = alpha.clone() + S::slack();
    ThresholdRule::all(model.m)
        .into_par_iter()
        .filter(|r| keep(r))
        .filter_map(|r| {
            let rej = |x1, x2| r.classify([x1, x2]).rejects();
            (max_fwer_of(model, rej) <= limit).then(|| (r, criterion_of(model, criterion, rej)))
        })
        .collect()
}

/// Best threshold rule for `criterion` among those with FWER at most `α`
/// under every configuration with a true null.
pub fn brute_force_maximin<S: GridScalar>(model: &GridModel<S>, alpha: S, criterion: Criterion) -> Result<MaximinResult<S>> {
    check_search_m(model.m)?;
    best_of(feasible_scored(model, &alpha, criterion, |_| true))
}

/// Best threshold rule for A2 among feasible rules with the given `a`.
pub fn brute_force_a2_given_a<S: GridScalar>(model: &GridModel<S>, alpha: S, a: [usize; 2]) -> Result<MaximinResult<S>> {
    check_search_m(model.m)?;
    best_of(feasible_scored(model, &alpha, Criterion::A2, |r| r.a == a))
}

/// Integer solutions of the two-equation characterisation of the A1 optimum:
/// maximise `min_i P_alt(X_i ≥ a_i)` subject to
/// `P_null(X_1 ≥ a_1 or X_2 ≥ a_2) ≤ α`. Returns the value and all optimal `a`.
pub fn solve_grid_a<S: GridScalar>(model: &GridModel<S>, alpha: S) -> (S, Vec<[usize; 2]>) {
    let m = model.m;
    let limit = alpha + S::slack();
    let mut best: Option<S> = None;
    let mut scored = Vec::new();
    for a1 in 1..=m + 1 {
        for a2 in 1..=m + 1 {
            let stay = (S::one() - tail(&model.null_pmf, a1)) * (S::one() - tail(&model.null_pmf, a2));
            if S::one() - stay > limit {
                continue;
            }
            let (t1, t2) = (tail(&model.alt_pmf, a1), tail(&model.alt_pmf, a2));
            let v = if t1 < t2 { t1 } else { t2 };
            if best.as_ref().is_none_or(|b| v > *b) {
                best = Some(v.clone());
            }
            scored.push(([a1, a2], v));
        }
    }
    let best = best.unwrap_or_else(S::zero);
    let a = scored
        .into_iter()
        .filter(|(_, v)| v.clone() + S::slack() >= best)
        .map(|(a, _)| a)
        .collect();
    (best, a)
}

/// Smallest `b` with `P_null(X ≥ b) ≤ α`.
pub fn solve_grid_b<S: GridScalar>(model: &GridModel<S>, alpha: S) -> usize {
    let limit = alpha + S::slack();
    (1..=model.m + 1).find(|&b| tail(&model.null_pmf, b) <= limit).unwrap_or(model.m + 1)
}

/// A labelling of an `m × m` grid by rejection sets; bit `i` set means
/// `H_{i+1}` is rejected. Cell `(x1, x2)` is at `(x1 − 1)·m + (x2 − 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelRule {
    pub m: usize,
    pub labels: Vec<u8>,
}

impl LabelRule {
    pub fn from_threshold(rule: &ThresholdRule, m: usize) -> Self {
        Self { m, labels: rule.labels(m) }
    }

    pub fn rejects(&self, x1: usize, x2: usize) -> [bool; 2] {
        let l = self.labels[(x1 - 1) * self.m + (x2 - 1)];
        [l & 1 != 0, l & 2 != 0]
    }

    /// Every set `{x : I_x = I}` is upward closed in the coordinates of `I`
    /// and downward closed in the others. On a grid this is the workable
    /// form: with strict decreases the bottom row and column would be
    /// unconstrained.
    pub fn is_monotone(&self) -> bool {
        let m = self.m;
        for x1 in 1..=m {
            for x2 in 1..=m {
                let r = self.rejects(x1, x2);
                let range = |x: usize, rej: bool| if rej { x..=m } else { 1..=x };
                for y1 in range(x1, r[0]) {
                    for y2 in range(x2, r[1]) {
                        if self.rejects(y1, y2) != r {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Cells where nothing is rejected.
    pub fn accept_all(&self) -> Vec<bool> {
        self.labels.iter().map(|&l| l == 0).collect()
    }
}

/// Every monotone labelling of an `m × m` grid, `m ≤ 3`.
pub fn all_monotone_rules(m: usize) -> Result<Vec<LabelRule>> {
    if m == 0 || m > MAX_ENUMERATION_M {
        return Err(Error::OutOfRange(format!("m = {m} not in 1..={MAX_ENUMERATION_M}")));
    }
    let cells = m * m;
    let total = 1u64 << (2 * cells);
    Ok((0..total)
        .into_par_iter()
        .filter_map(|code| {
            let labels = (0..cells).map(|c| ((code >> (2 * c)) & 3) as u8).collect();
            let rule = LabelRule { m, labels };
            rule.is_monotone().then_some(rule)
        })
        .collect())
}

/// Best value of `criterion` over every feasible monotone rule, optionally
/// restricted to rules with a given accept-all region.
pub fn full_enumeration_maximin<S: GridScalar>(
    model: &GridModel<S>,
    alpha: S,
    criterion: Criterion,
    accept_all: Option<&[bool]>,
) -> Result<S> {
    let limit = alpha + S::slack();
    all_monotone_rules(model.m)?
        .into_par_iter()
        .filter(|r| accept_all.is_none_or(|want| r.accept_all() == want))
        .filter_map(|r| {
            let rej = |x1, x2| r.rejects(x1, x2);
            (max_fwer_of(model, rej) <= limit).then(|| criterion_of(model, criterion, rej))
        })
        .reduce_with(|a, b| if b > a { b } else { a })
        .ok_or(Error::EmptyFeasibleSet)
}

/// Indicator over a box of grid cells, last axis fastest. Coordinates are
/// 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridRegion {
    dims: Vec<usize>,
    indicator: Vec<bool>,
}

impl GridRegion {
    pub fn from_fn(dims: &[usize], f: impl Fn(&[usize]) -> bool) -> Self {
        let total = dims.iter().product();
        let mut indicator = Vec::with_capacity(total);
        let mut x = vec![1; dims.len()];
        for _ in 0..total {
            indicator.push(f(&x));
            for ax in (0..dims.len()).rev() {
                if x[ax] < dims[ax] {
                    x[ax] += 1;
                    break;
                }
                x[ax] = 1;
            }
        }
        Self { dims: dims.to_vec(), indicator }
    }

    pub fn full(dims: &[usize]) -> Self {
        Self::from_fn(dims, |_| true)
    }

    /// Union of the upward orthants `{y ≥ c}` over `corners`.
    pub fn upper_set(dims: &[usize], corners: &[Vec<usize>]) -> Self {
        Self::from_fn(dims, |x| corners.iter().any(|c| c.iter().zip(x).all(|(ci, xi)| xi >= ci)))
    }

    /// A random monotone region built from `1..=max_corners` orthants.
    pub fn random_monotone<R: Rng + ?Sized>(dims: &[usize], max_corners: usize, rng: &mut R) -> Self {
        let n = rng.random_range(1..=max_corners.max(1));
        let corners: Vec<Vec<usize>> =
            (0..n).map(|_| dims.iter().map(|&d| rng.random_range(1..=d)).collect()).collect();
        Self::upper_set(dims, &corners)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn offset(&self, x: &[usize]) -> usize {
        x.iter().zip(&self.dims).fold(0, |acc, (xi, d)| acc * d + (xi - 1))
    }

    pub fn contains(&self, x: &[usize]) -> bool {
        self.indicator[self.offset(x)]
    }

    pub fn count(&self) -> usize {
        self.indicator.iter().filter(|&&b| b).count()
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.dims == other.dims && self.indicator.iter().zip(&other.indicator).all(|(a, b)| !a || *b)
    }

    /// Upward closed in every axis.
    pub fn is_monotone(&self) -> bool {
        let mut up = vec![0; self.dims.len()];
        let dims = self.dims.clone();
        (0..self.indicator.len()).all(|off| {
            let mut rest = off;
            for ax in (0..dims.len()).rev() {
                up[ax] = rest % dims[ax] + 1;
                rest /= dims[ax];
            }
            !self.indicator[off]
                || (0..dims.len()).all(|ax| {
                    if up[ax] == dims[ax] {
                        return true;
                    }
                    up[ax] += 1;
                    let ok = self.contains(&up);
                    up[ax] -= 1;
                    ok
                })
        })
    }

    fn reduced_dims(&self, axis: usize) -> Result<Vec<usize>> {
        if axis >= self.dims.len() || self.dims.len() < 2 {
            return Err(Error::OutOfRange(format!("axis {axis} of {}", self.dims.len())));
        }
        let mut d = self.dims.clone();
        d.remove(axis);
        Ok(d)
    }

    fn lift(x: &[usize], axis: usize, z: usize) -> Vec<usize> {
        let mut full = x.to_vec();
        full.insert(axis, z);
        full
    }

    /// Section `{x : (x with x_axis = z) ∈ R}`.
    pub fn slice(&self, axis: usize, z: usize) -> Result<Self> {
        let d = self.reduced_dims(axis)?;
        if z == 0 || z > self.dims[axis] {
            return Err(Error::OutOfRange(format!("z = {z}")));
        }
        Ok(Self::from_fn(&d, |x| self.contains(&Self::lift(x, axis, z))))
    }

    /// Union of all sections along `axis`.
    pub fn slice_union(&self, axis: usize) -> Result<Self> {
        self.fold_slices(axis, true)
    }

    /// Intersection of all sections along `axis`.
    pub fn slice_intersection(&self, axis: usize) -> Result<Self> {
        self.fold_slices(axis, false)
    }

    fn fold_slices(&self, axis: usize, union: bool) -> Result<Self> {
        let d = self.reduced_dims(axis)?;
        if !self.is_monotone() {
            return Err(Error::NonMonotoneRegion);
        }
        let n = self.dims[axis];
        Ok(Self::from_fn(&d, |x| {
            let mut hits = (1..=n).map(|z| self.contains(&Self::lift(x, axis, z)));
            if union {
                hits.any(|b| b)
            } else {
                hits.all(|b| b)
            }
        }))
    }

    /// Exact probability under independent coordinates with the given pmfs.
    pub fn probability<S: GridScalar>(&self, pmfs: &[Vec<S>]) -> Result<S> {
        if pmfs.len() != self.dims.len() {
            return Err(Error::LengthMismatch { expected: self.dims.len(), got: pmfs.len() });
        }
        for (p, &d) in pmfs.iter().zip(&self.dims) {
            if p.len() != d {
                return Err(Error::LengthMismatch { expected: d, got: p.len() });
            }
        }
        let mut total = S::zero();
        let mut x = vec![1; self.dims.len()];
        for off in 0..self.indicator.len() {
            if self.indicator[off] {
                let w = x.iter().zip(pmfs).fold(S::one(), |acc, (&xi, p)| acc * p[xi - 1].clone());
                total = total + w;
            }
            for ax in (0..self.dims.len()).rev() {
                if x[ax] < self.dims[ax] {
                    x[ax] += 1;
                    break;
                }
                x[ax] = 1;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Q = Ratio<i128>;

    fn q(n: i128, d: i128) -> Q {
        Ratio::new(n, d)
    }

    fn three_by_three() -> GridModel<Q> {
        GridModel::new(vec![q(1, 2), q(1, 3), q(1, 6)], vec![q(1, 6), q(1, 3), q(1, 2)]).unwrap()
    }

    #[test]
    fn model_validation() {
        assert!(GridModel::new(vec![0.5, 0.4], vec![0.5, 0.5]).is_err());
        assert!(GridModel::new(vec![0.2, 0.8], vec![0.8, 0.2]).is_err());
        assert!(GridModel::new(vec![0.5, 0.5], vec![0.5]).is_err());
        assert!(GridModel::<f64>::new(vec![], vec![]).is_err());
        assert!(GridModel::discretized_normal(&[-1.0, 0.0, 1.0], 1.0).is_ok());
    }

    #[test]
    fn trivial_rules() {
        let g = three_by_three();
        let none = ThresholdRule::new([4, 4], [4, 4], 3).unwrap();
        let all = ThresholdRule::new([1, 1], [1, 1], 3).unwrap();
        for c in null_configs() {
            assert_eq!(exact_fwer_grid(&none, &g, c).unwrap(), q(0, 1));
            assert_eq!(exact_fwer_grid(&all, &g, c).unwrap(), q(1, 1));
        }
        assert!(ThresholdRule::new([2, 2], [3, 1], 3).is_err());
        assert!(exact_fwer_grid(&ThresholdRule { a: [5, 5], b: [1, 1] }, &g, [GridConfig::Null; 2]).is_err());
    }

    #[test]
    fn hand_enumerated_three_by_three() {
        // a = (3, 3), b = (2, 2): under (Null, Null) the only accepting cells
        // are x ≤ (2, 2), so FWER = 1 − (5/6)² = 11/36.
        let g = three_by_three();
        let r = ThresholdRule::new([3, 3], [2, 2], 3).unwrap();
        assert_eq!(exact_fwer_grid(&r, &g, [GridConfig::Null; 2]).unwrap(), q(11, 36));
        // (Null, AltTop): X2 = 3 passes a2; H1 rejected iff X1 ≥ b1 = 2.
        assert_eq!(exact_fwer_grid(&r, &g, [GridConfig::Null, GridConfig::AltTop]).unwrap(), q(1, 2));
        // (AltBottom, Null): X1 = 1 < b1, so H1 is never rejected.
        assert_eq!(exact_fwer_grid(&r, &g, [GridConfig::AltBottom, GridConfig::Null]).unwrap(), q(1, 6));
        assert_eq!(criterion_value(&r, &g, Criterion::A1), q(1, 2));
        // both reject: x ≥ (2, 2) and not both equal to 2
        assert_eq!(criterion_value(&r, &g, Criterion::A2), q(5, 6) * q(5, 6) - q(1, 3) * q(1, 3));
    }

    #[test]
    fn trivial_maximin() {
        let g = three_by_three();
        let r = brute_force_maximin(&g, q(1, 1), Criterion::A1).unwrap();
        assert_eq!(r.value, q(1, 1));
        assert!(r.maximizers.contains(&ThresholdRule { a: [1, 1], b: [1, 1] }));
        let r = brute_force_maximin(&g, q(1, 100), Criterion::A2).unwrap();
        assert_eq!(r.value, q(0, 1));
        let r = brute_force_maximin(&g, q(1, 100), Criterion::A1).unwrap();
        assert_eq!(r.value, q(0, 1));
        assert!(r.maximizers.iter().all(|m| m.a == [4, 4]));
    }

    #[test]
    fn threshold_rules_are_monotone() {
        for r in ThresholdRule::all(3) {
            assert!(LabelRule::from_threshold(&r, 3).is_monotone(), "{r:?}");
        }
        // rejecting H1 alone at a low point but not at a higher one
        let mut l = LabelRule::from_threshold(&ThresholdRule { a: [4, 4], b: [4, 4] }, 3);
        l.labels[0] = 1;
        assert!(!l.is_monotone());
    }

    #[test]
    fn monotone_rule_count_two_by_two() {
        // each M_I is a signed-monotone set on a 2×2 grid
        let rules = all_monotone_rules(2).unwrap();
        assert!(rules.iter().all(LabelRule::is_monotone));
        let thresholds: std::collections::HashSet<_> =
            ThresholdRule::all(2).iter().map(|r| LabelRule::from_threshold(r, 2)).collect();
        assert!(thresholds.iter().all(|t| rules.contains(t)));
        assert!(rules.len() > thresholds.len());
    }

    #[test]
    fn grid_equation_solvers() {
        let g = three_by_three();
        // P(X ≥ 3) = 1/6, P(X ≥ 2) = 1/2
        assert_eq!(solve_grid_b(&g, q(1, 6)), 3);
        assert_eq!(solve_grid_b(&g, q(1, 10)), 4);
        let (v, a) = solve_grid_a(&g, q(11, 36));
        assert_eq!(a, vec![[3, 3]]);
        assert_eq!(v, q(1, 2));
    }

    #[test]
    fn slices_of_full_and_nested() {
        let full = GridRegion::full(&[3, 4, 2]);
        assert_eq!(full.slice_union(2).unwrap(), GridRegion::full(&[3, 4]));
        assert_eq!(full.slice_intersection(0).unwrap(), GridRegion::full(&[4, 2]));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let r = GridRegion::random_monotone(&[4, 3, 5], 4, &mut rng);
            assert!(r.is_monotone());
            for axis in 0..3 {
                let u = r.slice_union(axis).unwrap();
                let i = r.slice_intersection(axis).unwrap();
                assert!(u.is_monotone() && i.is_monotone());
                for z in 1..=r.dims()[axis] {
                    let s = r.slice(axis, z).unwrap();
                    assert!(i.is_subset(&s) && s.is_subset(&u));
                }
                assert_eq!(u, r.slice(axis, r.dims()[axis]).unwrap());
                assert_eq!(i, r.slice(axis, 1).unwrap());
            }
        }
    }

    #[test]
    fn non_monotone_region_rejected() {
        let r = GridRegion::from_fn(&[2, 2], |x| x == [1, 1]);
        assert!(!r.is_monotone());
        assert!(matches!(r.slice_union(0), Err(Error::NonMonotoneRegion)));
        assert!(matches!(r.slice_intersection(1), Err(Error::NonMonotoneRegion)));
    }

    #[test]
    fn threshold_cell_mapping() {
        let cuts = [-1.0, 0.0, 1.0];
        assert_eq!(threshold_cell(&cuts, 0.1), 3);
        assert_eq!(threshold_cell(&cuts, -5.0), 2);
        assert_eq!(threshold_cell(&cuts, 0.9), 4);
        assert_eq!(threshold_cell(&cuts, f64::INFINITY), 5);
    }
}
