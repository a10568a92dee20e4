//! Joint probabilities of order statistics against a threshold ladder.
//!
//! For `j` conditionally i.i.d. coordinates the event
//! `{X_(i) ≤ ℓ_i for all i}` equals `{#{X ≤ ℓ_i} ≥ i for all i}`. Cutting the
//! line at the ladder gives `j + 1` cells; a dynamic program over
//! (cell, points placed so far) with binomial cell weights sums the cell
//! count configurations that satisfy every prefix constraint. All terms are
//! nonnegative, so there is no cancellation.

use crate::error::{Error, Result};
use crate::models::{Conditional, ExtReal, ModelSpec};
use crate::scalar::Real;

/// Ladder sizes above this use log-gamma binomial weights.
const DIRECT_BINOMIAL_MAX: usize = 64;

/// Nondecreasing thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdLadder<T>(Vec<T>);

impl<T: Real> ThresholdLadder<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::OutOfRange("ladder must be nonempty".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Data("ladder contains NaN".into()));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::UnsortedLadder(i + 1));
        }
        Ok(ThresholdLadder(values))
    }

    /// Replaces each entry by the minimum of itself and all later entries.
    /// `{X_(i) ≤ ℓ_i ∀i}` is unchanged because `X_(i) ≤ X_(m)` for `m > i`.
    pub fn from_unsorted(mut values: Vec<T>) -> Result<Self> {
        for i in (0..values.len().saturating_sub(1)).rev() {
            values[i] = values[i].min(values[i + 1]);
        }
        Self::new(values)
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `P(#{X ≤ cut_i} ≥ i ∀i)` for `j = cuts.len()` i.i.d. points, where
/// `cuts[i]` is the (nondecreasing) probability mass below the i-th
/// threshold.
pub(crate) fn count_dp<T: Real>(cuts: &[T]) -> T {
    let j = cuts.len();
    let binom = Binomials::new(j);
    let mut dp = vec![T::zero(); j + 1];
    let mut next = vec![T::zero(); j + 1];
    dp[0] = T::one();
    let mut below = T::zero();
    for cell in 0..=j {
        let upper = if cell < j { cuts[cell] } else { T::one() };
        let p = (upper - below).max(T::zero());
        below = below.max(upper);
        next.iter_mut().for_each(|v| *v = T::zero());
        // after this cell at least `cell + 1` points must be placed (for the
        // final cell, exactly j)
        let min_total = (cell + 1).min(j);
        for placed in 0..=j {
            let w = dp[placed];
            if w == T::zero() {
                continue;
            }
            let left = j - placed;
            if cell == j {
                next[j] = next[j] + w * p.powi(left as i32);
                continue;
            }
            let mut pk = T::one();
            for n in 0..=left {
                let total = placed + n;
                if total >= min_total {
                    next[total] = next[total] + w * binom.weight(left, n, pk);
                }
                pk = pk * p;
            }
        }
        std::mem::swap(&mut dp, &mut next);
    }
    dp[j]
}

struct Binomials<T> {
    table: Option<Vec<Vec<T>>>,
}

impl<T: Real> Binomials<T> {
    fn new(j: usize) -> Self {
        if j > DIRECT_BINOMIAL_MAX {
            return Binomials { table: None };
        }
        let mut table = vec![vec![T::one()]];
        for n in 1..=j {
            let prev = &table[n - 1];
            let mut row = vec![T::one(); n + 1];
            for m in 1..n {
                row[m] = prev[m - 1] + prev[m];
            }
            table.push(row);
        }
        Binomials { table: Some(table) }
    }

    /// `C(n, m) · p^m` given `p^m`.
    #[inline]
    fn weight(&self, n: usize, m: usize, pm: T) -> T {
        match &self.table {
            Some(t) => t[n][m] * pm,
            None => {
                if pm == T::zero() {
                    return T::zero();
                }
                let ln_c = T::c(n as f64 + 1.0).log_gamma()
                    - T::c(m as f64 + 1.0).log_gamma()
                    - T::c((n - m) as f64 + 1.0).log_gamma();
                (ln_c + pm.ln()).exp()
            }
        }
    }
}

fn check(model: &ModelSpec<impl Real>, j: usize, len: usize) -> Result<()> {
    model.check_j(j)?;
    if len != j {
        return Err(Error::LengthMismatch { expected: j, got: len });
    }
    Ok(())
}

/// `P(X_{j:i} ≤ ladder_i for i = 1..j)` for the ascending order statistics of
/// `j` null coordinates.
pub fn joint_orderstat_cdf<T: Real>(
    model: &ModelSpec<T>,
    j: usize,
    ladder: &ThresholdLadder<T>,
) -> Result<T> {
    check(model, j, ladder.len())?;
    Ok(cdf_unchecked(model, ladder.values()))
}

pub(crate) fn cdf_unchecked<T: Real>(model: &ModelSpec<T>, ladder: &[T]) -> T {
    let mut cuts = vec![T::zero(); ladder.len()];
    model.over_factor(|c: &Conditional<T>| {
        for (u, &l) in cuts.iter_mut().zip(ladder) {
            *u = c.cdf(l);
        }
        count_dp(&cuts)
    })
}

/// `P(X_(i) > g_i for i = 1..j)` for the ascending order statistics of `j`
/// coordinates all at parameter `shift`.
///
/// Evaluated by reflection: the event is `{(−X)_(m) < −g_{j+1−m}}`, an
/// order-statistic CDF event for the negated coordinates.
pub fn joint_orderstat_survival<T: Real>(
    model: &ModelSpec<T>,
    j: usize,
    ladder: &ThresholdLadder<T>,
    shift: ExtReal<T>,
) -> Result<T> {
    check(model, j, ladder.len())?;
    model.check_theta(shift)?;
    let g = ladder.values();
    let mut cuts = vec![T::zero(); j];
    Ok(model.over_factor(|c: &Conditional<T>| {
        for (m, u) in cuts.iter_mut().enumerate() {
            *u = c.sf_at(shift, g[j - 1 - m]);
        }
        count_dp(&cuts)
    }))
}
