//! Critical constants: the stepdown ladder `f_j`, the stepup ladder `d_j` and
//! the two-hypothesis constants `a`, `b`, `ã`.
//!
//! Ladders are indexed by the number of hypotheses still in play, so
//! `value(j)` is the threshold used when `j` hypotheses are active. Neither
//! ladder depends on the total number of hypotheses: the ladder for `k` is
//! the ladder for `k − 1` with one more rung.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::models::{ExtReal, Family, ModelSpec};
use crate::orderstat::{self, ThresholdLadder};
use crate::roots;
use crate::scalar::Real;

/// Bracket width at which root finding stops, on the statistic scale.
pub const SOLVER_XTOL: f64 = 1e-12;
/// Largest accepted defining-equation residual, on the probability scale.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadderKind {
    Stepdown,
    Stepup,
}

impl LadderKind {
    pub fn name(self) -> &'static str {
        match self {
            LadderKind::Stepdown => "stepdown",
            LadderKind::Stepup => "stepup",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstantLadder<T> {
    kind: LadderKind,
    alpha: T,
    model: ModelSpec<T>,
    values: Vec<T>,
    residuals: Vec<T>,
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if alpha > T::zero() && alpha < T::one() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("alpha = {alpha} not in (0, 1)")))
    }
}

/// `1 − (1 − α)^{1/j}` without cancellation.
fn per_coordinate_level<T: Real>(alpha: T, j: usize) -> T {
    -((-alpha).ln_1p() / T::c(j as f64)).exp_m1()
}

impl<T: Real> ConstantLadder<T> {
    /// Wraps externally supplied constants (e.g. a cached document), checking
    /// the ordering and recomputing residuals.
    pub fn from_values(kind: LadderKind, alpha: T, model: ModelSpec<T>, values: Vec<T>) -> Result<Self> {
        check_alpha(alpha)?;
        if values.len() != model.k() {
            return Err(Error::LengthMismatch { expected: model.k(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("constants must be finite".into()));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] < w[0]) {
            return Err(match kind {
                LadderKind::Stepup => Error::NonMonotoneLadder {
                    j: i + 2,
                    value: values[i + 1].as_f64(),
                    prev: values[i].as_f64(),
                },
                LadderKind::Stepdown => Error::UnsortedLadder(i + 1),
            });
        }
        let residuals = (1..=values.len())
            .map(|j| residual(kind, &model, alpha, &values[..j]))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConstantLadder { kind, alpha, model, values, residuals })
    }

    pub fn kind(&self) -> LadderKind {
        self.kind
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn model(&self) -> &ModelSpec<T> {
        &self.model
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// Threshold with `j` hypotheses in play (1-based): `f_j` or `d_j`.
    pub fn value(&self, j: usize) -> T {
        self.values[j - 1]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `c_{k,i} = f_{k−i+1}`: the stepdown threshold at step `i` of `k`.
    pub fn step_threshold(&self, k: usize, i: usize) -> T {
        self.values[k - i]
    }

    /// Defining-equation residuals, one per rung.
    pub fn residuals(&self) -> &[T] {
        &self.residuals
    }

    pub fn max_abs_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, r| m.max(r.abs()))
    }

    /// The first `k` rungs as a ladder for a `k`-hypothesis problem.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.k() {
            return Err(Error::OutOfRange(format!("k = {k} not in 1..={}", self.k())));
        }
        Ok(ConstantLadder {
            kind: self.kind,
            alpha: self.alpha,
            model: self.model.with_k(k)?,
            values: self.values[..k].to_vec(),
            residuals: self.residuals[..k].to_vec(),
        })
    }

    /// Validation used by the stepup rule before deciding.
    pub fn check_monotone(&self) -> Result<()> {
        match self.values.windows(2).position(|w| w[1] < w[0]) {
            None => Ok(()),
            Some(i) => Err(Error::NonMonotoneLadder {
                j: i + 2,
                value: self.values[i + 1].as_f64(),
                prev: self.values[i].as_f64(),
            }),
        }
    }
}

/// Residual of the defining equation for the last entry of `prefix`.
fn residual<T: Real>(kind: LadderKind, model: &ModelSpec<T>, alpha: T, prefix: &[T]) -> Result<T> {
    let j = prefix.len();
    let target = T::one() - alpha;
    Ok(match kind {
        LadderKind::Stepdown => model.max_cdf_null(j, prefix[j - 1])? - target,
        LadderKind::Stepup => orderstat::cdf_unchecked(model, prefix) - target,
    })
}

/// `f_j` for `j = 1..k`: `P(max(X_1..X_j) > f_j) = α` at θ = 0.
pub fn solve_stepdown<T: Real>(model: &ModelSpec<T>, alpha: T) -> Result<ConstantLadder<T>> {
    check_alpha(alpha)?;
    let zero = ExtReal::Finite(T::zero());
    let mut values = Vec::with_capacity(model.k());
    for j in 1..=model.k() {
        let f = match model.family() {
            Family::EquicorrNormal { rho } if rho > T::zero() && j > 1 => {
                model.max_quantile_null(j, T::one() - alpha)?
            }
            _ => model.marginal_upper_quantile(zero, per_coordinate_level(alpha, j))?,
        };
        values.push(f);
    }
    finish(LadderKind::Stepdown, model, alpha, values)
}

/// `d_j` for `j = 1..k`, solved in sequence:
/// `P(X_{j:1} ≤ d_1, …, X_{j:j} ≤ d_j) = 1 − α` at θ = 0 with the earlier
/// rungs fixed.
pub fn solve_stepup<T: Real>(model: &ModelSpec<T>, alpha: T) -> Result<ConstantLadder<T>> {
    check_alpha(alpha)?;
    let zero = ExtReal::Finite(T::zero());
    let target = T::one() - alpha;
    let mut values = vec![model.marginal_upper_quantile(zero, alpha)?];
    let tol = T::c(RESIDUAL_TOL);
    for j in 2..=model.k() {
        let prev = values[j - 2];
        let mut trial = values.clone();
        trial.push(prev);
        let d = roots::solve_increasing(
            |d| {
                trial[j - 1] = d;
                let eff = ThresholdLadder::from_unsorted(trial.clone())
                    .map(|l| orderstat::cdf_unchecked(model, l.values()))
                    .unwrap_or(T::nan());
                eff - target
            },
            prev,
            T::c(0.5),
            T::c(SOLVER_XTOL),
        )?;
        if d < prev - tol {
            return Err(Error::NonMonotoneLadder { j, value: d.as_f64(), prev: prev.as_f64() });
        }
        values.push(d.max(prev));
    }
    finish(LadderKind::Stepup, model, alpha, values)
}

fn finish<T: Real>(kind: LadderKind, model: &ModelSpec<T>, alpha: T, values: Vec<T>) -> Result<ConstantLadder<T>> {
    let ladder = ConstantLadder::from_values(kind, alpha, *model, values)?;
    let worst = ladder.max_abs_residual();
    // NaN residuals must fail too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let bad = !(worst <= T::tol(RESIDUAL_TOL));
    if bad {
        return Err(Error::RootNotFound(format!("{} residual {worst} exceeds tolerance", kind.name())));
    }
    Ok(ladder)
}

/// Solves either ladder kind.
pub fn solve_ladder<T: Real>(kind: LadderKind, model: &ModelSpec<T>, alpha: T) -> Result<ConstantLadder<T>> {
    match kind {
        LadderKind::Stepdown => solve_stepdown(model, alpha),
        LadderKind::Stepup => solve_stepup(model, alpha),
    }
}

/// Residuals of the two-hypothesis defining equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairResiduals<T> {
    /// `P_{0,0}(X_1 > a_1 or X_2 > a_2) − α`
    pub level_a: T,
    /// `P_{ε_1}(X_1 > a_1) − P_{ε_2}(X_2 > a_2)`
    pub balance_a: T,
    /// `P_0(X_i ≥ b_i) − α`
    pub level_b: [T; 2],
    /// `P_{0,0}(reject at least one) − α` for the stepup-optimal rule
    pub level_a_tilde: T,
    /// `P_{ε_1}(X_1 ≥ ã_1) − P_{ε_2}(X_2 ≥ ã_2)`
    pub balance_a_tilde: T,
}

impl<T: Real> PairResiduals<T> {
    pub fn max_abs(&self) -> T {
        [
            self.level_a,
            self.balance_a,
            self.level_b[0],
            self.level_b[1],
            self.level_a_tilde,
            self.balance_a_tilde,
        ]
        .iter()
        .fold(T::zero(), |m, r| m.max(r.abs()))
    }
}

/// Constants of the two optimal two-hypothesis rules.
#[derive(Debug, Clone, PartialEq)]
pub struct PairConstants<T> {
    pub alpha: T,
    pub epsilon: [T; 2],
    pub a: [T; 2],
    pub b: [T; 2],
    pub a_tilde: [T; 2],
    pub model: ModelSpec<T>,
    pub residuals: PairResiduals<T>,
}

fn check_pair<T: Real>(model: &ModelSpec<T>, alpha: T, epsilon: [T; 2]) -> Result<()> {
    check_alpha(alpha)?;
    if model.k() != 2 {
        return Err(Error::InvalidModel(format!("pair constants need k = 2, got {}", model.k())));
    }
    if !model.supports_shift() {
        return Err(Error::ShiftUnsupported("epsilon".into()));
    }
    if !epsilon.iter().all(|&e| e > T::zero() && e.is_finite()) {
        return Err(Error::OutOfRange("epsilon components must be positive".into()));
    }
    Ok(())
}

fn null2<T: Real>() -> [ExtReal<T>; 2] {
    [ExtReal::Finite(T::zero()); 2]
}

/// `P_{0,0}(X_1 ≤ x_1, X_2 ≤ x_2)`.
fn joint_null_cdf<T: Real>(model: &ModelSpec<T>, x: [T; 2]) -> T {
    model.prob_all_below(&null2(), &x).unwrap_or(T::nan())
}

/// `P_{0,0}` of the stepup-optimal accept-both region
/// `{X ≤ ã} ∖ {X_1 > b_1, X_2 > b_2}`.
fn accept_both_stepup<T: Real>(model: &ModelSpec<T>, a_tilde: [T; 2], b: [T; 2]) -> T {
    let full = joint_null_cdf(model, a_tilde);
    if a_tilde[0] <= b[0] || a_tilde[1] <= b[1] {
        return full;
    }
    joint_null_cdf(model, [b[0], a_tilde[1]]) + joint_null_cdf(model, [a_tilde[0], b[1]])
        - joint_null_cdf(model, b)
}

/// `(a, b)` of the stepdown-optimal rule: `a` solves
/// `P_{0,0}(X_1 > a_1 or X_2 > a_2) = α` with `P_{ε_1}(X_1 > a_1) = P_{ε_2}(X_2 > a_2)`,
/// and `b_i` is the marginal upper-α point.
///
/// In a location family the balance condition is `a_1 − ε_1 = a_2 − ε_2`, so
/// only `a_1` is searched for.
pub fn solve_pair_stepdown<T: Real>(
    model: &ModelSpec<T>,
    alpha: T,
    epsilon: [T; 2],
) -> Result<([T; 2], [T; 2])> {
    check_pair(model, alpha, epsilon)?;
    let zero = ExtReal::Finite(T::zero());
    let bi = model.marginal_upper_quantile(zero, alpha)?;
    let b = [bi, bi];
    let delta = epsilon[1] - epsilon[0];
    let target = T::one() - alpha;
    let a1 = roots::solve_increasing(
        |a1| joint_null_cdf(model, [a1, a1 + delta]) - target,
        bi.max(bi - delta),
        T::c(0.5),
        T::c(SOLVER_XTOL),
    )?;
    Ok(([a1, a1 + delta], b))
}

/// `ã` of the stepup-optimal rule: the accept-both region
/// `{X_1 ≤ ã_1, X_2 ≤ ã_2} ∖ {X_1 > b_1, X_2 > b_2}` has null probability
/// `1 − α`, with `P_{ε_1}(X_1 ≥ ã_1) = P_{ε_2}(X_2 ≥ ã_2)`.
pub fn solve_pair_stepup<T: Real>(
    model: &ModelSpec<T>,
    alpha: T,
    epsilon: [T; 2],
    b: [T; 2],
) -> Result<[T; 2]> {
    check_pair(model, alpha, epsilon)?;
    let delta = epsilon[1] - epsilon[0];
    let target = T::one() - alpha;
    let a1 = roots::solve_increasing(
        |a1| accept_both_stepup(model, [a1, a1 + delta], b) - target,
        b[0].max(b[1] - delta) + T::c(0.5),
        T::c(0.5),
        T::c(SOLVER_XTOL),
    )?;
    Ok([a1, a1 + delta])
}

impl<T: Real> PairConstants<T> {
    /// Solves all constants and checks `b_i < a_i < ã_i`.
    pub fn solve(model: &ModelSpec<T>, alpha: T, epsilon: [T; 2]) -> Result<Self> {
        let (a, b) = solve_pair_stepdown(model, alpha, epsilon)?;
        let a_tilde = solve_pair_stepup(model, alpha, epsilon, b)?;
        let zero = ExtReal::Finite(T::zero());
        let tail = |th: T, x: T| model.marginal_sf(ExtReal::Finite(th), x);
        let residuals = PairResiduals {
            level_a: T::one() - joint_null_cdf(model, a) - alpha,
            balance_a: tail(epsilon[0], a[0])? - tail(epsilon[1], a[1])?,
            level_b: [
                model.marginal_sf(zero, b[0])? - alpha,
                model.marginal_sf(zero, b[1])? - alpha,
            ],
            level_a_tilde: T::one() - accept_both_stepup(model, a_tilde, b) - alpha,
            balance_a_tilde: tail(epsilon[0], a_tilde[0])? - tail(epsilon[1], a_tilde[1])?,
        };
        for i in 0..2 {
            if !(b[i] < a[i] && a[i] < a_tilde[i]) {
                return Err(Error::Ordering(format!(
                    "expected b < a < ã at {}: {} {} {}",
                    i + 1,
                    b[i],
                    a[i],
                    a_tilde[i]
                )));
            }
        }
        Ok(PairConstants { alpha, epsilon, a, b, a_tilde, model: *model, residuals })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct CacheKey {
    kind: LadderKind,
    family: &'static str,
    rho_bits: u64,
    k: usize,
    alpha_bits: u64,
}

/// Thread-safe memo of solved ladders keyed by (kind, family, ρ, k, α).
#[derive(Debug, Default)]
pub struct LadderCache<T> {
    inner: RwLock<HashMap<CacheKey, ConstantLadder<T>>>,
}

impl<T: Real> LadderCache<T> {
    pub fn new() -> Self {
        LadderCache { inner: RwLock::new(HashMap::new()) }
    }

    fn key(kind: LadderKind, model: &ModelSpec<T>, alpha: T) -> CacheKey {
        CacheKey {
            kind,
            family: model.family().name(),
            rho_bits: model.family().rho().as_f64().to_bits(),
            k: model.k(),
            alpha_bits: alpha.as_f64().to_bits(),
        }
    }

    pub fn get_or_solve(&self, kind: LadderKind, model: &ModelSpec<T>, alpha: T) -> Result<ConstantLadder<T>> {
        let key = Self::key(kind, model, alpha);
        if let Some(hit) = self.inner.read().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let solved = solve_ladder(kind, model, alpha)?;
        self.inner.write().expect("cache lock").insert(key, solved.clone());
        Ok(solved)
    }

    pub fn len(&self) -> usize {
        self.inner.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal;

    #[test]
    fn uniform_closed_forms() {
        let m = ModelSpec::<f64>::iid_uniform_null(4).unwrap();
        let f = solve_stepdown(&m, 0.05).unwrap();
        for j in 1..=4 {
            assert!((f.value(j) - 0.95f64.powf(1.0 / j as f64)).abs() < 1e-14);
        }
        assert!((f.value(2) - 0.974_679).abs() < 1e-6);
        assert!((f.value(4) - 0.987_259).abs() < 1e-6);
        let d = solve_stepup(&m, 0.05).unwrap();
        assert_eq!(d.value(1), 0.95);
        assert!((d.value(2) - 0.975).abs() < 1e-12, "{}", d.value(2));
        assert!(d.max_abs_residual() <= 1e-9);
    }

    #[test]
    fn single_hypothesis_is_marginal_quantile() {
        let m = ModelSpec::<f64>::iid_normal(1).unwrap();
        let f = solve_stepdown(&m, 0.05).unwrap();
        let d = solve_stepup(&m, 0.05).unwrap();
        assert_eq!(f.values(), d.values());
        assert!((f.value(1) - normal::quantile(0.95)).abs() < 1e-13);
    }

    #[test]
    fn iid_closed_form_matches_root_finding() {
        // independent route: bisection on F(t)^j = 1 − α
        let m = ModelSpec::<f64>::iid_normal(5).unwrap();
        let f = solve_stepdown(&m, 0.1).unwrap();
        for j in 1..=5 {
            let (mut lo, mut hi) = (-10.0f64, 10.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if normal::cdf(mid).powi(j as i32) < 0.9 {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            assert!((f.value(j) - lo).abs() < 1e-10);
        }
    }

    #[test]
    fn equicorr_ladders_solve_their_equations() {
        let m = ModelSpec::<f64>::equicorr_normal(3, 0.5).unwrap();
        let f = solve_stepdown(&m, 0.05).unwrap();
        for j in 1..=3 {
            assert!((m.max_cdf_null(j, f.value(j)).unwrap() - 0.95).abs() <= 1e-9);
        }
        let d = solve_stepup(&m, 0.05).unwrap();
        assert!(d.max_abs_residual() <= 1e-9);
        assert_eq!(f.value(1), d.value(1));
    }

    #[test]
    fn pair_constants_independent_normal() {
        let m = ModelSpec::<f64>::iid_normal(2).unwrap();
        let pc = PairConstants::solve(&m, 0.05, [1.0, 1.0]).unwrap();
        let a = normal::quantile(0.95f64.sqrt());
        assert!((pc.a[0] - a).abs() < 1e-10 && (pc.a[1] - a).abs() < 1e-10);
        assert!((pc.a[0] - 1.9545).abs() < 1e-4);
        assert!((pc.b[0] - 1.6449).abs() < 1e-4);
        assert!(pc.residuals.max_abs() <= 1e-9);
        // accept-both region equals the stepup region {X_(1) ≤ d_1, X_(2) ≤ d_2}
        let d = solve_stepup(&m, 0.05).unwrap();
        assert!((pc.a_tilde[0] - d.value(2)).abs() < 1e-8);
        assert!((pc.a_tilde[1] - d.value(2)).abs() < 1e-8);
    }

    #[test]
    fn pair_constants_errors() {
        let m = ModelSpec::<f64>::iid_normal(2).unwrap();
        assert!(PairConstants::solve(&m, 0.05, [0.0, 1.0]).is_err());
        let m3 = ModelSpec::<f64>::iid_normal(3).unwrap();
        assert!(PairConstants::solve(&m3, 0.05, [1.0, 1.0]).is_err());
        let u = ModelSpec::<f64>::iid_uniform_null(2).unwrap();
        assert!(PairConstants::solve(&u, 0.05, [1.0, 1.0]).is_err());
    }

    #[test]
    fn asymmetric_epsilon_balances_tails() {
        let m = ModelSpec::<f64>::equicorr_normal(2, 0.3).unwrap();
        let pc = PairConstants::solve(&m, 0.05, [0.5, 2.0]).unwrap();
        assert!(pc.residuals.max_abs() <= 1e-9);
        assert!((pc.a[1] - pc.a[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn bad_alpha() {
        let m = ModelSpec::<f64>::iid_normal(2).unwrap();
        assert!(solve_stepdown(&m, 0.0).is_err());
        assert!(solve_stepup(&m, 1.0).is_err());
    }

    #[test]
    fn from_values_rejects_decreasing_stepup() {
        let m = ModelSpec::<f64>::iid_normal(2).unwrap();
        let e = ConstantLadder::from_values(LadderKind::Stepup, 0.05, m, vec![2.0, 1.0]);
        assert!(matches!(e, Err(Error::NonMonotoneLadder { j: 2, .. })));
    }

    #[test]
    fn cache_reuses_solutions() {
        let cache = LadderCache::<f64>::new();
        let m = ModelSpec::iid_normal(3).unwrap();
        let a = cache.get_or_solve(LadderKind::Stepup, &m, 0.05).unwrap();
        let b = cache.get_or_solve(LadderKind::Stepup, &m, 0.05).unwrap();
        assert_eq!(a, b);
        assert_eq!(cache.len(), 1);
        cache.get_or_solve(LadderKind::Stepdown, &m, 0.05).unwrap();
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn f32_ladders() {
        let m = ModelSpec::<f32>::iid_normal(3).unwrap();
        let f = solve_stepdown(&m, 0.05).unwrap();
        let d = solve_stepup(&m, 0.05).unwrap();
        assert!((f.value(2) - 1.9545).abs() < 1e-3);
        assert!((d.value(2) - 1.96).abs() < 1e-3);
    }
}
