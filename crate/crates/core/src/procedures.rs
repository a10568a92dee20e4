//! Decision rules: general stepdown and stepup, the two-hypothesis region
//! classifiers, Holm's rule, and a randomized checker for the monotone-rule
//! property.
//!
//! Ties among statistics are broken by original index: the lower index is
//! treated as the more significant one when sorting descending and as the
//! smaller one when sorting ascending.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{ConstantLadder, LadderKind, PairConstants};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Reject,
    Accept,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep<T> {
    /// 1-based step number.
    pub step: usize,
    /// 0-based hypothesis index.
    pub hypothesis: usize,
    pub statistic: T,
    pub threshold: T,
    pub outcome: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision<T> {
    pub verdicts: Vec<Verdict>,
    pub trace: Vec<TraceStep<T>>,
}

impl<T: Real> Decision<T> {
    /// Indices of rejected hypotheses, ascending.
    pub fn rejected(&self) -> Vec<usize> {
        (0..self.verdicts.len()).filter(|&i| self.verdicts[i] == Verdict::Reject).collect()
    }

    pub fn num_rejected(&self) -> usize {
        self.verdicts.iter().filter(|v| **v == Verdict::Reject).count()
    }

    pub fn mask(&self) -> Vec<bool> {
        self.verdicts.iter().map(|v| *v == Verdict::Reject).collect()
    }
}

fn check_input<T: Real>(x: &[T], ladder: &ConstantLadder<T>, kind: LadderKind) -> Result<()> {
    if ladder.kind() != kind {
        return Err(Error::WrongLadderKind(kind.name()));
    }
    if x.len() != ladder.k() {
        return Err(Error::LengthMismatch { expected: ladder.k(), got: x.len() });
    }
    if x.iter().any(|v| v.is_nan()) {
        return Err(Error::Data("statistic is NaN".into()));
    }
    Ok(())
}

/// Indices sorted by decreasing statistic, ties by increasing index.
pub(crate) fn order_descending<T: Real>(x: &[T], idx: &mut Vec<usize>) {
    idx.clear();
    idx.extend(0..x.len());
    idx.sort_by(|&a, &b| x[b].partial_cmp(&x[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
}

/// Indices sorted by increasing statistic, ties by increasing index.
pub(crate) fn order_ascending<T: Real>(x: &[T], idx: &mut Vec<usize>) {
    idx.clear();
    idx.extend(0..x.len());
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
}

/// Number of hypotheses the stepdown rule rejects, writing the mask.
/// `values[j - 1]` is the threshold with `j` hypotheses in play.
pub(crate) fn stepdown_mask<T: Real>(x: &[T], values: &[T], idx: &mut Vec<usize>, out: &mut [bool]) -> usize {
    let k = x.len();
    order_descending(x, idx);
    out.iter_mut().for_each(|o| *o = false);
    for (step, &h) in idx.iter().enumerate() {
        if x[h] >= values[k - 1 - step] {
            out[h] = true;
        } else {
            return step;
        }
    }
    k
}

/// Number of hypotheses the stepup rule rejects, writing the mask.
pub(crate) fn stepup_mask<T: Real>(x: &[T], values: &[T], idx: &mut Vec<usize>, out: &mut [bool]) -> usize {
    let k = x.len();
    order_ascending(x, idx);
    out.iter_mut().for_each(|o| *o = false);
    match (0..k).find(|&pos| x[idx[pos]] > values[pos]) {
        Some(first) => {
            for &h in &idx[first..] {
                out[h] = true;
            }
            k - first
        }
        None => 0,
    }
}

/// Number of hypotheses Holm's rule rejects on p-values, writing the mask.
pub(crate) fn holm_mask<T: Real>(p: &[T], alpha: T, idx: &mut Vec<usize>, out: &mut [bool]) -> usize {
    let k = p.len();
    order_ascending(p, idx);
    out.iter_mut().for_each(|o| *o = false);
    for (step, &h) in idx.iter().enumerate() {
        if p[h] <= alpha / T::c((k - step) as f64) {
            out[h] = true;
        } else {
            return step;
        }
    }
    k
}

/// Stepdown rule: order the statistics decreasingly and keep rejecting while
/// the `i`-th largest is at least `f_{k−i+1}`.
pub fn stepdown_decide<T: Real>(x: &[T], ladder: &ConstantLadder<T>) -> Result<Decision<T>> {
    check_input(x, ladder, LadderKind::Stepdown)?;
    let k = x.len();
    let mut idx = Vec::with_capacity(k);
    order_descending(x, &mut idx);
    let mut verdicts = vec![Verdict::Accept; k];
    let mut trace = Vec::new();
    for (step, &h) in idx.iter().enumerate() {
        let threshold = ladder.value(k - step);
        let outcome = if x[h] >= threshold { Verdict::Reject } else { Verdict::Accept };
        trace.push(TraceStep { step: step + 1, hypothesis: h, statistic: x[h], threshold, outcome });
        if outcome == Verdict::Accept {
            break;
        }
        verdicts[h] = Verdict::Reject;
    }
    Ok(Decision { verdicts, trace })
}

/// Stepup rule: order the statistics increasingly; at the first `j` with
/// `X_(j) > d_j`, reject the `k − j + 1` largest.
pub fn stepup_decide<T: Real>(x: &[T], ladder: &ConstantLadder<T>) -> Result<Decision<T>> {
    check_input(x, ladder, LadderKind::Stepup)?;
    ladder.check_monotone()?;
    let k = x.len();
    let mut idx = Vec::with_capacity(k);
    order_ascending(x, &mut idx);
    let mut verdicts = vec![Verdict::Accept; k];
    let mut trace = Vec::new();
    for (pos, &h) in idx.iter().enumerate() {
        let threshold = ladder.value(pos + 1);
        if x[h] > threshold {
            trace.push(TraceStep { step: pos + 1, hypothesis: h, statistic: x[h], threshold, outcome: Verdict::Reject });
            for &r in &idx[pos..] {
                verdicts[r] = Verdict::Reject;
            }
            break;
        }
        trace.push(TraceStep { step: pos + 1, hypothesis: h, statistic: x[h], threshold, outcome: Verdict::Accept });
    }
    Ok(Decision { verdicts, trace })
}

/// Regions of the two-hypothesis sample space, named by which nulls are
/// rejected: `D01` rejects only H₂, `D10` only H₁.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairRegion {
    D00,
    D01,
    D10,
    D11,
}

impl PairRegion {
    pub fn rejects(self) -> [bool; 2] {
        match self {
            PairRegion::D00 => [false, false],
            PairRegion::D01 => [false, true],
            PairRegion::D10 => [true, false],
            PairRegion::D11 => [true, true],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairVariant {
    StepdownOpt,
    StepupOpt,
}

/// Classifies `x` under one of the two optimal two-hypothesis rules.
///
/// Stepdown-optimal: accept both iff `X_1 ≤ a_1` and `X_2 ≤ a_2`; otherwise
/// reject both when `X_i ≥ b_i` for both, else reject only the coordinate
/// above its `a`.
///
/// Stepup-optimal: reject both iff `X_1 > b_1` and `X_2 > b_2`; otherwise
/// accept both when `X_i ≤ ã_i` for both, else reject only the coordinate
/// above its `ã`.
///
/// The cases are tested in that order, which settles the measure-zero
/// boundary overlaps between the region definitions.
pub fn pair_classify<T: Real>(x: [T; 2], c: &PairConstants<T>, variant: PairVariant) -> PairRegion {
    match variant {
        PairVariant::StepdownOpt => {
            if x[0] <= c.a[0] && x[1] <= c.a[1] {
                PairRegion::D00
            } else if x[0] >= c.b[0] && x[1] >= c.b[1] {
                PairRegion::D11
            } else if x[1] > c.a[1] {
                PairRegion::D01
            } else {
                PairRegion::D10
            }
        }
        PairVariant::StepupOpt => {
            if x[0] > c.b[0] && x[1] > c.b[1] {
                PairRegion::D11
            } else if x[0] <= c.a_tilde[0] && x[1] <= c.a_tilde[1] {
                PairRegion::D00
            } else if x[1] > c.a_tilde[1] {
                PairRegion::D01
            } else {
                PairRegion::D10
            }
        }
    }
}

/// Holm's sequentially rejective rule on p-values: the `i`-th smallest is
/// compared with `α / (k − i + 1)`.
pub fn holm_bonferroni<T: Real>(p: &[T], alpha: T) -> Result<Decision<T>> {
    if let Some(bad) = p.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
        return Err(Error::Data(format!("p-value {bad} outside [0, 1]")));
    }
    let k = p.len();
    let mut idx = Vec::with_capacity(k);
    order_ascending(p, &mut idx);
    let mut verdicts = vec![Verdict::Accept; k];
    let mut trace = Vec::new();
    for (step, &h) in idx.iter().enumerate() {
        let threshold = alpha / T::c((k - step) as f64);
        let outcome = if p[h] <= threshold { Verdict::Reject } else { Verdict::Accept };
        trace.push(TraceStep { step: step + 1, hypothesis: h, statistic: p[h], threshold, outcome });
        if outcome == Verdict::Accept {
            break;
        }
        verdicts[h] = Verdict::Reject;
    }
    Ok(Decision { verdicts, trace })
}

/// A perturbed point whose rejection set differs from the base point's.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneViolation<T> {
    pub trial: usize,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub rejected_x: Vec<bool>,
    pub rejected_y: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneReport<T> {
    pub trials: usize,
    pub violations: Vec<MonotoneViolation<T>>,
}

impl<T> MonotoneReport<T> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Draws `y` with `y_i ≥ x_i` on rejected and `y_i < x_i` on accepted
/// coordinates and checks the rejection set is unchanged.
///
/// Perturbation sizes are log-uniform over several orders of magnitude, and
/// rejected coordinates are sometimes left unchanged.
pub fn check_monotone<T: Real>(
    decide: impl Fn(&[T]) -> Vec<bool>,
    x: &[T],
    trials: usize,
    seed: u64,
) -> MonotoneReport<T> {
    let base = decide(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut y = x.to_vec();
    for trial in 0..trials {
        for i in 0..x.len() {
            let size = T::c(10f64.powf(rng.random_range(-4.0..1.0)));
            y[i] = if base[i] {
                if rng.random_bool(0.2) {
                    x[i]
                } else {
                    x[i] + size
                }
            } else {
                // −∞ cannot move further down
                let lowered = x[i] - size;
                if lowered < x[i] {
                    lowered
                } else {
                    x[i]
                }
            };
        }
        let got = decide(&y);
        if got != base {
            violations.push(MonotoneViolation {
                trial,
                x: x.to_vec(),
                y: y.clone(),
                rejected_x: base.clone(),
                rejected_y: got,
            });
        }
    }
    MonotoneReport { trials, violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{solve_stepdown, solve_stepup};
    use crate::models::ModelSpec;

    fn uniform_ladders(k: usize) -> (ConstantLadder<f64>, ConstantLadder<f64>) {
        let m = ModelSpec::iid_uniform_null(k).unwrap();
        (solve_stepdown(&m, 0.05).unwrap(), solve_stepup(&m, 0.05).unwrap())
    }

    #[test]
    fn stepdown_two_hypotheses() {
        let m = ModelSpec::iid_normal(2).unwrap();
        let f = solve_stepdown(&m, 0.05).unwrap();
        let d = stepdown_decide(&[f.value(2) + 1.0, f.value(1) + 1.0], &f).unwrap();
        assert_eq!(d.rejected(), vec![0, 1]);
        // both above f_1 but the gate at f_2 fails
        let delta = 0.1;
        assert!(f.value(2) - delta > f.value(1));
        let x = [f.value(2) - delta, f.value(2) - delta];
        let d = stepdown_decide(&x, &f).unwrap();
        assert!(d.rejected().is_empty());
        assert_eq!(d.trace.len(), 1);
    }

    #[test]
    fn stepdown_three_uniform_hand_trace() {
        let (f, _) = uniform_ladders(3);
        assert!((f.value(3) - 0.983_048).abs() < 1e-6);
        let d = stepdown_decide(&[0.99, 0.98, 0.10], &f).unwrap();
        assert_eq!(d.verdicts, vec![Verdict::Reject, Verdict::Reject, Verdict::Accept]);
        let steps: Vec<_> = d.trace.iter().map(|s| (s.step, s.hypothesis, s.outcome)).collect();
        assert_eq!(
            steps,
            vec![(1, 0, Verdict::Reject), (2, 1, Verdict::Reject), (3, 2, Verdict::Accept)]
        );
    }

    #[test]
    fn stepup_examples() {
        let (_, d) = uniform_ladders(2);
        assert!(stepup_decide(&[0.96, 0.94], &d).unwrap().rejected().is_empty());
        assert_eq!(stepup_decide(&[0.98, 0.94], &d).unwrap().rejected(), vec![0]);
        // smallest above d_1: everything goes
        assert_eq!(stepup_decide(&[0.951, 0.99], &d).unwrap().rejected(), vec![0, 1]);
    }

    #[test]
    fn input_errors() {
        let (f, d) = uniform_ladders(2);
        assert!(matches!(stepdown_decide(&[0.1], &f), Err(Error::LengthMismatch { .. })));
        assert!(matches!(stepdown_decide(&[0.1, 0.2], &d), Err(Error::WrongLadderKind(_))));
        assert!(stepup_decide(&[f64::NAN, 0.2], &d).is_err());
        assert!(holm_bonferroni(&[0.1, 1.2], 0.05).is_err());
    }

    #[test]
    fn ties_resolve_by_index() {
        let (f, d) = uniform_ladders(2);
        let x = [0.99, 0.99];
        let sd = stepdown_decide(&x, &f).unwrap();
        assert_eq!(sd.trace[0].hypothesis, 0);
        let su = stepup_decide(&[0.5, 0.5], &d).unwrap();
        assert_eq!(su.trace[0].hypothesis, 0);
    }

    #[test]
    fn sentinels() {
        let m = ModelSpec::iid_normal(3).unwrap();
        let f = solve_stepdown(&m, 0.05).unwrap();
        let d = solve_stepup(&m, 0.05).unwrap();
        let x = [f64::INFINITY, f64::NEG_INFINITY, 0.0];
        assert_eq!(stepdown_decide(&x, &f).unwrap().rejected(), vec![0]);
        assert_eq!(stepup_decide(&x, &d).unwrap().rejected(), vec![0]);
    }

    #[test]
    fn holm_examples() {
        let d = holm_bonferroni(&[0.01f64, 0.03], 0.05).unwrap();
        assert_eq!(d.rejected(), vec![0, 1]);
        assert!((d.trace[0].threshold - 0.025).abs() < 1e-15);
        assert!(holm_bonferroni(&[0.2, 0.3, 0.06], 0.05).unwrap().rejected().is_empty());
        // exact independent first threshold is looser than α/k
        let exact = 1.0 - 0.95f64.powf(0.25);
        assert!((exact - 0.012_741).abs() < 1e-6);
        assert!(exact > 0.05 / 4.0);
        let p = [0.0126, 0.5, 0.5, 0.5];
        assert!(holm_bonferroni(&p, 0.05).unwrap().rejected().is_empty());
        let (f, _) = uniform_ladders(4);
        let x: Vec<f64> = p.iter().map(|v| 1.0 - v).collect();
        assert_eq!(stepdown_decide(&x, &f).unwrap().rejected(), vec![0]);
    }

    #[test]
    fn masks_match_decisions() {
        let m = ModelSpec::iid_normal(4).unwrap();
        let f = solve_stepdown(&m, 0.1).unwrap();
        let d = solve_stepup(&m, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut idx = Vec::new();
        let mut mask = vec![false; 4];
        for _ in 0..2000 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..3.5)).collect();
            let n = stepdown_mask(&x, f.values(), &mut idx, &mut mask);
            let dec = stepdown_decide(&x, &f).unwrap();
            assert_eq!(mask, dec.mask());
            assert_eq!(n, dec.num_rejected());
            let n = stepup_mask(&x, d.values(), &mut idx, &mut mask);
            let dec = stepup_decide(&x, &d).unwrap();
            assert_eq!(mask, dec.mask());
            assert_eq!(n, dec.num_rejected());
        }
    }

    #[test]
    fn pair_regions() {
        let m = ModelSpec::iid_normal(2).unwrap();
        let c = PairConstants::solve(&m, 0.05, [1.0, 1.0]).unwrap();
        assert_eq!(
            pair_classify([c.b[0] - 1.0, c.a[1] + 1.0], &c, PairVariant::StepdownOpt),
            PairRegion::D01
        );
        assert_eq!(
            pair_classify([c.a_tilde[0] + 1.0, c.a_tilde[1] + 1.0], &c, PairVariant::StepupOpt),
            PairRegion::D11
        );
        assert_eq!(pair_classify([0.0, 0.0], &c, PairVariant::StepupOpt), PairRegion::D00);
        assert_eq!(
            pair_classify([c.a[0] + 0.01, c.b[1] - 0.5], &c, PairVariant::StepdownOpt),
            PairRegion::D10
        );
    }

    #[test]
    fn monotone_checker_detects_broken_rule() {
        let m = ModelSpec::iid_normal(3).unwrap();
        let d = solve_stepup(&m, 0.05).unwrap();
        let good = |x: &[f64]| stepup_decide(x, &d).unwrap().mask();
        let x = [2.2, 1.0, 0.5];
        assert!(check_monotone(good, &x, 2000, 1).is_clean());

        // A decreasing stepup ladder breaks error control but not this
        // property: the rejected set is always the top statistics, and the
        // perturbation can only lower the accepted order statistics.
        let decreasing = [2.5, 1.0, 0.5];
        let stepup_decreasing = |x: &[f64]| {
            let mut idx = Vec::new();
            let mut out = vec![false; x.len()];
            stepup_mask(x, &decreasing, &mut idx, &mut out);
            out
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for t in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..3.0)).collect();
            assert!(check_monotone(stepup_decreasing, &x, 200, t).is_clean());
        }

        // rejecting both inside a small south-west square is not monotone
        let southwest = |x: &[f64]| {
            let both = (x[0] > 1.645 && x[1] > 1.645)
                || ((-3.1..-2.9).contains(&x[0]) && (-3.1..-2.9).contains(&x[1]));
            vec![both, both]
        };
        let report = check_monotone(southwest, &[-3.0, -3.0], 2000, 1);
        assert!(!report.is_clean());
    }
}
