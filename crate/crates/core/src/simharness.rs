//! Seeded Monte Carlo estimation of error rates and power.
//!
//! Replicate `r` always draws from ChaCha stream `r` of the base seed, and
//! every tally is an integer count, so reports are bit-identical however the
//! replicates are split across threads. Procedures evaluated in the same call
//! see the same draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constants::{solve_stepdown, solve_stepup, ConstantLadder, LadderKind};
use crate::error::{Error, Result};
use crate::models::{replicate_rng, ExtReal, ModelSpec, ThetaVector};
use crate::procedures::{holm_mask, stepdown_mask, stepup_mask};
use crate::scalar::Real;

/// Smallest replicate count accepted by the estimators.
pub const MIN_REPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Procedure<T> {
    Stepdown(ConstantLadder<T>),
    Stepup(ConstantLadder<T>),
    /// Holm's rule on the null p-values `1 − F₀(x_i)`.
    Holm { alpha: T },
}

impl<T: Real> Procedure<T> {
    pub fn stepdown(model: &ModelSpec<T>, alpha: T) -> Result<Self> {
        Ok(Self::Stepdown(solve_stepdown(model, alpha)?))
    }

    pub fn stepup(model: &ModelSpec<T>, alpha: T) -> Result<Self> {
        Ok(Self::Stepup(solve_stepup(model, alpha)?))
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Stepdown(_) => "stepdown",
            Self::Stepup(_) => "stepup",
            Self::Holm { .. } => "holm",
        }
    }

    pub fn alpha(&self) -> T {
        match self {
            Self::Stepdown(l) | Self::Stepup(l) => l.alpha(),
            Self::Holm { alpha } => *alpha,
        }
    }

    fn check(&self, model: &ModelSpec<T>) -> Result<()> {
        match self {
            Self::Stepdown(l) | Self::Stepup(l) => {
                let want = if matches!(self, Self::Stepdown(_)) { LadderKind::Stepdown } else { LadderKind::Stepup };
                if l.kind() != want {
                    return Err(Error::WrongLadderKind(want.name()));
                }
                if l.k() != model.k() {
                    return Err(Error::LengthMismatch { expected: model.k(), got: l.k() });
                }
                if want == LadderKind::Stepup {
                    l.check_monotone()?;
                }
                Ok(())
            }
            Self::Holm { alpha } => {
                if *alpha > T::zero() && *alpha < T::one() {
                    Ok(())
                } else {
                    Err(Error::OutOfRange(format!("alpha = {alpha}")))
                }
            }
        }
    }

    /// Rejection mask for one statistic vector; returns the rejection count.
    fn reject_into(&self, model: &ModelSpec<T>, x: &[T], s: &mut Scratch<T>, out: &mut [bool]) -> usize {
        match self {
            Self::Stepdown(l) => stepdown_mask(x, l.values(), &mut s.idx, out),
            Self::Stepup(l) => stepup_mask(x, l.values(), &mut s.idx, out),
            Self::Holm { alpha } => {
                s.p.clear();
                let null = ExtReal::Finite(T::zero());
                s.p.extend(x.iter().map(|&v| model.marginal_sf(null, v).unwrap_or(T::one())));
                holm_mask(&s.p, *alpha, &mut s.idx, out)
            }
        }
    }

    /// Rejection mask for a single statistic vector.
    pub fn reject(&self, model: &ModelSpec<T>, x: &[T]) -> Result<Vec<bool>> {
        self.check(model)?;
        if x.len() != model.k() {
            return Err(Error::LengthMismatch { expected: model.k(), got: x.len() });
        }
        let mut s = Scratch::default();
        let mut out = vec![false; x.len()];
        self.reject_into(model, x, &mut s, &mut out);
        Ok(out)
    }
}

#[derive(Debug, Default)]
struct Scratch<T> {
    idx: Vec<usize>,
    p: Vec<T>,
}

/// The per-replicate view handed to a tally closure.
pub struct Replicate<'a, T> {
    pub index: u64,
    pub x: &'a [T],
    /// One rejection mask per procedure, in call order.
    pub masks: &'a [Vec<bool>],
    pub counts: &'a [usize],
}

struct Worker<T> {
    x: Vec<T>,
    masks: Vec<Vec<bool>>,
    counts: Vec<usize>,
    scratch: Scratch<T>,
    tally: Vec<u64>,
}

/// Runs `procedures` on `reps` common draws at `theta` and sums the integer
/// event vectors written by `tally`. This is the engine behind every
/// estimator here.
pub fn count_events<T, F>(
    model: &ModelSpec<T>,
    theta: &ThetaVector<T>,
    procedures: &[Procedure<T>],
    reps: usize,
    seed: u64,
    n_events: usize,
    tally: F,
) -> Result<Vec<u64>>
where
    T: Real,
    F: Fn(&Replicate<'_, T>, &mut [u64]) + Sync,
{
    if reps == 0 {
        return Err(Error::OutOfRange("reps must be at least 1".into()));
    }
    let k = model.k();
    if theta.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: theta.len() });
    }
    model.check_thetas(theta.components())?;
    for p in procedures {
        p.check(model)?;
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let th = theta.components();
    let totals = (0..reps as u64)
        .into_par_iter()
        .fold(
            || Worker {
                x: vec![T::zero(); k],
                masks: vec![vec![false; k]; procedures.len()],
                counts: vec![0; procedures.len()],
                scratch: Scratch::default(),
                tally: vec![0u64; n_events],
            },
            |mut w, r| {
                let mut rng = replicate_rng(&base, r);
                model.draw(th, &mut rng, &mut w.x);
                for (i, p) in procedures.iter().enumerate() {
                    w.counts[i] = p.reject_into(model, &w.x, &mut w.scratch, &mut w.masks[i]);
                }
                let rep = Replicate { index: r, x: &w.x, masks: &w.masks, counts: &w.counts };
                tally(&rep, &mut w.tally);
                w
            },
        )
        .map(|w| w.tally)
        .reduce(
            || vec![0u64; n_events],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(totals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Fwer,
    RejectAtLeast { j: usize, false_only: bool },
}

impl Metric {
    pub fn name(&self) -> String {
        match self {
            Metric::Fwer => "fwer".into(),
            Metric::RejectAtLeast { j, false_only: false } => format!("reject-ge-{j}"),
            Metric::RejectAtLeast { j, false_only: true } => format!("reject-ge-{j}-false"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Target<T> {
    pub metric: Metric,
    pub procedure: String,
    pub theta: ThetaVector<T>,
    pub model: ModelSpec<T>,
    pub alpha: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport<T> {
    pub estimate: f64,
    /// Three binomial standard errors.
    pub half_width: f64,
    pub reps: usize,
    pub seed: u64,
    pub target: Target<T>,
}

impl<T> SimulationReport<T> {
    fn from_count(hits: u64, reps: usize, seed: u64, target: Target<T>) -> Self {
        let p = hits as f64 / reps as f64;
        Self { estimate: p, half_width: half_width(p, reps), reps, seed, target }
    }

    /// Whether `value` lies within the reported half-width.
    pub fn covers(&self, value: f64) -> bool {
        (self.estimate - value).abs() <= self.half_width
    }
}

pub fn half_width(p: f64, reps: usize) -> f64 {
    3.0 * (p * (1.0 - p) / reps as f64).sqrt()
}

fn check_reps(reps: usize) -> Result<()> {
    if reps < MIN_REPS {
        return Err(Error::OutOfRange(format!("reps = {reps} below {MIN_REPS}")));
    }
    Ok(())
}

/// Probability of rejecting at least one hypothesis with `θ_i ≤ 0`.
pub fn estimate_fwer<T: Real>(
    model: &ModelSpec<T>,
    theta: &ThetaVector<T>,
    procedure: &Procedure<T>,
    reps: usize,
    seed: u64,
) -> Result<SimulationReport<T>> {
    check_reps(reps)?;
    let nulls = theta.true_nulls();
    if !nulls.iter().any(|&b| b) {
        return Err(Error::NoTrueNull);
    }
    let hits = count_events(model, theta, std::slice::from_ref(procedure), reps, seed, 1, |rep, t| {
        if rep.masks[0].iter().zip(&nulls).any(|(&r, &n)| r && n) {
            t[0] += 1;
        }
    })?;
    let target = Target {
        metric: Metric::Fwer,
        procedure: procedure.id().into(),
        theta: theta.clone(),
        model: *model,
        alpha: procedure.alpha(),
    };
    Ok(SimulationReport::from_count(hits[0], reps, seed, target))
}

/// Probability of rejecting at least `j` hypotheses, or at least `j` false
/// ones (`θ_i > 0`) when `false_only` is set.
pub fn estimate_reject_at_least<T: Real>(
    model: &ModelSpec<T>,
    theta: &ThetaVector<T>,
    procedure: &Procedure<T>,
    j: usize,
    reps: usize,
    seed: u64,
    false_only: bool,
) -> Result<SimulationReport<T>> {
    check_reps(reps)?;
    if j > model.k() {
        return Err(Error::OutOfRange(format!("j = {j} exceeds k = {}", model.k())));
    }
    let target = Target {
        metric: Metric::RejectAtLeast { j, false_only },
        procedure: procedure.id().into(),
        theta: theta.clone(),
        model: *model,
        alpha: procedure.alpha(),
    };
    if j == 0 {
        if theta.len() != model.k() {
            return Err(Error::LengthMismatch { expected: model.k(), got: theta.len() });
        }
        return Ok(SimulationReport::from_count(reps as u64, reps, seed, target));
    }
    let falses: Vec<bool> = theta.true_nulls().iter().map(|n| !n).collect();
    let hits = count_events(model, theta, std::slice::from_ref(procedure), reps, seed, 1, |rep, t| {
        let n = if false_only {
            rep.masks[0].iter().zip(&falses).filter(|(&r, &f)| r && f).count()
        } else {
            rep.counts[0]
        };
        if n >= j {
            t[0] += 1;
        }
    })?;
    Ok(SimulationReport::from_count(hits[0], reps, seed, target))
}

/// Replicate counts where one procedure failed to dominate another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dominance {
    pub winner: usize,
    pub loser: usize,
    /// Replicates where `winner` rejected fewer hypotheses than `loser`.
    pub count_violations: u64,
    /// Replicates where `winner`'s rejections did not contain `loser`'s.
    pub superset_violations: u64,
}

impl Dominance {
    pub fn holds(&self) -> bool {
        self.count_violations == 0 && self.superset_violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow<T> {
    pub theta: ThetaVector<T>,
    /// FWER per procedure; `None` when θ has no true null.
    pub fwer: Vec<Option<f64>>,
    /// `reject_ge[p][j - 1]` estimates P(reject ≥ j) for procedure `p`.
    pub reject_ge: Vec<Vec<f64>>,
    /// One entry per ordered pair of distinct procedures.
    pub dominance: Vec<Dominance>,
}

impl<T> ComparisonRow<T> {
    pub fn dominance(&self, winner: usize, loser: usize) -> Option<&Dominance> {
        self.dominance.iter().find(|d| d.winner == winner && d.loser == loser)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable<T> {
    pub procedures: Vec<String>,
    pub model: ModelSpec<T>,
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<ComparisonRow<T>>,
}

/// Runs every procedure on shared draws at each θ of the grid. All rows use
/// the same seed, so row-to-row differences reflect θ only.
pub fn compare_procedures<T: Real>(
    model: &ModelSpec<T>,
    thetas: &[ThetaVector<T>],
    procedures: &[Procedure<T>],
    reps: usize,
    seed: u64,
) -> Result<ComparisonTable<T>> {
    check_reps(reps)?;
    if procedures.len() < 2 {
        return Err(Error::OutOfRange("at least two procedures are needed".into()));
    }
    let k = model.k();
    let np = procedures.len();
    let pairs: Vec<(usize, usize)> =
        (0..np).flat_map(|a| (0..np).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    // layout: fwer[np] | reject_ge[np * k] | count/superset violations per pair
    let n_events = np + np * k + 2 * pairs.len();
    let mut rows = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let nulls = theta.true_nulls();
        let any_null = nulls.iter().any(|&b| b);
        let t = count_events(model, theta, procedures, reps, seed, n_events, |rep, t| {
            for p in 0..np {
                if rep.masks[p].iter().zip(&nulls).any(|(&r, &n)| r && n) {
                    t[p] += 1;
                }
                for j in 1..=rep.counts[p] {
                    t[np + p * k + j - 1] += 1;
                }
            }
            let off = np + np * k;
            for (q, &(a, b)) in pairs.iter().enumerate() {
                if rep.counts[a] < rep.counts[b] {
                    t[off + 2 * q] += 1;
                }
                if rep.masks[b].iter().zip(&rep.masks[a]).any(|(&lb, &wa)| lb && !wa) {
                    t[off + 2 * q + 1] += 1;
                }
            }
        })?;
        let n = reps as f64;
        let off = np + np * k;
        rows.push(ComparisonRow {
            theta: theta.clone(),
            fwer: (0..np).map(|p| any_null.then(|| t[p] as f64 / n)).collect(),
            reject_ge: (0..np).map(|p| (0..k).map(|j| t[np + p * k + j] as f64 / n).collect()).collect(),
            dominance: pairs
                .iter()
                .enumerate()
                .map(|(q, &(a, b))| Dominance {
                    winner: a,
                    loser: b,
                    count_violations: t[off + 2 * q],
                    superset_violations: t[off + 2 * q + 1],
                })
                .collect(),
        });
    }
    Ok(ComparisonTable {
        procedures: procedures.iter().map(|p| p.id().to_string()).collect(),
        model: *model,
        reps,
        seed,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::{beta_stepdown_with, beta_stepup_with, lfc_theta, null_lfc_theta};

    const REPS: usize = 200_000;

    fn normal3() -> (ModelSpec<f64>, Procedure<f64>, Procedure<f64>) {
        let m = ModelSpec::iid_normal(3).unwrap();
        (m, Procedure::stepdown(&m, 0.05).unwrap(), Procedure::stepup(&m, 0.05).unwrap())
    }

    #[test]
    fn stepdown_fwer_at_null_lfc() {
        let (m, sd, _) = normal3();
        for j in 1..=3 {
            let r = estimate_fwer(&m, &null_lfc_theta(3, j).unwrap(), &sd, REPS, 11).unwrap();
            assert!(r.covers(0.05), "j={j}: {} ± {}", r.estimate, r.half_width);
        }
    }

    #[test]
    fn stepup_fwer_at_zero() {
        let (m, _, su) = normal3();
        let r = estimate_fwer(&m, &ThetaVector::zeros(3), &su, REPS, 12).unwrap();
        assert!(r.estimate <= 0.05 + r.half_width);
    }

    #[test]
    fn very_negative_theta_never_rejects() {
        let (m, sd, su) = normal3();
        let th = ThetaVector::constant(3, -50.0);
        for p in [&sd, &su] {
            assert_eq!(estimate_fwer(&m, &th, p, MIN_REPS, 1).unwrap().estimate, 0.0);
        }
        let th = ThetaVector(vec![ExtReal::NegInf; 3]);
        assert_eq!(estimate_fwer(&m, &th, &sd, MIN_REPS, 1).unwrap().estimate, 0.0);
    }

    #[test]
    fn power_matches_analytic() {
        let (m, sd, su) = normal3();
        let (Procedure::Stepdown(f), Procedure::Stepup(d)) = (&sd, &su) else { unreachable!() };
        for j in 1..=3 {
            let th = lfc_theta(3, j, 1.0).unwrap();
            let r = estimate_reject_at_least(&m, &th, &sd, j, REPS, 5, false).unwrap();
            assert!(r.covers(beta_stepdown_with(f, j, 1.0).unwrap()));
            let r = estimate_reject_at_least(&m, &th, &su, j, REPS, 5, false).unwrap();
            assert!(r.covers(beta_stepup_with(d, j, 1.0).unwrap()));
        }
    }

    #[test]
    fn false_only_matches_at_lfc() {
        let (m, sd, _) = normal3();
        let th = lfc_theta(3, 2, 1.0).unwrap();
        let a = estimate_reject_at_least(&m, &th, &sd, 2, MIN_REPS, 9, false).unwrap();
        let b = estimate_reject_at_least(&m, &th, &sd, 2, MIN_REPS, 9, true).unwrap();
        assert_eq!(a.estimate, b.estimate);
    }

    #[test]
    fn trivial_and_error_cases() {
        let (m, sd, _) = normal3();
        let th = ThetaVector::zeros(3);
        assert_eq!(estimate_reject_at_least(&m, &th, &sd, 0, MIN_REPS, 1, false).unwrap().estimate, 1.0);
        assert!(estimate_reject_at_least(&m, &th, &sd, 4, MIN_REPS, 1, false).is_err());
        assert!(estimate_fwer(&m, &th, &sd, 100, 1).is_err());
        let all_false = ThetaVector::constant(3, 1.0);
        assert!(matches!(estimate_fwer(&m, &all_false, &sd, MIN_REPS, 1), Err(Error::NoTrueNull)));
        assert!(estimate_fwer(&m, &ThetaVector::zeros(2), &sd, MIN_REPS, 1).is_err());
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let (m, sd, _) = normal3();
        let th = ThetaVector::zeros(3);
        let a = estimate_fwer(&m, &th, &sd, 50_000, 3).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = one.install(|| estimate_fwer(&m, &th, &sd, 50_000, 3).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn duplicated_procedure_gives_identical_columns() {
        let (m, sd, _) = normal3();
        let t = compare_procedures(&m, &[ThetaVector::constant(3, 0.5)], &[sd.clone(), sd], MIN_REPS, 2).unwrap();
        let row = &t.rows[0];
        assert_eq!(row.fwer[0], row.fwer[1]);
        assert_eq!(row.reject_ge[0], row.reject_ge[1]);
        assert!(row.dominance.iter().all(Dominance::holds));
    }

    #[test]
    fn exact_stepdown_dominates_holm() {
        let (m, sd, _) = normal3();
        let holm = Procedure::Holm { alpha: 0.05 };
        let thetas = [ThetaVector::zeros(3), ThetaVector::constant(3, 2.0)];
        let t = compare_procedures(&m, &thetas, &[sd, holm], 50_000, 4).unwrap();
        for row in &t.rows {
            assert!(row.dominance(0, 1).unwrap().holds());
            assert!(row.reject_ge[0][0] >= row.reject_ge[1][0]);
        }
    }

    #[test]
    fn holm_mask_agrees_with_decision() {
        let m = ModelSpec::<f64>::iid_normal(4).unwrap();
        let x = [2.9, -0.3, 2.4, 1.0];
        let p: Vec<f64> = x.iter().map(|&v| crate::normal::sf(v)).collect();
        let want = crate::procedures::holm_bonferroni(&p, 0.05).unwrap().mask();
        assert_eq!(Procedure::Holm { alpha: 0.05 }.reject(&m, &x).unwrap(), want);
    }
}
