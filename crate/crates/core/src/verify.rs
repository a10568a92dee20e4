//! The release checks, one per acceptance criterion.
//!
//! `Level::Fast` runs every analytic identity and 10⁵-replicate simulations;
//! `Level::Slow` uses 10⁶ replicates and adds the grid maximin oracle.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constants::{solve_stepdown, solve_stepup, ConstantLadder, LadderKind, PairConstants, RESIDUAL_TOL};
use crate::error::Result;
use crate::gridoracle::{
    brute_force_a2_given_a, brute_force_maximin, criterion_value, full_enumeration_maximin, max_fwer_grid,
    solve_grid_a, solve_grid_b, threshold_cell, Criterion, GridModel, GridRegion, ThresholdRule,
};
use crate::models::{ExtReal, ModelSpec, ThetaVector};
use crate::normal;
use crate::power::{beta_stepdown_with, beta_stepup_with, lfc_theta, pair_criteria};
use crate::procedures::{check_monotone, pair_classify, PairRegion, PairVariant};
use crate::simharness::{compare_procedures, count_events, estimate_fwer, half_width, Procedure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Slow,
}

impl Level {
    pub fn reps(self) -> usize {
        match self {
            Level::Fast => 100_000,
            Level::Slow => 1_000_000,
        }
    }
}

/// Deliberate defects used to show that the checks can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Every stepdown rung lowered by 0.25.
    WrongConstant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub level: Level,
    pub fault: Option<Fault>,
}

impl VerifyOptions {
    pub fn new(level: Level) -> Self {
        Self { level, fault: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: usize,
    pub name: &'static str,
    pub status: Status,
    /// Failed invariants one per line, or a short summary on success.
    pub detail: String,
    pub elapsed: Duration,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    /// `PASS C4 fwer-at-least-favorable (12.3s): …`
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        let first = self.detail.lines().next().unwrap_or("");
        format!("{tag} C{} {} ({:.1}s): {first}", self.id, self.name, self.elapsed.as_secs_f64())
    }
}

pub const CRITERIA: [(usize, &str); 10] = [
    (1, "closed-form-constants"),
    (2, "ladder-identities"),
    (3, "pair-constant-ordering"),
    (4, "fwer-at-least-favorable"),
    (5, "maximin-power-formulas"),
    (6, "pair-criterion-tradeoff"),
    (7, "monotone-rules"),
    (8, "grid-maximin-oracle"),
    (9, "slice-identities"),
    (10, "procedure-dominance"),
];

/// Collects failures; an empty log means the check passed.
#[derive(Default)]
struct Log {
    failures: Vec<String>,
    checked: usize,
}

impl Log {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn error(&mut self, what: &str, e: crate::error::Error) {
        self.checked += 1;
        self.failures.push(format!("{what}: {e}"));
    }

    fn finish(self, summary: String) -> (bool, String) {
        if self.failures.is_empty() {
            (true, format!("{} checks; {summary}", self.checked))
        } else {
            let mut s = format!("{} of {} checks failed", self.failures.len(), self.checked);
            for f in &self.failures {
                let _ = write!(s, "\n  {f}");
            }
            (false, s)
        }
    }
}

fn theta_str(t: &ThetaVector<f64>) -> String {
    let parts: Vec<String> = t.components().iter().map(|c| c.to_string()).collect();
    format!("({})", parts.join(","))
}

fn stepdown_ladder(model: &ModelSpec<f64>, alpha: f64, fault: Option<Fault>) -> Result<ConstantLadder<f64>> {
    let f = solve_stepdown(model, alpha)?;
    match fault {
        Some(Fault::WrongConstant) => {
            let shifted = f.values().iter().map(|v| v - 0.25).collect();
            ConstantLadder::from_values(LadderKind::Stepdown, alpha, *model, shifted)
        }
        None => Ok(f),
    }
}

pub fn run_all(opts: VerifyOptions) -> Vec<CheckOutcome> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, opts)).collect()
}

/// Runs one criterion by number; unknown numbers fail.
pub fn run_criterion(id: usize, opts: VerifyOptions) -> CheckOutcome {
    let name = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1);
    let start = Instant::now();
    let result = match id {
        1 => Some(closed_form_constants()),
        2 => Some(ladder_identities()),
        3 => Some(pair_ordering()),
        4 => Some(fwer_at_lfc(opts)),
        5 => Some(maximin_power(opts)),
        6 => Some(pair_tradeoff(opts)),
        7 => Some(monotone_rules(opts)),
        8 if opts.level == Level::Slow => Some(grid_oracle()),
        8 => None,
        9 => Some(slice_identities()),
        10 => Some(dominance()),
        _ => Some((false, format!("no criterion {id}"))),
    };
    let elapsed = start.elapsed();
    let (status, detail) = match result {
        Some((true, d)) => (Status::Pass, d),
        Some((false, d)) => (Status::Fail, d),
        None => (Status::Skipped, "runs at the slow level only".into()),
    };
    CheckOutcome { id, name, status, detail, elapsed }
}

fn closed_form_constants() -> (bool, String) {
    let start = Instant::now();
    let mut log = Log::default();
    let alpha = 0.05;
    let k = 8;
    let m = ModelSpec::iid_uniform_null(k).expect("valid model");
    match (solve_stepdown(&m, alpha), solve_stepup(&m, alpha)) {
        (Ok(f), Ok(d)) => {
            for j in 1..=k {
                let want = 0.95f64.powf(1.0 / j as f64);
                log.expect((f.value(j) - want).abs() <= 1e-12, || format!("f_{j} = {} vs {want}", f.value(j)));
            }
            log.expect((d.value(1) - 0.95).abs() <= 1e-12, || format!("d_1 = {}", d.value(1)));
            log.expect((d.value(2) - 0.975).abs() <= 1e-12, || format!("d_2 = {} vs 0.975", d.value(2)));
            for l in [&f, &d] {
                let r = l.max_abs_residual();
                log.expect(r <= RESIDUAL_TOL, || format!("{} residual {r:e}", l.kind().name()));
            }
        }
        (Err(e), _) | (_, Err(e)) => log.error("uniform ladders", e),
    }
    let t = start.elapsed();
    log.expect(t < Duration::from_secs(1), || format!("runtime {t:?} over 1 s"));
    log.finish(format!("d_2 = 0.975, runtime {:.3}s", t.as_secs_f64()))
}

fn ladder_identities() -> (bool, String) {
    let mut log = Log::default();
    let alpha = 0.05;
    let k = 8;
    let models: [Result<ModelSpec<f64>>; 3] = [
        ModelSpec::iid_normal(k),
        ModelSpec::equicorr_normal(k, 0.25),
        ModelSpec::equicorr_normal(k, 0.5),
    ];
    for m in models.into_iter().map(|m| m.expect("valid model")) {
        let name = format!("{} rho={}", m.family().name(), m.family().rho());
        let (f, d) = match (solve_stepdown(&m, alpha), solve_stepup(&m, alpha)) {
            (Ok(f), Ok(d)) => (f, d),
            (Err(e), _) | (_, Err(e)) => {
                log.error(&name, e);
                continue;
            }
        };
        log.expect((f.value(1) - d.value(1)).abs() <= 1e-10, || format!("{name}: f_1 != d_1"));
        for j in 2..=k {
            log.expect(f.value(j) < d.value(j), || {
                format!("{name}: f_{j} = {} not below d_{j} = {}", f.value(j), d.value(j))
            });
        }
        // c_{k,j} = f_{k−j+1} depends on k − j only
        for kk in 1..k {
            match solve_stepdown(&m.with_k(kk).expect("k in range"), alpha) {
                Ok(small) => {
                    for kj in 1..=kk {
                        log.expect(small.value(kj) == f.value(kj), || {
                            format!("{name}: c shared across k={kk} and k={k} differs at f_{kj}")
                        });
                    }
                }
                Err(e) => log.error(&name, e),
            }
        }
        if m.family().rho() == 0.0 {
            for kj in 1..=k {
                let p = normal::sf(f.value(kj));
                let lhs = -(kj as f64 * (-p).ln_1p()).exp_m1();
                log.expect((lhs - alpha).abs() <= 1e-9, || format!("p-scale identity at {kj}: {lhs}"));
            }
        }
    }
    log.finish("f_1 = d_1, f_j < d_j, shared rungs exact, p-scale identity".into())
}

fn pair_ordering() -> (bool, String) {
    let mut log = Log::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    for n in 0..10 {
        let rho = if n % 2 == 0 { 0.0 } else { rng.random_range(0.05..0.8) };
        let alpha = rng.random_range(0.01..0.2);
        let eps = [rng.random_range(0.2..3.0), rng.random_range(0.2..3.0)];
        let model = if rho == 0.0 { ModelSpec::iid_normal(2) } else { ModelSpec::equicorr_normal(2, rho) };
        let model = model.expect("valid model");
        let tag = format!("rho={rho:.3} alpha={alpha:.3} eps=({:.3},{:.3})", eps[0], eps[1]);
        match PairConstants::solve(&model, alpha, eps) {
            Ok(c) => {
                for i in 0..2 {
                    log.expect(c.b[i] < c.a[i] && c.a[i] < c.a_tilde[i], || {
                        format!("{tag}: b={} a={} ã={} out of order", c.b[i], c.a[i], c.a_tilde[i])
                    });
                }
                let r = c.residuals.max_abs();
                log.expect(r <= RESIDUAL_TOL, || format!("{tag}: residual {r:e}"));
            }
            Err(e) => log.error(&tag, e),
        }
    }
    log.finish("b < a < ã on 10 fixtures".into())
}

fn fwer_at_lfc(opts: VerifyOptions) -> (bool, String) {
    let start = Instant::now();
    let mut log = Log::default();
    let alpha = 0.05;
    let reps = opts.level.reps();
    let mut fixtures: Vec<ModelSpec<f64>> = (1..=5).map(|k| ModelSpec::iid_normal(k).expect("valid")).collect();
    fixtures.push(ModelSpec::equicorr_normal(5, 0.5).expect("valid"));
    let mut seed = 4000;
    let mut worst: f64 = 0.0;
    for m in &fixtures {
        let k = m.k();
        let (sd, su) = match (stepdown_ladder(m, alpha, opts.fault), solve_stepup(m, alpha)) {
            (Ok(f), Ok(d)) => (Procedure::Stepdown(f), Procedure::Stepup(d)),
            (Err(e), _) | (_, Err(e)) => {
                log.error("ladders", e);
                continue;
            }
        };
        for p in 1..=k {
            let mut v = vec![ExtReal::Finite(0.0); p];
            v.resize(k, ExtReal::PosInf);
            let theta = ThetaVector(v);
            for proc in [&sd, &su] {
                seed += 1;
                match estimate_fwer(m, &theta, proc, reps, seed) {
                    Ok(r) => {
                        worst = worst.max((r.estimate - alpha).abs() / r.half_width.max(f64::MIN_POSITIVE));
                        log.expect(r.estimate <= alpha + r.half_width, || {
                            format!("{} FWER above level at {} {}: {:.5} ± {:.5}", proc.id(), m.family().name(), theta_str(&theta), r.estimate, r.half_width)
                        });
                        log.expect(r.covers(alpha), || {
                            format!("{} FWER not equal to level at {} {}: {:.5} ± {:.5}", proc.id(), m.family().name(), theta_str(&theta), r.estimate, r.half_width)
                        });
                    }
                    Err(e) => log.error("simulation", e),
                }
            }
        }
    }
    let t = start.elapsed();
    log.expect(t < Duration::from_secs(300), || format!("runtime {t:?} over 5 min"));
    log.finish(format!("{reps} reps, largest |est − α| = {worst:.2} half-widths"))
}

fn maximin_power(opts: VerifyOptions) -> (bool, String) {
    let mut log = Log::default();
    let alpha = 0.05;
    let reps = opts.level.reps();
    let mut seed = 5000;
    let mut worst: f64 = 0.0;
    for k in 1..=5 {
        let m = ModelSpec::iid_normal(k).expect("valid");
        let (f, d) = match (stepdown_ladder(&m, alpha, opts.fault), solve_stepup(&m, alpha)) {
            (Ok(f), Ok(d)) => (f, d),
            (Err(e), _) | (_, Err(e)) => {
                log.error("ladders", e);
                continue;
            }
        };
        let procs = [Procedure::Stepdown(f.clone()), Procedure::Stepup(d.clone())];
        for j in 1..=k {
            for eps in [0.5, 1.0, 2.0] {
                seed += 1;
                let theta = lfc_theta(k, j, eps).expect("valid lfc");
                let falses: Vec<bool> = theta.true_nulls().iter().map(|n| !n).collect();
                // hits: stepdown, stepup; then replicates where the false-only count disagrees
                let t = count_events(&m, &theta, &procs, reps, seed, 3, |rep, t| {
                    let mut mismatch = false;
                    for p in 0..2 {
                        let all = rep.counts[p] >= j;
                        let n_false = rep.masks[p].iter().zip(&falses).filter(|(&r, &f)| r && f).count();
                        t[p] += all as u64;
                        mismatch |= all != (n_false >= j);
                    }
                    t[2] += mismatch as u64;
                });
                let t = match t {
                    Ok(t) => t,
                    Err(e) => {
                        log.error("simulation", e);
                        continue;
                    }
                };
                let analytic = [beta_stepdown_with(&f, j, eps), beta_stepup_with(&d, j, eps)];
                for (p, a) in analytic.into_iter().enumerate() {
                    let a = match a {
                        Ok(a) => a,
                        Err(e) => {
                            log.error("analytic power", e);
                            continue;
                        }
                    };
                    let est = t[p] as f64 / reps as f64;
                    let hw = half_width(est, reps);
                    worst = worst.max((est - a).abs() / hw.max(f64::MIN_POSITIVE));
                    log.expect((est - a).abs() <= hw, || {
                        format!("{} k={k} j={j} eps={eps}: analytic {a:.5}, simulated {est:.5} ± {hw:.5}", procs[p].id())
                    });
                }
                log.expect(t[2] == 0, || format!("k={k} j={j} eps={eps}: {} replicates with false-only count differing", t[2]));
            }
        }
    }
    log.finish(format!("{reps} reps, largest deviation {worst:.2} half-widths"))
}

fn pair_tradeoff(opts: VerifyOptions) -> (bool, String) {
    let mut log = Log::default();
    let reps = opts.level.reps();
    let m = ModelSpec::iid_normal(2).expect("valid");
    let mut seed = 6000;
    for alpha in [0.05, 0.1] {
        for e in [0.5, 1.0, 2.0] {
            let tag = format!("alpha={alpha} eps={e}");
            let c = match PairConstants::solve(&m, alpha, [e, e]) {
                Ok(c) => c,
                Err(err) => {
                    log.error(&tag, err);
                    continue;
                }
            };
            let (sd, su) = match (pair_criteria(&c, PairVariant::StepdownOpt), pair_criteria(&c, PairVariant::StepupOpt)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(err), _) | (_, Err(err)) => {
                    log.error(&tag, err);
                    continue;
                }
            };
            log.expect(sd.0.value > su.0.value, || format!("{tag}: A1 stepdown {} ≤ stepup {}", sd.0.value, su.0.value));
            log.expect(sd.1.value < su.1.value, || format!("{tag}: A2 stepdown {} ≥ stepup {}", sd.1.value, su.1.value));
            let configs = [
                (ThetaVector(vec![ExtReal::Finite(e), ExtReal::NegInf]), false),
                (ThetaVector(vec![ExtReal::NegInf, ExtReal::Finite(e)]), false),
                (ThetaVector(vec![ExtReal::Finite(e), ExtReal::Finite(e)]), true),
            ];
            for (theta, both) in configs {
                seed += 1;
                let counted = count_events(&m, &theta, &[], reps, seed, 2, |rep, t| {
                    let x = [rep.x[0], rep.x[1]];
                    for (v, variant) in [PairVariant::StepdownOpt, PairVariant::StepupOpt].into_iter().enumerate() {
                        let r = pair_classify(x, &c, variant);
                        let hit = if both { r == PairRegion::D11 } else { r != PairRegion::D00 };
                        t[v] += hit as u64;
                    }
                });
                let counted = match counted {
                    Ok(t) => t,
                    Err(err) => {
                        log.error(&tag, err);
                        continue;
                    }
                };
                let want = if both { [sd.1.value, su.1.value] } else { [sd.0.value, su.0.value] };
                for v in 0..2 {
                    let est = counted[v] as f64 / reps as f64;
                    let hw = half_width(est, reps);
                    log.expect((est - want[v]).abs() <= hw, || {
                        format!("{tag} {} at {}: analytic {:.5}, simulated {est:.5} ± {hw:.5}", ["stepdown-opt", "stepup-opt"][v], theta_str(&theta), want[v])
                    });
                }
            }
        }
    }
    log.finish("stepdown-optimal wins A1, stepup-optimal wins A2".into())
}

fn monotone_rules(opts: VerifyOptions) -> (bool, String) {
    let mut log = Log::default();
    let trials = 10_000;
    let alpha = 0.05;
    let mut seed = 7000;
    let models: [ModelSpec<f64>; 2] = [
        ModelSpec::iid_normal(3).expect("valid"),
        ModelSpec::equicorr_normal(4, 0.5).expect("valid"),
    ];
    for m in &models {
        let procs = match (stepdown_ladder(m, alpha, opts.fault), solve_stepup(m, alpha)) {
            (Ok(f), Ok(d)) => [Procedure::Stepdown(f), Procedure::Stepup(d), Procedure::Holm { alpha }],
            (Err(e), _) | (_, Err(e)) => {
                log.error("ladders", e);
                continue;
            }
        };
        let theta = ThetaVector((0..m.k()).map(|i| ExtReal::Finite(i as f64)).collect());
        let points = match m.sample(&theta, 6, 71) {
            Ok(s) => s,
            Err(e) => {
                log.error("sample", e);
                continue;
            }
        };
        for x in points.rows() {
            for p in &procs {
                seed += 1;
                let report = check_monotone(|y| p.reject(m, y).unwrap_or_default(), x, trials, seed);
                log.expect(report.is_clean(), || {
                    format!("{} on {}: {} violations from {x:?}", p.id(), m.family().name(), report.violations.len())
                });
            }
        }
    }
    let m2 = ModelSpec::iid_normal(2).expect("valid");
    match PairConstants::solve(&m2, alpha, [1.0, 1.0]) {
        Ok(c) => {
            for x in [[1.5, 2.5], [2.0, 0.3], [1.8, 1.9], [-0.5, 3.0], [2.1, 2.2]] {
                for variant in [PairVariant::StepdownOpt, PairVariant::StepupOpt] {
                    seed += 1;
                    let rule = |y: &[f64]| pair_classify([y[0], y[1]], &c, variant).rejects().to_vec();
                    let report = check_monotone(rule, &x, trials, seed);
                    log.expect(report.is_clean(), || format!("{variant:?} from {x:?}: {} violations", report.violations.len()));
                }
            }
        }
        Err(e) => log.error("pair constants", e),
    }
    // rejects both in the upper quadrant and in a small square far below it
    let b = normal::upper_quantile(alpha);
    let southwest = |x: &[f64]| {
        let sq = |v: f64| (-3.1..-2.9).contains(&v);
        let both = (x[0] > b && x[1] > b) || (sq(x[0]) && sq(x[1]));
        vec![both, both]
    };
    let control = check_monotone(southwest, &[-3.0, -3.0], trials, 7999);
    log.expect(!control.is_clean(), || "non-monotone control produced no violation".into());
    log.finish(format!("{trials} trials per point; control flagged {} times", control.violations.len()))
}

fn grid_fixtures() -> Vec<(Vec<f64>, f64, f64)> {
    vec![
        (vec![-1.5, -0.75, 0.0, 0.75, 1.5, 2.0, 2.5], 1.0, 0.1),
        (vec![-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0], 1.5, 0.1),
        (vec![-0.5, 0.25, 0.8, 1.2, 1.6, 2.0, 2.4], 0.8, 0.1),
        (vec![-1.0, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0], 1.5, 0.05),
    ]
}

fn grid_oracle() -> (bool, String) {
    let start = Instant::now();
    let mut log = Log::default();
    let m2 = ModelSpec::iid_normal(2).expect("valid");
    for (cuts, eps, alpha) in grid_fixtures() {
        let tag = format!("eps={eps} alpha={alpha}");
        let g = match GridModel::discretized_normal(&cuts, eps) {
            Ok(g) => g,
            Err(e) => {
                log.error(&tag, e);
                continue;
            }
        };
        let (c, best1, best2) = match (
            PairConstants::solve(&m2, alpha, [eps, eps]),
            brute_force_maximin(&g, alpha, Criterion::A1),
            brute_force_maximin(&g, alpha, Criterion::A2),
        ) {
            (Ok(c), Ok(b1), Ok(b2)) => (c, b1, b2),
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                log.error(&tag, e);
                continue;
            }
        };
        // continuous constants mapped onto the grid
        let cell = |t: [f64; 2]| [threshold_cell(&cuts, t[0]), threshold_cell(&cuts, t[1])];
        let cont = ThresholdRule { a: cell(c.a), b: cell(c.b) };
        match max_fwer_grid(&cont, &g) {
            Ok(fw) => log.expect(fw <= alpha + g.cell_slack(), || format!("{tag}: discretized rule FWER {fw}")),
            Err(e) => log.error(&tag, e),
        }
        log.expect(best1.within_one_cell(&cont), || format!("{tag}: A1 optimum {:?} not within a cell of {cont:?}", best1.maximizers));
        log.expect(best2.within_one_cell(&cont), || format!("{tag}: A2 optimum {:?} not within a cell of {cont:?}", best2.maximizers));
        // the two-equation grid solution attains both optima
        let (va, grid_a) = solve_grid_a(&g, alpha);
        let gb = solve_grid_b(&g, alpha);
        log.expect((va - best1.value).abs() <= 1e-12, || format!("{tag}: A1 grid equations {va} vs search {}", best1.value));
        let a2 = grid_a
            .iter()
            .filter_map(|&a| ThresholdRule::new(a, [gb.min(a[0]), gb.min(a[1])], g.m()).ok())
            .map(|r| criterion_value(&r, &g, Criterion::A2))
            .fold(0.0, f64::max);
        log.expect((a2 - best2.value).abs() <= 1e-12, || format!("{tag}: A2 grid equations {a2} vs search {}", best2.value));
    }
    let q = |n: i128, d: i128| Ratio::new(n, d);
    let small = [
        (vec![q(1, 2), q(1, 3), q(1, 6)], vec![q(1, 6), q(1, 3), q(1, 2)], q(1, 3)),
        (vec![q(1, 2), q(1, 3), q(1, 6)], vec![q(1, 6), q(1, 3), q(1, 2)], q(11, 36)),
        (vec![q(3, 5), q(3, 10), q(1, 10)], vec![q(1, 5), q(2, 5), q(2, 5)], q(1, 5)),
        (vec![q(1, 3), q(1, 3), q(1, 3)], vec![q(1, 9), q(2, 9), q(2, 3)], q(1, 2)),
    ];
    for (null, alt, alpha) in small {
        let tag = format!("3x3 alpha={alpha}");
        let g = match GridModel::new(null, alt) {
            Ok(g) => g,
            Err(e) => {
                log.error(&tag, e);
                continue;
            }
        };
        match (brute_force_maximin(&g, alpha, Criterion::A1), full_enumeration_maximin(&g, alpha, Criterion::A1, None)) {
            (Ok(t), Ok(full)) => {
                log.expect(t.value == full, || format!("{tag}: A1 threshold {} vs all monotone {full}", t.value));
                let mut seen = Vec::new();
                for r in &t.maximizers {
                    if seen.contains(&r.a) {
                        continue;
                    }
                    seen.push(r.a);
                    let accept: Vec<bool> = (1..=3).flat_map(|x1| (1..=3).map(move |x2| x1 < r.a[0] && x2 < r.a[1])).collect();
                    match (brute_force_a2_given_a(&g, alpha, r.a), full_enumeration_maximin(&g, alpha, Criterion::A2, Some(&accept))) {
                        (Ok(t2), Ok(f2)) => log.expect(t2.value == f2, || format!("{tag}: A2 given a={:?}: threshold {} vs all monotone {f2}", r.a, t2.value)),
                        (Err(e), _) | (_, Err(e)) => log.error(&tag, e),
                    }
                }
            }
            (Err(e), _) | (_, Err(e)) => log.error(&tag, e),
        }
    }
    let t = start.elapsed();
    log.expect(t < Duration::from_secs(300), || format!("runtime {t:?} over 5 min"));
    log.finish(format!("{} m=8 fixtures, 4 exhaustive 3x3 fixtures", grid_fixtures().len()))
}

type Q = Ratio<i128>;

fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<Q> {
    let w: Vec<i128> = (0..n).map(|_| rng.random_range(0..=9)).collect();
    let total: i128 = w.iter().sum();
    if total == 0 {
        return (0..n).map(|i| Q::from_integer((i == 0) as i128)).collect();
    }
    w.into_iter().map(|v| Ratio::new(v, total)).collect()
}

fn point(n: usize, at: usize) -> Vec<Q> {
    (0..n).map(|i| Q::from_integer((i == at) as i128)).collect()
}

fn slice_identities() -> (bool, String) {
    let mut log = Log::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9000);
    let dims = [4, 3, 5];
    for n in 0..100 {
        let r = GridRegion::random_monotone(&dims, 5, &mut rng);
        let p0 = random_pmf(&mut rng, dims[0]);
        let p1 = random_pmf(&mut rng, dims[1]);
        let (u, i) = match (r.slice_union(2), r.slice_intersection(2)) {
            (Ok(u), Ok(i)) => (u, i),
            (Err(e), _) | (_, Err(e)) => {
                log.error("slice", e);
                continue;
            }
        };
        log.expect(u.is_monotone() && i.is_monotone(), || format!("region {n}: slice not monotone"));
        let top = r.probability(&[p0.clone(), p1.clone(), point(dims[2], dims[2] - 1)]);
        let bottom = r.probability(&[p0.clone(), p1.clone(), point(dims[2], 0)]);
        let (pu, pi) = (u.probability(&[p0.clone(), p1.clone()]), i.probability(&[p0.clone(), p1.clone()]));
        match (top, bottom, pu, pi) {
            (Ok(t), Ok(b), Ok(pu), Ok(pi)) => {
                log.expect(t == pu, || format!("region {n}: top {t} vs union {pu}"));
                log.expect(b == pi, || format!("region {n}: bottom {b} vs intersection {pi}"));
            }
            _ => log.expect(false, || format!("region {n}: probability failed")),
        }
        // two sentinel coordinates at once
        match (u.slice_union(1), i.slice_intersection(1)) {
            (Ok(uu), Ok(ii)) => {
                let t2 = r.probability(&[p0.clone(), point(dims[1], dims[1] - 1), point(dims[2], dims[2] - 1)]);
                let b2 = r.probability(&[p0.clone(), point(dims[1], 0), point(dims[2], 0)]);
                let (puu, pii) = (uu.probability(std::slice::from_ref(&p0)), ii.probability(std::slice::from_ref(&p0)));
                log.expect(t2.ok() == puu.ok(), || format!("region {n}: two tops vs double union"));
                log.expect(b2.ok() == pii.ok(), || format!("region {n}: two bottoms vs double intersection"));
            }
            (Err(e), _) | (_, Err(e)) => log.error("slice", e),
        }
    }
    log.finish("exact on 100 random monotone regions".into())
}

fn dominance() -> (bool, String) {
    let mut log = Log::default();
    let alpha = 0.05;
    let reps = 100_000;
    let fixtures = [
        ModelSpec::iid_normal(2).expect("valid"),
        ModelSpec::iid_normal(3).expect("valid"),
        ModelSpec::iid_normal(5).expect("valid"),
        ModelSpec::equicorr_normal(4, 0.5).expect("valid"),
    ];
    let mut fewer = 0u64;
    let mut total = 0u64;
    for (n, m) in fixtures.iter().enumerate() {
        let k = m.k();
        let procs = match (solve_stepdown(m, alpha), solve_stepup(m, alpha)) {
            (Ok(f), Ok(d)) => [Procedure::Stepdown(f), Procedure::Holm { alpha }, Procedure::Stepup(d)],
            (Err(e), _) | (_, Err(e)) => {
                log.error("ladders", e);
                continue;
            }
        };
        let thetas = [
            ThetaVector::zeros(k),
            ThetaVector::constant(k, 1.0),
            ThetaVector((0..k).map(|i| ExtReal::Finite(if i % 2 == 0 { 2.5 } else { 0.0 })).collect()),
        ];
        let table = match compare_procedures(m, &thetas, &procs, reps, 10_000 + n as u64) {
            Ok(t) => t,
            Err(e) => {
                log.error("compare", e);
                continue;
            }
        };
        for row in &table.rows {
            let tag = format!("{} k={k} theta={}", m.family().name(), theta_str(&row.theta));
            let holm = row.dominance(0, 1).expect("pair present");
            log.expect(holm.superset_violations == 0, || {
                format!("{tag}: stepdown missed a Holm rejection in {} of {reps} replicates", holm.superset_violations)
            });
            let up = row.dominance(2, 0).expect("pair present");
            fewer += up.count_violations;
            total += reps as u64;
            log.expect(up.count_violations == 0, || {
                format!("{tag}: stepup rejected fewer than stepdown in {} of {reps} replicates", up.count_violations)
            });
        }
    }
    log.finish(format!("stepup below stepdown in {fewer} of {total} replicates"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_analytic_criteria_pass() {
        for id in [1, 2, 3, 9] {
            let o = run_criterion(id, VerifyOptions::new(Level::Fast));
            assert_eq!(o.status, Status::Pass, "{}", o.detail);
        }
    }

    #[test]
    fn grid_oracle_is_slow_only() {
        assert_eq!(run_criterion(8, VerifyOptions::new(Level::Fast)).status, Status::Skipped);
    }

    #[test]
    fn wrong_constant_is_caught() {
        let opts = VerifyOptions { level: Level::Fast, fault: Some(Fault::WrongConstant) };
        let o = run_criterion(4, opts);
        assert_eq!(o.status, Status::Fail);
        assert!(o.detail.contains("stepdown FWER above level"), "{}", o.detail);
    }

    #[test]
    fn unknown_criterion_fails() {
        assert_eq!(run_criterion(11, VerifyOptions::new(Level::Fast)).status, Status::Fail);
    }
}
