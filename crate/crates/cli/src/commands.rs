use std::fs;
use std::io::Write;

use stepwise::constants::{
    solve_ladder, ConstantLadder, LadderKind, RESIDUAL_TOL, SOLVER_XTOL,
};
use stepwise::error::Error;
use stepwise::models::{ExtReal, Family, ModelSpec, QUAD_TOL};
use stepwise::normal;
use stepwise::procedures::{holm_bonferroni, stepdown_decide, stepup_decide, Decision, Verdict};
use stepwise::simharness::{estimate_fwer, estimate_reject_at_least, Procedure};
use stepwise::verify::{run_criterion, Fault, Level, Status, VerifyOptions, CRITERIA};

use crate::args::{ConstantsArgs, DecideArgs, FamilyArg, InputKind, MetricArg, ModelArgs, ProcedureArg, SimulateArgs, VerifyArgs};
use crate::cache::Cache;
use crate::docs::*;
use crate::input::{parse_theta, read_rows};

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Verification(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Data(_) => Failure::Data(e.to_string()),
            Error::NonMonotoneLadder { .. } | Error::RootNotFound(_) => Failure::Verification(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

pub fn build_model(m: &ModelArgs, k: usize) -> Result<ModelSpec<f64>, Failure> {
    if m.family != FamilyArg::EquicorrNormal && m.rho != 0.0 {
        return Err(Failure::Usage(format!("--rho applies to equicorr-normal only, got {}", m.rho)));
    }
    let family = match m.family {
        FamilyArg::IidNormal => Family::IidNormal,
        FamilyArg::EquicorrNormal => Family::EquicorrNormal { rho: m.rho },
        FamilyArg::IidUniform => Family::IidUniformNull,
    };
    Ok(ModelSpec::new(k, family)?)
}

fn emit(doc: &impl serde::Serialize, output: Option<&std::path::Path>) -> Outcome {
    let mut text = serde_json::to_string_pretty(doc).map_err(|e| Failure::Data(e.to_string()))?;
    text.push('\n');
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Data(format!("cannot write output: {e}"))),
    }
}

fn constants_doc(ladder: &ConstantLadder<f64>) -> ConstantsDoc {
    ConstantsDoc {
        schema_version: SCHEMA_VERSION,
        kind: ladder.kind().name().into(),
        alpha: ladder.alpha(),
        model: ModelDoc::from(ladder.model()),
        values: ladder.values().to_vec(),
        residuals: ladder.residuals().to_vec(),
        solver_metadata: SolverMetadata {
            method: "brent".into(),
            xtol: SOLVER_XTOL,
            residual_tol: RESIDUAL_TOL,
            quadrature_tol: QUAD_TOL,
            max_abs_residual: ladder.max_abs_residual(),
        },
    }
}

fn ladder_kind(p: ProcedureArg) -> Option<LadderKind> {
    match p {
        ProcedureArg::Stepdown => Some(LadderKind::Stepdown),
        ProcedureArg::Stepup => Some(LadderKind::Stepup),
        ProcedureArg::Holm => None,
    }
}

/// The ladder for `(kind, model, α)`, from the cache when it holds a match.
fn load_or_solve(cache: &Cache, kind: LadderKind, model: &ModelSpec<f64>, alpha: f64) -> Result<ConstantsDoc, Failure> {
    if let Some(doc) = cache.load(kind, model, alpha) {
        return Ok(doc);
    }
    let doc = constants_doc(&solve_ladder(kind, model, alpha)?);
    cache.store(kind, model, alpha, &doc);
    Ok(doc)
}

pub fn constants(a: &ConstantsArgs) -> Outcome {
    let model = build_model(&a.model, a.k)?;
    let cache = Cache::from_env(a.no_cache);
    let doc = load_or_solve(&cache, a.kind.into(), &model, a.model.alpha)?;
    emit(&doc, a.output.as_deref())
}

fn trace_docs(d: &Decision<f64>, ids: &[String]) -> (Vec<VerdictDoc>, Vec<TraceDoc>) {
    let verdicts = d
        .verdicts
        .iter()
        .enumerate()
        .map(|(h, v)| {
            let seen = d.trace.iter().find(|s| s.hypothesis == h);
            VerdictDoc {
                id: ids[h].clone(),
                verdict: if *v == Verdict::Reject { "reject" } else { "accept" }.into(),
                step: seen.map(|s| s.step),
                threshold: seen.map(|s| Num(s.threshold)),
            }
        })
        .collect();
    let trace = d
        .trace
        .iter()
        .map(|s| TraceDoc {
            step: s.step,
            id: ids[s.hypothesis].clone(),
            statistic: Num(s.statistic),
            threshold: Num(s.threshold),
            outcome: if s.outcome == Verdict::Reject { "reject" } else { "accept" }.into(),
        })
        .collect();
    (verdicts, trace)
}

pub fn decide(a: &DecideArgs) -> Outcome {
    let file = fs::File::open(&a.input).map_err(|e| Failure::Data(format!("cannot read {}: {e}", a.input.display())))?;
    let rows = read_rows(file).map_err(Failure::Data)?;
    let ids: Vec<String> = rows.iter().map(|r| r.id.clone()).collect();
    let raw: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let model = build_model(&a.model, rows.len())?;
    let alpha = a.model.alpha;
    if a.input_kind == InputKind::PValues {
        if let Some(bad) = raw.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Failure::Data(format!("p-value {bad} outside [0, 1]")));
        }
    }
    let null = ExtReal::Finite(0.0);
    let (decision, scale, transform, constants) = match ladder_kind(a.procedure) {
        None => {
            let p: Vec<f64> = match a.input_kind {
                InputKind::PValues => raw,
                InputKind::Statistics => raw
                    .iter()
                    .map(|&x| model.marginal_sf(null, x))
                    .collect::<Result<_, _>>()?,
            };
            let k = p.len();
            let thresholds = (1..=k).map(|j| alpha / j as f64).collect();
            (holm_bonferroni(&p, alpha)?, "p-value", None, thresholds)
        }
        Some(kind) => {
            let (x, transform) = match a.input_kind {
                InputKind::Statistics => (raw, None),
                InputKind::PValues => {
                    if !matches!(model.family(), Family::IidNormal | Family::EquicorrNormal { .. }) {
                        return Err(Failure::Usage("p-value input needs a normal family".into()));
                    }
                    let x = raw.iter().map(|&p| normal::upper_quantile(p)).collect();
                    (x, Some("x = inverse normal cdf of (1 - p)".to_string()))
                }
            };
            let doc = load_or_solve(&Cache::from_env(a.no_cache), kind, &model, alpha)?;
            let ladder = ConstantLadder::from_values(kind, alpha, model, doc.values.clone())?;
            let decision = match kind {
                LadderKind::Stepdown => stepdown_decide(&x, &ladder)?,
                LadderKind::Stepup => stepup_decide(&x, &ladder)?,
            };
            (decision, "statistic", transform, doc.values)
        }
    };
    let (verdicts, trace) = trace_docs(&decision, &ids);
    let doc = DecisionDoc {
        schema_version: SCHEMA_VERSION,
        verdicts,
        trace,
        metadata: DecisionMetadata {
            procedure: a.procedure.name().into(),
            input_kind: a.input_kind.name().into(),
            transform,
            scale: scale.into(),
            model: ModelDoc::from(&model),
            alpha,
            constants,
        },
    };
    emit(&doc, a.output.as_deref())
}

pub fn simulate(a: &SimulateArgs) -> Outcome {
    let theta = parse_theta(&a.theta, a.k).map_err(Failure::Usage)?;
    let model = build_model(&a.model, theta.len())?;
    let alpha = a.model.alpha;
    let procedure = match ladder_kind(a.procedure) {
        None => Procedure::Holm { alpha },
        Some(kind) => {
            let doc = load_or_solve(&Cache::from_env(a.no_cache), kind, &model, alpha)?;
            let ladder = ConstantLadder::from_values(kind, alpha, model, doc.values)?;
            match kind {
                LadderKind::Stepdown => Procedure::Stepdown(ladder),
                LadderKind::Stepup => Procedure::Stepup(ladder),
            }
        }
    };
    let (report, j) = match a.metric {
        MetricArg::Fwer => {
            if a.j.is_some() || a.false_only {
                return Err(Failure::Usage("--j and --false-only apply to reject-ge".into()));
            }
            (estimate_fwer(&model, &theta, &procedure, a.reps, a.seed)?, None)
        }
        MetricArg::RejectGe => {
            let j = a.j.ok_or_else(|| Failure::Usage("--metric reject-ge needs --j".into()))?;
            (estimate_reject_at_least(&model, &theta, &procedure, j, a.reps, a.seed, a.false_only)?, Some(j))
        }
    };
    let doc = ReportDoc {
        schema_version: SCHEMA_VERSION,
        estimate: report.estimate,
        half_width: report.half_width,
        reps: report.reps,
        seed: report.seed,
        target: TargetDoc {
            metric: a.metric.name().into(),
            j,
            false_only: a.false_only,
            procedure: procedure.id().into(),
            theta: theta.components().iter().map(|&t| Num::from(t)).collect(),
            model: ModelDoc::from(&model),
            alpha,
        },
    };
    emit(&doc, a.output.as_deref())
}

pub fn verify(a: &VerifyArgs) -> Outcome {
    let level = a.level.into();
    let opts = VerifyOptions { level, fault: a.inject_fault.then_some(Fault::WrongConstant) };
    let ids: Vec<usize> = if a.criterion.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { a.criterion.clone() };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(Failure::Usage(format!("no criterion {bad}")));
    }
    let mut checks = Vec::new();
    for id in ids {
        let o = run_criterion(id, opts);
        if !a.json {
            println!("{}", o.line());
            if !o.passed() {
                for l in o.detail.lines().skip(1) {
                    println!("    {l}");
                }
            }
        }
        checks.push(o);
    }
    let passed = checks.iter().all(|c| c.passed());
    if a.json {
        let doc = VerifyDoc {
            schema_version: SCHEMA_VERSION,
            level: match level {
                Level::Fast => "fast",
                Level::Slow => "slow",
            }
            .into(),
            passed,
            checks: checks
                .iter()
                .map(|c| CheckDoc {
                    id: c.id,
                    name: c.name.into(),
                    status: match c.status {
                        Status::Pass => "pass",
                        Status::Fail => "fail",
                        Status::Skipped => "skipped",
                    }
                    .into(),
                    detail: c.detail.clone(),
                })
                .collect(),
        };
        emit(&doc, None)?;
    }
    if passed {
        Ok(())
    } else {
        let failed: Vec<String> = checks.iter().filter(|c| !c.passed()).map(|c| format!("C{} {}", c.id, c.name)).collect();
        Err(Failure::Verification(format!("failed: {}", failed.join(", "))))
    }
}
