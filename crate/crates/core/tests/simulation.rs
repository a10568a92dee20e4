use stepwise::constants::{solve_stepdown, solve_stepup};
use stepwise::models::{ExtReal, ModelSpec, ThetaVector};
use stepwise::power::{beta_stepdown_with, lfc_theta};
use stepwise::simharness::{estimate_fwer, estimate_reject_at_least, Procedure, MIN_REPS};

#[test]
fn interval_coverage_over_independent_seeds() {
    let m = ModelSpec::iid_normal(3).unwrap();
    let f = solve_stepdown(&m, 0.05).unwrap();
    let truth = beta_stepdown_with(&f, 1, 1.5).unwrap();
    let p = Procedure::Stepdown(f);
    let theta = lfc_theta(3, 1, 1.5).unwrap();
    let covered = (0..100)
        .filter(|&s| {
            estimate_reject_at_least(&m, &theta, &p, 1, MIN_REPS, 31_000 + s, false).unwrap().covers(truth)
        })
        .count();
    assert!(covered >= 99, "{covered} of 100 intervals cover {truth}");
}

#[test]
fn same_seed_same_report() {
    let m = ModelSpec::equicorr_normal(4, 0.4).unwrap();
    let p = Procedure::Stepup(solve_stepup(&m, 0.1).unwrap());
    let theta = ThetaVector(vec![ExtReal::Finite(0.0), ExtReal::Finite(1.0), ExtReal::PosInf, ExtReal::NegInf]);
    let a = estimate_fwer(&m, &theta, &p, 30_000, 77).unwrap();
    let b = estimate_fwer(&m, &theta, &p, 30_000, 77).unwrap();
    assert_eq!(a, b);
    let c = estimate_fwer(&m, &theta, &p, 30_000, 78).unwrap();
    assert_ne!(a.estimate, c.estimate);
}

#[test]
fn fwer_sweep_small_scale() {
    for k in 2..=4 {
        let m = ModelSpec::iid_normal(k).unwrap();
        let sd = Procedure::Stepdown(solve_stepdown(&m, 0.05).unwrap());
        let su = Procedure::Stepup(solve_stepup(&m, 0.05).unwrap());
        for p in 1..=k {
            let mut v = vec![ExtReal::Finite(0.0); p];
            v.resize(k, ExtReal::PosInf);
            let theta = ThetaVector(v);
            for (i, proc) in [&sd, &su].into_iter().enumerate() {
                let r = estimate_fwer(&m, &theta, proc, 100_000, (100 * k + 10 * p + i) as u64).unwrap();
                assert!(r.covers(0.05), "k={k} p={p} {}: {} ± {}", proc.id(), r.estimate, r.half_width);
            }
        }
    }
}

#[test]
fn single_precision_harness() {
    let m = ModelSpec::<f32>::iid_normal(3).unwrap();
    let p = Procedure::Stepdown(solve_stepdown(&m, 0.05).unwrap());
    let r = estimate_fwer(&m, &ThetaVector::zeros(3), &p, 100_000, 5).unwrap();
    assert!(r.covers(0.05), "{} ± {}", r.estimate, r.half_width);
}

#[test]
fn uniform_family_fwer() {
    let m = ModelSpec::iid_uniform_null(3).unwrap();
    let p = Procedure::Stepdown(solve_stepdown(&m, 0.05).unwrap());
    let r = estimate_fwer(&m, &ThetaVector::zeros(3), &p, 100_000, 6).unwrap();
    assert!(r.covers(0.05), "{} ± {}", r.estimate, r.half_width);
}
