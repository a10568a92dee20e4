use proptest::prelude::*;
use stepwise::constants::{solve_stepdown, solve_stepup, LadderCache, LadderKind, PairConstants};
use stepwise::models::{ExtReal, ModelSpec};
use stepwise::normal;
use stepwise::Model32;

fn model(k: usize, rho: f64) -> ModelSpec<f64> {
    if rho == 0.0 {
        ModelSpec::iid_normal(k).unwrap()
    } else {
        ModelSpec::equicorr_normal(k, rho).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ladders_are_ordered(k in 1usize..=6, alpha in 0.005f64..0.3, rho in prop::sample::select(vec![0.0, 0.2, 0.6])) {
        let m = model(k, rho);
        let f = solve_stepdown(&m, alpha).unwrap();
        let d = solve_stepup(&m, alpha).unwrap();
        prop_assert!(f.max_abs_residual() <= 1e-9 && d.max_abs_residual() <= 1e-9);
        prop_assert!((f.value(1) - d.value(1)).abs() <= 1e-10);
        for j in 2..=k {
            prop_assert!(f.value(j) > f.value(j - 1));
            prop_assert!(d.value(j) >= d.value(j - 1));
            prop_assert!(f.value(j) < d.value(j));
        }
    }

    #[test]
    fn smaller_alpha_raises_every_rung(k in 1usize..=5, alpha in 0.01f64..0.2) {
        let m = model(k, 0.0);
        let (f_lo, f_hi) = (solve_stepdown(&m, alpha / 2.0).unwrap(), solve_stepdown(&m, alpha).unwrap());
        let (d_lo, d_hi) = (solve_stepup(&m, alpha / 2.0).unwrap(), solve_stepup(&m, alpha).unwrap());
        for j in 1..=k {
            prop_assert!(f_lo.value(j) > f_hi.value(j));
            prop_assert!(d_lo.value(j) > d_hi.value(j));
        }
    }

    #[test]
    fn rungs_do_not_depend_on_k(k in 2usize..=6, alpha in 0.01f64..0.2, rho in prop::sample::select(vec![0.0, 0.5])) {
        let big = model(k, rho);
        let small = big.with_k(k - 1).unwrap();
        let up = (solve_stepup(&big, alpha).unwrap().truncated(k - 1).unwrap(), solve_stepup(&small, alpha).unwrap());
        prop_assert_eq!(up.0.values(), up.1.values());
        let down = (solve_stepdown(&big, alpha).unwrap().truncated(k - 1).unwrap(), solve_stepdown(&small, alpha).unwrap());
        prop_assert_eq!(down.0.values(), down.1.values());
    }

    #[test]
    fn pair_constants_ordered(
        alpha in 0.01f64..0.25,
        e1 in 0.1f64..3.0,
        e2 in 0.1f64..3.0,
        rho in prop::sample::select(vec![0.0, 0.3, 0.7]),
    ) {
        let c = PairConstants::solve(&model(2, rho), alpha, [e1, e2]).unwrap();
        for i in 0..2 {
            prop_assert!(c.b[i] < c.a[i] && c.a[i] < c.a_tilde[i]);
        }
        prop_assert!(c.residuals.max_abs() <= 1e-9);
    }

    #[test]
    fn orthant_probability_is_exchangeable(t in prop::collection::vec(-2.0f64..2.0, 3), rho in 0.0f64..0.9, th in prop::collection::vec(-1.0f64..1.0, 3)) {
        let m = ModelSpec::equicorr_normal(3, rho).unwrap();
        let theta: Vec<ExtReal<f64>> = th.iter().map(|&v| ExtReal::Finite(v)).collect();
        let p = m.prob_all_below(&theta, &t).unwrap();
        for perm in [[1, 0, 2], [2, 1, 0], [1, 2, 0]] {
            let tp: Vec<f64> = perm.iter().map(|&i| t[i]).collect();
            let thp: Vec<ExtReal<f64>> = perm.iter().map(|&i| theta[i]).collect();
            prop_assert!((m.prob_all_below(&thp, &tp).unwrap() - p).abs() < 1e-12);
        }
    }
}

#[test]
fn iid_stepdown_closed_form() {
    let m = model(6, 0.0);
    let f = solve_stepdown(&m, 0.05).unwrap();
    for j in 1..=6 {
        let level = 1.0 - 0.95f64.powf(1.0 / j as f64);
        assert!((f.value(j) - normal::upper_quantile(level)).abs() < 1e-12);
    }
}

#[test]
fn single_precision_tracks_double() {
    let m32 = Model32::equicorr_normal(4, 0.3).unwrap();
    let m64 = model(4, 0.3);
    let d32 = solve_stepup(&m32, 0.05).unwrap();
    let d64 = solve_stepup(&m64, 0.05).unwrap();
    for j in 1..=4 {
        assert!((d32.value(j) as f64 - d64.value(j)).abs() < 2e-4, "j={j}");
    }
}

#[test]
fn cache_returns_identical_ladders() {
    let cache = LadderCache::new();
    let m = model(4, 0.25);
    let a = cache.get_or_solve(LadderKind::Stepup, &m, 0.05).unwrap();
    let b = cache.get_or_solve(LadderKind::Stepup, &m, 0.05).unwrap();
    assert_eq!(a, b);
    assert_eq!(cache.len(), 1);
    cache.get_or_solve(LadderKind::Stepdown, &m, 0.05).unwrap();
    assert_eq!(cache.len(), 2);
}
