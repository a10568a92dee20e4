use proptest::prelude::*;
use stepwise::models::{ExtReal, ModelSpec};
use stepwise::normal;
use stepwise::orderstat::{joint_orderstat_cdf, joint_orderstat_survival, ThresholdLadder};

/// Sum over every assignment of `j` labelled points to the cells cut by `u`,
/// keeping those with at least `i` points at or below `u_i` for every `i`.
fn assignment_oracle(u: &[f64]) -> f64 {
    let j = u.len();
    let mut edges = vec![0.0];
    edges.extend_from_slice(u);
    edges.push(1.0);
    let cell: Vec<f64> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    let cells = j + 1;
    let mut total = 0.0;
    let mut code = vec![0usize; j];
    loop {
        let ok = (1..=j).all(|i| code.iter().filter(|&&c| c < i).count() >= i);
        if ok {
            total += code.iter().map(|&c| cell[c]).product::<f64>();
        }
        let mut pos = 0;
        while pos < j {
            code[pos] += 1;
            if code[pos] < cells {
                break;
            }
            code[pos] = 0;
            pos += 1;
        }
        if pos == j {
            return total;
        }
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

proptest! {
    #[test]
    fn uniform_matches_assignment_enumeration(u in prop::collection::vec(0.0f64..1.0, 1..=5)) {
        let u = sorted(u);
        let j = u.len();
        let m = ModelSpec::iid_uniform_null(j).unwrap();
        let got = joint_orderstat_cdf(&m, j, &ThresholdLadder::new(u.clone()).unwrap()).unwrap();
        prop_assert!((got - assignment_oracle(&u)).abs() < 1e-12);
    }

    #[test]
    fn normal_matches_assignment_enumeration(t in prop::collection::vec(-3.0f64..3.0, 1..=5)) {
        let t = sorted(t);
        let j = t.len();
        let m = ModelSpec::iid_normal(j).unwrap();
        let u: Vec<f64> = t.iter().map(|&x| normal::cdf(x)).collect();
        let got = joint_orderstat_cdf(&m, j, &ThresholdLadder::new(t).unwrap()).unwrap();
        prop_assert!((got - assignment_oracle(&u)).abs() < 1e-12);
    }

    #[test]
    fn cdf_is_monotone_in_each_rung(
        t in prop::collection::vec(-2.5f64..2.5, 2..=6),
        pick in 0usize..6,
        bump in 0.0f64..0.5,
        rho in 0.0f64..0.9,
    ) {
        let t = sorted(t);
        let j = t.len();
        let i = pick % j;
        let mut raised = t.clone();
        raised[i] += bump;
        let raised = ThresholdLadder::from_unsorted(raised).unwrap();
        let m = ModelSpec::equicorr_normal(j, rho).unwrap();
        let lo = joint_orderstat_cdf(&m, j, &ThresholdLadder::new(t).unwrap()).unwrap();
        let hi = joint_orderstat_cdf(&m, j, &raised).unwrap();
        prop_assert!(hi >= lo - 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&lo));
    }

    #[test]
    fn equicorr_pair_matches_orthant_identity(t1 in -2.5f64..2.5, gap in 0.0f64..2.0, rho in 0.0f64..0.95) {
        // P(X_(1) ≤ t1, X_(2) ≤ t2) = 2 F(t1, t2) − F(t1, t1)
        let t2 = t1 + gap;
        let m = ModelSpec::equicorr_normal(2, rho).unwrap();
        let z = [ExtReal::Finite(0.0); 2];
        let want = 2.0 * m.prob_all_below(&z, &[t1, t2]).unwrap() - m.prob_all_below(&z, &[t1, t1]).unwrap();
        let got = joint_orderstat_cdf(&m, 2, &ThresholdLadder::new(vec![t1, t2]).unwrap()).unwrap();
        prop_assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn small_rho_approaches_independence(t in prop::collection::vec(-2.0f64..2.0, 1..=4)) {
        let t = sorted(t);
        let j = t.len();
        let l = ThresholdLadder::new(t).unwrap();
        let iid = joint_orderstat_cdf(&ModelSpec::iid_normal(j).unwrap(), j, &l).unwrap();
        let near = joint_orderstat_cdf(&ModelSpec::equicorr_normal(j, 1e-8).unwrap(), j, &l).unwrap();
        prop_assert!((iid - near).abs() < 1e-6);
    }

    #[test]
    fn survival_by_reflection(g in prop::collection::vec(-2.0f64..2.0, 1..=5), shift in -1.0f64..2.0) {
        // X_i > g_i in order ⇔ −X ≤ −g in order; the normal is symmetric
        let g = sorted(g);
        let j = g.len();
        let m = ModelSpec::iid_normal(j).unwrap();
        let got = joint_orderstat_survival(&m, j, &ThresholdLadder::new(g.clone()).unwrap(), ExtReal::Finite(shift)).unwrap();
        let u: Vec<f64> = g.iter().rev().map(|&x| normal::cdf(shift - x)).collect();
        prop_assert!((got - assignment_oracle(&u)).abs() < 1e-12);
    }
}

#[test]
fn oracle_sanity() {
    // two points: 2 u1 u2 − u1²
    let u = [0.3, 0.7];
    assert!((assignment_oracle(&u) - (2.0 * 0.3 * 0.7 - 0.09)).abs() < 1e-15);
    assert!((assignment_oracle(&[0.4]) - 0.4).abs() < 1e-15);
}
