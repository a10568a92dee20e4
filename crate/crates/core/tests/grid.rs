use num_rational::Ratio;
use proptest::prelude::*;
use stepwise::gridoracle::{GridModel, GridRegion};
use stepwise::models::{ExtReal, ModelSpec};
use stepwise::normal;

type Q = Ratio<i128>;

fn pmf_from(w: &[u8]) -> Vec<Q> {
    let total: i128 = w.iter().map(|&v| v as i128).sum::<i128>().max(1);
    let mut p: Vec<Q> = w.iter().map(|&v| Ratio::new(v as i128, total)).collect();
    if w.iter().all(|&v| v == 0) {
        p[0] = Ratio::from_integer(1);
    }
    p
}

fn corners_strategy(dims: [usize; 3]) -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec((1..=dims[0], 1..=dims[1], 1..=dims[2]).prop_map(|(a, b, c)| vec![a, b, c]), 1..5)
}

proptest! {
    #[test]
    fn slice_operators_preserve_monotonicity(corners in corners_strategy([4, 3, 5]), axis in 0usize..3) {
        let r = GridRegion::upper_set(&[4, 3, 5], &corners);
        prop_assert!(r.is_monotone());
        prop_assert!(r.slice_union(axis).unwrap().is_monotone());
        prop_assert!(r.slice_intersection(axis).unwrap().is_monotone());
    }

    #[test]
    fn point_mass_axis_equals_slice(
        corners in corners_strategy([3, 4, 4]),
        w0 in prop::collection::vec(0u8..8, 3),
        w1 in prop::collection::vec(0u8..8, 4),
    ) {
        let r = GridRegion::upper_set(&[3, 4, 4], &corners);
        let (p0, p1) = (pmf_from(&w0), pmf_from(&w1));
        let top: Vec<Q> = (0..4).map(|i| Q::from_integer((i == 3) as i128)).collect();
        let bottom: Vec<Q> = (0..4).map(|i| Q::from_integer((i == 0) as i128)).collect();
        prop_assert_eq!(
            r.probability(&[p0.clone(), p1.clone(), top]).unwrap(),
            r.slice_union(2).unwrap().probability(&[p0.clone(), p1.clone()]).unwrap()
        );
        prop_assert_eq!(
            r.probability(&[p0.clone(), p1.clone(), bottom]).unwrap(),
            r.slice_intersection(2).unwrap().probability(&[p0, p1]).unwrap()
        );
    }
}

#[test]
fn continuous_sentinel_matches_grid_slice() {
    // R = {X1 > t1, X2 > t2, X3 > t3}; with θ3 = +∞ its probability is
    // P(X1 > t1, X2 > t2). On a fine binning the union slice over axis 3
    // reproduces that up to the binning error.
    let (t1, t2, t3) = (0.37, -0.81, 1.3);
    let cuts: Vec<f64> = (0..200).map(|i| -5.0 + 0.05 * i as f64).collect();
    let g = GridModel::discretized_normal(&cuts, 0.0).unwrap();
    let cell = |t: f64| stepwise::gridoracle::threshold_cell(&cuts, t);
    let m = cuts.len() + 1;
    let r = GridRegion::from_fn(&[m, m, m], |x| x[0] >= cell(t1) && x[1] >= cell(t2) && x[2] >= cell(t3));
    let grid = r.slice_union(2).unwrap().probability(&[g.null_pmf().to_vec(), g.null_pmf().to_vec()]).unwrap();
    let model = ModelSpec::iid_normal(3).unwrap();
    let theta = [ExtReal::Finite(0.0), ExtReal::Finite(0.0), ExtReal::PosInf];
    let continuous = model.prob_all_above(&theta, &[t1, t2, t3]).unwrap();
    assert!((continuous - normal::sf(t1) * normal::sf(t2)).abs() < 1e-12);
    // nearest bin edge is within 0.025, density below 0.4
    assert!((grid - continuous).abs() < 2.0 * 0.025 * 0.4, "{grid} vs {continuous}");
}
