//! Geometry suites over randomly sampled trees: metric axioms, meets,
//! ball intersections, the Lipschitz witness, rerooting and distortion.

use bcrt::excursion::{sample_excursion, Excursion, SamplerConfig};
use bcrt::selfcheck;
use bcrt::tree::{MetricTree, TreePoint};
use proptest::prelude::*;

const SEED: u64 = 0xB0E7;

fn assert_suite(result: &selfcheck::SuiteResult) {
    assert!(
        result.pass,
        "{}: worst violation {:.3e} exceeds tolerance {:.0e} over {} checks",
        result.name, result.worst, result.tol, result.checks
    );
}

#[test]
fn metric_axioms_hold() {
    for suite in selfcheck::metric_axiom_suites(SEED) {
        assert_suite(&suite);
    }
}

#[test]
fn meet_splitting_identities_hold() {
    assert_suite(&selfcheck::meet_suite(SEED));
}

#[test]
fn ball_intersection_sets_match_exactly() {
    assert_suite(&selfcheck::ball_intersection_suite(SEED));
}

#[test]
fn lipschitz_witness_is_one_lipschitz() {
    assert_suite(&selfcheck::lipschitz_suite(SEED));
}

#[test]
fn rerooting_is_an_isometry_on_grid_points() {
    assert_suite(&selfcheck::rerooting_suite(SEED));
}

#[test]
fn distances_move_less_than_four_times_perturbation() {
    assert_suite(&selfcheck::distortion_suite(SEED));
}

#[test]
fn balls_grow_monotonically() {
    let cfg = SamplerConfig {
        n: 1 << 11,
        seed: SEED,
        replica_index: 500,
    };
    let tree = MetricTree::encode(sample_excursion::<f64>(&cfg));
    let x = TreePoint::Grid(tree.n() / 3);
    let mut previous: Vec<usize> = Vec::new();
    for k in 1..=8 {
        let ball = tree.ball(&x, 0.05 * k as f64).unwrap();
        assert!(previous
            .iter()
            .all(|i| ball.indices.binary_search(i).is_ok()));
        previous = ball.indices;
    }
}

/// Small positive paths for property tests; endpoints are zeroed and the
/// path is treated as piecewise linear.
fn arb_excursion() -> impl Strategy<Value = Excursion<f64>> {
    prop::collection::vec(0.01f64..1.0, 3..40).prop_map(|mut v| {
        let n = v.len() - 1;
        v[0] = 0.0;
        v[n] = 0.0;
        Excursion::from_values(v, 1.0).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prop_four_point_condition(e in arb_excursion(), seed in 0u64..1000) {
        let tree = MetricTree::encode(e);
        let n = tree.n();
        let mut s = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 33) as usize
        };
        for _ in 0..20 {
            let (a, b, c, d) = (next() % (n + 1), next() % (n + 1), next() % (n + 1), next() % (n + 1));
            let lhs = tree.grid_distance(a, b) + tree.grid_distance(c, d);
            let rhs = (tree.grid_distance(a, c) + tree.grid_distance(b, d))
                .max(tree.grid_distance(a, d) + tree.grid_distance(b, c));
            prop_assert!(lhs <= rhs + 1e-9);
        }
    }

    #[test]
    fn prop_meet_lies_on_all_three_geodesics(e in arb_excursion(), i in 0usize..40, j in 0usize..40, k in 0usize..40) {
        let tree = MetricTree::encode(e);
        let n = tree.n();
        let (x, y, z) = (TreePoint::Grid(i % (n + 1)), TreePoint::Grid(j % (n + 1)), TreePoint::Grid(k % (n + 1)));
        let m = tree.meet(&x, &y, &z);
        prop_assert!(tree.on_geodesic(&x, &y, &m));
        prop_assert!(tree.on_geodesic(&x, &z, &m));
        prop_assert!(tree.on_geodesic(&y, &z, &m));
    }
}
