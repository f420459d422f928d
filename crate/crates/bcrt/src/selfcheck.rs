//! Deterministic verification suites over randomly sampled trees: metric
//! axioms, meet identities, ball-intersection set equality, the Lipschitz
//! witness property, rerooting isometry, perturbation distortion and
//! edge-cut/oracle agreement. The CLI `selftest` command and the acceptance
//! tests both run these.

use crate::error::Result;
use crate::excursion::{sample_excursion, Excursion, SamplerConfig};
use crate::transport::{w1_edge_cut, w1_oracle, DiscreteMeasure};
use crate::tree::{MetricTree, TreePoint};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Outcome of one suite: the worst observed violation against its
/// tolerance, over `checks` randomized checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub checks: u64,
    pub worst: f64,
    pub tol: f64,
    pub pass: bool,
}

impl SuiteResult {
    fn new(name: &str, checks: u64, worst: f64, tol: f64) -> Self {
        SuiteResult {
            name: name.to_string(),
            checks,
            worst,
            tol,
            pass: worst <= tol,
        }
    }
}

fn sample_tree(seed: u64, replica: u64, n: usize) -> MetricTree<f64> {
    let cfg = SamplerConfig {
        n,
        seed,
        replica_index: replica,
    };
    MetricTree::encode(sample_excursion::<f64>(&cfg))
}

/// Symmetry (exact), triangle inequality and four-point condition on
/// random grid triples/quadruples.
pub fn metric_axiom_suites(seed: u64) -> Vec<SuiteResult> {
    let trees: Vec<MetricTree<f64>> = (0..4).map(|r| sample_tree(seed, r, 1024)).collect();
    let mut rng = crate::aux_stream(seed, 0);
    let per_tree = 25_000u64;

    let mut worst_sym = 0.0f64;
    let mut worst_tri = 0.0f64;
    let mut worst_four = 0.0f64;
    for tree in &trees {
        let n = tree.n();
        for _ in 0..per_tree {
            let a = rng.gen_range(0..=n);
            let b = rng.gen_range(0..=n);
            let c = rng.gen_range(0..=n);
            let d = rng.gen_range(0..=n);
            let dab = tree.grid_distance(a, b);
            worst_sym = worst_sym.max((dab - tree.grid_distance(b, a)).abs());
            let dac = tree.grid_distance(a, c);
            let dbc = tree.grid_distance(b, c);
            worst_tri = worst_tri.max(dab - dac - dbc);
            let dcd = tree.grid_distance(c, d);
            let dad = tree.grid_distance(a, d);
            let dbd = tree.grid_distance(b, d);
            let four = dab + dcd - (dac + dbd).max(dad + dbc);
            worst_four = worst_four.max(four);
        }
    }
    let checks = per_tree * trees.len() as u64;
    vec![
        SuiteResult::new("metric_symmetry", checks, worst_sym, 0.0),
        SuiteResult::new("triangle_inequality", checks, worst_tri, 1e-9),
        SuiteResult::new("four_point_condition", checks, worst_four, 1e-9),
    ]
}

/// The three splitting identities of the meet on random triples.
pub fn meet_suite(seed: u64) -> SuiteResult {
    let trees: Vec<MetricTree<f64>> = (0..2).map(|r| sample_tree(seed, 10 + r, 1024)).collect();
    let mut rng = crate::aux_stream(seed, 1);
    let per_tree = 5_000u64;
    let mut worst = 0.0f64;
    for tree in &trees {
        let n = tree.n();
        for _ in 0..per_tree {
            let x = TreePoint::Grid(rng.gen_range(0..=n));
            let y = TreePoint::Grid(rng.gen_range(0..=n));
            let z = TreePoint::Grid(rng.gen_range(0..=n));
            let m = tree.meet(&x, &y, &z);
            let dxy = tree.distance(&x, &y);
            let dxz = tree.distance(&x, &z);
            let dyz = tree.distance(&y, &z);
            let dxm = tree.distance(&x, &m);
            let dym = tree.distance(&y, &m);
            let dzm = tree.distance(&z, &m);
            worst = worst
                .max((dxy - dxm - dym).abs())
                .max((dxz - dxm - dzm).abs())
                .max((dyz - dym - dzm).abs());
        }
    }
    SuiteResult::new("meet_splitting", per_tree * trees.len() as u64, worst, 1e-9)
}

/// Exhaustive grid-index equality of `ball(x, delta) ∩ ball(y, eps)` with
/// the closed-form intersection ball.
pub fn ball_intersection_suite(seed: u64) -> SuiteResult {
    let mut rng = crate::aux_stream(seed, 2);
    let mut worst = 0.0f64;
    let mut checks = 0u64;
    'outer: for r in 0..10u64 {
        let tree = sample_tree(seed, 20 + r, 1024);
        let n = tree.n();
        let mut done = 0;
        while done < 10 {
            checks += 1;
            if checks > 10_000 {
                break 'outer;
            }
            let x = TreePoint::Grid(rng.gen_range(0..n));
            let y = TreePoint::Grid(rng.gen_range(0..n));
            let ell = tree.distance(&x, &y);
            if ell <= 0.0 {
                continue;
            }
            let delta = ell * rng.gen_range(0.6..1.0);
            let eps_lo = (ell - delta) / ell + 0.05;
            let eps = ell * rng.gen_range(eps_lo..1.0);
            let Ok((center, radius)) = tree.ball_intersection_center(&x, &y, delta, eps) else {
                continue;
            };
            done += 1;
            let bx = tree.ball(&x, delta).unwrap().indices;
            let by = tree.ball(&y, eps).unwrap().indices;
            let bv = tree.ball(&center, radius).unwrap().indices;
            let inter: Vec<usize> = bx
                .iter()
                .filter(|i| by.binary_search(i).is_ok())
                .cloned()
                .collect();
            let diff = inter
                .iter()
                .filter(|i| bv.binary_search(i).is_err())
                .count()
                + bv.iter()
                    .filter(|i| inter.binary_search(i).is_err())
                    .count();
            worst = worst.max(diff as f64);
        }
    }
    SuiteResult::new("ball_intersection_set_equality", 100, worst, 0.0)
}

/// `|f_{x,y}(sigma) - f_{x,y}(tau)| <= rho(sigma, tau)` on random pairs.
pub fn lipschitz_suite(seed: u64) -> SuiteResult {
    let mut rng = crate::aux_stream(seed, 3);
    let mut worst = 0.0f64;
    let mut checks = 0u64;
    for r in 0..10u64 {
        let tree = sample_tree(seed, 40 + r, 1024);
        let n = tree.n();
        let (x, y) = loop {
            let x = TreePoint::Grid(rng.gen_range(0..n));
            let y = TreePoint::Grid(rng.gen_range(0..n));
            if tree.distance(&x, &y) > 0.0 {
                break (x, y);
            }
        };
        for _ in 0..1000 {
            let s = TreePoint::Grid(rng.gen_range(0..=n));
            let t = TreePoint::Grid(rng.gen_range(0..=n));
            let fs = tree.lipschitz_witness(&x, &y, &s).unwrap();
            let ft = tree.lipschitz_witness(&x, &y, &t).unwrap();
            worst = worst.max((fs - ft).abs() - tree.distance(&s, &t));
            checks += 1;
        }
    }
    SuiteResult::new("lipschitz_witness", checks, worst, 1e-9)
}

/// Exact isometry of the rerooting index map on grid pairs.
pub fn rerooting_suite(seed: u64) -> SuiteResult {
    let mut rng = crate::aux_stream(seed, 4);
    let mut worst = 0.0f64;
    let mut checks = 0u64;
    for r in 0..100u64 {
        let cfg = SamplerConfig {
            n: 512,
            seed,
            replica_index: 60 + r,
        };
        let e = sample_excursion::<f64>(&cfg);
        let n = e.n();
        let k = rng.gen_range(1..n);
        let rerooted = e.reroot(k as f64 / n as f64).unwrap();
        let before = MetricTree::encode(e);
        let after = MetricTree::encode(rerooted);
        for _ in 0..1000 {
            let i = rng.gen_range(0..=n);
            let j = rng.gen_range(0..=n);
            let d0 = before.grid_distance(i, j);
            let d1 = after.grid_distance(
                Excursion::<f64>::reroot_index_map(n, k, i),
                Excursion::<f64>::reroot_index_map(n, k, j),
            );
            worst = worst.max((d0 - d1).abs());
            checks += 1;
        }
    }
    SuiteResult::new("rerooting_isometry", checks, worst, 1e-12)
}

/// Distances move by less than four times any uniform path perturbation.
pub fn distortion_suite(seed: u64) -> SuiteResult {
    let mut rng = crate::aux_stream(seed, 5);
    let mut worst = 0.0f64;
    let mut checks = 0u64;
    for (r, amp) in [(0u64, 0.01f64), (1, 0.003)] {
        let cfg = SamplerConfig {
            n: 2048,
            seed,
            replica_index: 80 + r,
        };
        let e = sample_excursion::<f64>(&cfg);
        let n = e.n();
        let mut values = e.values().to_vec();
        for v in values[1..n].iter_mut() {
            *v = (*v + rng.gen_range(-amp..amp)).max(0.0);
        }
        let mut cell_mins = e.cell_mins().to_vec();
        for (m, c) in cell_mins.iter_mut().enumerate() {
            let cap = values[m].min(values[m + 1]);
            *c = (*c + rng.gen_range(-amp..amp)).clamp(0.0, cap);
        }
        let perturbed = Excursion::from_parts(values, cell_mins, 1.0).unwrap();
        let sup = e.sup_distance(&perturbed).unwrap();
        let before = MetricTree::encode(e);
        let after = MetricTree::encode(perturbed);
        for _ in 0..50_000 {
            let i = rng.gen_range(0..=n);
            let j = rng.gen_range(0..=n);
            let drift = (before.grid_distance(i, j) - after.grid_distance(i, j)).abs();
            worst = worst.max(drift - 4.0 * sup);
            checks += 1;
        }
    }
    SuiteResult::new("distortion_4sup", checks, worst, 1e-12)
}

/// Edge-cut versus min-cost-flow oracle on random small measures.
/// `inject` is added to the edge-cut cost to let the CLI verify that a
/// perturbed solver is caught.
pub fn oracle_equivalence_suite(seed: u64, instances: u64, inject: f64) -> Result<SuiteResult> {
    let mut rng = crate::aux_stream(seed, 6);
    let mut worst = 0.0f64;
    let mut tree = sample_tree(seed, 100, 256);
    for k in 0..instances {
        if k % 10 == 9 {
            tree = sample_tree(seed, 101 + k / 10, 256);
        }
        let n = tree.n();
        let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Result<DiscreteMeasure<f64>> {
            let atoms = rng.gen_range(1..=10);
            DiscreteMeasure::from_weights(
                (0..atoms)
                    .map(|_| (rng.gen_range(0..=n), rng.gen_range(0.1..1.0)))
                    .collect(),
            )
        };
        let mu = draw(&mut rng)?;
        let nu = draw(&mut rng)?;
        let ec = w1_edge_cut(&tree, &mu, &nu)?.cost + inject;
        let or = w1_oracle(&tree, &mu, &nu)?.cost;
        worst = worst.max((ec - or).abs());
    }
    Ok(SuiteResult::new(
        "oracle_equivalence",
        instances,
        worst,
        1e-9,
    ))
}

/// All suites in a fixed order; `inject` perturbs the edge-cut cost inside
/// the oracle-equivalence suite only.
pub fn run_all(seed: u64, inject: f64) -> Result<Vec<SuiteResult>> {
    let mut out = metric_axiom_suites(seed);
    out.push(meet_suite(seed));
    out.push(ball_intersection_suite(seed));
    out.push(lipschitz_suite(seed));
    out.push(rerooting_suite(seed));
    out.push(distortion_suite(seed));
    out.push(oracle_equivalence_suite(seed, 1000, inject)?);
    Ok(out)
}
