//! Transport-level properties: the duality sandwich, W1 metric axioms over
//! random measures, and scale equivariance.

use bcrt::excursion::{sample_excursion, SamplerConfig};
use bcrt::transport::{kantorovich_gap, w1_edge_cut, w1_oracle, DiscreteMeasure};
use bcrt::tree::{MetricTree, TreePoint};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_measure(rng: &mut ChaCha8Rng, n: usize, max_atoms: usize) -> DiscreteMeasure<f64> {
    let k = rng.gen_range(1..=max_atoms);
    DiscreteMeasure::from_weights(
        (0..k)
            .map(|_| (rng.gen_range(0..=n), rng.gen_range(0.05..1.0)))
            .collect(),
    )
    .unwrap()
}

/// On every instance: kantorovich gap <= edge-cut = oracle <= cost of the
/// independence plan `mu (x) nu`.
#[test]
fn duality_sandwich() {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for round in 0..60u64 {
        let cfg = SamplerConfig {
            n: 512,
            seed: 9000 + round,
            replica_index: 0,
        };
        let tree = MetricTree::encode(sample_excursion::<f64>(&cfg));
        let n = tree.n();
        let mu = random_measure(&mut rng, n, 8);
        let nu = random_measure(&mut rng, n, 8);
        let (x, y) = loop {
            let x = rng.gen_range(0..n);
            let y = rng.gen_range(0..n);
            if tree.grid_distance(x, y) > 0.0 {
                break (TreePoint::Grid(x), TreePoint::Grid(y));
            }
        };
        let gap = kantorovich_gap(&tree, &mu, &nu, &x, &y).unwrap();
        assert!(kantorovich_gap(&tree, &mu, &mu, &x, &y).unwrap().abs() < 1e-12);
        let ec = w1_edge_cut(&tree, &mu, &nu).unwrap().cost;
        let or = w1_oracle(&tree, &mu, &nu).unwrap().cost;
        let independence: f64 = mu
            .atoms()
            .iter()
            .flat_map(|&(a, ma)| nu.atoms().iter().map(move |&(b, mb)| (a, b, ma * mb)))
            .map(|(a, b, m)| m * tree.grid_distance(a, b))
            .sum();
        assert!(
            gap.abs() <= ec + 1e-9,
            "|gap| {} > edge cut {ec}",
            gap.abs()
        );
        assert!((ec - or).abs() <= 1e-9, "edge cut {ec} vs oracle {or}");
        assert!(
            or <= independence + 1e-9,
            "oracle {or} > independence {independence}"
        );
    }
}

#[test]
fn w1_metric_axioms_on_random_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let cfg = SamplerConfig {
        n: 512,
        seed: 9100,
        replica_index: 0,
    };
    let tree = MetricTree::encode(sample_excursion::<f64>(&cfg));
    let n = tree.n();
    for _ in 0..40 {
        let a = random_measure(&mut rng, n, 6);
        let b = random_measure(&mut rng, n, 6);
        let c = random_measure(&mut rng, n, 6);
        let dab = w1_edge_cut(&tree, &a, &b).unwrap().cost;
        let dba = w1_edge_cut(&tree, &b, &a).unwrap().cost;
        assert_eq!(dab.to_bits(), dba.to_bits(), "symmetry is exact");
        let dac = w1_edge_cut(&tree, &a, &c).unwrap().cost;
        let dcb = w1_edge_cut(&tree, &c, &b).unwrap().cost;
        assert!(dab <= dac + dcb + 1e-9, "triangle: {dab} > {dac} + {dcb}");
        assert!(w1_edge_cut(&tree, &a, &a).unwrap().cost == 0.0);
    }
}

/// Scaling the excursion by `alpha` scales all distances by `sqrt(alpha)`,
/// and W1 with them.
#[test]
fn w1_scale_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    let cfg = SamplerConfig {
        n: 512,
        seed: 9200,
        replica_index: 0,
    };
    let base = sample_excursion::<f64>(&cfg);
    for &alpha in &[4.0, 0.25, 9.0] {
        let scaled = base.scale(alpha).unwrap();
        let t0 = MetricTree::encode(base.clone());
        let t1 = MetricTree::encode(scaled);
        let n = t0.n();
        let factor = alpha.sqrt();
        for _ in 0..20 {
            let mu = random_measure(&mut rng, n, 6);
            let nu = random_measure(&mut rng, n, 6);
            let c0 = w1_edge_cut(&t0, &mu, &nu).unwrap().cost;
            let c1 = w1_edge_cut(&t1, &mu, &nu).unwrap().cost;
            assert!(
                (c1 - factor * c0).abs() <= 1e-12 * c0.max(1.0) * factor.max(1.0),
                "alpha {alpha}: {c1} vs {}",
                factor * c0
            );
        }
    }
}

/// Cost never exceeds the diameter of the supports' span.
#[test]
fn cost_bounded_by_support_diameter() {
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    let cfg = SamplerConfig {
        n: 512,
        seed: 9300,
        replica_index: 0,
    };
    let tree = MetricTree::encode(sample_excursion::<f64>(&cfg));
    for _ in 0..40 {
        let mu = random_measure(&mut rng, tree.n(), 8);
        let nu = random_measure(&mut rng, tree.n(), 8);
        let cost = w1_edge_cut(&tree, &mu, &nu).unwrap().cost;
        let diameter = mu
            .atoms()
            .iter()
            .chain(nu.atoms())
            .flat_map(|&(a, _)| {
                mu.atoms()
                    .iter()
                    .chain(nu.atoms())
                    .map(move |&(b, _)| (a, b))
            })
            .map(|(a, b)| tree.grid_distance(a, b))
            .fold(0.0f64, f64::max);
        assert!(cost <= diameter + 1e-12);
    }
}
