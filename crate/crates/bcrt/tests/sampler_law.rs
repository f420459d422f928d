//! Statistical laws of the sampler: the expected maximum height against
//! its known value sqrt(pi/2), cross-checked by an independently coded
//! random-walk excursion sampler, and the expected ball volume at the root.

use bcrt::excursion::{sample_excursion, SamplerConfig};
use bcrt::stats::{mean_se, run_replicas};
use bcrt::tree::{MetricTree, TreePoint};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 1 << 14;
const REPLICAS: u64 = 4000;
const SEED: u64 = 424242;

/// Independent oracle: a +-1 random-walk bridge (shuffled steps), cyclically
/// shifted at its first minimum, scaled by 1/sqrt(n). Its height converges
/// to the excursion height in law.
fn random_walk_height(seed: u64, replica: u64, n: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    let mut steps: Vec<i32> = std::iter::repeat_n(1, n / 2)
        .chain(std::iter::repeat_n(-1, n / 2))
        .collect();
    steps.shuffle(&mut rng);
    let mut walk = Vec::with_capacity(n + 1);
    let mut acc = 0i32;
    walk.push(0);
    for s in &steps {
        acc += s;
        walk.push(acc);
    }
    let mut min_idx = 0;
    for (i, w) in walk.iter().enumerate().take(n) {
        if *w < walk[min_idx] {
            min_idx = i;
        }
    }
    let low = walk[min_idx];
    let mut max = 0i32;
    for i in 0..n {
        max = max.max(walk[(min_idx + i) % n] - low);
    }
    max as f64 / (n as f64).sqrt()
}

#[test]
fn expected_height_matches_known_moment() {
    let target = (std::f64::consts::PI / 2.0).sqrt(); // 1.2533...
    let heights = run_replicas(REPLICAS, |r| {
        let cfg = SamplerConfig {
            n: N,
            seed: SEED,
            replica_index: r,
        };
        sample_excursion::<f64>(&cfg).height()
    });
    let (mean, se) = mean_se(&heights);
    assert!(
        (mean - target).abs() <= 4.0 * se,
        "E[H]: mc {mean:.5} vs {target:.5}, se {se:.5}"
    );

    // brute-force cross-check with the independently coded walk sampler;
    // the walk keeps an O(n^{-1/2}) lattice deficit in its maximum, covered
    // by a small allowance on top of the pooled standard errors
    let walk_heights = run_replicas(REPLICAS, |r| random_walk_height(SEED ^ 0x5a5a, r, N));
    let (walk_mean, walk_se) = mean_se(&walk_heights);
    let pooled = (se * se + walk_se * walk_se).sqrt();
    assert!(
        (mean - walk_mean).abs() <= 4.0 * pooled + 0.02,
        "gaussian {mean:.5} vs walk {walk_mean:.5}, pooled se {pooled:.5}"
    );
    assert!(
        (walk_mean - target).abs() <= 4.0 * walk_se + 0.02,
        "walk {walk_mean:.5} vs {target:.5}"
    );
}

#[test]
fn expected_root_ball_volume_matches_law() {
    let eps = 0.3f64;
    let closed_form = 1.0 - (-2.0 * eps * eps).exp(); // 0.164729...
    let volumes = run_replicas(REPLICAS, |r| {
        let cfg = SamplerConfig {
            n: N,
            seed: SEED,
            replica_index: r,
        };
        let tree = MetricTree::encode(sample_excursion::<f64>(&cfg));
        tree.ball(&TreePoint::Grid(0), eps).unwrap().volume
    });
    let (mean, se) = mean_se(&volumes);
    assert!(
        (mean - closed_form).abs() <= 4.0 * se + 2.0 / N as f64,
        "root volume: mc {mean:.6} vs {closed_form:.6}, se {se:.6}"
    );
}
