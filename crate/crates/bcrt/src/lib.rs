//! Random metric trees encoded by Brownian excursions, with exact
//! Wasserstein-1 transport between ball measures and Monte Carlo
//! verification of the closed-form volume and curvature laws.
//!
//! The core pipeline:
//!
//! 1. [`excursion`] samples discretized normalized Brownian excursions
//!    (Gaussian bridge plus Vervaat shift, refined with exact per-cell
//!    minima) and rescales or reroots them.
//! 2. [`tree`] encodes an excursion as a metric tree with O(1) distance
//!    queries and answers geodesic, meet, ball and decomposition queries.
//! 3. [`transport`] computes exact W1 between finitely-supported measures
//!    via the tree edge-cut formula, with a min-cost-flow oracle and
//!    Kantorovich lower bounds.
//! 4. [`curvature`] estimates the Ollivier curvature at scale
//!    `(delta, ell)` over random trees.
//! 5. [`analysis`] holds the closed forms (`1 - exp(-2 eps^2)`, the ratio
//!    function `f` with limit 19/128) and the statistical experiments.
//!
//! The numeric core is generic over the scalar type through
//! [`num_traits::Float`]; the crate root exports `f64` aliases, which the
//! experiments and the CLI use throughout.
//!
//! ```
//! use bcrt::tree::TreePoint;
//! use bcrt::{sample_excursion, uniform_ball_measure, w1_edge_cut, SamplerConfig};
//!
//! let config = SamplerConfig::new(1 << 10, 1, 0)?;
//! let tree = bcrt::MetricTree::encode(sample_excursion(&config));
//! let (x, y) = (TreePoint::Grid(200), TreePoint::Grid(600));
//! let mu = uniform_ball_measure(&tree, &x, 0.05)?;
//! let nu = uniform_ball_measure(&tree, &y, 0.05)?;
//! let w1 = w1_edge_cut(&tree, &mu, &nu)?.cost;
//! let kappa = 1.0 - w1 / tree.distance(&x, &y);
//! assert!(kappa.is_finite());
//! # Ok::<(), bcrt::Error>(())
//! ```

// Negated comparisons like `!(x > 0)` are deliberate: they reject NaN
// parameters where `x <= 0` would accept them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod curvature;
pub mod error;
pub mod excursion;
pub mod rmq;
pub mod selfcheck;
pub mod stats;
pub mod transport;
pub mod tree;

pub use error::{Error, Result};

/// Excursion with `f64` scalars.
pub type Excursion = excursion::Excursion<f64>;
/// Metric tree with `f64` scalars.
pub type MetricTree = tree::MetricTree<f64>;
/// Tree point with `f64` offsets.
pub type TreePoint = tree::TreePoint<f64>;
/// Discrete measure with `f64` masses.
pub type DiscreteMeasure = transport::DiscreteMeasure<f64>;
/// Transport result with `f64` cost.
pub type TransportResult = transport::TransportResult<f64>;

pub use curvature::{
    kantorovich_lower_stat, mc_curvature_run, mc_expected_curvature, ollivier_kappa,
    recursive_bound_check, scale_free_kappa, CenterMode, CurvatureEstimate, CurvatureRun,
    KantorovichStat, McCurvatureConfig, ScalePair,
};
pub use excursion::{sample_excursion, SamplerConfig};
pub use transport::{kantorovich_gap, uniform_ball_measure, w1_edge_cut, w1_oracle, Method};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Auxiliary random stream for a replica (center draws, perturbations),
/// disjoint from the excursion sampler's stream for the same replica.
pub(crate) fn aux_stream(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica | (1 << 63));
    rng
}
