//! Ollivier curvature at scale `(delta, ell)` on excursion-encoded trees,
//! its scale-free normalization, and Monte Carlo estimation over random
//! trees with the center separation controlled by rejection into a bin.

use crate::error::{Error, Result};
use crate::excursion::{cast, sample_excursion, SamplerConfig};
use crate::stats::{mean_se, run_replicas};
use crate::transport::{kantorovich_gap, uniform_ball_measure, w1_edge_cut};
use crate::tree::{MetricTree, TreePoint};
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Ball radius and center separation, with the bounds' regime `delta < ell`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalePair {
    pub delta: f64,
    pub ell: f64,
}

impl ScalePair {
    pub fn new(delta: f64, ell: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < ell) {
            return Err(Error::InvalidScalePair { delta, ell });
        }
        Ok(ScalePair { delta, ell })
    }
}

/// Monte Carlo summary of the curvature at a scale; `scale.ell` is the bin
/// midpoint, `replicas` the number of accepted pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEstimate {
    pub scale: ScalePair,
    pub mean_kappa: f64,
    pub std_error: f64,
    pub replicas: u64,
    pub mean_w1: f64,
}

/// Ollivier curvature at scale `(delta, rho(x, y))`:
/// `1 - W1(mu_x^delta, mu_y^delta) / rho(x, y)` with the edge-cut solver.
pub fn ollivier_kappa<T: Float>(
    tree: &MetricTree<T>,
    x: &TreePoint<T>,
    y: &TreePoint<T>,
    delta: T,
) -> Result<T> {
    let ell = tree.distance(x, y);
    if ell == T::zero() {
        return Err(Error::CoincidentCenters);
    }
    if !(delta < ell) {
        return Err(Error::RadiusNotBelowSeparation {
            delta: delta.to_f64().unwrap_or(f64::NAN),
            ell: ell.to_f64().unwrap_or(f64::NAN),
        });
    }
    let mu = uniform_ball_measure(tree, x, delta)?;
    let nu = uniform_ball_measure(tree, y, delta)?;
    let w1 = w1_edge_cut(tree, &mu, &nu)?.cost;
    Ok(T::one() - w1 / ell)
}

/// Scale-free normalization `kappa / delta^2`.
pub fn scale_free_kappa<T: Float>(kappa: T, delta: T) -> T {
    debug_assert!(delta > T::zero());
    kappa / (delta * delta)
}

/// Pathwise slack of the recursive ball bound: the amount by which
///
/// ```text
/// sum_{B_delta(x)} rho(s, y)  >=  lambda(B_delta(x) \ B_{delta/2}(z)) * ell
///                               + (delta/2) * lambda(O_delta \ O_{delta/2})
///                               + sum_{B_{delta/2}(z)} rho(s, y)
/// ```
///
/// holds, with `z` the point of `[[x, y]]` at distance `delta/2` from `x`,
/// integrals realized as sums over grid atoms of mass `1/n`, and the
/// offspring sets taken relative to `(x, y)`. Non-negative up to rounding
/// on every finite tree; the contract tolerance is `10 * grid_step`.
pub fn recursive_bound_check<T: Float>(
    tree: &MetricTree<T>,
    x: &TreePoint<T>,
    y: &TreePoint<T>,
    delta: T,
) -> Result<T> {
    let ell = tree.distance(x, y);
    if ell == T::zero() {
        return Err(Error::CoincidentCenters);
    }
    if !(delta > T::zero()) {
        return Err(Error::NonpositiveRadius(delta.to_f64().unwrap_or(f64::NAN)));
    }
    if !(delta < ell) {
        return Err(Error::RadiusNotBelowSeparation {
            delta: delta.to_f64().unwrap_or(f64::NAN),
            ell: ell.to_f64().unwrap_or(f64::NAN),
        });
    }
    let two = cast::<T>(2.0);
    let z = tree.point_on_geodesic_at(x, y, delta / two)?;
    let half_delta = delta / two;
    let n = tree.n();
    let atom = T::one() / cast::<T>(n as f64);
    let tol = cast::<T>(crate::tree::GEO_TOL);

    let mut lhs = T::zero();
    let mut mass_outside_z = T::zero(); // lambda(B_delta(x) \ B_{delta/2}(z))
    let mut mass_off_shell = T::zero(); // lambda(O_delta \ O_{delta/2})
    let mut rhs_inner = T::zero(); // integral over B_{delta/2}(z)

    for i in 0..n {
        let p = TreePoint::Grid(i);
        let dxi = tree.distance(x, &p);
        if dxi >= delta {
            continue;
        }
        let dyi = tree.distance(y, &p);
        lhs = lhs + atom * dyi;
        if tree.distance(&z, &p) < half_delta {
            rhs_inner = rhs_inner + atom * dyi;
        } else {
            mass_outside_z = mass_outside_z + atom;
        }
        // offspring of (x, y): x lies on [[i, y]]
        let in_offspring = (dxi + ell - dyi).abs() <= tol;
        if in_offspring && dxi >= half_delta {
            mass_off_shell = mass_off_shell + atom;
        }
    }
    let rhs = mass_outside_z * ell + half_delta * mass_off_shell + rhs_inner;
    Ok(lhs - rhs)
}

/// How Monte Carlo centers are drawn.
///
/// `UniformVertex` follows the mass measure: centers are uniform grid
/// vertices, which are almost surely leaves of the limiting tree.
/// `SkeletonPoint` draws each center uniformly along the geodesic between
/// two independent uniform vertices, producing skeleton points whose balls
/// straddle both geodesic directions; the closed-form curvature band is a
/// statement about this regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterMode {
    UniformVertex,
    SkeletonPoint,
}

/// Configuration for the binned curvature Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McCurvatureConfig {
    pub n: usize,
    pub seed: u64,
    /// Number of trials (trees); accepted pairs are those whose center
    /// separation lands in `[ell_lo, ell_hi]`.
    pub replicas: u64,
    pub delta: f64,
    pub ell_lo: f64,
    pub ell_hi: f64,
    pub centers: CenterMode,
}

impl McCurvatureConfig {
    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::GridTooSmall(self.n));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidConfig("replicas must be at least 1".into()));
        }
        if !(self.ell_lo > 0.0 && self.ell_lo < self.ell_hi) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < ell_lo < ell_hi, got [{}, {}]",
                self.ell_lo, self.ell_hi
            )));
        }
        if !(self.delta > 0.0 && self.delta < self.ell_lo) {
            return Err(Error::InvalidConfig(format!(
                "need 0 < delta < ell_lo, got delta = {}, ell_lo = {}",
                self.delta, self.ell_lo
            )));
        }
        Ok(())
    }
}

/// One accepted Monte Carlo sample.
#[derive(Debug, Clone, Copy)]
struct PairSample {
    ell: f64,
    w1: f64,
    kappa: f64,
    gap: f64,
}

/// Aggregate of a binned curvature run; all statistics are over accepted
/// pairs, reduced in replica order (schedule-independent).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureRun {
    pub config: McCurvatureConfig,
    pub trials: u64,
    pub accepted: u64,
    pub mean_ell: f64,
    pub mean_kappa: f64,
    pub kappa_se: f64,
    pub mean_w1: f64,
    pub w1_se: f64,
    /// Mean and SE of `gap - ell` per accepted sample.
    pub gap_minus_ell_mean: f64,
    pub gap_minus_ell_se: f64,
    /// Largest pathwise violation of `W1 <= ell + 2 delta` (negative when
    /// the bound holds strictly on every sample).
    pub max_upper_slack: f64,
    /// Largest pathwise violation of `gap <= W1` (duality).
    pub max_duality_slack: f64,
}

impl CurvatureRun {
    pub fn estimate(&self) -> CurvatureEstimate {
        CurvatureEstimate {
            scale: ScalePair {
                delta: self.config.delta,
                ell: 0.5 * (self.config.ell_lo + self.config.ell_hi),
            },
            mean_kappa: self.mean_kappa,
            std_error: self.kappa_se,
            replicas: self.accepted,
            mean_w1: self.mean_w1,
        }
    }
}

fn draw_center<R: Rng>(
    tree: &MetricTree<f64>,
    rng: &mut R,
    mode: CenterMode,
) -> Option<TreePoint<f64>> {
    let n = tree.n();
    match mode {
        CenterMode::UniformVertex => Some(TreePoint::Grid(rng.gen_range(0..n))),
        CenterMode::SkeletonPoint => {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let u: f64 = rng.gen();
            let d = tree.grid_distance(a, b);
            if d == 0.0 {
                return None;
            }
            Some(TreePoint::Geodesic {
                a,
                b,
                offset: u * d,
            })
        }
    }
}

fn run_pair_samples(config: &McCurvatureConfig) -> Result<Vec<PairSample>> {
    config.validate()?;
    let cfg = *config;
    let per_replica = move |r: u64| -> Option<PairSample> {
        let sampler = SamplerConfig {
            n: cfg.n,
            seed: cfg.seed,
            replica_index: r,
        };
        let excursion = sample_excursion::<f64>(&sampler);
        let tree = MetricTree::encode(excursion);
        let mut rng = crate::aux_stream(cfg.seed, r);
        let x = draw_center(&tree, &mut rng, cfg.centers)?;
        let y = draw_center(&tree, &mut rng, cfg.centers)?;
        let ell = tree.distance(&x, &y);
        if !(ell >= cfg.ell_lo && ell <= cfg.ell_hi) {
            return None;
        }
        let mu = uniform_ball_measure(&tree, &x, cfg.delta).ok()?;
        let nu = uniform_ball_measure(&tree, &y, cfg.delta).ok()?;
        let w1 = w1_edge_cut(&tree, &mu, &nu).ok()?.cost;
        let gap = kantorovich_gap(&tree, &mu, &nu, &x, &y).ok()?;
        Some(PairSample {
            ell,
            w1,
            kappa: 1.0 - w1 / ell,
            gap,
        })
    };
    let samples: Vec<PairSample> = run_replicas(cfg.replicas, per_replica)
        .into_iter()
        .flatten()
        .collect();
    if samples.is_empty() {
        return Err(Error::ZeroAcceptedPairs {
            lo: cfg.ell_lo,
            hi: cfg.ell_hi,
            trials: cfg.replicas,
        });
    }
    Ok(samples)
}

/// Runs the binned curvature Monte Carlo and aggregates every statistic the
/// experiments report.
pub fn mc_curvature_run(config: &McCurvatureConfig) -> Result<CurvatureRun> {
    let samples = run_pair_samples(config)?;
    let ells: Vec<f64> = samples.iter().map(|s| s.ell).collect();
    let kappas: Vec<f64> = samples.iter().map(|s| s.kappa).collect();
    let w1s: Vec<f64> = samples.iter().map(|s| s.w1).collect();
    let gml: Vec<f64> = samples.iter().map(|s| s.gap - s.ell).collect();
    let (mean_ell, _) = mean_se(&ells);
    let (mean_kappa, kappa_se) = mean_se(&kappas);
    let (mean_w1, w1_se) = mean_se(&w1s);
    let (gap_mean, gap_se) = mean_se(&gml);
    let max_upper_slack = samples
        .iter()
        .map(|s| s.w1 - (s.ell + 2.0 * config.delta))
        .fold(f64::NEG_INFINITY, f64::max);
    let max_duality_slack = samples
        .iter()
        .map(|s| s.gap - s.w1)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CurvatureRun {
        config: *config,
        trials: config.replicas,
        accepted: samples.len() as u64,
        mean_ell,
        mean_kappa,
        kappa_se,
        mean_w1,
        w1_se,
        gap_minus_ell_mean: gap_mean,
        gap_minus_ell_se: gap_se,
        max_upper_slack,
        max_duality_slack,
    })
}

/// Monte Carlo estimate of the expected curvature at the configured scale.
pub fn mc_expected_curvature(config: &McCurvatureConfig) -> Result<CurvatureEstimate> {
    Ok(mc_curvature_run(config)?.estimate())
}

/// Kantorovich witness statistic: mean and SE of `gap - ell` over accepted
/// pairs (`gap = mu_x^delta(f_{x,y}) - mu_y^delta(f_{x,y})`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KantorovichStat {
    pub mean: f64,
    pub se: f64,
    pub accepted: u64,
    pub mean_ell: f64,
}

/// Estimates `E[K(f_{x,y})] - mean ell` at the configured scale.
pub fn kantorovich_lower_stat(config: &McCurvatureConfig) -> Result<KantorovichStat> {
    let run = mc_curvature_run(config)?;
    Ok(KantorovichStat {
        mean: run.gap_minus_ell_mean,
        se: run.gap_minus_ell_se,
        accepted: run.accepted,
        mean_ell: run.mean_ell,
    })
}
