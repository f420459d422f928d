//! Closed-form functions and statistical laws: the expected ball-volume
//! law, the ratio function `f` with its exact limit 19/128 at zero, and the
//! paired-expectation experiments over random trees.

use crate::curvature::CenterMode;
use crate::error::{Error, Result};
use crate::excursion::{sample_excursion, SamplerConfig};
use crate::stats::{mean_se, run_replicas};
use crate::tree::{MetricTree, TreePoint};
use num_rational::Rational64;
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// `alpha(delta) = 1 - exp(-2 delta^2)`, the expected ball-volume law.
pub fn alpha<T: Float>(delta: T) -> T {
    let two = T::from(2.0).unwrap();
    T::one() - (-two * delta * delta).exp()
}

/// Expected mass of a radius-`eps` ball around a typical point.
pub fn expected_ball_volume<T: Float>(eps: T) -> T {
    debug_assert!(eps > T::zero());
    alpha(eps)
}

/// `f(delta) = 1/4 - (alpha(delta/2) + 9 alpha(delta/4)) / (8 alpha(delta))`
/// for `delta != 0`; the removable singularity at zero is [`f_limit_at_zero`].
pub fn f_of<T: Float>(delta: T) -> Result<T> {
    if delta == T::zero() {
        return Err(Error::InvalidConfig(
            "f is 0/0 at delta = 0; use f_limit_at_zero".into(),
        ));
    }
    let two = T::from(2.0).unwrap();
    let four = T::from(4.0).unwrap();
    let eight = T::from(8.0).unwrap();
    let nine = T::from(9.0).unwrap();
    let num = alpha(delta / two) + nine * alpha(delta / four);
    Ok(T::one() / four - num / (eight * alpha(delta)))
}

/// The exact value of `lim_{delta -> 0} f(delta)` as a rational.
pub fn f_limit_at_zero() -> Rational64 {
    Rational64::new(19, 128)
}

/// `19/128` in floating point (exactly representable).
pub const F_AT_ZERO: f64 = 19.0 / 128.0;

/// The appendix ratio `A/B` whose sign of `1 - A/B` proves the maximum of
/// `f` at zero:
/// `A = (1 - alpha(d)) (alpha(d/2) + 9 alpha(d/4)) / (2 alpha(d)^2)`,
/// `B = (4 (1 - alpha(d/2)) + 9 (1 - alpha(d/4))) / (32 alpha(d))`,
/// so that `f'(d) = d (A - B)`.
pub fn ratio_ab(delta: f64) -> f64 {
    let a = (1.0 - alpha(delta)) * (alpha(delta / 2.0) + 9.0 * alpha(delta / 4.0))
        / (2.0 * alpha(delta) * alpha(delta));
    let b = (4.0 * (1.0 - alpha(delta / 2.0)) + 9.0 * (1.0 - alpha(delta / 4.0)))
        / (32.0 * alpha(delta));
    a / b
}

/// Leading coefficient of `1 - A/B = c2 delta^2 + O(delta^4)`.
///
/// Expanding `alpha(a d) = 2 a^2 d^2 - 2 a^4 d^4 + O(d^6)` gives
/// `A/B = (1 - (441/208) d^2)(1 - (258/208) d^2)^{-1} = 1 - (183/208) d^2`.
pub const RATIO_AB_QUADRATIC_COEFF: f64 = 183.0 / 208.0;

/// Numeric profile of `f` around its maximum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AppendixReport {
    /// Exact rational limit at zero.
    pub f_at_zero: Rational64,
    /// `(delta, f(delta))` on the tabulated grid, including the limit row.
    pub numeric_f: Vec<(f64, f64)>,
    /// Argmax of `f` over the table.
    pub max_location: f64,
    /// Central difference at zero with step `1e-4`.
    pub derivative_at_zero_numeric: f64,
}

/// Tabulates `f` on `|delta| <= 0.5` at step 0.01 and verifies the
/// maximum-at-zero profile numerically.
pub fn appendix_report() -> AppendixReport {
    let mut numeric_f = Vec::with_capacity(101);
    let mut best = (0.0f64, F_AT_ZERO);
    for k in -50..=50i32 {
        let delta = k as f64 * 0.01;
        let value = if k == 0 {
            F_AT_ZERO
        } else {
            f_of(delta).expect("delta != 0")
        };
        if value > best.1 {
            best = (delta, value);
        }
        numeric_f.push((delta, value));
    }
    let h = 1e-4;
    let derivative = (f_of(h).unwrap() - f_of(-h).unwrap()) / (2.0 * h);
    AppendixReport {
        f_at_zero: f_limit_at_zero(),
        numeric_f,
        max_location: best.0,
        derivative_at_zero_numeric: derivative,
    }
}

/// Configuration shared by the volume-law and paired-expectation
/// experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeLawConfig {
    pub n: usize,
    pub seed: u64,
    pub replicas: u64,
    pub eps_list: Vec<f64>,
}

/// One row of the volume-law experiment at a fixed radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeRow {
    pub eps: f64,
    pub mc_mean: f64,
    pub se: f64,
    pub closed_form: f64,
    /// `|mc_mean - closed_form| <= 4 se + 2/n`.
    pub volume_gate: bool,
    pub split_ancestry_mean: f64,
    pub split_ancestry_se: f64,
    pub split_offspring_mean: f64,
    pub split_offspring_se: f64,
    pub half_closed_form: f64,
    /// Each split mean within `4 se + 2/n` of half the closed form.
    pub split_gate: bool,
    pub root_mean: f64,
    pub root_se: f64,
    /// Root-centered and random-centered means agree within 4 pooled SE.
    pub root_vs_random_gate: bool,
}

struct VolumeSample {
    vol: Vec<f64>,
    root_vol: Vec<f64>,
    split_a: Vec<f64>,
    split_o: Vec<f64>,
}

/// Monte Carlo reproduction of the expected ball-volume law
/// `E[vol] = 1 - exp(-2 eps^2)` at a uniform random center, with the
/// ancestry/offspring split against an independent uniform reference point
/// and a root-centered control.
pub fn volume_law_experiment(config: &VolumeLawConfig) -> Result<Vec<VolumeRow>> {
    if config.n < 2 {
        return Err(Error::GridTooSmall(config.n));
    }
    if config.replicas == 0 || config.eps_list.is_empty() {
        return Err(Error::InvalidConfig(
            "need replicas >= 1 and at least one eps".into(),
        ));
    }
    for &eps in &config.eps_list {
        if !(eps > 0.0) {
            return Err(Error::NonpositiveRadius(eps));
        }
    }
    let cfg = config.clone();
    let per_replica = move |r: u64| -> Option<VolumeSample> {
        let sampler = SamplerConfig {
            n: cfg.n,
            seed: cfg.seed,
            replica_index: r,
        };
        let tree = MetricTree::encode(sample_excursion::<f64>(&sampler));
        let mut rng = crate::aux_stream(cfg.seed, r);
        let n = tree.n();
        let x = TreePoint::Grid(rng.gen_range(0..n));
        let mut y = TreePoint::Grid(rng.gen_range(0..n));
        for _ in 0..64 {
            if tree.distance(&x, &y) > 0.0 {
                break;
            }
            y = TreePoint::Grid(rng.gen_range(0..n));
        }
        if tree.distance(&x, &y) == 0.0 {
            return None;
        }
        let root = tree.root();
        let mut out = VolumeSample {
            vol: Vec::with_capacity(cfg.eps_list.len()),
            root_vol: Vec::with_capacity(cfg.eps_list.len()),
            split_a: Vec::with_capacity(cfg.eps_list.len()),
            split_o: Vec::with_capacity(cfg.eps_list.len()),
        };
        for &eps in &cfg.eps_list {
            out.vol.push(tree.ball(&x, eps).ok()?.volume);
            out.root_vol.push(tree.ball(&root, eps).ok()?.volume);
            let split = tree.split_ball(&x, &y, eps).ok()?;
            out.split_a.push(split.ancestry_volume);
            out.split_o.push(split.offspring_volume);
        }
        Some(out)
    };
    let samples: Vec<VolumeSample> = run_replicas(config.replicas, per_replica)
        .into_iter()
        .flatten()
        .collect();
    if samples.is_empty() {
        return Err(Error::InvalidConfig("no usable replicas".into()));
    }

    let grid_bias = 2.0 / config.n as f64;
    let mut rows = Vec::with_capacity(config.eps_list.len());
    for (k, &eps) in config.eps_list.iter().enumerate() {
        let vols: Vec<f64> = samples.iter().map(|s| s.vol[k]).collect();
        let roots: Vec<f64> = samples.iter().map(|s| s.root_vol[k]).collect();
        let ancestry: Vec<f64> = samples.iter().map(|s| s.split_a[k]).collect();
        let offspring: Vec<f64> = samples.iter().map(|s| s.split_o[k]).collect();
        let (mc_mean, se) = mean_se(&vols);
        let (root_mean, root_se) = mean_se(&roots);
        let (a_mean, a_se) = mean_se(&ancestry);
        let (o_mean, o_se) = mean_se(&offspring);
        let closed_form = alpha(eps);
        let half = 0.5 * closed_form;
        let volume_gate = (mc_mean - closed_form).abs() <= 4.0 * se + grid_bias;
        let split_gate = (a_mean - half).abs() <= 4.0 * a_se + grid_bias
            && (o_mean - half).abs() <= 4.0 * o_se + grid_bias;
        let pooled = (se * se + root_se * root_se).sqrt();
        let root_vs_random_gate = (mc_mean - root_mean).abs() <= 4.0 * pooled + grid_bias;
        rows.push(VolumeRow {
            eps,
            mc_mean,
            se,
            closed_form,
            volume_gate,
            split_ancestry_mean: a_mean,
            split_ancestry_se: a_se,
            split_offspring_mean: o_mean,
            split_offspring_se: o_se,
            half_closed_form: half,
            split_gate,
            root_mean,
            root_se,
            root_vs_random_gate,
        });
    }
    Ok(rows)
}

/// Configuration for the paired-expectation tests.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PairedExpectationConfig {
    pub n: usize,
    pub seed: u64,
    pub replicas: u64,
    pub eps: f64,
    /// How the paired centers are drawn; the identities concern typical
    /// points of the tree under the chosen sampling.
    pub centers: CenterMode,
}

/// One paired-expectation row: the Monte Carlo mean of the difference of
/// two integrals that should agree, with its standard error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairedExpectationRow {
    /// Which paired expectation: `ball_vs_ball`, `offspring_vs_offspring`,
    /// `ancestry_vs_ancestry` or `offspring_vs_ancestry`.
    pub part: String,
    /// Test integrand: `1`, `r` or `r^2` of the distance to the center.
    pub integrand: String,
    pub mean_diff: f64,
    pub se: f64,
    /// `|mean_diff| <= 4 se` (plus an `O(1/n)` atom allowance).
    pub pass: bool,
}

#[derive(Default, Clone, Copy)]
struct Integrals {
    one: f64,
    r: f64,
    r2: f64,
}

struct PairedSample {
    ball_x: Integrals,
    ball_y: Integrals,
    off_xy: Integrals,
    anc_xy: Integrals,
    off_x2y2: Integrals,
    anc_x2y2: Integrals,
}

fn ball_split_integrals(
    tree: &MetricTree<f64>,
    x: &TreePoint<f64>,
    y: &TreePoint<f64>,
    eps: f64,
) -> (Integrals, Integrals, Integrals) {
    let n = tree.n();
    let atom = 1.0 / n as f64;
    let ell = tree.distance(x, y);
    let tol = crate::tree::GEO_TOL;
    let (mut ball, mut off, mut anc) = (
        Integrals::default(),
        Integrals::default(),
        Integrals::default(),
    );
    for i in 0..n {
        let p = TreePoint::Grid(i);
        let d = tree.distance(x, &p);
        if d >= eps {
            continue;
        }
        let add = |acc: &mut Integrals| {
            acc.one += atom;
            acc.r += atom * d;
            acc.r2 += atom * d * d;
        };
        add(&mut ball);
        let dy = tree.distance(y, &p);
        if (d + ell - dy).abs() <= tol {
            add(&mut off);
        } else {
            add(&mut anc);
        }
    }
    (ball, off, anc)
}

/// Paired-expectation experiments for the ball and its ancestry/offspring
/// parts: (i) ball vs ball at two centers, (ii) offspring vs offspring and
/// (iii) ancestry vs ancestry across independent pairs, (iv) offspring vs
/// ancestry at the same pair, each for integrands `1`, `r`, `r^2`.
pub fn paired_expectation_tests(
    config: &PairedExpectationConfig,
) -> Result<Vec<PairedExpectationRow>> {
    if config.n < 2 {
        return Err(Error::GridTooSmall(config.n));
    }
    if config.replicas == 0 {
        return Err(Error::InvalidConfig("replicas must be at least 1".into()));
    }
    if !(config.eps > 0.0) {
        return Err(Error::NonpositiveRadius(config.eps));
    }
    let cfg = *config;
    let per_replica = move |r: u64| -> Option<PairedSample> {
        let sampler = SamplerConfig {
            n: cfg.n,
            seed: cfg.seed,
            replica_index: r,
        };
        let tree = MetricTree::encode(sample_excursion::<f64>(&sampler));
        let mut rng = crate::aux_stream(cfg.seed, r);
        let draw_pair =
            |rng: &mut rand_chacha::ChaCha8Rng| -> Option<(TreePoint<f64>, TreePoint<f64>)> {
                for _ in 0..64 {
                    let x = draw_mode_center(&tree, rng, cfg.centers)?;
                    let y = draw_mode_center(&tree, rng, cfg.centers)?;
                    if tree.distance(&x, &y) > 0.0 {
                        return Some((x, y));
                    }
                }
                None
            };
        let (x, y) = draw_pair(&mut rng)?;
        let (x2, y2) = draw_pair(&mut rng)?;
        let (ball_x, off_xy, anc_xy) = ball_split_integrals(&tree, &x, &y, cfg.eps);
        let (ball_y, _, _) = ball_split_integrals(&tree, &y, &x, cfg.eps);
        let (_, off_x2y2, anc_x2y2) = ball_split_integrals(&tree, &x2, &y2, cfg.eps);
        Some(PairedSample {
            ball_x,
            ball_y,
            off_xy,
            anc_xy,
            off_x2y2,
            anc_x2y2,
        })
    };
    let samples: Vec<PairedSample> = run_replicas(cfg.replicas, per_replica)
        .into_iter()
        .flatten()
        .collect();
    if samples.is_empty() {
        return Err(Error::InvalidConfig("no usable replicas".into()));
    }

    let atom_allowance = 2.0 / cfg.n as f64;
    let extract = |pick: &dyn Fn(&PairedSample) -> (Integrals, Integrals)| -> Vec<(f64, f64, f64)> {
        samples
            .iter()
            .map(|s| {
                let (a, b) = pick(s);
                (a.one - b.one, a.r - b.r, a.r2 - b.r2)
            })
            .collect()
    };
    type PartPicker = Box<dyn Fn(&PairedSample) -> (Integrals, Integrals)>;
    let mut rows = Vec::new();
    let parts: Vec<(&str, PartPicker)> = vec![
        (
            "ball_vs_ball",
            Box::new(|s: &PairedSample| (s.ball_x, s.ball_y)),
        ),
        (
            "offspring_vs_offspring",
            Box::new(|s: &PairedSample| (s.off_xy, s.off_x2y2)),
        ),
        (
            "ancestry_vs_ancestry",
            Box::new(|s: &PairedSample| (s.anc_xy, s.anc_x2y2)),
        ),
        (
            "offspring_vs_ancestry",
            Box::new(|s: &PairedSample| (s.off_xy, s.anc_xy)),
        ),
    ];
    for (name, pick) in &parts {
        let diffs = extract(&**pick);
        for (idx, integrand) in ["1", "r", "r^2"].iter().enumerate() {
            let xs: Vec<f64> = diffs
                .iter()
                .map(|d| match idx {
                    0 => d.0,
                    1 => d.1,
                    _ => d.2,
                })
                .collect();
            let (mean, se) = mean_se(&xs);
            rows.push(PairedExpectationRow {
                part: (*name).to_string(),
                integrand: (*integrand).to_string(),
                mean_diff: mean,
                se,
                pass: mean.abs() <= 4.0 * se + atom_allowance,
            });
        }
    }
    Ok(rows)
}

fn draw_mode_center<R: Rng>(
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
