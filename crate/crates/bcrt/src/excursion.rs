//! Discretized Brownian excursions: sampling, rescaling and rerooting.
//!
//! An [`Excursion`] stores the path at `n + 1` uniformly spaced grid times
//! together with one exact minimum per grid cell. The cell minima matter:
//! range minima taken over grid vertices alone overestimate the true path
//! minimum by O(1/sqrt(n)), which biases every derived tree distance. With
//! per-cell minima drawn from the exact Brownian-bridge minimum law the
//! encoded metric has the true law at the grid times, and the bias drops to
//! O(1/n).

use crate::error::{Error, Result};
use num_traits::Float;
use rand::distributions::{Distribution, Standard};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[inline]
pub(crate) fn cast<T: Float>(x: f64) -> T {
    T::from(x).expect("f64 constant representable in scalar type")
}

/// A non-negative sampled path on a uniform grid, zero at both ends.
///
/// `values[i]` is the path height at time `i * grid_step`; `cell_mins[i]` is
/// the path minimum on the open cell between grid times `i` and `i + 1`
/// (always `<=` both neighbouring values, `0` for the two boundary cells).
#[derive(Debug, Clone, PartialEq)]
pub struct Excursion<T> {
    values: Vec<T>,
    cell_mins: Vec<T>,
    lifetime: T,
}

/// Sampler parameters. Each `(seed, replica_index)` pair derives its own
/// counter-based random stream, so replicas are independent of thread
/// scheduling and replica order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub n: usize,
    pub seed: u64,
    pub replica_index: u64,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64, replica_index: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        Ok(SamplerConfig {
            n,
            seed,
            replica_index,
        })
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.replica_index);
        rng
    }
}

impl<T: Float> Excursion<T> {
    /// Builds an excursion from grid values, treating the path as piecewise
    /// linear (each cell minimum is the smaller endpoint).
    pub fn from_values(values: Vec<T>, lifetime: T) -> Result<Self> {
        let n = values.len().saturating_sub(1);
        let cell_mins = (0..n)
            .map(|i| {
                if values[i + 1] < values[i] {
                    values[i + 1]
                } else {
                    values[i]
                }
            })
            .collect();
        Self::from_parts(values, cell_mins, lifetime)
    }

    /// Builds an excursion from grid values plus explicit per-cell minima.
    pub fn from_parts(values: Vec<T>, cell_mins: Vec<T>, lifetime: T) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::GridTooSmall(values.len().saturating_sub(1)));
        }
        let n = values.len() - 1;
        if cell_mins.len() != n {
            return Err(Error::GridMismatch {
                left: n,
                right: cell_mins.len(),
            });
        }
        if !(lifetime > T::zero()) {
            return Err(Error::NonpositiveLifetime(
                lifetime.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if values[0] != T::zero() || values[n] != T::zero() {
            return Err(Error::NonzeroEndpoint);
        }
        if values.iter().any(|v| *v < T::zero()) || cell_mins.iter().any(|c| *c < T::zero()) {
            return Err(Error::NegativeValue);
        }
        for (i, c) in cell_mins.iter().enumerate() {
            if *c > values[i] || *c > values[i + 1] {
                return Err(Error::CellMinAboveVertex(i));
            }
        }
        Ok(Excursion {
            values,
            cell_mins,
            lifetime,
        })
    }

    /// Number of grid cells.
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn cell_mins(&self) -> &[T] {
        &self.cell_mins
    }

    pub fn lifetime(&self) -> T {
        self.lifetime
    }

    pub fn grid_step(&self) -> T {
        self.lifetime / cast::<T>(self.n() as f64)
    }

    /// Interleaved refined path `[v0, c0, v1, c1, ..., c_{n-1}, vn]`
    /// (length `2n + 1`); the sequence a range-minimum structure consumes.
    pub fn refined_path(&self) -> Vec<T> {
        let n = self.n();
        let mut out = Vec::with_capacity(2 * n + 1);
        for i in 0..n {
            out.push(self.values[i]);
            out.push(self.cell_mins[i]);
        }
        out.push(self.values[n]);
        out
    }

    /// Maximum height `H(e)`.
    pub fn height(&self) -> T {
        self.values.iter().cloned().fold(T::zero(), T::max)
    }

    /// Uniform distance between two excursions on the same grid, taken over
    /// vertices and cell minima.
    pub fn sup_distance(&self, other: &Self) -> Result<T> {
        if self.n() != other.n() {
            return Err(Error::GridMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        let mut d = T::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            d = d.max((*a - *b).abs());
        }
        for (a, b) in self.cell_mins.iter().zip(&other.cell_mins) {
            d = d.max((*a - *b).abs());
        }
        Ok(d)
    }

    /// Brownian scaling: lifetime `alpha * T`, heights `sqrt(alpha) * E`.
    /// The grid count is unchanged, so grid times map onto grid times and no
    /// resampling is involved.
    pub fn scale(&self, alpha: T) -> Result<Self> {
        if !(alpha > T::zero()) {
            return Err(Error::NonpositiveScale(alpha.to_f64().unwrap_or(f64::NAN)));
        }
        let s = alpha.sqrt();
        let values = self.values.iter().map(|v| *v * s).collect();
        let cell_mins = self.cell_mins.iter().map(|c| *c * s).collect();
        Ok(Excursion {
            values,
            cell_mins,
            lifetime: self.lifetime * alpha,
        })
    }

    /// Reroots a lifetime-1 excursion at time `s` (snapped to the nearest
    /// grid index): the returned path is `t -> rho_E(s, s + t mod 1)`.
    ///
    /// Grid vertices map by `i -> i - k` (falling back to `i - k + n` before
    /// the cut, `k` the snapped index), and the output cell minima are the
    /// exact minima of the rerooted path, so the induced map on grid points
    /// is an isometry of the encoded trees up to rounding. The rerooted path
    /// revisits its root wherever the original path crosses the level
    /// `E(s)` of the running minimum, so output cell minima may be zero.
    pub fn reroot(&self, s: T) -> Result<Self> {
        let one = T::one();
        if (self.lifetime - one).abs() > cast(1e-12) {
            return Err(Error::NotNormalized(
                self.lifetime.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let n = self.n();
        let k = (s * cast::<T>(n as f64)).round().to_f64().unwrap_or(-1.0) as isize;
        if k <= 0 || k >= n as isize {
            return Err(Error::RerootAtEndpoint);
        }
        let k = k as usize;
        let v = &self.values;
        let c = &self.cell_mins;
        let ek = v[k];

        let mut out_v = Vec::with_capacity(n + 1);
        let mut out_c = Vec::with_capacity(n);
        out_v.push(T::zero());

        // First leg: original cells k..n-1, running refined minimum from k.
        let two = cast::<T>(2.0);
        let mut run = v[k];
        for m in k..n {
            let cell = if c[m] < run {
                ek - run
            } else {
                ek + c[m] - two * run
            };
            out_c.push(cell);
            run = run.min(c[m]).min(v[m + 1]);
            out_v.push(ek + v[m + 1] - two * run);
        }

        // Second leg: original cells 0..k-1, suffix refined minima toward k.
        let mut suffix = vec![T::zero(); k + 1];
        suffix[k] = v[k];
        for m in (0..k).rev() {
            suffix[m] = v[m].min(c[m]).min(suffix[m + 1]);
        }
        for m in 0..k {
            let sm1 = suffix[m + 1];
            let cell = if c[m] < sm1 {
                ek - sm1
            } else {
                ek + c[m] - two * sm1
            };
            out_c.push(cell);
            out_v.push(ek + v[m + 1] - two * sm1);
        }

        // Endpoints are exact by construction; clamp rounding dust.
        out_v[0] = T::zero();
        out_v[n] = T::zero();
        Excursion::from_parts(out_v, out_c, one)
    }

    /// New grid index of original vertex `i` after `reroot` at snapped
    /// index `k`. Index `k` itself maps to `0` (equivalently `n`).
    pub fn reroot_index_map(n: usize, k: usize, i: usize) -> usize {
        if i >= k {
            i - k
        } else {
            i + n - k
        }
    }
}

/// Samples a lifetime-1 excursion whose law converges to the normalized
/// Brownian excursion as `n` grows.
///
/// Procedure: `n` i.i.d. centered Gaussian increments of variance `1/n`
/// give a Brownian bridge after subtracting the linear drift; one exact
/// minimum per bridge cell is drawn from the Brownian-bridge minimum law
/// (inverse CDF); the path is then cyclically shifted so that its overall
/// minimum — a cell minimum, located by smallest cell index on ties —
/// becomes the origin, and that minimum is subtracted (Vervaat
/// construction at the refined-skeleton level). Normalizing by the exact
/// path minimum rather than the best vertex keeps root-centered statistics
/// unbiased.
///
/// The minimum's cell splits in two at the origin, so the output has
/// `n + 1` cells: `n + 2` vertex values with the original bridge vertices
/// interior, endpoints exactly zero, and boundary cell minima exactly zero.
/// A draw with a non-positive interior vertex or interior cell minimum
/// (ties, probability zero) is discarded and resampled.
pub fn sample_excursion<T>(config: &SamplerConfig) -> Excursion<T>
where
    T: Float,
    Standard: Distribution<T>,
    StandardNormal: Distribution<T>,
{
    let mut rng = config.rng();
    let n = config.n;
    let h = T::one() / cast::<T>(n as f64);
    let sd = h.sqrt();
    let mut bridge = vec![T::zero(); n + 1];
    let mut bridge_mins = vec![T::zero(); n];
    'resample: loop {
        let mut acc = T::zero();
        bridge[0] = T::zero();
        for slot in bridge[1..].iter_mut() {
            let g: T = rng.sample(StandardNormal);
            acc = acc + g * sd;
            *slot = acc;
        }
        let total = bridge[n];
        let nf = cast::<T>(n as f64);
        for (i, b) in bridge.iter_mut().enumerate() {
            *b = *b - total * cast::<T>(i as f64) / nf;
        }
        bridge[n] = T::zero();
        for k in 0..n {
            bridge_mins[k] = bridge_cell_min(&mut rng, bridge[k], bridge[k + 1], h);
        }

        // The refined path minimum is always a cell minimum.
        let mut min_cell = 0usize;
        for k in 1..n {
            if bridge_mins[k] < bridge_mins[min_cell] {
                min_cell = k;
            }
        }
        let low = bridge_mins[min_cell];

        // Rotate so the minimum becomes both endpoints; the split cell
        // contributes the two boundary cells, whose minima are exactly 0.
        let mut values = Vec::with_capacity(n + 2);
        let mut cell_mins = Vec::with_capacity(n + 1);
        values.push(T::zero());
        cell_mins.push(T::zero());
        for i in 1..=n {
            values.push(bridge[(min_cell + i) % n] - low);
            if i < n {
                cell_mins.push(bridge_mins[(min_cell + i) % n] - low);
            }
        }
        cell_mins.push(T::zero());
        values.push(T::zero());

        for v in values[1..=n].iter() {
            if !(*v > T::zero()) {
                continue 'resample;
            }
        }
        for c in cell_mins[1..n].iter() {
            if !(*c > T::zero()) {
                continue 'resample;
            }
        }
        return Excursion {
            values,
            cell_mins,
            lifetime: T::one(),
        };
    }
}

/// Minimum of a variance-1 Brownian bridge from `a` to `b` over a cell of
/// duration `h`, via the inverse CDF of `P(min <= y) =
/// exp(-2 (a - y)(b - y) / h)` for `y <= min(a, b)`.
fn bridge_cell_min<T, R>(rng: &mut R, a: T, b: T, h: T) -> T
where
    T: Float,
    R: Rng,
    Standard: Distribution<T>,
{
    let two = cast::<T>(2.0);
    let u: T = rng.gen();
    let w = (T::one() - u).max(T::min_positive_value());
    let disc = (a - b) * (a - b) - two * h * w.ln();
    let y = ((a + b) - disc.sqrt()) / two;
    y.min(a).min(b)
}
