//! Replica-parallel Monte Carlo plumbing with schedule-independent results.
//!
//! Replicas are mapped in parallel but collected in replica order and
//! reduced sequentially, so every estimate is a pure function of
//! `(seed, config)` and byte-identical across worker counts.

use rayon::prelude::*;

/// Runs `f` for replica indices `0..replicas` in parallel, preserving
/// replica order in the returned vector.
pub fn run_replicas<R, F>(replicas: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    (0..replicas).into_par_iter().map(f).collect()
}

/// Sample mean and standard error of the mean.
///
/// Returns `(mean, se)`; the standard error is 0 for fewer than two samples.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_se_basics() {
        let (m, se) = mean_se(&[1.0, 1.0, 1.0]);
        assert_eq!(m, 1.0);
        assert_eq!(se, 0.0);
        // var = 2, se = sqrt(2 / 2) = 1
        let (m, se) = mean_se(&[0.0, 2.0]);
        assert_eq!(m, 1.0);
        assert!((se - 1.0).abs() < 1e-12);
    }

    #[test]
    fn replica_order_is_stable() {
        let out = run_replicas(1000, |r| r * 2);
        assert!(out.iter().enumerate().all(|(i, &v)| v == i as u64 * 2));
    }
}
