//! Companion to the acceptance curvature tests: with centers sampled
//! uniformly along geodesics (skeleton points) instead of uniform vertices,
//! the ball around each center straddles both geodesic directions and the
//! closed-form band is reproduced: the mean Kantorovich gap exceeds
//! (19/128 - 0.01) * delta and the mean curvature falls inside
//! [-2 delta/ell, -(19/128 - 0.01) delta/ell].

use bcrt::analysis::F_AT_ZERO;
use bcrt::curvature::{mc_curvature_run, CenterMode, CurvatureRun, McCurvatureConfig};
use std::sync::OnceLock;

fn skeleton_run() -> &'static CurvatureRun {
    static RUN: OnceLock<CurvatureRun> = OnceLock::new();
    RUN.get_or_init(|| {
        mc_curvature_run(&McCurvatureConfig {
            n: 1 << 14,
            seed: 20240601,
            replicas: 9000,
            delta: 0.02,
            ell_lo: 0.45,
            ell_hi: 0.55,
            centers: CenterMode::SkeletonPoint,
        })
        .expect("skeleton curvature run completes")
    })
}

#[test]
fn skeleton_centers_exceed_the_gap_threshold() {
    let run = skeleton_run();
    let threshold = (F_AT_ZERO - 0.01) * run.config.delta;
    println!(
        "skeleton gap: accepted={} mean(gap-ell)={:.6} (={:.3} delta) threshold={:.6} se={:.6}",
        run.accepted,
        run.gap_minus_ell_mean,
        run.gap_minus_ell_mean / run.config.delta,
        threshold,
        run.gap_minus_ell_se
    );
    assert!(
        run.accepted >= 500,
        "too few accepted pairs: {}",
        run.accepted
    );
    assert!(run.gap_minus_ell_mean > threshold - 4.0 * run.gap_minus_ell_se);
}

#[test]
fn skeleton_centers_land_in_the_curvature_band() {
    let run = skeleton_run();
    let delta = run.config.delta;
    let lo = -2.0 * delta / run.mean_ell - 4.0 * run.kappa_se;
    let hi = -(F_AT_ZERO - 0.01) * delta / run.mean_ell + 4.0 * run.kappa_se;
    println!(
        "skeleton band: mean kappa {:.6} in [{:.6}, {:.6}], mean W1 - ell = {:.3} delta",
        run.mean_kappa,
        lo,
        hi,
        (run.mean_w1 - run.mean_ell) / delta
    );
    assert!(run.mean_kappa >= lo && run.mean_kappa <= hi);
    // and the mean W1 sits between the witness bound and the pathwise cap
    let w1_excess = run.mean_w1 - run.mean_ell;
    assert!(w1_excess > 0.14 * delta - 4.0 * run.w1_se);
    assert!(w1_excess < 2.0 * delta + 4.0 * run.w1_se);
}
