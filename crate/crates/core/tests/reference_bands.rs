//! Band checks on the published simulation constants and curve orderings.

use gradtrack::algorithms::{gaussian_start, run};
use gradtrack::graph::gen_random_regular;
use gradtrack::objectives::gen_case1;
use gradtrack::theory::{log_linear_slope, recommend_eta};
use gradtrack::weights::{build_laplacian_weights, sigma};
use gradtrack::{Algorithm, StepRule};

#[test]
fn three_regular_constants_fall_in_reference_bands() {
    for (n, seed) in [(50, 1), (100, 2), (200, 3)] {
        let g = gen_random_regular(n, 3, seed).unwrap();
        let s = sigma(&build_laplacian_weights(&g).unwrap()).unwrap().sigma;
        assert!((0.90..=0.97).contains(&s), "n={n} sigma={s}");
    }
    let suite = gen_case1(50, 20, 3, 7).unwrap();
    let (a, b) = suite.sample_moment_extremes().unwrap();
    assert!((0.9..=1.1).contains(&a), "moment alpha {a}");
    assert!((20.0..=32.0).contains(&b), "moment beta {b}");
}

#[test]
fn tracking_beats_fixed_step_consensus_and_central_decays_linearly() {
    let n = 30;
    let g = gen_random_regular(n, 3, 4).unwrap();
    let w = build_laplacian_weights(&g).unwrap();
    let s = sigma(&w).unwrap().sigma;
    let suite = gen_case1(n, 20, 3, 5).unwrap();
    let (alpha, beta) = (suite.alpha(), suite.beta());
    let eta = recommend_eta(StepRule::RateOptimal, alpha, beta, s).unwrap();
    let x0 = gaussian_start(n, 3, 6);
    let t = 10_000;

    let gt = run(Algorithm::GradientTracking, &suite, &w, eta, t, &x0).unwrap();
    let dgd = run(Algorithm::DgdFixed, &suite, &w, eta, t, &x0).unwrap();
    let (gt_last, dgd_last) = (gt.last().avg_obj_err, dgd.last().avg_obj_err);
    assert!(gt_last < dgd_last, "gt {gt_last:e} dgd {dgd_last:e}");

    // Central descent contracts at least as fast as max(|1-ηα|, |1-ηβ|) per round.
    let cgd = run(Algorithm::Centralized, &suite, &w, eta, 400, &x0).unwrap();
    let dist: Vec<f64> = cgd.all().map(|r| r.dist_to_opt).take_while(|d| *d > 1e-12).collect();
    let slope = log_linear_slope(&dist).unwrap();
    let contraction = (1.0 - eta * alpha).abs().max((1.0 - eta * beta).abs());
    assert!(slope <= contraction.ln() + 1e-3, "slope {slope} vs {}", contraction.ln());
}
