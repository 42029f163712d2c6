//! Property checks over randomly drawn graphs, weights, suites and runs.

use gradtrack::algorithms::{gaussian_start, gt_init, gt_step, run, CentralState};
use gradtrack::graph::{gen_erdos_renyi, gen_random_regular};
use gradtrack::objectives::{gen_case1, gen_case2, gen_case3};
use gradtrack::theory::recommend_eta;
use gradtrack::weights::{build_laplacian_weights, build_lazy_metropolis, sigma, validate_weights};
use gradtrack::{Algorithm, AgentMatrix, ObjectiveSuite, StepRule};
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn generated_graphs_are_connected(n in 4usize..40, p in 0.15f64..0.9, seed in any::<u64>()) {
        let g = gen_erdos_renyi(n, p, seed).unwrap();
        prop_assert!(g.is_connected());
        prop_assert!(g.min_degree() >= 1);
        prop_assert_eq!(&g, &gen_erdos_renyi(n, p, seed).unwrap());
    }

    #[test]
    fn regular_graphs_have_flat_degree_histogram(half in 3usize..30, seed in any::<u64>()) {
        let n = 2 * half;
        let g = gen_random_regular(n, 3, seed).unwrap();
        prop_assert!(g.is_connected());
        prop_assert!(g.degrees().iter().all(|&d| d == 3));
    }

    #[test]
    fn mixing_contracts_disagreement(n in 3usize..30, seed in any::<u64>(), lazy in any::<bool>(),
                                     omega in prop::collection::vec(-10.0f64..10.0, 30)) {
        let g = gen_erdos_renyi(n, 0.4, seed).unwrap();
        let w = if lazy { build_lazy_metropolis(&g) } else { build_laplacian_weights(&g) }.unwrap();
        prop_assert!(validate_weights(&w, &g, 1e-12).is_valid());
        let s = sigma(&w).unwrap().sigma;
        let omega = &omega[..n];
        let mean = omega.iter().sum::<f64>() / n as f64;
        let dev = |v: &[f64]| v.iter().map(|x| (x - mean).powi(2)).sum::<f64>().sqrt();
        prop_assert!(dev(&w.apply(omega)) <= s * dev(omega) + 1e-10);
    }

    #[test]
    fn local_objectives_are_convex(case in 1u8..=3, seed in any::<u64>(),
                                   x in prop::collection::vec(-5.0f64..5.0, 3),
                                   y in prop::collection::vec(-5.0f64..5.0, 3)) {
        let suite: ObjectiveSuite = match case {
            1 => gen_case1(4, 20, 3, seed),
            2 => gen_case2(4, 40, 3, seed),
            _ => gen_case3(4, seed),
        }.unwrap();
        let (x, y) = (&x[..suite.dim()], &y[..suite.dim()]);
        for i in 0..suite.n() {
            let fx = suite.value(i, x).unwrap();
            let fy = suite.value(i, y).unwrap();
            let gx = suite.gradient(i, x).unwrap();
            let diff: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
            let scale = 1.0 + fx.abs() + fy.abs();
            prop_assert!(fy >= fx + dot(&gx, &diff) - 1e-9 * scale);
        }
    }

    #[test]
    fn relabelling_agents_preserves_aggregate_metrics(seed in 0u64..1000) {
        let n = 8;
        let g = gen_erdos_renyi(n, 0.5, seed).unwrap();
        let w = build_laplacian_weights(&g).unwrap();
        let suite = gen_case1(n, 20, 3, seed + 1).unwrap();
        let x0 = gaussian_start(n, 3, seed + 2);
        let s = sigma(&w).unwrap().sigma;
        let eta = recommend_eta(StepRule::RateOptimal, suite.alpha(), suite.beta(), s).unwrap();
        let perm: Vec<usize> = (0..n).rev().collect();
        let a = run(Algorithm::GradientTracking, &suite, &w, eta, 40, &x0).unwrap();
        let b = run(Algorithm::GradientTracking, &suite.permuted(&perm).unwrap(), &w.permuted(&perm).unwrap(),
                    eta, 40, &x0.permute_rows(&perm)).unwrap();
        for (ra, rb) in a.all().zip(b.all()) {
            let close = |u: f64, v: f64| (u - v).abs() <= 1e-9 * (1.0 + u.abs());
            prop_assert!(close(ra.avg_obj_err, rb.avg_obj_err));
            prop_assert!(close(ra.consensus_err, rb.consensus_err));
            prop_assert!(close(ra.dist_to_opt, rb.dist_to_opt));
        }
    }

    #[test]
    fn lone_agent_tracks_central_descent(seed in any::<u64>(), frac in 0.05f64..0.95) {
        let suite = gen_case1(1, 20, 3, seed).unwrap();
        let w = gradtrack::WeightMatrix::identity(1).unwrap();
        let eta = frac / suite.beta();
        let x0 = gaussian_start(1, 3, seed ^ 7);
        let mut gt = gt_init(&suite, &x0).unwrap();
        let mut cgd = CentralState::new(&suite, x0.row(0)).unwrap();
        for _ in 0..50 {
            gt_step(&mut gt, &w, eta, &suite).unwrap();
            cgd.step(eta, &suite).unwrap();
            prop_assert_eq!(gt.x().row(0), cgd.x());
        }
    }
}

#[test]
fn agent_matrix_rows_round_trip() {
    let m = AgentMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    assert_eq!(m.to_rows(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
}
