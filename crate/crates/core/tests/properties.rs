use proptest::prelude::*;

use projridge_core::baselines::{CdProblem, FoldAssignment, PenaltyConfig, DEFAULT_TOL};
use projridge_core::rng::{Purpose, Stream};
use projridge_core::study::cumulative_proportion;
use projridge_core::tuning::{tune, TuningGrid};
use projridge_core::{factorize, fit_ridge, project, DesignMatrix, Matrix};
use projridge_core::linalg::norm2;

fn design(n: usize, p: usize, seed: u64) -> DesignMatrix {
    let mut s = Stream::new(seed, Purpose::Custom(7), 0);
    DesignMatrix::new(Matrix::new(n, p, s.normal_vec(n * p, 1.0)).unwrap()).unwrap()
}

fn response(n: usize, seed: u64) -> Vec<f64> {
    Stream::new(seed, Purpose::Custom(8), 0).normal_vec(n, 2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ridge_fit_lies_in_row_space(n in 2usize..25, p in 2usize..80, log_h in -3.0f64..3.0, seed in any::<u64>()) {
        let x = design(n, p, seed);
        let f = factorize(&x).unwrap();
        let fit = fit_ridge(&f, &response(n, seed), 10f64.powf(log_h)).unwrap();
        let scale = norm2(&fit.theta_hat).max(1.0);
        prop_assert!(f.row_space_residual(&fit.theta_hat) <= 1e-9 * scale);
        prop_assert!(fit.leverages.iter().all(|&w| (0.0..1.0).contains(&w)));
    }

    #[test]
    fn projection_preserves_the_mean(n in 2usize..20, p in 2usize..60, seed in any::<u64>()) {
        let x = design(n, p, seed);
        let f = factorize(&x).unwrap();
        let beta = Stream::new(seed, Purpose::Custom(9), 0).normal_vec(p, 1.0);
        let theta = project(&beta, &f).unwrap();
        let xb = x.apply(&beta);
        let xt = x.apply(theta.as_slice());
        let diff: Vec<f64> = xb.iter().zip(&xt).map(|(a, b)| a - b).collect();
        prop_assert!(norm2(&diff) <= 1e-9 * norm2(&xb).max(1.0));
        let again = project(theta.as_slice(), &f).unwrap();
        let d2: Vec<f64> = again.as_slice().iter().zip(theta.as_slice()).map(|(a, b)| a - b).collect();
        prop_assert!(norm2(&d2) <= 1e-10 * norm2(theta.as_slice()).max(1.0));
    }

    #[test]
    fn lasso_kkt_and_descent(n in 5usize..25, p in 2usize..40, frac in 0.02f64..0.9, seed in any::<u64>()) {
        let x = design(n, p, seed);
        let y = response(n, seed);
        let prob = CdProblem::new(&x);
        let cfg = PenaltyConfig::lasso(frac * prob.lambda_max(&y));
        let fit = prob.solve(&y, &cfg, None, true).unwrap();
        prop_assert!(fit.converged);
        prop_assert!(prob.kkt_violation(&y, &fit.coef, cfg.lambda, 0.0) <= 10.0 * DEFAULT_TOL);
        let trace = fit.objective_trace.unwrap();
        for w in trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn folds_are_balanced(n in 5usize..200, k in 2usize..10, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = FoldAssignment::new(n, k, seed).unwrap();
        let mut counts = vec![0usize; k];
        for &f in &folds.fold_of {
            counts[f as usize - 1] += 1;
        }
        let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert_eq!(&folds, &FoldAssignment::new(n, k, seed).unwrap());
    }

    #[test]
    fn cumulative_proportion_is_a_distribution(theta in prop::collection::vec(-5.0f64..5.0, 1..60)) {
        prop_assume!(theta.iter().any(|&t| t != 0.0));
        let c = cumulative_proportion(&theta).unwrap();
        prop_assert_eq!(*c.last().unwrap(), 1.0);
        for w in c.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn tuning_is_deterministic_and_minimal(n in 16usize..30, p in 20usize..60, seed in any::<u64>()) {
        let x = design(n, p, seed);
        let y = response(n, seed);
        let f = factorize(&x).unwrap();
        let grid = TuningGrid::default_for(&y);
        let a = tune(&f, &y, &grid).unwrap();
        let b = tune(&f, &y, &grid).unwrap();
        prop_assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        prop_assert!(a.psi_hat.iter().flatten().flatten().all(|&v| a.best_value <= v));
    }
}
