use heat_adequacy::lasso::{
    alpha_grid, alpha_max, kkt_violation, lasso_fit, lasso_path, least_squares, soft_threshold, DesignMatrix,
    SolverOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn random_design(seed: u64, n: usize, p: usize, noise: f64) -> DesignMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let y = rows
        .iter()
        .map(|r| {
            let signal: f64 = r.iter().enumerate().map(|(j, x)| x * (j % 3) as f64).sum();
            2.0 + signal + noise * rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    DesignMatrix::unlabelled(rows, y).unwrap()
}

#[test]
fn soft_threshold_shrinks_towards_zero() {
    assert_eq!(soft_threshold(3.0, 1.0), 2.0);
    assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
    assert_eq!(soft_threshold(0.5, 1.0), 0.0);
}

#[test]
fn alpha_max_zeroes_every_coefficient() {
    let d = random_design(1, 200, 8, 0.3);
    let a = alpha_max(&d).unwrap();
    let fit = lasso_fit(&d, a, &SolverOptions::default()).unwrap();
    assert!(fit.coefficients.iter().all(|b| *b == 0.0));
    let y_mean = d.targets().iter().sum::<f64>() / d.n_rows() as f64;
    assert!((fit.intercept - y_mean).abs() < 1e-12);
    let below = lasso_fit(&d, a * 0.99, &SolverOptions::default()).unwrap();
    assert!(!below.nonzero().is_empty());
}

#[test]
fn vanishing_alpha_recovers_least_squares() {
    let d = random_design(2, 300, 10, 0.5);
    let ols = least_squares(&d).unwrap();
    let fit = lasso_fit(&d, 1e-10, &SolverOptions::default()).unwrap();
    for (a, b) in fit.coefficients.iter().zip(&ols.coefficients) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
    assert!((fit.intercept - ols.intercept).abs() < 1e-7);
}

#[test]
fn path_solutions_satisfy_optimality() {
    let d = random_design(3, 250, 15, 1.0);
    let alphas = alpha_grid(alpha_max(&d).unwrap(), 20, 1e-3).unwrap();
    let path = lasso_path(&d, &alphas, &SolverOptions::default()).unwrap();
    assert_eq!(path.len(), alphas.len());
    for fit in &path {
        assert!(kkt_violation(&d, fit.intercept, &fit.coefficients, fit.alpha) < 1e-9);
    }
    assert!(path.first().unwrap().nonzero().is_empty());
    assert!(path.last().unwrap().score > 0.9);
}

#[test]
fn objective_never_increases() {
    let d = random_design(4, 200, 12, 1.0);
    let fit = lasso_fit(&d, 0.05, &SolverOptions { polish: false, ..SolverOptions::default() }).unwrap();
    for w in fit.objective_trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12);
    }
}

#[test]
fn least_squares_refuses_rank_deficient_designs() {
    let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
    let y = (0..50).map(|i| i as f64).collect();
    let d = DesignMatrix::unlabelled(rows, y).unwrap();
    assert!(least_squares(&d).is_err());
    assert!(lasso_fit(&d, 0.1, &SolverOptions::default()).is_ok());
}
