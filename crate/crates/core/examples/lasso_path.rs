//! Regularization path, blocked cross-validation and one-SE selection on a
//! sparse synthetic regression.

use heat_adequacy::lasso::{alpha_grid, alpha_max, cross_validate, lasso_path, one_se_select, DesignMatrix, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, p): (usize, usize) = (400, 12);
    let truth = [3.0, -2.0, 0.0, 0.0, 1.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0];
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let y: Vec<f64> = rows
        .iter()
        .map(|r| 1.0 + r.iter().zip(&truth).map(|(x, b)| x * b).sum::<f64>() + 0.5 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let folds: Vec<i32> = (0..n).map(|i| i as i32 / 100).collect();
    let design = DesignMatrix::new(rows, y, folds)?;

    let opts = SolverOptions::default();
    let alphas = alpha_grid(alpha_max(&design)?, 30, 1e-3)?;
    let path = lasso_path(&design, &alphas, &opts)?;
    let cv = cross_validate(&design, &alphas, &opts)?;
    let pick = one_se_select(&cv)?;

    println!("{:>10} {:>8} {:>8} {:>8}", "alpha", "nonzero", "cv R2", "se");
    for (i, fit) in path.iter().enumerate() {
        let mark = if i == pick { " <- one-SE" } else { "" };
        println!("{:>10.4} {:>8} {:>8.4} {:>8.4}{mark}", fit.alpha, fit.nonzero().len(), cv.mean[i], cv.se[i]);
    }
    let chosen = &path[pick];
    println!("intercept {:.3}", chosen.intercept);
    for (j, (b, t)) in chosen.coefficients.iter().zip(&truth).enumerate() {
        println!("  x{j:<2} fitted {b:>7.3}  true {t:>5.1}");
    }
    Ok(())
}
