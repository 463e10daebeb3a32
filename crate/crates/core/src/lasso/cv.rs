//! Blocked k-fold cross-validation and one-standard-error selection.

use serde::{Deserialize, Serialize};

use super::design::{DesignMatrix, Moments};
use super::solver::{path_on, Gram, SolverOptions};
use crate::error::{ensure, Result};

pub const MIN_FOLD_ROWS: usize = 24;

/// Held-out scores per alpha. `scores[a][f]` is the R² on fold `folds[f]`
/// of the model fitted on the remaining folds at `alphas[a]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub alphas: Vec<f64>,
    pub folds: Vec<i32>,
    pub scores: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Sample standard deviation over folds divided by √k.
    pub se: Vec<f64>,
}

impl CvResult {
    pub fn from_scores(alphas: Vec<f64>, folds: Vec<i32>, scores: Vec<Vec<f64>>) -> Result<Self> {
        ensure(!alphas.is_empty() && alphas.len() == scores.len(), || "score table shape mismatch".into())?;
        let k = folds.len();
        ensure(scores.iter().all(|s| s.len() == k), || "every alpha needs one score per fold".into())?;
        let mean: Vec<f64> = scores.iter().map(|s| s.iter().sum::<f64>() / k as f64).collect();
        let se = scores
            .iter()
            .zip(&mean)
            .map(|(s, m)| {
                if k < 2 {
                    return 0.0;
                }
                let var = s.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (k - 1) as f64;
                var.sqrt() / (k as f64).sqrt()
            })
            .collect();
        Ok(Self {
            alphas,
            folds,
            scores,
            mean,
            se,
        })
    }
}

/// Fits on all-but-one fold and scores on the held-out fold, for each fold
/// and alpha. Fold statistics are pooled by merging moments.
pub fn cross_validate(design: &DesignMatrix, alphas: &[f64], opts: &SolverOptions) -> Result<CvResult> {
    opts.validate()?;
    let per_fold = design.fold_moments();
    ensure(per_fold.len() >= 2, || {
        format!("cross-validation needs at least 2 folds, found {}", per_fold.len())
    })?;
    for (label, m) in &per_fold {
        ensure(m.count() as usize >= MIN_FOLD_ROWS, || {
            format!("fold {label} has {} rows, fewer than {MIN_FOLD_ROWS}", m.count())
        })?;
    }
    let folds: Vec<i32> = per_fold.keys().copied().collect();
    let moments: Vec<&Moments> = per_fold.values().collect();
    let mut by_fold = Vec::with_capacity(folds.len());
    for (f, held_out) in moments.iter().enumerate() {
        let train = moments
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .fold(Moments::empty(design.n_cols()), |acc, (_, m)| acc.merge(m));
        let gram = Gram::from_moments(&train)?;
        let path = path_on(&gram, alphas, opts, &train).map_err(|e| e.context(format!("fold {}", folds[f])))?;
        by_fold.push(path.iter().map(|fit| held_out.r2(fit.intercept, &fit.coefficients)).collect::<Vec<_>>());
    }
    let scores = (0..alphas.len()).map(|a| by_fold.iter().map(|s| s[a]).collect()).collect();
    CvResult::from_scores(alphas.to_vec(), folds, scores)
}

/// Index of the largest alpha whose mean score is within one standard
/// error (taken at the best alpha) of the best mean score.
pub fn one_se_select(cv: &CvResult) -> Result<usize> {
    ensure(!cv.alphas.is_empty(), || "empty cross-validation results".into())?;
    let best = (0..cv.mean.len()).fold(0, |b, i| if cv.mean[i] > cv.mean[b] { i } else { b });
    let threshold = cv.mean[best] - cv.se[best];
    let chosen = (0..cv.alphas.len())
        .filter(|&i| cv.mean[i] >= threshold)
        .fold(best, |b, i| if cv.alphas[i] > cv.alphas[b] { i } else { b });
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(alphas: &[f64], mean: &[f64], se: &[f64]) -> CvResult {
        CvResult {
            alphas: alphas.to_vec(),
            folds: vec![1, 2],
            scores: vec![vec![0.0; 2]; alphas.len()],
            mean: mean.to_vec(),
            se: se.to_vec(),
        }
    }

    #[test]
    fn one_se_examples() {
        let tie = cv(&[3.0, 2.0, 1.0], &[0.5; 3], &[0.0; 3]);
        assert_eq!(one_se_select(&tie).unwrap(), 0);
        let close = cv(&[1.0, 0.1], &[0.80, 0.82], &[0.05, 0.05]);
        assert_eq!(close.alphas[one_se_select(&close).unwrap()], 1.0);
        let far = cv(&[1.0, 0.1], &[0.50, 0.82], &[0.01, 0.01]);
        assert_eq!(far.alphas[one_se_select(&far).unwrap()], 0.1);
    }

    #[test]
    fn standard_error_uses_sample_std() {
        let r = CvResult::from_scores(vec![1.0], vec![1, 2, 3, 4], vec![vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        assert_eq!(r.mean[0], 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((r.se[0] - sd / 2.0).abs() < 1e-15);
    }

    #[test]
    fn fold_checks() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let one = DesignMatrix::new(rows.clone(), y.clone(), vec![1; 30]).unwrap();
        assert!(cross_validate(&one, &[1.0], &SolverOptions::default()).is_err());
        let small = DesignMatrix::new(rows, y, (0..30).map(|i| i % 2).collect()).unwrap();
        assert!(cross_validate(&small, &[1.0], &SolverOptions::default()).is_err());
    }
}
