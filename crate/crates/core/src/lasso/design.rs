//! Regression designs and their centred sufficient statistics.

use std::collections::BTreeMap;

use crate::error::{ensure, Result};

/// Dense row-major regression design with a fold label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    folds: Vec<i32>,
}

impl DesignMatrix {
    pub fn new(rows: Vec<Vec<f64>>, y: Vec<f64>, folds: Vec<i32>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        ensure(rows.iter().all(|r| r.len() == p), || "design rows have unequal lengths".into())?;
        let n = rows.len();
        Self::from_row_major(n, p, rows.into_iter().flatten().collect(), y, folds)
    }

    pub fn from_row_major(n: usize, p: usize, x: Vec<f64>, y: Vec<f64>, folds: Vec<i32>) -> Result<Self> {
        ensure(n > 0, || "design has no rows".into())?;
        ensure(p > 0, || "design has no columns".into())?;
        ensure(x.len() == n * p, || format!("design data has {} entries, expected {}", x.len(), n * p))?;
        ensure(y.len() == n && folds.len() == n, || {
            format!("{n} rows but {} targets and {} fold labels", y.len(), folds.len())
        })?;
        ensure(x.iter().chain(&y).all(|v| v.is_finite()), || "design has missing or non-finite entries".into())?;
        Ok(Self { n, p, x, y, folds })
    }

    /// Same design with every row in one fold.
    pub fn unlabelled(rows: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        Self::new(rows, y, vec![0; n])
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn fold_labels(&self) -> &[i32] {
        &self.folds
    }

    /// Distinct fold labels in ascending order.
    pub fn folds(&self) -> Vec<i32> {
        let mut f = self.folds.clone();
        f.sort_unstable();
        f.dedup();
        f
    }

    pub fn moments(&self) -> Moments {
        self.moments_where(|_| true)
    }

    pub fn moments_where(&self, keep: impl Fn(usize) -> bool) -> Moments {
        let mut m = Moments::empty(self.p);
        for i in (0..self.n).filter(|i| keep(*i)) {
            m.push(self.row(i), self.y[i]);
        }
        m
    }

    /// Moments per fold label.
    pub fn fold_moments(&self) -> BTreeMap<i32, Moments> {
        let mut out: BTreeMap<i32, Moments> = BTreeMap::new();
        for i in 0..self.n {
            out.entry(self.folds[i])
                .or_insert_with(|| Moments::empty(self.p))
                .push(self.row(i), self.y[i]);
        }
        out
    }

    /// Rows repeated `times` times, for invariance checks.
    pub fn repeated(&self, times: usize) -> Self {
        Self {
            n: self.n * times,
            p: self.p,
            x: self.x.repeat(times),
            y: self.y.repeat(times),
            folds: self.folds.repeat(times),
        }
    }
}

/// Count, mean and centred cross-product matrix of `(x, y)`.
///
/// The last coordinate is the target. Updates and merges use the
/// numerically stable pairwise formulas, so moments of a union equal the
/// moments of the pooled rows up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub(crate) n: f64,
    pub(crate) mean: Vec<f64>,
    /// Row-major `(p+1)×(p+1)` sum of centred outer products.
    pub(crate) m2: Vec<f64>,
}

impl Moments {
    pub fn empty(p: usize) -> Self {
        Self {
            n: 0.0,
            mean: vec![0.0; p + 1],
            m2: vec![0.0; (p + 1) * (p + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len() - 1
    }

    pub fn count(&self) -> f64 {
        self.n
    }

    pub fn push(&mut self, x: &[f64], y: f64) {
        let d = self.mean.len();
        self.n += 1.0;
        let delta: Vec<f64> = (0..d)
            .map(|j| if j + 1 < d { x[j] } else { y } - self.mean[j])
            .collect();
        for j in 0..d {
            self.mean[j] += delta[j] / self.n;
        }
        // Welford: M += delta ⊗ (z - new mean).
        for a in 0..d {
            let za = if a + 1 < d { x[a] } else { y };
            let after = za - self.mean[a];
            for b in 0..d {
                self.m2[b * d + a] += delta[b] * after;
            }
        }
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0.0 {
            return other.clone();
        }
        if other.n == 0.0 {
            return self.clone();
        }
        let d = self.mean.len();
        let n = self.n + other.n;
        let delta: Vec<f64> = (0..d).map(|j| other.mean[j] - self.mean[j]).collect();
        let mean = (0..d).map(|j| self.mean[j] + delta[j] * other.n / n).collect();
        let w = self.n * other.n / n;
        let m2 = (0..d * d)
            .map(|k| self.m2[k] + other.m2[k] + delta[k / d] * delta[k % d] * w)
            .collect();
        Moments { n, mean, m2 }
    }

    pub(crate) fn sxx(&self, a: usize, b: usize) -> f64 {
        self.m2[a * self.mean.len() + b]
    }

    pub(crate) fn sxy(&self, a: usize) -> f64 {
        let d = self.mean.len();
        self.m2[a * d + d - 1]
    }

    pub(crate) fn syy(&self) -> f64 {
        let d = self.mean.len();
        self.m2[d * d - 1]
    }

    pub(crate) fn x_mean(&self) -> &[f64] {
        &self.mean[..self.mean.len() - 1]
    }

    pub(crate) fn y_mean(&self) -> f64 {
        self.mean[self.mean.len() - 1]
    }

    /// Residual sum of squares of the affine predictor `b + θᵀx` on these rows.
    pub fn rss(&self, intercept: f64, theta: &[f64]) -> f64 {
        let p = self.dim();
        let bias = self.y_mean() - intercept - dot(self.x_mean(), theta);
        let mut quad = 0.0;
        for a in 0..p {
            if theta[a] == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for b in 0..p {
                row += self.sxx(a, b) * theta[b];
            }
            quad += theta[a] * (row - 2.0 * self.sxy(a));
        }
        (self.n * bias * bias + self.syy() + quad).max(0.0)
    }

    /// Coefficient of determination on these rows, scored around their own
    /// mean. A constant target scores 1 when fitted exactly, else 0.
    pub fn r2(&self, intercept: f64, theta: &[f64]) -> f64 {
        let rss = self.rss(intercept, theta);
        let tss = self.syy();
        if tss <= 0.0 {
            return if rss <= 0.0 { 1.0 } else { 0.0 };
        }
        1.0 - rss / tss
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
