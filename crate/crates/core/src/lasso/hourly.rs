//! One lasso model per hour of the day over a shared covariate schema.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cross_validate, one_se_select, CvResult};
use super::design::DesignMatrix;
use super::solver::{alpha_grid, alpha_max, lasso_path, LassoFit, SolverOptions};
use crate::covariates::{Covariate, CovariateTable, Standardization};
use crate::csvio::{self, num};
use crate::error::{ensure, Error, Result};
use crate::season::{DayBlocks, DayKey, HOURS};

/// Default system-peak hours for the sensitivity table (16:00 to 19:00).
pub const PEAK_HOURS: RangeInclusive<usize> = 16..=19;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    pub schema: Vec<Covariate>,
    pub n_alphas: usize,
    pub alpha_ratio: f64,
    pub solver: SolverOptions,
    /// Winters used as cross-validation folds; all training winters when unset.
    pub cv_winters: Option<Vec<i32>>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            schema: Covariate::default_schema(),
            n_alphas: 100,
            alpha_ratio: 1e-4,
            solver: SolverOptions::default(),
            cv_winters: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(!self.schema.is_empty(), || "covariate schema is empty".into())?;
        let mut s = self.schema.clone();
        s.sort();
        s.dedup();
        ensure(s.len() == self.schema.len(), || "covariate schema lists a column twice".into())?;
        ensure(self.n_alphas >= 1, || "n_alphas must be >= 1".into())?;
        ensure(self.alpha_ratio > 0.0 && self.alpha_ratio < 1.0, || "alpha_ratio must lie in (0, 1)".into())?;
        self.solver.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourFit {
    pub hour: usize,
    pub alpha_star: f64,
    pub alpha_index: usize,
    pub fit: LassoFit,
    pub cv: CvResult,
    /// Nonzero coefficient count along the full-data path, per alpha.
    pub path_nonzero: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlyLassoModel {
    /// Model columns, in coefficient order.
    pub schema: Vec<Covariate>,
    pub standardization: Standardization,
    pub hours: Vec<HourFit>,
    pub training_winters: Vec<i32>,
    /// Combined R² of the 24 models over all training hours.
    pub overall_r2: f64,
    pub warnings: Vec<String>,
}

impl HourlyLassoModel {
    pub fn validate(&self) -> Result<()> {
        ensure(self.hours.len() == HOURS, || format!("model has {} hours, expected 24", self.hours.len()))?;
        ensure(self.schema == self.standardization.covariates(), || {
            "model schema and standardization disagree".into()
        })?;
        for (h, f) in self.hours.iter().enumerate() {
            ensure(f.hour == h && f.fit.coefficients.len() == self.schema.len(), || {
                format!("hour {h} is malformed")
            })?;
            ensure(f.fit.coefficients.iter().all(|c| c.is_finite()), || format!("hour {h} has non-finite coefficients"))?;
        }
        Ok(())
    }

    pub fn coefficient(&self, hour: usize, c: Covariate) -> f64 {
        self.schema
            .iter()
            .position(|s| *s == c)
            .map_or(0.0, |j| self.hours[hour].fit.coefficients[j])
    }

    pub fn predict_row(&self, table: &CovariateTable, row: usize) -> f64 {
        let z = self.standardization.transform_row(table, row);
        self.hours[row % HOURS].fit.predict(&z)
    }

    /// Hourly predictions for every table day passing `keep`.
    pub fn predict(&self, table: &CovariateTable, keep: impl Fn(&DayKey) -> bool) -> Result<DayBlocks> {
        let days: Vec<usize> = (0..table.n_days()).filter(|d| keep(&table.keys()[*d])).collect();
        let rows: Vec<usize> = days.iter().flat_map(|d| d * HOURS..(d + 1) * HOURS).collect();
        if let Some((r, c)) = table.find_missing(&rows, &self.schema) {
            return Err(Error::validation(format!("covariate {c} missing on hindcast row {r}")));
        }
        let keys = days.iter().map(|d| table.keys()[*d]).collect();
        let values = days
            .iter()
            .map(|d| std::array::from_fn(|h| self.predict_row(table, d * HOURS + h)))
            .collect();
        DayBlocks::new(keys, values)
    }

    /// Intercept and coefficients of one hour in raw covariate units.
    pub fn raw_coefficients(&self, hour: usize) -> (f64, Vec<(Covariate, f64)>) {
        let fit = &self.hours[hour].fit;
        let mut intercept = fit.intercept;
        let coefs = self
            .standardization
            .columns
            .iter()
            .zip(&fit.coefficients)
            .map(|(m, t)| {
                intercept -= t * m.mean / m.scale;
                (m.covariate, t / m.scale)
            })
            .collect();
        (intercept, coefs)
    }

    /// The model of `k·D`: every coefficient and intercept scaled by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let mut out = self.clone();
        for h in &mut out.hours {
            h.fit.intercept *= k;
            for c in &mut h.fit.coefficients {
                *c *= k;
            }
        }
        out
    }

    /// Mean over all hours of `Σ |θ_c|` for the given covariates.
    pub fn mean_abs_coefficient_sum(&self, covariates: &[Covariate]) -> f64 {
        (0..HOURS)
            .map(|h| covariates.iter().map(|c| self.coefficient(h, *c).abs()).sum::<f64>())
            .sum::<f64>()
            / HOURS as f64
    }

    pub fn sensitivity(&self, peak: RangeInclusive<usize>) -> SensitivityTable {
        let n_peak = peak.clone().count() as f64;
        let mut rows: Vec<SensitivityRow> = self
            .schema
            .iter()
            .map(|&c| {
                let peak_vals: Vec<f64> = peak.clone().map(|h| self.coefficient(h, c)).collect();
                SensitivityRow {
                    covariate: c,
                    peak_mean: peak_vals.iter().sum::<f64>() / n_peak,
                    peak_mean_abs: peak_vals.iter().map(|v| v.abs()).sum::<f64>() / n_peak,
                    nonzero_hours: (0..HOURS).filter(|h| self.coefficient(*h, c) != 0.0).count(),
                }
            })
            .collect();
        rows.sort_by(|a, b| b.peak_mean_abs.total_cmp(&a.peak_mean_abs).then(a.covariate.cmp(&b.covariate)));
        SensitivityTable { peak, rows }
    }

    /// Long-format `(hour, covariate, coefficient)` table.
    pub fn coefficients_csv(&self, preamble: &[String]) -> Result<Vec<u8>> {
        let mut rows = Vec::new();
        for h in 0..HOURS {
            rows.push(vec![h.to_string(), "intercept".into(), num(self.hours[h].fit.intercept)]);
            for (j, c) in self.schema.iter().enumerate() {
                rows.push(vec![h.to_string(), c.name().into(), num(self.hours[h].fit.coefficients[j])]);
            }
        }
        csvio::render(preamble, &["hour", "covariate", "coefficient"], &rows)
    }

    /// Regularization path diagnostics: mean held-out R² and SE per alpha.
    pub fn cv_csv(&self, preamble: &[String]) -> Result<Vec<u8>> {
        let mut rows = Vec::new();
        for f in &self.hours {
            for (a, alpha) in f.cv.alphas.iter().enumerate() {
                rows.push(vec![
                    f.hour.to_string(),
                    num(*alpha),
                    num(1.0 / alpha),
                    num(f.cv.mean[a]),
                    num(f.cv.se[a]),
                    f.path_nonzero[a].to_string(),
                    (a == f.alpha_index).to_string(),
                ]);
            }
        }
        csvio::render(
            preamble,
            &["hour", "alpha", "inverse_alpha", "mean_r2", "se", "nonzero", "selected"],
            &rows,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub covariate: Covariate,
    pub peak_mean: f64,
    pub peak_mean_abs: f64,
    pub nonzero_hours: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityTable {
    pub peak: RangeInclusive<usize>,
    pub rows: Vec<SensitivityRow>,
}

impl SensitivityTable {
    pub fn to_csv(&self, preamble: &[String]) -> Result<Vec<u8>> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.covariate.name().into(),
                    num(r.peak_mean),
                    num(r.peak_mean_abs),
                    r.nonzero_hours.to_string(),
                ]
            })
            .collect();
        csvio::render(preamble, &["covariate", "peak_mean", "peak_mean_abs", "nonzero_hours"], &rows)
    }
}

/// Fits the 24 hourly models of `target` on the table's covariates.
///
/// Standardization moments come from all training hours together so every
/// hour shares one schema. Per hour: cross-validate over winter folds,
/// pick alpha by the one-SE rule, refit on all training winters.
pub fn fit_hourly(table: &CovariateTable, target: &DayBlocks, config: &FitConfig) -> Result<HourlyLassoModel> {
    config.validate()?;
    let training_winters = target.winters();
    ensure(training_winters.len() >= 2, || {
        format!("fitting needs at least 2 winters, found {}", training_winters.len())
    })?;
    let day_rows: Vec<usize> = target
        .keys()
        .iter()
        .map(|k| {
            table
                .day_index(*k)
                .ok_or_else(|| Error::validation(format!("no covariates for winter {} day {}", k.winter, k.day)))
        })
        .collect::<Result<_>>()?;
    let all_rows: Vec<usize> = day_rows.iter().flat_map(|d| d * HOURS..(d + 1) * HOURS).collect();
    let (standardization, warnings) = Standardization::fit(table, &all_rows, &config.schema)?;
    let schema = standardization.covariates();
    let cv_winters = config.cv_winters.clone().unwrap_or_else(|| training_winters.clone());
    for w in &cv_winters {
        ensure(training_winters.contains(w), || format!("cross-validation winter {w} is not a training winter"))?;
    }

    let hours: Vec<HourFit> = (0..HOURS)
        .into_par_iter()
        .map(|h| {
            let rows: Vec<Vec<f64>> = day_rows
                .iter()
                .map(|d| standardization.transform_row(table, d * HOURS + h))
                .collect();
            let y: Vec<f64> = target.days().iter().map(|v| v[h]).collect();
            let folds: Vec<i32> = target.keys().iter().map(|k| k.winter).collect();
            let full = DesignMatrix::new(rows.clone(), y.clone(), folds.clone())?;
            let keep: Vec<usize> = (0..folds.len()).filter(|i| cv_winters.contains(&folds[*i])).collect();
            let cv_design = DesignMatrix::new(
                keep.iter().map(|i| rows[*i].clone()).collect(),
                keep.iter().map(|i| y[*i]).collect(),
                keep.iter().map(|i| folds[*i]).collect(),
            )?;
            let alphas = alpha_grid(alpha_max(&full)?, config.n_alphas, config.alpha_ratio)?;
            let cv = cross_validate(&cv_design, &alphas, &config.solver)?;
            let alpha_index = one_se_select(&cv)?;
            let path = lasso_path(&full, &alphas, &config.solver)?;
            let path_nonzero = path.iter().map(|f| f.nonzero().len()).collect();
            let fit = path.into_iter().nth(alpha_index).expect("index within grid");
            Ok(HourFit {
                hour: h,
                alpha_star: alphas[alpha_index],
                alpha_index,
                fit,
                cv,
                path_nonzero,
            })
        })
        .collect::<Vec<Result<HourFit>>>()
        .into_iter()
        .enumerate()
        .map(|(h, r)| r.map_err(|e| e.context(format!("hour {h}"))))
        .collect::<Result<_>>()?;

    let mut model = HourlyLassoModel {
        schema,
        standardization,
        hours,
        training_winters,
        overall_r2: 0.0,
        warnings,
    };
    let flat: Vec<f64> = target.to_flat();
    let mean = flat.iter().sum::<f64>() / flat.len() as f64;
    let (mut rss, mut tss) = (0.0, 0.0);
    for (i, d) in day_rows.iter().enumerate() {
        for h in 0..HOURS {
            let y = target.days()[i][h];
            rss += (y - model.predict_row(table, d * HOURS + h)).powi(2);
            tss += (y - mean).powi(2);
        }
    }
    model.overall_r2 = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };
    Ok(model)
}
