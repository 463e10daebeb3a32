//! Weather-derived covariate formulas and spatial aggregation.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::grid::{Field, PowerCurve, WeatherGrid, WeightingMap};
use crate::error::{ensure, Error, Result};

/// Resolves map cells to grid indices, failing on the first unknown cell.
fn resolve(grid: &WeatherGrid, map: &WeightingMap) -> Result<Vec<(usize, f64)>> {
    map.weights()
        .iter()
        .map(|(id, w)| {
            grid.cell_index(id)
                .map(|i| (i, *w))
                .ok_or_else(|| Error::validation(format!("{:?} map cell `{id}` is not in the weather grid", map.kind())))
        })
        .collect()
}

/// Weighted sum over cells of `f(cell, hour)`, per hour.
pub fn aggregate(grid: &WeatherGrid, map: &WeightingMap, f: impl Fn(usize, usize) -> f64) -> Result<Vec<f64>> {
    let cells = resolve(grid, map)?;
    Ok((0..grid.n_hours())
        .map(|t| cells.iter().map(|(c, w)| w * f(*c, t)).sum())
        .collect())
}

pub fn weighted_mean(grid: &WeatherGrid, field: Field, map: &WeightingMap) -> Result<Vec<f64>> {
    aggregate(grid, map, |c, t| grid.series(field, c)[t])
}

pub fn wind_capacity_factor(grid: &WeatherGrid, map: &WeightingMap, curve: &PowerCurve) -> Result<Vec<f64>> {
    let cf = aggregate(grid, map, |c, t| curve.cf(grid.series(Field::WindSpeed, c)[t]))?;
    Ok(cf.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

/// Relative-efficiency PV model, with cell temperature taken as air temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolarModel {
    pub g_ref_w_m2: f64,
    pub t_ref_c: f64,
    pub gamma_per_c: f64,
}

impl Default for SolarModel {
    fn default() -> Self {
        Self {
            g_ref_w_m2: 1000.0,
            t_ref_c: 25.0,
            gamma_per_c: -0.005,
        }
    }
}

impl SolarModel {
    pub fn validate(&self) -> Result<()> {
        ensure(self.g_ref_w_m2 > 0.0 && self.g_ref_w_m2.is_finite(), || "solar g_ref must be > 0".into())?;
        ensure(self.t_ref_c.is_finite() && self.gamma_per_c.is_finite(), || {
            "solar model constants must be finite".into()
        })
    }

    pub fn cf(&self, irradiance: f64, temperature: f64) -> f64 {
        let derate = (1.0 + self.gamma_per_c * (temperature - self.t_ref_c)).max(0.0);
        (irradiance / self.g_ref_w_m2 * derate).clamp(0.0, 1.0)
    }
}

pub fn solar_capacity_factor(grid: &WeatherGrid, map: &WeightingMap, model: &SolarModel) -> Result<Vec<f64>> {
    let cf = aggregate(grid, map, |c, t| {
        model.cf(grid.series(Field::Irradiance, c)[t], grid.series(Field::Temperature, c)[t])
    })?;
    Ok(cf.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

pub fn cold_uptick(t: f64, t0: f64) -> f64 {
    (t0 - t).max(0.0)
}

pub fn wind_chill(t: f64, w_pop: f64, t_wc: f64, w_wc: f64) -> f64 {
    (t_wc - t).max(0.0) * (w_pop - w_wc).max(0.0)
}

pub const WINDOW: usize = 24;

/// Mean of the 24 hours ending at each hour; `None` until the window fills.
pub fn trailing_mean_24h(series: &[f64]) -> Result<Vec<Option<f64>>> {
    ensure(series.len() >= WINDOW, || {
        format!("trailing mean needs at least {WINDOW} hours, got {}", series.len())
    })?;
    Ok(trailing_mean_segments(series, std::slice::from_ref(&(0..series.len()))))
}

/// Trailing mean restarted at the start of every contiguous segment.
pub fn trailing_mean_segments(series: &[f64], segments: &[Range<usize>]) -> Vec<Option<f64>> {
    let mut out = vec![None; series.len()];
    for seg in segments {
        for t in seg.clone() {
            if t + 1 >= seg.start + WINDOW {
                let window = &series[t + 1 - WINDOW..=t];
                out[t] = Some(window.iter().sum::<f64>() / WINDOW as f64);
            }
        }
    }
    out
}
