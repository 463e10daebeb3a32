//! Demand and renewable hindcasts over every climate winter.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::InstalledCapacity;
use crate::covariates::{outturn_covariates, Covariate, CovariateTable, Outturn};
use crate::error::{ensure, Result};
use crate::heatmodel::WinterDataset;
use crate::lasso::HourlyLassoModel;
use crate::season::{DayBlocks, DayKey, HOURS};

/// How the trend and out-turn covariates are set on hindcast rows.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendPolicy {
    /// Every climate winter is evaluated as the latest training winter.
    #[default]
    TargetYear,
    /// Keep each row's own time index; out-turn falls back to the latest
    /// training winter where it was not observed.
    Observed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HindcastSettings {
    pub trend: TrendPolicy,
    /// Adds training residuals resampled per hour to point predictions.
    pub bootstrap_residuals: bool,
}

/// Training winters' out-turn, attached to a copy of the climate table.
/// Other winters keep missing out-turn columns.
pub fn training_table(table: &CovariateTable, dataset: &WinterDataset) -> CovariateTable {
    let outturn = outturn_covariates(dataset);
    let mut t = table.clone();
    for d in 0..t.n_days() {
        let Some(o) = outturn.get(&t.keys()[d].winter).copied() else {
            continue;
        };
        for h in 0..HOURS {
            t.set(d * HOURS + h, Covariate::EOut, o.e_out_gw);
            t.set(d * HOURS + h, Covariate::GOut, o.g_out_gw);
        }
    }
    t
}

/// Climate table with trend and out-turn columns set per `policy`.
pub fn hindcast_table(table: &CovariateTable, dataset: &WinterDataset, policy: TrendPolicy) -> Result<CovariateTable> {
    let outturn: BTreeMap<i32, Outturn> = outturn_covariates(dataset);
    let (&last_winter, &last) = outturn
        .iter()
        .next_back()
        .ok_or_else(|| crate::Error::validation("dataset has no winters"))?;
    let last_day = dataset.keys().last().copied().expect("non-empty dataset");
    let d = table
        .day_index(last_day)
        .ok_or_else(|| crate::Error::validation(format!("no covariates for the last training day of winter {last_winter}")))?;
    let t_target = table.value(d * HOURS + HOURS - 1, Covariate::Lin);
    let mut t = table.clone();
    match policy {
        TrendPolicy::TargetYear => {
            t.attach_outturn(&BTreeMap::new(), Some(last))?;
            for r in 0..t.n_rows() {
                t.set(r, Covariate::Lin, t_target);
            }
        }
        TrendPolicy::Observed => t.attach_outturn(&outturn, Some(last))?,
    }
    Ok(t)
}

/// Renewable output `Σ capacity · capacity factor`, in GW.
pub fn renewable_output(
    table: &CovariateTable,
    installed: &InstalledCapacity,
    keep: impl Fn(&DayKey) -> bool,
) -> Result<DayBlocks> {
    installed.validate()?;
    let days: Vec<usize> = (0..table.n_days()).filter(|d| keep(&table.keys()[*d])).collect();
    let y = |r: usize| {
        installed.onshore_gw * table.value(r, Covariate::WOn)
            + installed.offshore_gw * table.value(r, Covariate::WOff)
            + installed.solar_gw * table.value(r, Covariate::S)
    };
    let values = days
        .iter()
        .map(|d| std::array::from_fn(|h| y(d * HOURS + h)))
        .collect();
    DayBlocks::new(days.iter().map(|d| table.keys()[*d]).collect(), values)
}

/// Training residuals of `model` per hour.
pub fn residuals(model: &HourlyLassoModel, table: &CovariateTable, target: &DayBlocks) -> Result<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = (0..HOURS).map(|_| Vec::with_capacity(target.n_days())).collect();
    for (key, day) in target.keys().iter().zip(target.days()) {
        let d = table
            .day_index(*key)
            .ok_or_else(|| crate::Error::validation(format!("no covariates for winter {} day {}", key.winter, key.day)))?;
        for (h, r) in out.iter_mut().enumerate() {
            r.push(day[h] - model.predict_row(table, d * HOURS + h));
        }
    }
    Ok(out)
}

/// Adds one resampled residual per hour to each prediction.
pub fn add_bootstrap(predictions: &DayBlocks, residuals: &[Vec<f64>], seed: u64) -> Result<DayBlocks> {
    ensure(residuals.len() == HOURS && residuals.iter().all(|r| !r.is_empty()), || {
        "residual bootstrap needs residuals for every hour".into()
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = predictions
        .days()
        .iter()
        .map(|day| std::array::from_fn(|h| day[h] + residuals[h][rng.random_range(0..residuals[h].len())]))
        .collect();
    DayBlocks::new(predictions.keys().to_vec(), values)
}
