//! Synthetic weather, demand and gas with known generating equations.
//!
//! Weather comes from daily AR(1) anomalies on top of seasonal and diurnal
//! shapes. Electrical demand is an exact linear function of the covariate
//! table plus optional noise; NDM gas is linear in the day's mean
//! population-weighted temperature.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::InstalledCapacity;
use super::hindcast::renewable_output;
use crate::covariates::calendar::{day_of_year, sunset_hour};
use crate::covariates::{
    build_covariates, BuildSummary, Covariate, CovariateSettings, CovariateTable, GridCell, PowerCurve,
    WeatherGrid, WeatherInputs, WeightKind, WeightingMap,
};
use crate::error::{ensure, Result};
use crate::heatmodel::{DemandDay, WinterDataset};
use crate::season::{DayBlocks, DayKey, SeasonRule, HOURS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TemperatureProcess {
    pub mean_c: f64,
    /// Depth of the mid-January minimum below the mean.
    pub seasonal_amplitude_c: f64,
    pub diurnal_amplitude_c: f64,
    /// Day-to-day AR(1) coefficient of the anomaly.
    pub persistence: f64,
    /// Stationary standard deviation of the daily anomaly.
    pub noise_std_c: f64,
    pub cell_spread_c: f64,
    /// Keep each day's anomaly for all of its hours instead of interpolating
    /// towards the next day. The daily mean is then an hourly temperature
    /// less a fixed diurnal shape, so gas-driven heat is linear in each hour's
    /// covariates.
    pub hold_daily_anomaly: bool,
}

impl Default for TemperatureProcess {
    fn default() -> Self {
        Self {
            mean_c: 6.0,
            seasonal_amplitude_c: 2.5,
            diurnal_amplitude_c: 2.5,
            persistence: 0.8,
            noise_std_c: 2.8,
            cell_spread_c: 1.5,
            hold_daily_anomaly: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindProcess {
    /// Mean speed at the reference height.
    pub mean_ms: f64,
    pub persistence: f64,
    pub noise_std_ms: f64,
    pub cell_spread_ms: f64,
    pub diurnal_amplitude_ms: f64,
}

impl Default for WindProcess {
    fn default() -> Self {
        Self {
            mean_ms: 6.5,
            persistence: 0.6,
            noise_std_ms: 2.5,
            cell_spread_ms: 1.0,
            diurnal_amplitude_ms: 0.6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IrradianceProcess {
    pub clear_sky_peak_w_m2: f64,
    /// Daily clearness is uniform on `[cloud_min, 1]`.
    pub cloud_min: f64,
}

impl Default for IrradianceProcess {
    fn default() -> Self {
        Self {
            clear_sky_peak_w_m2: 350.0,
            cloud_min: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemandFunction {
    pub base_gw: f64,
    pub morning_peak_gw: f64,
    pub morning_hour: f64,
    pub evening_peak_gw: f64,
    pub evening_hour: f64,
    /// Overnight trough depth, centred at 04:00.
    pub night_dip_gw: f64,
    /// Raw-unit coefficients shared by every hour.
    pub coefficients: BTreeMap<Covariate, f64>,
    pub noise_std_gw: f64,
}

impl Default for DemandFunction {
    fn default() -> Self {
        use Covariate::*;
        let coefficients = [
            (T, -0.35),
            (TBar, -0.45),
            (TColdBar, 0.3),
            (WChillBar, 0.012),
            (S, -4.0),
            (Sat, -3.0),
            (Sun, -4.0),
            (Mon, 0.5),
            (C1, 1.2),
        ]
        .into_iter()
        .collect();
        Self {
            base_gw: 34.0,
            morning_peak_gw: 4.0,
            morning_hour: 8.5,
            evening_peak_gw: 9.0,
            evening_hour: 18.0,
            night_dip_gw: 6.0,
            coefficients,
            noise_std_gw: 0.5,
        }
    }
}

impl DemandFunction {
    /// Hour-of-day intercept.
    pub fn profile(&self, hour: usize) -> f64 {
        let bump = |centre: f64, width: f64| {
            let d = (hour as f64 - centre) / width;
            (-0.5 * d * d).exp()
        };
        self.base_gw + self.morning_peak_gw * bump(self.morning_hour, 1.5) + self.evening_peak_gw * bump(self.evening_hour, 1.6)
            - self.night_dip_gw * bump(4.0, 2.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GasFunction {
    pub intercept_gw: f64,
    /// Change in daily NDM gas per °C of daily mean temperature.
    pub temperature_slope_gw_per_c: f64,
    pub noise_std_gw: f64,
}

impl Default for GasFunction {
    fn default() -> Self {
        Self {
            intercept_gw: 95.0,
            temperature_slope_gw_per_c: -4.5,
            noise_std_gw: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub first_winter: i32,
    /// Winters of weather, all used as climate years.
    pub n_winters: usize,
    /// The latest winters also get observed demand and gas.
    pub training_winters: usize,
    pub cells: usize,
    pub temperature: TemperatureProcess,
    pub wind: WindProcess,
    pub irradiance: IrradianceProcess,
    pub demand: DemandFunction,
    pub gas: GasFunction,
    pub installed: InstalledCapacity,
    /// Falls back to the study seed when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            first_winter: 2000,
            n_winters: 12,
            training_winters: 5,
            cells: 6,
            temperature: TemperatureProcess::default(),
            wind: WindProcess::default(),
            irradiance: IrradianceProcess::default(),
            demand: DemandFunction::default(),
            gas: GasFunction::default(),
            installed: InstalledCapacity::default(),
            seed: None,
        }
    }
}

impl SyntheticSpec {
    /// Same weather, with demand and gas noise switched off.
    pub fn noiseless(mut self) -> Self {
        self.demand.noise_std_gw = 0.0;
        self.gas.noise_std_gw = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.n_winters >= 2, || "need at least 2 winters".into())?;
        ensure((2..=self.n_winters).contains(&self.training_winters), || {
            format!("training_winters must lie in 2..={}", self.n_winters)
        })?;
        ensure(self.cells >= 1, || "need at least one grid cell".into())?;
        let stds = [
            self.temperature.noise_std_c,
            self.temperature.cell_spread_c,
            self.temperature.diurnal_amplitude_c,
            self.wind.noise_std_ms,
            self.wind.cell_spread_ms,
            self.wind.diurnal_amplitude_ms,
            self.demand.noise_std_gw,
            self.gas.noise_std_gw,
        ];
        ensure(stds.iter().all(|s| s.is_finite() && *s >= 0.0), || {
            "standard deviations and amplitudes must be non-negative".into()
        })?;
        for p in [self.temperature.persistence, self.wind.persistence] {
            ensure((0.0..1.0).contains(&p), || format!("persistence {p} outside [0, 1)"))?;
        }
        ensure(
            self.irradiance.clear_sky_peak_w_m2 >= 0.0 && (0.0..=1.0).contains(&self.irradiance.cloud_min),
            || "irradiance parameters out of range".into(),
        )?;
        for c in [Covariate::EOut, Covariate::GOut] {
            ensure(self.demand.coefficients.get(&c).is_none_or(|v| *v == 0.0), || {
                format!("demand cannot depend on {c}, which is computed from demand itself")
            })?;
        }
        ensure(self.demand.coefficients.values().all(|v| v.is_finite()), || {
            "demand coefficients must be finite".into()
        })?;
        self.installed.validate()
    }

    pub fn winters(&self) -> Vec<i32> {
        (0..self.n_winters as i32).map(|i| self.first_winter + i).collect()
    }

    pub fn training_winter_ids(&self) -> Vec<i32> {
        let w = self.winters();
        w[w.len() - self.training_winters..].to_vec()
    }
}

/// The generating equations, for oracle comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub intercept_gw: [f64; HOURS],
    pub coefficients: BTreeMap<Covariate, f64>,
    pub gas_intercept_gw: f64,
    pub gas_slope_gw_per_c: f64,
}

impl GroundTruth {
    pub fn electrical(&self, table: &CovariateTable, row: usize) -> f64 {
        self.intercept_gw[row % HOURS]
            + self
                .coefficients
                .iter()
                .map(|(c, b)| b * table.value(row, *c))
                .sum::<f64>()
    }

    pub fn electrical_blocks(&self, table: &CovariateTable, keep: impl Fn(&DayKey) -> bool) -> Result<DayBlocks> {
        let days: Vec<usize> = (0..table.n_days()).filter(|d| keep(&table.keys()[*d])).collect();
        let values = days
            .iter()
            .map(|d| std::array::from_fn(|h| self.electrical(table, d * HOURS + h)))
            .collect();
        DayBlocks::new(days.iter().map(|d| table.keys()[*d]).collect(), values)
    }

    /// Daily NDM gas for a daily mean temperature, floored at zero.
    pub fn gas(&self, daily_mean_t: f64) -> f64 {
        (self.gas_intercept_gw + self.gas_slope_gw_per_c * daily_mean_t).max(0.0)
    }

    /// Noise-free gas for each table day passing `keep`.
    pub fn gas_days(&self, table: &CovariateTable, keep: impl Fn(&DayKey) -> bool) -> Vec<f64> {
        (0..table.n_days())
            .filter(|d| keep(&table.keys()[*d]))
            .map(|d| self.gas(daily_mean(table, Covariate::T, d)))
            .collect()
    }
}

pub fn daily_mean(table: &CovariateTable, c: Covariate, day: usize) -> f64 {
    (0..HOURS).map(|h| table.value(day * HOURS + h, c)).sum::<f64>() / HOURS as f64
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub grid: WeatherGrid,
    pub population: WeightingMap,
    pub onshore: WeightingMap,
    pub offshore: WeightingMap,
    pub solar: WeightingMap,
    pub onshore_curve: PowerCurve,
    pub offshore_curve: PowerCurve,
    /// Covariates over every climate winter, out-turn columns unset.
    pub table: CovariateTable,
    pub summary: BuildSummary,
    /// Observed demand, renewables and gas on the training winters.
    pub dataset: WinterDataset,
    pub truth: GroundTruth,
}

impl SyntheticData {
    pub fn inputs(&self) -> WeatherInputs<'_> {
        WeatherInputs {
            grid: &self.grid,
            population: &self.population,
            onshore: &self.onshore,
            offshore: &self.offshore,
            solar: &self.solar,
            onshore_curve: &self.onshore_curve,
            offshore_curve: &self.offshore_curve,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample::<f64, _>(StandardNormal)
}

/// AR(1) series with stationary standard deviation `std`.
fn ar1(rng: &mut ChaCha8Rng, n: usize, phi: f64, std: f64) -> Vec<f64> {
    let innov = std * (1.0 - phi * phi).sqrt();
    let mut x = std * normal(rng);
    (0..n)
        .map(|_| {
            let v = x;
            x = phi * x + innov * normal(rng);
            v
        })
        .collect()
}

/// Generates weather for every winter, builds its covariates, and draws
/// observed demand and gas for the training winters. Deterministic in
/// `seed`; demand noise uses its own stream so the weather does not depend
/// on the noise settings.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    seed: u64,
    season: &SeasonRule,
    settings: &CovariateSettings,
) -> Result<SyntheticData> {
    spec.validate()?;
    season.validate()?;
    settings.validate()?;
    let seed = spec.seed.unwrap_or(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let n_cells = spec.cells;
    let cells: Vec<GridCell> = (0..n_cells)
        .map(|i| {
            let f = (i as f64 + 0.5) / n_cells as f64;
            GridCell {
                id: format!("c{i:02}"),
                latitude: Some(50.5 + 7.0 * f),
                longitude: Some(-5.0 + 6.0 * (f * 7.0).fract()),
            }
        })
        .collect();
    let ids: Vec<String> = cells.iter().map(|c| c.id.clone()).collect();
    let mut weights = |kind| {
        let raw = ids.iter().map(|id| (id.clone(), rng.random_range(0.2..1.0))).collect();
        WeightingMap::new(kind, raw)
    };
    let population = weights(WeightKind::Population)?;
    let onshore = weights(WeightKind::WindCapacityOnshore)?;
    let offshore = weights(WeightKind::WindCapacityOffshore)?;
    let solar = weights(WeightKind::SolarCapacity)?;
    let t_offset: Vec<f64> = (0..n_cells).map(|_| spec.temperature.cell_spread_c * normal(&mut rng)).collect();
    let w_offset: Vec<f64> = (0..n_cells).map(|_| spec.wind.cell_spread_ms * normal(&mut rng)).collect();

    let mut timestamps = Vec::new();
    let mut wind = vec![Vec::new(); n_cells];
    let mut temperature = vec![Vec::new(); n_cells];
    let mut irradiance = vec![Vec::new(); n_cells];
    let tp = &spec.temperature;
    let wp = &spec.wind;
    for winter in spec.winters() {
        let dates = season.dates(winter);
        let first = dates[0] - Duration::days(1);
        let last = *dates.last().expect("season has days");
        let n_days = (last - first).num_days() as usize + 1;
        // One extra anomaly so hours can interpolate towards the next day.
        let t_anom = ar1(&mut rng, n_days + 1, tp.persistence, tp.noise_std_c);
        let w_anom = ar1(&mut rng, n_days + 1, wp.persistence, wp.noise_std_ms);
        for d in 0..n_days {
            let date: NaiveDate = first + Duration::days(d as i64);
            let doy = day_of_year(date);
            let seasonal = tp.mean_c - tp.seasonal_amplitude_c * (2.0 * PI * (doy - 14.0) / 365.25).cos();
            let sunset = sunset_hour(date, settings.reference_latitude_deg);
            let sunrise = 24.0 - sunset;
            let local_t: Vec<f64> = (0..n_cells).map(|_| 0.6 * normal(&mut rng)).collect();
            let local_w: Vec<f64> = (0..n_cells).map(|_| 0.8 * normal(&mut rng)).collect();
            let clear: Vec<f64> = (0..n_cells)
                .map(|_| rng.random_range(spec.irradiance.cloud_min..=1.0))
                .collect();
            for h in 0..HOURS {
                let frac = h as f64 / HOURS as f64;
                let ta = if tp.hold_daily_anomaly {
                    t_anom[d]
                } else {
                    t_anom[d] + (t_anom[d + 1] - t_anom[d]) * frac
                };
                let wa = w_anom[d] + (w_anom[d + 1] - w_anom[d]) * frac;
                let diurnal_t = -tp.diurnal_amplitude_c * (2.0 * PI * (h as f64 - 3.0) / 24.0).cos();
                let diurnal_w = -wp.diurnal_amplitude_ms * (2.0 * PI * (h as f64 - 2.0) / 24.0).cos();
                let mid = h as f64 + 0.5;
                let sun = if mid > sunrise && mid < sunset {
                    (PI * (mid - sunrise) / (sunset - sunrise)).sin()
                } else {
                    0.0
                };
                for c in 0..n_cells {
                    temperature[c].push(seasonal + ta + diurnal_t + t_offset[c] + local_t[c]);
                    wind[c].push((wp.mean_ms + wa + diurnal_w + w_offset[c] + local_w[c]).max(0.0));
                    irradiance[c].push(spec.irradiance.clear_sky_peak_w_m2 * clear[c] * sun);
                }
                let stamp = date.and_hms_opt(h as u32, 0, 0).expect("valid hour");
                timestamps.push(Utc.from_utc_datetime(&stamp));
            }
        }
    }
    let grid = WeatherGrid::new(timestamps, cells, wind, temperature, irradiance)?;
    let onshore_curve = PowerCurve::onshore_standin();
    let offshore_curve = PowerCurve::offshore_standin();
    let inputs = WeatherInputs {
        grid: &grid,
        population: &population,
        onshore: &onshore,
        offshore: &offshore,
        solar: &solar,
        onshore_curve: &onshore_curve,
        offshore_curve: &offshore_curve,
    };
    let (table, summary) = build_covariates(&inputs, settings, season)?;

    let truth = GroundTruth {
        intercept_gw: std::array::from_fn(|h| spec.demand.profile(h)),
        coefficients: spec.demand.coefficients.iter().filter(|(_, v)| **v != 0.0).map(|(c, v)| (*c, *v)).collect(),
        gas_intercept_gw: spec.gas.intercept_gw,
        gas_slope_gw_per_c: spec.gas.temperature_slope_gw_per_c,
    };
    let training = spec.training_winter_ids();
    let is_training = |k: &DayKey| training.contains(&k.winter);
    let renewables = renewable_output(&table, &spec.installed, is_training)?;
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(1);
    let mut days = Vec::new();
    for (i, key) in renewables.keys().iter().enumerate() {
        let d = table.day_index(*key).expect("renewables built from the table");
        let e_gw = std::array::from_fn(|h| {
            truth.electrical(&table, d * HOURS + h) + spec.demand.noise_std_gw * normal(&mut noise)
        });
        let g = truth.gas(daily_mean(&table, Covariate::T, d)) + spec.gas.noise_std_gw * normal(&mut noise);
        days.push(DemandDay {
            key: *key,
            date: season.date_of(*key).expect("classified day"),
            e_gw,
            y_gw: renewables.days()[i],
            g_ndm_gw: g.max(0.0),
        });
    }
    let dataset = WinterDataset::new(days)?;
    Ok(SyntheticData {
        grid,
        population,
        onshore,
        offshore,
        solar,
        onshore_curve,
        offshore_curve,
        table,
        summary,
        dataset,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticSpec {
        SyntheticSpec {
            n_winters: 3,
            training_winters: 2,
            cells: 3,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let season = SeasonRule::default();
        let settings = CovariateSettings::default();
        let a = generate_synthetic(&small(), 5, &season, &settings).unwrap();
        let b = generate_synthetic(&small(), 5, &season, &settings).unwrap();
        assert_eq!(a.grid.to_csv().unwrap(), b.grid.to_csv().unwrap());
        assert_eq!(a.dataset, b.dataset);
        let c = generate_synthetic(&small(), 6, &season, &settings).unwrap();
        assert_ne!(a.grid.to_csv().unwrap(), c.grid.to_csv().unwrap());
    }

    #[test]
    fn noiseless_demand_follows_truth() {
        let season = SeasonRule::default();
        let data = generate_synthetic(&small().noiseless(), 1, &season, &CovariateSettings::default()).unwrap();
        assert_eq!(data.summary.days_kept, 3 * season.season_days() as usize);
        assert_eq!(data.dataset.winters(), vec![2001, 2002]);
        let e = data.truth.electrical_blocks(&data.table, |k| k.winter >= 2001).unwrap();
        assert_eq!(e, data.dataset.electrical());
        let g = data.truth.gas_days(&data.table, |k| k.winter >= 2001);
        assert_eq!(g, data.dataset.gas());
    }

    #[test]
    fn noise_does_not_move_weather() {
        let season = SeasonRule::default();
        let settings = CovariateSettings::default();
        let a = generate_synthetic(&small(), 2, &season, &settings).unwrap();
        let b = generate_synthetic(&small().noiseless(), 2, &season, &settings).unwrap();
        assert_eq!(a.grid.to_csv().unwrap(), b.grid.to_csv().unwrap());
        assert_ne!(a.dataset, b.dataset);
    }

    #[test]
    fn out_turn_dependence_rejected() {
        let mut spec = small();
        spec.demand.coefficients.insert(Covariate::EOut, 0.1);
        assert!(spec.validate().is_err());
    }
}
