//! Electrified heat demand from gas proxies, and the two demand models
//! compared in adequacy studies.

use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::csvio::{self, num, schema_error};
use crate::error::{ensure, Error, Result};
use crate::season::{DayBlocks, DayKey, HOURS};

/// One winter day of coincident demand, gas and renewable output.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandDay {
    pub key: DayKey,
    pub date: NaiveDate,
    pub e_gw: [f64; HOURS],
    pub y_gw: [f64; HOURS],
    /// Daily NDM gas demand as mean-hourly power.
    pub g_ndm_gw: f64,
}

/// Hourly observations over whole winter days, ordered by day key.
#[derive(Debug, Clone, PartialEq)]
pub struct WinterDataset {
    days: Vec<DemandDay>,
}

impl WinterDataset {
    pub fn new(days: Vec<DemandDay>) -> Result<Self> {
        ensure(days.windows(2).all(|w| w[0].key < w[1].key), || {
            "dataset days must be strictly ordered by (winter, day)".into()
        })?;
        for d in &days {
            ensure(
                d.e_gw.iter().chain(&d.y_gw).all(|v| v.is_finite()) && d.g_ndm_gw.is_finite(),
                || format!("non-finite value on {}", d.date),
            )?;
            ensure(d.g_ndm_gw >= 0.0, || format!("negative gas demand on {}", d.date))?;
        }
        Ok(Self { days })
    }

    pub fn days(&self) -> &[DemandDay] {
        &self.days
    }

    pub fn n_days(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn keys(&self) -> Vec<DayKey> {
        self.days.iter().map(|d| d.key).collect()
    }

    pub fn winters(&self) -> Vec<i32> {
        let mut w: Vec<i32> = self.days.iter().map(|d| d.key.winter).collect();
        w.dedup();
        w
    }

    pub fn electrical(&self) -> DayBlocks {
        DayBlocks::new(self.keys(), self.days.iter().map(|d| d.e_gw).collect()).expect("validated")
    }

    pub fn renewables(&self) -> DayBlocks {
        DayBlocks::new(self.keys(), self.days.iter().map(|d| d.y_gw).collect()).expect("validated")
    }

    pub fn gas(&self) -> Vec<f64> {
        self.days.iter().map(|d| d.g_ndm_gw).collect()
    }

    pub fn restrict(&self, keep: impl Fn(&DayKey) -> bool) -> Self {
        Self {
            days: self.days.iter().filter(|d| keep(&d.key)).cloned().collect(),
        }
    }
}

/// A 24-value heat pump load shape with mean 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatProfile {
    pub name: String,
    pub values: [f64; HOURS],
}

#[derive(Debug, Deserialize)]
struct ProfileRecord {
    hour: usize,
    h: f64,
}

impl HeatProfile {
    /// Rescales `raw` to mean 1.
    pub fn new(name: impl Into<String>, raw: [f64; HOURS]) -> Result<Self> {
        let name = name.into();
        ensure(raw.iter().all(|v| v.is_finite() && *v >= 0.0), || {
            format!("heat profile `{name}` must be finite and non-negative")
        })?;
        let mean = raw.iter().sum::<f64>() / HOURS as f64;
        ensure(mean > 0.0, || format!("heat profile `{name}` is identically zero"))?;
        Ok(Self {
            name,
            values: raw.map(|v| v / mean),
        })
    }

    pub fn flat() -> Self {
        Self::new("flat", [1.0; HOURS]).expect("valid")
    }

    pub fn peak_hour(&self) -> usize {
        (0..HOURS).fold(0, |best, h| if self.values[h] > self.values[best] { h } else { best })
    }

    pub fn from_csv_str(label: &Path, name: &str, text: &str) -> Result<Self> {
        let rows = csvio::read_rows::<ProfileRecord>(label, text.as_bytes(), &["hour", "h"])?;
        let mut raw = [f64::NAN; HOURS];
        for r in &rows {
            let ProfileRecord { hour, h } = r.value;
            if hour >= HOURS || !raw[hour].is_nan() {
                return Err(schema_error(label, r.line, "hour", format!("hour {hour} out of range or repeated")));
            }
            raw[hour] = h;
        }
        if let Some(h) = raw.iter().position(|v| v.is_nan()) {
            return Err(schema_error(label, 0, "hour", format!("hour {h} missing")));
        }
        Self::new(name, raw).map_err(|e| e.context(label.display().to_string()))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("profile");
        Self::from_csv_str(path, name, &text)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let rows: Vec<Vec<String>> = (0..HOURS).map(|h| vec![h.to_string(), num(self.values[h])]).collect();
        csvio::render(&[], &["hour", "h"], &rows)
    }

    /// Bundled approximations: `central` (morning peak), `flat`, `peaking`
    /// (sharp evening peak).
    pub fn bundled(name: &str) -> Option<Self> {
        let text = match name {
            "central" => include_str!("../data/profiles/central.csv"),
            "flat" => include_str!("../data/profiles/flat.csv"),
            "peaking" => include_str!("../data/profiles/peaking.csv"),
            _ => return None,
        };
        Some(Self::from_csv_str(Path::new(name), name, text).expect("bundled profile is valid"))
    }

    pub const BUNDLED: [&'static str; 3] = ["central", "flat", "peaking"];
}

pub const DEFAULT_F_DOM: f64 = 0.79;
pub const DEFAULT_G_HW_GW: f64 = 9.9;
pub const DEFAULT_COP: f64 = 2.0;

/// Heat electrification scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatScenario {
    pub profile: HeatProfile,
    pub cop: f64,
    /// Fraction of domestic gas customers converted to heat pumps.
    pub uptake: f64,
    pub f_dom: f64,
    pub g_hw_gw: f64,
}

impl HeatScenario {
    pub fn new(profile: HeatProfile, cop: f64, uptake: f64) -> Result<Self> {
        let s = Self {
            profile,
            cop,
            uptake,
            f_dom: DEFAULT_F_DOM,
            g_hw_gw: DEFAULT_G_HW_GW,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.cop > 0.0 && self.cop.is_finite(), || format!("cop must be > 0, got {}", self.cop))?;
        ensure((0.0..=1.0).contains(&self.uptake), || format!("uptake {} outside [0, 1]", self.uptake))?;
        ensure((0.0..=1.0).contains(&self.f_dom), || format!("f_dom {} outside [0, 1]", self.f_dom))?;
        ensure(self.g_hw_gw >= 0.0 && self.g_hw_gw.is_finite(), || "g_hw must be >= 0".into())?;
        let mean = self.profile.values.iter().sum::<f64>() / HOURS as f64;
        ensure((mean - 1.0).abs() < 1e-9 && self.profile.values.iter().all(|v| *v >= 0.0), || {
            format!("profile `{}` must be non-negative with mean 1", self.profile.name)
        })
    }

    /// Daily space-heat electricity per unit of profile, in GW.
    pub fn daily_heat_gw(&self, g_ndm_gw: f64) -> f64 {
        self.uptake * self.f_dom * (g_ndm_gw - self.g_hw_gw).max(0.0) / self.cop
    }
}

/// Converts an installation count to an uptake fraction.
pub fn uptake_from_installations(installations: f64, customers: f64) -> Result<f64> {
    ensure(customers > 0.0, || "customer count must be > 0".into())?;
    let u = installations / customers;
    ensure((0.0..=1.0).contains(&u), || format!("{installations} installations exceed {customers} customers"))?;
    Ok(u)
}

pub fn gas_to_heat(g_ndm_day_gw: f64, hour: usize, scenario: &HeatScenario) -> f64 {
    scenario.profile.values[hour] * scenario.daily_heat_gw(g_ndm_day_gw)
}

/// Electrified heat for each day given its gas demand.
pub fn heat_blocks(keys: &[DayKey], gas: &[f64], scenario: &HeatScenario) -> Result<DayBlocks> {
    ensure(keys.len() == gas.len(), || format!("{} days but {} gas values", keys.len(), gas.len()))?;
    let values = gas
        .iter()
        .map(|g| std::array::from_fn(|h| gas_to_heat(*g, h, scenario)))
        .collect();
    DayBlocks::new(keys.to_vec(), values)
}

/// `D = E + H`.
pub fn explicit_demand(dataset: &WinterDataset, scenario: &HeatScenario) -> Result<DayBlocks> {
    scenario.validate()?;
    let heat = heat_blocks(&dataset.keys(), &dataset.gas(), scenario)?;
    dataset.electrical().zip_with(&heat, |e, h| e + h)
}

/// `D = k E`.
pub fn implicit_demand(electrical: &DayBlocks, k_peak: f64) -> Result<DayBlocks> {
    ensure(k_peak > 0.0 && k_peak.is_finite(), || format!("k_peak must be > 0, got {k_peak}"))?;
    Ok(electrical.scaled(k_peak))
}

pub fn calibrate_k_peak(explicit_peak_gw: f64, base_peak_gw: f64) -> Result<f64> {
    ensure(base_peak_gw > 0.0 && base_peak_gw.is_finite(), || {
        format!("base peak demand must be > 0, got {base_peak_gw}")
    })?;
    ensure(explicit_peak_gw.is_finite(), || "explicit peak demand must be finite".into())?;
    Ok(explicit_peak_gw / base_peak_gw)
}

/// How total demand is formed from the base electrical model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DemandModel {
    Explicit { scenario: HeatScenario },
    Implicit { k_peak: f64 },
}

impl DemandModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            DemandModel::Explicit { scenario } => scenario.validate(),
            DemandModel::Implicit { k_peak } => ensure(*k_peak > 0.0 && k_peak.is_finite(), || {
                "k_peak must be > 0".into()
            }),
        }
    }

    pub fn demand(&self, dataset: &WinterDataset) -> Result<DayBlocks> {
        match self {
            DemandModel::Explicit { scenario } => explicit_demand(dataset, scenario),
            DemandModel::Implicit { k_peak } => implicit_demand(&dataset.electrical(), *k_peak),
        }
    }
}

/// Demand sorted descending against the fraction of hours at or above it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadDurationCurve {
    values: Vec<f64>,
}

impl LoadDurationCurve {
    pub fn new(series: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut values: Vec<f64> = series.into_iter().collect();
        ensure(!values.is_empty(), || "load duration curve of an empty series".into())?;
        ensure(values.iter().all(|v| v.is_finite()), || "non-finite demand in load duration curve".into())?;
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(exceedance fraction, demand)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.values.len() as f64;
        self.values.iter().enumerate().map(move |(i, v)| ((i + 1) as f64 / n, *v))
    }

    /// Demand exceeded during fraction `p` of hours.
    pub fn at_duration(&self, p: f64) -> f64 {
        let n = self.values.len();
        let i = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.values[i]
    }

    /// Resamples to `n` evenly spaced durations for plotting.
    pub fn resampled(&self, n: usize) -> Vec<(f64, f64)> {
        (1..=n).map(|i| {
            let p = i as f64 / n as f64;
            (p, self.at_duration(p))
        })
        .collect()
    }
}

pub fn load_duration_curve(demand: &DayBlocks) -> Result<LoadDurationCurve> {
    LoadDurationCurve::new(demand.flat())
}
