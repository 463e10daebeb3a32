//! Gridded weather fields, spatial weighting maps and turbine power curves.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::ops::Range;
use std::path::Path;

use chrono::{DateTime, Duration, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::csvio::{self, num, schema_error};
use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    WindSpeed,
    Temperature,
    Irradiance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub id: String,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
}

impl GridCell {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            latitude: None,
            longitude: None,
        }
    }
}

/// Per-cell hourly weather. Series are indexed `[cell][hour]`.
///
/// Timestamps are whole UTC hours, strictly increasing. Gaps are allowed
/// between segments (winter-only extracts); within a segment spacing is one
/// hour.
#[derive(Debug, Clone, PartialEq)]
pub struct WeatherGrid {
    timestamps: Vec<DateTime<Utc>>,
    cells: Vec<GridCell>,
    wind: Vec<Vec<f64>>,
    temperature: Vec<Vec<f64>>,
    irradiance: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

#[derive(Debug, Deserialize)]
struct GridRecord {
    timestamp: String,
    cell_id: String,
    wind_speed_10m: f64,
    temperature_2m: f64,
    irradiance: f64,
    #[serde(default)]
    latitude: Option<f64>,
    #[serde(default)]
    longitude: Option<f64>,
}

impl WeatherGrid {
    pub fn new(
        timestamps: Vec<DateTime<Utc>>,
        cells: Vec<GridCell>,
        wind: Vec<Vec<f64>>,
        temperature: Vec<Vec<f64>>,
        irradiance: Vec<Vec<f64>>,
    ) -> Result<Self> {
        ensure(!cells.is_empty(), || "weather grid has no cells".into())?;
        ensure(!timestamps.is_empty(), || "weather grid has no timestamps".into())?;
        for (i, t) in timestamps.iter().enumerate() {
            ensure(t.minute() == 0 && t.second() == 0 && t.nanosecond() == 0, || {
                format!("timestamp {t} is not on a whole hour")
            })?;
            if i > 0 {
                ensure(*t > timestamps[i - 1], || {
                    format!("timestamps not strictly increasing at {t}")
                })?;
            }
        }
        let n = timestamps.len();
        for (name, f) in [("wind", &wind), ("temperature", &temperature), ("irradiance", &irradiance)] {
            ensure(f.len() == cells.len(), || {
                format!("{name} field has {} cells, grid has {}", f.len(), cells.len())
            })?;
            for (c, s) in f.iter().enumerate() {
                ensure(s.len() == n, || {
                    format!("{name} series of cell {} has {} hours, expected {n}", cells[c].id, s.len())
                })?;
                ensure(s.iter().all(|v| v.is_finite()), || {
                    format!("{name} series of cell {} has non-finite values", cells[c].id)
                })?;
            }
        }
        for (c, s) in wind.iter().enumerate() {
            ensure(s.iter().all(|v| *v >= 0.0), || {
                format!("negative wind speed in cell {}", cells[c].id)
            })?;
        }
        for (c, s) in irradiance.iter().enumerate() {
            ensure(s.iter().all(|v| *v >= 0.0), || {
                format!("negative irradiance in cell {}", cells[c].id)
            })?;
        }
        let mut index = HashMap::new();
        for (i, c) in cells.iter().enumerate() {
            if index.insert(c.id.clone(), i).is_some() {
                return Err(Error::validation(format!("duplicate cell id `{}`", c.id)));
            }
        }
        Ok(Self {
            timestamps,
            cells,
            wind,
            temperature,
            irradiance,
            index,
        })
    }

    pub fn timestamps(&self) -> &[DateTime<Utc>] {
        &self.timestamps
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    pub fn n_hours(&self) -> usize {
        self.timestamps.len()
    }

    pub fn cell_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn series(&self, field: Field, cell: usize) -> &[f64] {
        match field {
            Field::WindSpeed => &self.wind[cell],
            Field::Temperature => &self.temperature[cell],
            Field::Irradiance => &self.irradiance[cell],
        }
    }

    /// Maximal runs of consecutive hourly timestamps.
    pub fn segments(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..self.timestamps.len() {
            if self.timestamps[i] - self.timestamps[i - 1] != Duration::hours(1) {
                out.push(start..i);
                start = i;
            }
        }
        out.push(start..self.timestamps.len());
        out
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let rows = csvio::read_file::<GridRecord>(
            path,
            &["timestamp", "cell_id", "wind_speed_10m", "temperature_2m", "irradiance"],
        )?;
        let mut order: Vec<String> = Vec::new();
        let mut per_cell: HashMap<String, (GridCell, BTreeMap<DateTime<Utc>, [f64; 3]>)> = HashMap::new();
        for row in rows {
            let r = row.value;
            let t = csvio::parse_timestamp(&r.timestamp)
                .map_err(|m| schema_error(path, row.line, "timestamp", m))?;
            let entry = per_cell.entry(r.cell_id.clone()).or_insert_with(|| {
                order.push(r.cell_id.clone());
                (
                    GridCell {
                        id: r.cell_id.clone(),
                        latitude: r.latitude,
                        longitude: r.longitude,
                    },
                    BTreeMap::new(),
                )
            });
            if entry
                .1
                .insert(t, [r.wind_speed_10m, r.temperature_2m, r.irradiance])
                .is_some()
            {
                return Err(schema_error(path, row.line, "timestamp", format!("duplicate hour for cell {}", r.cell_id)));
            }
        }
        ensure(!order.is_empty(), || format!("{} holds no weather rows", path.display()))?;
        let timestamps: Vec<DateTime<Utc>> = per_cell[&order[0]].1.keys().copied().collect();
        let mut cells = Vec::new();
        let (mut wind, mut temp, mut irr) = (Vec::new(), Vec::new(), Vec::new());
        for id in &order {
            let (cell, series) = per_cell.remove(id).expect("cell present");
            if series.len() != timestamps.len() || !series.keys().eq(timestamps.iter()) {
                return Err(schema_error(
                    path,
                    0,
                    "timestamp",
                    format!("cell {id} does not cover the same hours as cell {}", order[0]),
                ));
            }
            wind.push(series.values().map(|v| v[0]).collect());
            temp.push(series.values().map(|v| v[1]).collect());
            irr.push(series.values().map(|v| v[2]).collect());
            cells.push(cell);
        }
        Self::new(timestamps, cells, wind, temp, irr).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let with_coords = self.cells.iter().any(|c| c.latitude.is_some() || c.longitude.is_some());
        let mut header = vec!["timestamp", "cell_id", "wind_speed_10m", "temperature_2m", "irradiance"];
        if with_coords {
            header.extend(["latitude", "longitude"]);
        }
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let mut rows = Vec::with_capacity(self.n_hours() * self.cells.len());
        for (t, ts) in self.timestamps.iter().enumerate() {
            let stamp = csvio::format_timestamp(ts);
            for (c, cell) in self.cells.iter().enumerate() {
                let mut r = vec![
                    stamp.clone(),
                    cell.id.clone(),
                    num(self.wind[c][t]),
                    num(self.temperature[c][t]),
                    num(self.irradiance[c][t]),
                ];
                if with_coords {
                    r.push(opt(cell.latitude));
                    r.push(opt(cell.longitude));
                }
                rows.push(r);
            }
        }
        csvio::render(&[], &header, &rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        csvio::write_bytes(path, &self.to_csv()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Population,
    WindCapacityOnshore,
    WindCapacityOffshore,
    SolarCapacity,
}

/// Normalized spatial weights over grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightingMap {
    kind: WeightKind,
    weights: Vec<(String, f64)>,
}

#[derive(Debug, Deserialize)]
struct WeightRecord {
    cell_id: String,
    weight: f64,
}

impl WeightingMap {
    pub fn new(kind: WeightKind, raw: Vec<(String, f64)>) -> Result<Self> {
        ensure(!raw.is_empty(), || format!("{kind:?} map is empty"))?;
        let mut seen = std::collections::HashSet::new();
        for (id, w) in &raw {
            ensure(w.is_finite() && *w >= 0.0, || format!("weight of cell {id} must be finite and >= 0"))?;
            ensure(seen.insert(id.as_str()), || format!("cell {id} listed twice"))?;
        }
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        ensure(total > 0.0, || format!("{kind:?} weights sum to zero"))?;
        let weights = raw.into_iter().map(|(id, w)| (id, w / total)).collect();
        Ok(Self { kind, weights })
    }

    pub fn uniform<S: AsRef<str>>(kind: WeightKind, ids: &[S]) -> Result<Self> {
        Self::new(kind, ids.iter().map(|id| (id.as_ref().to_string(), 1.0)).collect())
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn weights(&self) -> &[(String, f64)] {
        &self.weights
    }

    pub fn read_csv(path: &Path, kind: WeightKind) -> Result<Self> {
        let rows = csvio::read_file::<WeightRecord>(path, &["cell_id", "weight"])?;
        Self::new(kind, rows.into_iter().map(|r| (r.value.cell_id, r.value.weight)).collect())
            .map_err(|e| e.context(path.display().to_string()))
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let rows: Vec<Vec<String>> = self.weights.iter().map(|(id, w)| vec![id.clone(), num(*w)]).collect();
        csvio::render(&[], &["cell_id", "weight"], &rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        csvio::write_bytes(path, &self.to_csv()?)
    }
}

pub const DEFAULT_SHEAR_EXPONENT: f64 = 1.0 / 7.0;
pub const DEFAULT_REFERENCE_HEIGHT_M: f64 = 10.0;
pub const ONSHORE_HUB_HEIGHT_M: f64 = 58.9;
pub const OFFSHORE_HUB_HEIGHT_M: f64 = 85.5;

/// Piecewise-linear turbine power curve at hub height.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    speeds: Vec<f64>,
    cf: Vec<f64>,
    pub hub_height_m: f64,
    pub reference_height_m: f64,
    pub shear_exponent: f64,
}

#[derive(Debug, Deserialize)]
struct CurveRecord {
    wind_speed: f64,
    cf: f64,
}

impl PowerCurve {
    pub fn new(
        points: Vec<(f64, f64)>,
        hub_height_m: f64,
        reference_height_m: f64,
        shear_exponent: f64,
    ) -> Result<Self> {
        ensure(points.len() >= 2, || "power curve needs at least two points".into())?;
        ensure(hub_height_m > 0.0 && hub_height_m.is_finite(), || "hub height must be > 0".into())?;
        ensure(reference_height_m > 0.0 && reference_height_m.is_finite(), || {
            "reference height must be > 0".into()
        })?;
        ensure(shear_exponent.is_finite(), || "shear exponent must be finite".into())?;
        for w in points.windows(2) {
            ensure(w[1].0 > w[0].0, || {
                format!("power-curve speeds not strictly increasing at {}", w[1].0)
            })?;
        }
        for (v, c) in &points {
            ensure(v.is_finite() && *v >= 0.0, || format!("invalid power-curve speed {v}"))?;
            ensure((0.0..=1.0).contains(c), || format!("power-curve cf {c} outside [0, 1]"))?;
        }
        ensure(points[0].1 == 0.0, || "power curve must start at cf = 0 (below cut-in)".into())?;
        ensure(points[points.len() - 1].1 == 0.0, || {
            "power curve must end at cf = 0 (above cut-out)".into()
        })?;
        let (speeds, cf) = points.into_iter().unzip();
        Ok(Self {
            speeds,
            cf,
            hub_height_m,
            reference_height_m,
            shear_exponent,
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.speeds.iter().copied().zip(self.cf.iter().copied())
    }

    /// Power-law extrapolation from reference to hub height.
    pub fn hub_speed(&self, v_ref: f64) -> f64 {
        v_ref * (self.hub_height_m / self.reference_height_m).powf(self.shear_exponent)
    }

    /// Capacity factor for a hub-height wind speed.
    pub fn cf_at_hub(&self, v: f64) -> f64 {
        let last = self.speeds.len() - 1;
        if !(v >= self.speeds[0] && v <= self.speeds[last]) {
            return 0.0;
        }
        let j = self.speeds.partition_point(|s| *s <= v);
        if j == 0 {
            return self.cf[0];
        }
        if j > last {
            return self.cf[last];
        }
        let (v0, v1) = (self.speeds[j - 1], self.speeds[j]);
        let w = (v - v0) / (v1 - v0);
        (self.cf[j - 1] + w * (self.cf[j] - self.cf[j - 1])).clamp(0.0, 1.0)
    }

    /// Capacity factor for a reference-height wind speed.
    pub fn cf(&self, v_ref: f64) -> f64 {
        self.cf_at_hub(self.hub_speed(v_ref))
    }

    /// Parses `# key: value` metadata lines followed by a `wind_speed,cf` table.
    /// Other comment lines are ignored.
    pub fn from_csv_str(label: &Path, text: &str) -> Result<Self> {
        let mut meta = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let Some(rest) = line.trim_start().strip_prefix('#') else {
                continue;
            };
            let Some((k, v)) = rest.split_once(':') else {
                continue;
            };
            if !["hub_height", "reference_height", "shear_exponent"].contains(&k.trim()) {
                continue;
            }
            let value: f64 = v
                .trim()
                .parse()
                .map_err(|_| schema_error(label, i + 1, k.trim(), format!("bad metadata value `{}`", v.trim())))?;
            meta.insert(k.trim().to_string(), value);
        }
        let hub = *meta
            .get("hub_height")
            .ok_or_else(|| schema_error(label, 1, "hub_height", "metadata line `# hub_height: <m>` missing"))?;
        let reference = meta.get("reference_height").copied().unwrap_or(DEFAULT_REFERENCE_HEIGHT_M);
        let shear = meta.get("shear_exponent").copied().unwrap_or(DEFAULT_SHEAR_EXPONENT);
        let rows = csvio::read_rows::<CurveRecord>(label, text.as_bytes(), &["wind_speed", "cf"])?;
        let points = rows.into_iter().map(|r| (r.value.wind_speed, r.value.cf)).collect();
        Self::new(points, hub, reference, shear).map_err(|e| e.context(label.display().to_string()))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(path, &text)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let preamble = [
            format!("hub_height: {}", self.hub_height_m),
            format!("reference_height: {}", self.reference_height_m),
            format!("shear_exponent: {}", self.shear_exponent),
        ];
        let rows: Vec<Vec<String>> = self.points().map(|(v, c)| vec![num(v), num(c)]).collect();
        csvio::render(&preamble, &["wind_speed", "cf"], &rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        csvio::write_bytes(path, &self.to_csv()?)
    }

    /// Generic onshore curve shipped with the crate (a stand-in, not a
    /// manufacturer curve).
    pub fn onshore_standin() -> Self {
        Self::from_csv_str(
            Path::new("data/curves/onshore.csv"),
            include_str!("../../data/curves/onshore.csv"),
        )
        .expect("bundled onshore curve is valid")
    }

    /// Generic offshore curve shipped with the crate.
    pub fn offshore_standin() -> Self {
        Self::from_csv_str(
            Path::new("data/curves/offshore.csv"),
            include_str!("../../data/curves/offshore.csv"),
        )
        .expect("bundled offshore curve is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn hours(n: usize) -> Vec<DateTime<Utc>> {
        let t0 = Utc.with_ymd_and_hms(2010, 11, 7, 0, 0, 0).unwrap();
        (0..n).map(|i| t0 + Duration::hours(i as i64)).collect()
    }

    #[test]
    fn grid_validation() {
        let ts = hours(3);
        let cells = vec![GridCell::new("a")];
        let ok = WeatherGrid::new(ts.clone(), cells.clone(), vec![vec![1.0; 3]], vec![vec![0.0; 3]], vec![vec![0.0; 3]]);
        assert!(ok.is_ok());
        let neg = WeatherGrid::new(ts.clone(), cells.clone(), vec![vec![-1.0; 3]], vec![vec![0.0; 3]], vec![vec![0.0; 3]]);
        assert!(neg.is_err());
        let mut back = ts.clone();
        back.swap(0, 1);
        assert!(WeatherGrid::new(back, cells, vec![vec![1.0; 3]], vec![vec![0.0; 3]], vec![vec![0.0; 3]]).is_err());
    }

    #[test]
    fn segments_split_on_gaps() {
        let mut ts = hours(5);
        ts[3] += Duration::hours(10);
        ts[4] += Duration::hours(10);
        let g = WeatherGrid::new(ts, vec![GridCell::new("a")], vec![vec![0.0; 5]], vec![vec![0.0; 5]], vec![vec![0.0; 5]]).unwrap();
        assert_eq!(g.segments(), vec![0..3, 3..5]);
    }

    #[test]
    fn grid_csv_round_trip() {
        let ts = hours(4);
        let cells = vec![GridCell::new("a"), GridCell::new("b")];
        let w = vec![vec![1.5, 2.0, 3.25, 0.0], vec![0.1, 0.2, 0.3, 0.4]];
        let t = vec![vec![-1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0, 8.125]];
        let i = vec![vec![0.0; 4], vec![10.0, 0.0, 0.0, 250.0]];
        let g = WeatherGrid::new(ts, cells, w, t, i).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("grid.csv");
        g.write_csv(&p).unwrap();
        assert_eq!(WeatherGrid::read_csv(&p).unwrap(), g);
    }

    #[test]
    fn weights_normalize() {
        let m = WeightingMap::new(WeightKind::Population, vec![("a".into(), 1.0), ("b".into(), 3.0)]).unwrap();
        assert_eq!(m.weights()[0].1, 0.25);
        assert_eq!(m.weights()[1].1, 0.75);
        assert!(WeightingMap::new(WeightKind::Population, vec![("a".into(), -1.0)]).is_err());
        assert!(WeightingMap::new(WeightKind::Population, vec![("a".into(), 0.0)]).is_err());
    }

    #[test]
    fn bundled_curves_load() {
        let on = PowerCurve::onshore_standin();
        let off = PowerCurve::offshore_standin();
        assert_eq!(on.hub_height_m, ONSHORE_HUB_HEIGHT_M);
        assert_eq!(off.hub_height_m, OFFSHORE_HUB_HEIGHT_M);
        assert_eq!(on.shear_exponent, DEFAULT_SHEAR_EXPONENT);
        assert_eq!(on.cf_at_hub(1.0), 0.0);
        assert_eq!(on.cf_at_hub(15.0), 1.0);
        assert_eq!(on.cf_at_hub(30.0), 0.0);
    }

    #[test]
    fn curve_interpolates_linearly() {
        let c = PowerCurve::new(vec![(0.0, 0.0), (4.0, 0.0), (12.0, 1.0), (25.0, 1.0), (25.5, 0.0)], 10.0, 10.0, 0.0).unwrap();
        assert!((c.cf(8.0) - 0.5).abs() < 1e-15);
        assert_eq!(c.cf(25.0), 1.0);
        assert!(c.cf(f64::NAN) == 0.0);
        assert!(PowerCurve::new(vec![(0.0, 0.0), (0.0, 0.0)], 10.0, 10.0, 0.1).is_err());
        assert!(PowerCurve::new(vec![(0.0, 0.0), (1.0, 1.0)], 10.0, 10.0, 0.1).is_err());
    }

    #[test]
    fn curve_csv_round_trip() {
        let on = PowerCurve::onshore_standin();
        let text = String::from_utf8(on.to_csv().unwrap()).unwrap();
        assert_eq!(PowerCurve::from_csv_str(Path::new("x"), &text).unwrap(), on);
        let missing = "wind_speed,cf\n0,0\n1,0\n";
        assert!(matches!(PowerCurve::from_csv_str(Path::new("x"), missing), Err(Error::Schema { .. })));
    }
}
