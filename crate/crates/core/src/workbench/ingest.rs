//! Demand, gas and renewable CSVs to and from a [`WinterDataset`].
//!
//! Timestamps are UTC, so every day has exactly 24 hours. Rows outside the
//! peak season are dropped and counted.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{NaiveDate, Timelike};
use serde::{Deserialize, Serialize};

use crate::csvio::{self, format_timestamp, num, parse_date, parse_timestamp, render, schema_error};
use crate::error::{Error, Result};
use crate::heatmodel::{DemandDay, WinterDataset};
use crate::season::{DayBlocks, DayKey, SeasonRule, HOURS};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub days: usize,
    pub demand_rows_dropped: usize,
    pub gas_rows_dropped: usize,
    pub renewable_rows_dropped: usize,
}

#[derive(Deserialize)]
struct DemandRecord {
    timestamp: String,
    e_gw: f64,
}

#[derive(Deserialize)]
struct RenewableRecord {
    timestamp: String,
    y_gw: f64,
}

#[derive(Deserialize)]
struct GasRecord {
    date: String,
    g_ndm_gw: f64,
}

#[derive(Deserialize)]
struct AdjustmentRecord {
    hour: usize,
    adjustment_gw: f64,
}

type HourlyDays = BTreeMap<NaiveDate, (DayKey, [Option<f64>; HOURS])>;

/// Groups `(line, timestamp, value)` rows into in-season days.
fn group_hourly(path: &Path, column: &str, rows: Vec<(usize, String, f64)>, season: &SeasonRule) -> Result<(HourlyDays, usize)> {
    let mut days: HourlyDays = BTreeMap::new();
    let mut dropped = 0;
    for (line, stamp, value) in rows {
        let t = parse_timestamp(&stamp).map_err(|m| schema_error(path, line, "timestamp", m))?;
        if t.minute() != 0 || t.second() != 0 {
            return Err(schema_error(path, line, "timestamp", format!("{stamp} is not on a whole hour")));
        }
        if !value.is_finite() {
            return Err(schema_error(path, line, column, "value is not finite"));
        }
        let date = t.date_naive();
        let Some(key) = season.classify(date) else {
            dropped += 1;
            continue;
        };
        let slot = &mut days.entry(date).or_insert((key, [None; HOURS])).1[t.hour() as usize];
        if slot.is_some() {
            return Err(schema_error(path, line, "timestamp", format!("{stamp} appears twice")));
        }
        *slot = Some(value);
    }
    for (date, (key, hours)) in &days {
        let missing: Vec<String> = (0..HOURS).filter(|h| hours[*h].is_none()).map(|h| h.to_string()).collect();
        if !missing.is_empty() {
            return Err(Error::validation(format!(
                "{}: day {date} (winter {}, day {}) is missing hour(s) {}",
                path.display(),
                key.winter,
                key.day,
                missing.join(", ")
            )));
        }
    }
    Ok((days, dropped))
}

fn complete(hours: &[Option<f64>; HOURS]) -> [f64; HOURS] {
    hours.map(|v| v.expect("checked complete"))
}

pub fn read_demand(path: &Path, season: &SeasonRule) -> Result<(HourlyDays, usize)> {
    let rows = csvio::read_file::<DemandRecord>(path, &["timestamp", "e_gw"])?
        .into_iter()
        .map(|r| (r.line, r.value.timestamp, r.value.e_gw))
        .collect();
    group_hourly(path, "e_gw", rows, season)
}

pub fn read_renewables(path: &Path, season: &SeasonRule) -> Result<(HourlyDays, usize)> {
    let rows = csvio::read_file::<RenewableRecord>(path, &["timestamp", "y_gw"])?
        .into_iter()
        .map(|r| (r.line, r.value.timestamp, r.value.y_gw))
        .collect();
    group_hourly(path, "y_gw", rows, season)
}

pub fn read_gas(path: &Path, season: &SeasonRule) -> Result<(BTreeMap<NaiveDate, f64>, usize)> {
    let mut out = BTreeMap::new();
    let mut dropped = 0;
    for r in csvio::read_file::<GasRecord>(path, &["date", "g_ndm_gw"])? {
        let date = parse_date(&r.value.date).map_err(|m| schema_error(path, r.line, "date", m))?;
        let g = r.value.g_ndm_gw;
        if !g.is_finite() || g < 0.0 {
            return Err(schema_error(path, r.line, "g_ndm_gw", "gas demand must be finite and non-negative"));
        }
        if season.classify(date).is_none() {
            dropped += 1;
            continue;
        }
        if out.insert(date, g).is_some() {
            return Err(schema_error(path, r.line, "date", format!("{date} appears twice")));
        }
    }
    Ok((out, dropped))
}

/// Reads a 24-row `hour,adjustment_gw` file.
pub fn read_adjustment(path: &Path) -> Result<[f64; HOURS]> {
    let mut out = [f64::NAN; HOURS];
    for r in csvio::read_file::<AdjustmentRecord>(path, &["hour", "adjustment_gw"])? {
        let AdjustmentRecord { hour, adjustment_gw } = r.value;
        if hour >= HOURS || !out[hour].is_nan() {
            return Err(schema_error(path, r.line, "hour", format!("hour {hour} out of range or repeated")));
        }
        if !adjustment_gw.is_finite() {
            return Err(schema_error(path, r.line, "adjustment_gw", "value is not finite"));
        }
        out[hour] = adjustment_gw;
    }
    if let Some(h) = out.iter().position(|v| v.is_nan()) {
        return Err(Error::validation(format!("{}: no adjustment for hour {h}", path.display())));
    }
    Ok(out)
}

/// Paths of the three dataset files.
#[derive(Debug, Clone, Copy)]
pub struct DatasetFiles<'a> {
    pub demand: &'a Path,
    pub gas: &'a Path,
    pub renewables: Option<&'a Path>,
}

/// Builds a dataset from CSVs. Renewables fall back to `derived_y` (for
/// example capacity-factor output) when no file is given.
pub fn ingest(
    files: DatasetFiles<'_>,
    season: &SeasonRule,
    derived_y: Option<&DayBlocks>,
    adjustment: Option<&[f64; HOURS]>,
) -> Result<(WinterDataset, IngestReport)> {
    season.validate()?;
    let (demand, demand_dropped) = read_demand(files.demand, season)?;
    let (gas, gas_dropped) = read_gas(files.gas, season)?;
    let (renewables, renewable_dropped) = match files.renewables {
        Some(p) => {
            let (r, d) = read_renewables(p, season)?;
            (Some(r), d)
        }
        None => (None, 0),
    };
    let mut days = Vec::with_capacity(demand.len());
    for (date, (key, hours)) in &demand {
        let g = *gas.get(date).ok_or_else(|| {
            Error::validation(format!("{}: no gas demand for {date}", files.gas.display()))
        })?;
        let y_gw = match (&renewables, derived_y) {
            (Some(r), _) => complete(
                &r.get(date)
                    .ok_or_else(|| {
                        Error::validation(format!(
                            "{}: no renewable output for {date}",
                            files.renewables.expect("file given").display()
                        ))
                    })?
                    .1,
            ),
            (None, Some(y)) => {
                let i = y.keys().binary_search(key).map_err(|_| {
                    Error::validation(format!("no derived renewable output for {date}"))
                })?;
                y.days()[i]
            }
            (None, None) => return Err(Error::validation("no renewable output file or derivation given")),
        };
        let mut e_gw = complete(hours);
        if let Some(adj) = adjustment {
            for h in 0..HOURS {
                e_gw[h] += adj[h];
            }
        }
        days.push(DemandDay {
            key: *key,
            date: *date,
            e_gw,
            y_gw,
            g_ndm_gw: g,
        });
    }
    days.sort_by_key(|d| d.key);
    let dataset = WinterDataset::new(days)?;
    let report = IngestReport {
        days: dataset.n_days(),
        demand_rows_dropped: demand_dropped,
        gas_rows_dropped: gas_dropped,
        renewable_rows_dropped: renewable_dropped,
    };
    Ok((dataset, report))
}

fn hourly_csv(dataset: &WinterDataset, column: &str, value: impl Fn(&DemandDay, usize) -> f64, preamble: &[String]) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = dataset
        .days()
        .iter()
        .flat_map(|d| {
            let start = d.date.and_hms_opt(0, 0, 0).expect("midnight").and_utc();
            (0..HOURS).map(move |h| (d, h, start + chrono::Duration::hours(h as i64)))
        })
        .map(|(d, h, t)| vec![format_timestamp(&t), num(value(d, h))])
        .collect();
    render(preamble, &["timestamp", column], &rows)
}

pub fn demand_csv(dataset: &WinterDataset, preamble: &[String]) -> Result<Vec<u8>> {
    hourly_csv(dataset, "e_gw", |d, h| d.e_gw[h], preamble)
}

pub fn renewables_csv(dataset: &WinterDataset, preamble: &[String]) -> Result<Vec<u8>> {
    hourly_csv(dataset, "y_gw", |d, h| d.y_gw[h], preamble)
}

pub fn gas_csv(dataset: &WinterDataset, preamble: &[String]) -> Result<Vec<u8>> {
    let rows: Vec<Vec<String>> = dataset
        .days()
        .iter()
        .map(|d| vec![d.date.format("%Y-%m-%d").to_string(), num(d.g_ndm_gw)])
        .collect();
    render(preamble, &["date", "g_ndm_gw"], &rows)
}
