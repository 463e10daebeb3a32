//! The hourly covariate table and its standardization.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Duration, Timelike, Utc};
use serde::{Deserialize, Serialize};

use super::calendar::{calendar_covariates, DEFAULT_REFERENCE_LATITUDE_DEG};
use super::grid::{Field, PowerCurve, WeatherGrid, WeightingMap};
use super::weather::{
    cold_uptick, solar_capacity_factor, trailing_mean_segments, weighted_mean, wind_capacity_factor, wind_chill,
    SolarModel,
};
use crate::csvio::{self, num, schema_error};
use crate::error::{ensure, Error, Result};
use crate::heatmodel::WinterDataset;
use crate::season::{DayKey, SeasonRule, HOURS};

macro_rules! covariates {
    ($($variant:ident => $name:literal, $binary:literal;)*) => {
        /// One column of the covariate table.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum Covariate {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl Covariate {
            pub const ALL: [Covariate; N_COVARIATES] = [$(Covariate::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Covariate::$variant => $name,)*
                }
            }

            pub fn is_binary(self) -> bool {
                match self {
                    $(Covariate::$variant => $binary,)*
                }
            }
        }

        impl FromStr for Covariate {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok(Covariate::$variant),)*
                    other => Err(Error::validation(format!("unknown covariate `{other}`"))),
                }
            }
        }
    };
}

pub const N_COVARIATES: usize = 27;

covariates! {
    WOn => "w_on", false;
    WOff => "w_off", false;
    S => "s", false;
    SBar => "s_bar", false;
    T => "t", false;
    TBar => "t_bar", false;
    WChill => "w_chill", false;
    WChillBar => "w_chill_bar", false;
    TCold => "t_cold", false;
    TColdBar => "t_cold_bar", false;
    Mon => "t_mon", true;
    Tue => "t_tue", true;
    Wed => "t_wed", true;
    Thu => "t_thu", true;
    Fri => "t_fri", true;
    Sat => "t_sat", true;
    Sun => "t_sun", true;
    C1 => "t_prd_c1", false;
    S1 => "t_prd_s1", false;
    C2 => "t_prd_c2", false;
    S2 => "t_prd_s2", false;
    C3 => "t_prd_c3", false;
    S3 => "t_prd_s3", false;
    Sunset => "t_sunset", false;
    Lin => "t_lin", false;
    EOut => "e_out", false;
    GOut => "g_out", false;
}

impl Covariate {
    pub fn index(self) -> usize {
        self as usize
    }

    /// The 26-column model schema. One weekday dummy (Wednesday) is left out
    /// so the dummies and the intercept are not collinear.
    pub fn default_schema() -> Vec<Covariate> {
        Self::ALL.into_iter().filter(|c| *c != Covariate::Wed).collect()
    }

    /// Columns fixed per winter rather than per hour.
    pub fn is_trend(self) -> bool {
        matches!(self, Covariate::Lin | Covariate::EOut | Covariate::GOut)
    }
}

impl fmt::Display for Covariate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CovariateSettings {
    pub cold_cutoff_c: f64,
    pub wind_chill_temperature_c: f64,
    pub wind_chill_speed_ms: f64,
    pub reference_latitude_deg: f64,
    pub solar: SolarModel,
}

impl Default for CovariateSettings {
    fn default() -> Self {
        Self {
            cold_cutoff_c: 3.0,
            wind_chill_temperature_c: 16.5,
            wind_chill_speed_ms: -1.5,
            reference_latitude_deg: DEFAULT_REFERENCE_LATITUDE_DEG,
            solar: SolarModel::default(),
        }
    }
}

impl CovariateSettings {
    pub fn validate(&self) -> Result<()> {
        ensure(
            [self.cold_cutoff_c, self.wind_chill_temperature_c, self.wind_chill_speed_ms]
                .iter()
                .all(|v| v.is_finite()),
            || "covariate constants must be finite".into(),
        )?;
        ensure(self.reference_latitude_deg.abs() < 90.0, || {
            "reference latitude must lie strictly between the poles".into()
        })?;
        self.solar.validate()
    }
}

pub struct WeatherInputs<'a> {
    pub grid: &'a WeatherGrid,
    pub population: &'a WeightingMap,
    pub onshore: &'a WeightingMap,
    pub offshore: &'a WeightingMap,
    pub solar: &'a WeightingMap,
    pub onshore_curve: &'a PowerCurve,
    pub offshore_curve: &'a PowerCurve,
}

/// Row accounting from a table build.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct BuildSummary {
    pub days_kept: usize,
    pub hours_outside_season: usize,
    pub incomplete_days: usize,
}

/// Per-winter out-turn covariates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outturn {
    pub e_out_gw: f64,
    pub g_out_gw: f64,
}

/// Hourly covariates over whole winter days. Row `24·d + h` is hour `h`
/// of day `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateTable {
    keys: Vec<DayKey>,
    day_start: Vec<DateTime<Utc>>,
    rows: Vec<[f64; N_COVARIATES]>,
}

impl CovariateTable {
    pub fn new(keys: Vec<DayKey>, day_start: Vec<DateTime<Utc>>, rows: Vec<[f64; N_COVARIATES]>) -> Result<Self> {
        ensure(keys.len() == day_start.len() && rows.len() == keys.len() * HOURS, || {
            format!("covariate table shape mismatch: {} days, {} rows", keys.len(), rows.len())
        })?;
        ensure(keys.windows(2).all(|w| w[0] < w[1]), || "covariate days must be strictly ordered".into())?;
        Ok(Self { keys, day_start, rows })
    }

    pub fn keys(&self) -> &[DayKey] {
        &self.keys
    }

    pub fn day_start(&self) -> &[DateTime<Utc>] {
        &self.day_start
    }

    pub fn n_days(&self) -> usize {
        self.keys.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: usize) -> &[f64; N_COVARIATES] {
        &self.rows[r]
    }

    pub fn value(&self, r: usize, c: Covariate) -> f64 {
        self.rows[r][c.index()]
    }

    pub fn set(&mut self, r: usize, c: Covariate, v: f64) {
        self.rows[r][c.index()] = v;
    }

    pub fn column(&self, c: Covariate) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(move |r| r[c.index()])
    }

    pub fn winters(&self) -> Vec<i32> {
        let mut w: Vec<i32> = self.keys.iter().map(|k| k.winter).collect();
        w.dedup();
        w
    }

    /// Row indices of one hour of the day, restricted to days passing `keep`.
    pub fn hour_rows(&self, hour: usize, keep: impl Fn(&DayKey) -> bool) -> Vec<usize> {
        self.keys
            .iter()
            .enumerate()
            .filter(|(_, k)| keep(k))
            .map(|(d, _)| d * HOURS + hour)
            .collect()
    }

    pub fn rows_where(&self, keep: impl Fn(&DayKey) -> bool) -> Vec<usize> {
        self.keys
            .iter()
            .enumerate()
            .filter(|(_, k)| keep(k))
            .flat_map(|(d, _)| d * HOURS..(d + 1) * HOURS)
            .collect()
    }

    pub fn day_index(&self, key: DayKey) -> Option<usize> {
        self.keys.binary_search(&key).ok()
    }

    /// Sets the out-turn columns per winter; winters without an entry take
    /// `fallback` or fail.
    pub fn attach_outturn(&mut self, outturn: &BTreeMap<i32, Outturn>, fallback: Option<Outturn>) -> Result<()> {
        for d in 0..self.keys.len() {
            let w = self.keys[d].winter;
            let o = outturn
                .get(&w)
                .copied()
                .or(fallback)
                .ok_or_else(|| Error::validation(format!("no out-turn covariates for winter {w}")))?;
            for h in 0..HOURS {
                self.rows[d * HOURS + h][Covariate::EOut.index()] = o.e_out_gw;
                self.rows[d * HOURS + h][Covariate::GOut.index()] = o.g_out_gw;
            }
        }
        Ok(())
    }

    /// Returns the first non-finite entry among the given rows and columns.
    pub fn find_missing(&self, rows: &[usize], schema: &[Covariate]) -> Option<(usize, Covariate)> {
        rows.iter()
            .flat_map(|&r| schema.iter().map(move |&c| (r, c)))
            .find(|&(r, c)| !self.value(r, c).is_finite())
    }

    pub fn timestamp(&self, r: usize) -> DateTime<Utc> {
        self.day_start[r / HOURS] + Duration::hours((r % HOURS) as i64)
    }

    const FIXED_HEADER: [&'static str; 4] = ["timestamp", "winter", "day", "hour"];

    pub fn to_csv(&self, preamble: &[String]) -> Result<Vec<u8>> {
        let mut header: Vec<&str> = Self::FIXED_HEADER.to_vec();
        header.extend(Covariate::ALL.iter().map(|c| c.name()));
        let rows: Vec<Vec<String>> = (0..self.n_rows())
            .map(|r| {
                let k = self.keys[r / HOURS];
                let mut out = vec![
                    csvio::format_timestamp(&self.timestamp(r)),
                    k.winter.to_string(),
                    k.day.to_string(),
                    (r % HOURS).to_string(),
                ];
                out.extend(self.rows[r].iter().map(|v| num(*v)));
                out
            })
            .collect();
        csvio::render(preamble, &header, &rows)
    }

    pub fn write_csv(&self, path: &Path, preamble: &[String]) -> Result<()> {
        csvio::write_bytes(path, &self.to_csv(preamble)?)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
        let headers = rdr.headers()?.clone();
        let mut col_of = [usize::MAX; N_COVARIATES];
        for c in Covariate::ALL {
            col_of[c.index()] = headers
                .iter()
                .position(|h| h == c.name())
                .ok_or_else(|| schema_error(path, 1, c.name(), "required column missing from header"))?;
        }
        let fixed: Vec<usize> = Self::FIXED_HEADER
            .iter()
            .map(|name| {
                headers
                    .iter()
                    .position(|h| h == *name)
                    .ok_or_else(|| schema_error(path, 1, name, "required column missing from header"))
            })
            .collect::<Result<_>>()?;
        let mut keys = Vec::new();
        let mut day_start = Vec::new();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let field = |i: usize, name: &str| {
                rec.get(i).ok_or_else(|| schema_error(path, line, name, "missing field"))
            };
            let ts = csvio::parse_timestamp(field(fixed[0], "timestamp")?)
                .map_err(|m| schema_error(path, line, "timestamp", m))?;
            let parse_int = |i: usize, name: &str| -> Result<i64> {
                field(i, name)?
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| schema_error(path, line, name, "expected an integer"))
            };
            let key = DayKey {
                winter: parse_int(fixed[1], "winter")? as i32,
                day: parse_int(fixed[2], "day")? as u32,
            };
            let hour = parse_int(fixed[3], "hour")? as usize;
            let expect_hour = rows.len() % HOURS;
            if hour != expect_hour || ts.hour() as usize != hour {
                return Err(schema_error(
                    path,
                    line,
                    "hour",
                    format!("expected hour {expect_hour} of day {key:?}; days must be complete and in order"),
                ));
            }
            if hour == 0 {
                keys.push(key);
                day_start.push(ts);
            } else if keys.last() != Some(&key) {
                return Err(schema_error(path, line, "day", "day changes mid-block"));
            }
            let mut vals = [0.0; N_COVARIATES];
            for c in Covariate::ALL {
                let s = field(col_of[c.index()], c.name())?;
                vals[c.index()] = s
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| schema_error(path, line, c.name(), format!("expected a number, got `{s}`")))?;
            }
            rows.push(vals);
        }
        if rows.len() % HOURS != 0 {
            let k = keys.last().copied();
            return Err(schema_error(path, 0, "hour", format!("day {k:?} is incomplete")));
        }
        Self::new(keys, day_start, rows).map_err(|e| e.context(path.display().to_string()))
    }
}

/// Builds the covariate table from gridded weather. Only whole in-season
/// days with filled trailing windows are kept. Out-turn columns are NaN
/// until [`CovariateTable::attach_outturn`].
pub fn build_covariates(
    inputs: &WeatherInputs<'_>,
    settings: &CovariateSettings,
    season: &SeasonRule,
) -> Result<(CovariateTable, BuildSummary)> {
    settings.validate()?;
    season.validate()?;
    let grid = inputs.grid;
    let t = weighted_mean(grid, Field::Temperature, inputs.population)?;
    let w_pop = weighted_mean(grid, Field::WindSpeed, inputs.population)?;
    let w_on = wind_capacity_factor(grid, inputs.onshore, inputs.onshore_curve)?;
    let w_off = wind_capacity_factor(grid, inputs.offshore, inputs.offshore_curve)?;
    let s = solar_capacity_factor(grid, inputs.solar, &settings.solar)?;
    let chill: Vec<f64> = t
        .iter()
        .zip(&w_pop)
        .map(|(t, w)| wind_chill(*t, *w, settings.wind_chill_temperature_c, settings.wind_chill_speed_ms))
        .collect();
    let cold: Vec<f64> = t.iter().map(|t| cold_uptick(*t, settings.cold_cutoff_c)).collect();
    let segs = grid.segments();
    let s_bar = trailing_mean_segments(&s, &segs);
    let t_bar = trailing_mean_segments(&t, &segs);
    let chill_bar = trailing_mean_segments(&chill, &segs);
    let cold_bar = trailing_mean_segments(&cold, &segs);

    let mut summary = BuildSummary::default();
    let ts = grid.timestamps();
    // Group in-season hours into days; a day survives only if all 24 hours exist.
    let mut days: Vec<(DayKey, DateTime<Utc>, [Option<usize>; HOURS])> = Vec::new();
    for (i, stamp) in ts.iter().enumerate() {
        let Some(key) = season.classify(stamp.date_naive()) else {
            summary.hours_outside_season += 1;
            continue;
        };
        if days.last().map(|d| d.0) != Some(key) {
            let start = stamp.date_naive().and_hms_opt(0, 0, 0).expect("midnight").and_utc();
            days.push((key, start, [None; HOURS]));
        }
        days.last_mut().expect("day pushed").2[stamp.hour() as usize] = Some(i);
    }
    let mut keys = Vec::new();
    let mut starts = Vec::new();
    let mut index = Vec::new();
    for (key, start, hours) in days {
        let complete = hours
            .iter()
            .all(|h| h.is_some_and(|i| s_bar[i].is_some() && t_bar[i].is_some()));
        if complete {
            keys.push(key);
            starts.push(start);
            index.extend(hours.iter().map(|h| h.expect("complete day")));
        } else {
            summary.incomplete_days += 1;
        }
    }
    summary.days_kept = keys.len();
    ensure(!keys.is_empty(), || "no complete in-season days in the weather grid".into())?;

    let kept_ts: Vec<DateTime<Utc>> = index.iter().map(|&i| ts[i]).collect();
    let cal = calendar_covariates(&kept_ts, settings.reference_latitude_deg, kept_ts[0]);
    let rows = index
        .iter()
        .zip(&cal)
        .map(|(&i, c)| {
            let mut r = [f64::NAN; N_COVARIATES];
            use Covariate::*;
            r[WOn.index()] = w_on[i];
            r[WOff.index()] = w_off[i];
            r[S.index()] = s[i];
            r[SBar.index()] = s_bar[i].expect("window filled");
            r[T.index()] = t[i];
            r[TBar.index()] = t_bar[i].expect("window filled");
            r[WChill.index()] = chill[i];
            r[WChillBar.index()] = chill_bar[i].expect("window filled");
            r[TCold.index()] = cold[i];
            r[TColdBar.index()] = cold_bar[i].expect("window filled");
            r[Mon.index()..=Sun.index()].copy_from_slice(&c.weekday);
            r[C1.index()..=S3.index()].copy_from_slice(&c.harmonics);
            r[Sunset.index()] = c.sunset;
            r[Lin.index()] = c.linear;
            r
        })
        .collect();
    Ok((CovariateTable::new(keys, starts, rows)?, summary))
}

/// Per-winter maximum hourly electrical demand and mean daily NDM gas.
pub fn outturn_covariates(dataset: &WinterDataset) -> BTreeMap<i32, Outturn> {
    let mut acc: BTreeMap<i32, (f64, f64, usize)> = BTreeMap::new();
    for day in dataset.days() {
        let e = acc.entry(day.key.winter).or_insert((f64::NEG_INFINITY, 0.0, 0));
        e.0 = day.e_gw.iter().copied().fold(e.0, f64::max);
        e.1 += day.g_ndm_gw;
        e.2 += 1;
    }
    acc.into_iter()
        .map(|(w, (e, g, n))| {
            (
                w,
                Outturn {
                    e_out_gw: e,
                    g_out_gw: g / n as f64,
                },
            )
        })
        .collect()
}

/// Training-set location and scale of one model column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnMoments {
    pub covariate: Covariate,
    pub mean: f64,
    /// Population standard deviation for continuous columns, 1 for binaries.
    pub scale: f64,
    pub std: f64,
}

/// Column moments captured on the training rows; applied unchanged to
/// hindcast rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub columns: Vec<ColumnMoments>,
    /// Requested columns dropped because they are constant on the training rows.
    pub excluded: Vec<Covariate>,
}

impl Standardization {
    /// Fits moments over `rows`; constant columns are excluded and reported
    /// in the returned warnings.
    pub fn fit(table: &CovariateTable, rows: &[usize], schema: &[Covariate]) -> Result<(Self, Vec<String>)> {
        ensure(!rows.is_empty(), || "cannot standardize an empty row set".into())?;
        if let Some((r, c)) = table.find_missing(rows, schema) {
            return Err(Error::validation(format!(
                "covariate {c} is missing at {}",
                csvio::format_timestamp(&table.timestamp(r))
            )));
        }
        let n = rows.len() as f64;
        let mut columns = Vec::new();
        let mut excluded = Vec::new();
        let mut warnings = Vec::new();
        for &c in schema {
            let at = |r: &usize| table.value(*r, c);
            let mean = rows.iter().map(at).sum::<f64>() / n;
            let var = rows.iter().map(|r| (at(r) - mean).powi(2)).sum::<f64>() / n;
            let std = var.sqrt();
            if std <= 1e-12 * mean.abs().max(1.0) {
                excluded.push(c);
                warnings.push(format!("covariate {c} is constant on the training rows and was excluded"));
                continue;
            }
            let scale = if c.is_binary() { 1.0 } else { std };
            columns.push(ColumnMoments {
                covariate: c,
                mean,
                scale,
                std,
            });
        }
        ensure(!columns.is_empty(), || "every requested covariate is constant".into())?;
        Ok((Self { columns, excluded }, warnings))
    }

    pub fn covariates(&self) -> Vec<Covariate> {
        self.columns.iter().map(|m| m.covariate).collect()
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn transform_row(&self, table: &CovariateTable, r: usize) -> Vec<f64> {
        self.columns
            .iter()
            .map(|m| (table.value(r, m.covariate) - m.mean) / m.scale)
            .collect()
    }

    pub fn transform(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter().zip(&self.columns).map(|(x, m)| (x - m.mean) / m.scale).collect()
    }

    pub fn inverse(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.columns).map(|(z, m)| z * m.scale + m.mean).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariates::grid::{GridCell, WeightKind};
    use crate::heatmodel::DemandDay;
    use chrono::TimeZone;

    #[test]
    fn names_round_trip() {
        for c in Covariate::ALL {
            assert_eq!(c.name().parse::<Covariate>().unwrap(), c);
            assert_eq!(Covariate::ALL[c.index()], c);
        }
        assert_eq!(Covariate::default_schema().len(), 26);
        assert!(!Covariate::default_schema().contains(&Covariate::Wed));
    }

    fn table_from(values: &[(Covariate, Vec<f64>)]) -> CovariateTable {
        // One day per 24 values.
        let n = values[0].1.len();
        assert_eq!(n % HOURS, 0);
        let days = n / HOURS;
        let t0 = Utc.with_ymd_and_hms(2010, 11, 7, 0, 0, 0).unwrap();
        let keys = (0..days).map(|d| DayKey { winter: 2010, day: d as u32 }).collect();
        let starts = (0..days).map(|d| t0 + Duration::days(d as i64)).collect();
        let rows = (0..n)
            .map(|r| {
                let mut row = [0.0; N_COVARIATES];
                for (c, v) in values {
                    row[c.index()] = v[r];
                }
                row
            })
            .collect();
        CovariateTable::new(keys, starts, rows).unwrap()
    }

    #[test]
    fn standardize_examples() {
        let two: Vec<f64> = (0..24).map(|i| if i % 2 == 0 { 0.0 } else { 2.0 }).collect();
        let table = table_from(&[(Covariate::T, two), (Covariate::S, vec![5.0; 24])]);
        let rows: Vec<usize> = (0..24).collect();
        let (std, warnings) = Standardization::fit(&table, &rows, &[Covariate::T, Covariate::S]).unwrap();
        assert_eq!(std.excluded, vec![Covariate::S]);
        assert_eq!(warnings.len(), 1);
        assert_eq!(std.transform_row(&table, 0), vec![-1.0]);
        assert_eq!(std.transform_row(&table, 1), vec![1.0]);
        let back = Standardization::from_json(&std.to_json().unwrap()).unwrap();
        assert_eq!(back, std);
    }

    #[test]
    fn binaries_are_centred_only() {
        let sat: Vec<f64> = (0..48).map(|r| if r < 24 { 1.0 } else { 0.0 }).collect();
        let t: Vec<f64> = (0..48).map(|r| r as f64).collect();
        let table = table_from(&[(Covariate::Sat, sat), (Covariate::T, t)]);
        let rows: Vec<usize> = (0..48).collect();
        let (std, _) = Standardization::fit(&table, &rows, &[Covariate::Sat, Covariate::T]).unwrap();
        assert_eq!(std.columns[0].scale, 1.0);
        assert_eq!(std.transform_row(&table, 0)[0], 0.5);
        let z: Vec<Vec<f64>> = rows.iter().map(|r| std.transform_row(&table, *r)).collect();
        for j in 0..2 {
            let m = z.iter().map(|r| r[j]).sum::<f64>() / 48.0;
            assert!(m.abs() < 1e-12);
        }
        let v = z.iter().map(|r| r[1] * r[1]).sum::<f64>() / 48.0;
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outturn_examples() {
        let day = |w: i32, d: u32, e: f64, g: f64| DemandDay {
            key: DayKey { winter: w, day: d },
            date: chrono::NaiveDate::from_ymd_opt(w, 11, 10 + d).unwrap(),
            e_gw: [e; HOURS],
            y_gw: [0.0; HOURS],
            g_ndm_gw: g,
        };
        let ds = WinterDataset::new(vec![
            day(2010, 0, 10.0, 3.0),
            day(2010, 1, 20.0, 3.0),
            day(2011, 0, 30.0, 5.0),
            day(2011, 1, 40.0, 7.0),
        ])
        .unwrap();
        let o = outturn_covariates(&ds);
        assert_eq!(o[&2010], Outturn { e_out_gw: 20.0, g_out_gw: 3.0 });
        assert_eq!(o[&2011], Outturn { e_out_gw: 40.0, g_out_gw: 6.0 });
    }

    fn small_grid() -> WeatherGrid {
        // Three days either side of the season start, hourly.
        let t0 = Utc.with_ymd_and_hms(2010, 11, 5, 0, 0, 0).unwrap();
        let n = 24 * 5;
        let ts = (0..n).map(|i| t0 + Duration::hours(i as i64)).collect();
        let cells = vec![GridCell::new("a"), GridCell::new("b")];
        let temp = vec![(0..n).map(|i| 5.0 + (i % 24) as f64 * 0.1).collect(), vec![1.0; n]];
        let wind = vec![vec![6.0; n], vec![9.0; n]];
        let irr = vec![(0..n).map(|i| if (10..15).contains(&(i % 24)) { 300.0 } else { 0.0 }).collect(), vec![0.0; n]];
        WeatherGrid::new(ts, cells, wind, temp, irr).unwrap()
    }

    #[test]
    fn build_keeps_whole_season_days() {
        let grid = small_grid();
        let pop = WeightingMap::uniform(WeightKind::Population, &["a", "b"]).unwrap();
        let on = WeightingMap::uniform(WeightKind::WindCapacityOnshore, &["a"]).unwrap();
        let off = WeightingMap::uniform(WeightKind::WindCapacityOffshore, &["b"]).unwrap();
        let sol = WeightingMap::uniform(WeightKind::SolarCapacity, &["a"]).unwrap();
        let (onc, offc) = (PowerCurve::onshore_standin(), PowerCurve::offshore_standin());
        let inputs = WeatherInputs {
            grid: &grid,
            population: &pop,
            onshore: &on,
            offshore: &off,
            solar: &sol,
            onshore_curve: &onc,
            offshore_curve: &offc,
        };
        let (table, summary) = build_covariates(&inputs, &CovariateSettings::default(), &SeasonRule::default()).unwrap();
        // Season starts Sunday 7 November: days 7, 8, 9 are in season.
        assert_eq!(summary.hours_outside_season, 48);
        assert_eq!(table.n_days(), 3);
        assert_eq!(table.keys()[0], DayKey { winter: 2010, day: 0 });
        assert_eq!(table.value(0, Covariate::Sun), 1.0);
        assert_eq!(table.value(24, Covariate::Mon), 1.0);
        assert_eq!(table.value(0, Covariate::Lin), 0.0);
        assert_eq!(table.value(30, Covariate::Lin), 30.0);
        let t = table.value(5, Covariate::T);
        assert!((t - 0.5 * ((5.0 + 0.5) + 1.0)).abs() < 1e-12);
        assert_eq!(table.value(5, Covariate::TCold), (3.0 - t).max(0.0));
        assert!((table.value(0, Covariate::WChill) - (16.5 - table.value(0, Covariate::T)) * 9.0).abs() < 1e-12);
        assert!(table.value(0, Covariate::EOut).is_nan());

        let mut table = table;
        let mut o = BTreeMap::new();
        o.insert(2010, Outturn { e_out_gw: 50.0, g_out_gw: 30.0 });
        table.attach_outturn(&o, None).unwrap();
        assert!(table.find_missing(&(0..table.n_rows()).collect::<Vec<_>>(), &Covariate::ALL).is_none());

        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cov.csv");
        table.write_csv(&p, &["seed=1".into()]).unwrap();
        assert_eq!(CovariateTable::read_csv(&p).unwrap(), table);
    }
}
