//! Winter-season calendar and day-structured hourly series.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

pub const HOURS: usize = 24;

/// A winter day: `winter` is the calendar year in which the season starts
/// (2010 for the 2010/11 winter); `day` counts included days from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DayKey {
    pub winter: i32,
    pub day: u32,
}

/// Peak-season definition: a run of whole weeks starting on the first given
/// weekday of a month, minus a fixed holiday window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeasonRule {
    pub start_month: u32,
    pub weeks: u32,
    /// Month and day of the first excluded day.
    pub exclusion_month: u32,
    pub exclusion_day: u32,
    pub exclusion_days: u32,
}

impl Default for SeasonRule {
    fn default() -> Self {
        Self {
            start_month: 11,
            weeks: 20,
            exclusion_month: 12,
            exclusion_day: 21,
            exclusion_days: 14,
        }
    }
}

impl SeasonRule {
    pub fn validate(&self) -> Result<()> {
        ensure((1..=12).contains(&self.start_month), || {
            format!("season start month {} out of range", self.start_month)
        })?;
        ensure(self.weeks > 0 && self.weeks <= 52, || {
            format!("season length of {} weeks out of range", self.weeks)
        })?;
        ensure(
            NaiveDate::from_ymd_opt(2001, self.exclusion_month, self.exclusion_day).is_some(),
            || "invalid exclusion date".to_string(),
        )?;
        Ok(())
    }

    /// First Sunday of the start month in `winter`.
    pub fn season_start(&self, winter: i32) -> NaiveDate {
        let first = NaiveDate::from_ymd_opt(winter, self.start_month, 1).expect("valid month");
        let offset = (7 - first.weekday().num_days_from_sunday()) % 7;
        first + Duration::days(offset as i64)
    }

    fn exclusion(&self, winter: i32) -> (NaiveDate, NaiveDate) {
        let start = self.season_start(winter);
        let mut year = winter;
        // The holiday window falls in the season's own span.
        let mut ex = NaiveDate::from_ymd_opt(year, self.exclusion_month, self.exclusion_day).expect("valid date");
        if ex < start {
            year += 1;
            ex = NaiveDate::from_ymd_opt(year, self.exclusion_month, self.exclusion_day).expect("valid date");
        }
        (ex, ex + Duration::days(self.exclusion_days as i64))
    }

    /// Included dates of one winter, in order.
    pub fn dates(&self, winter: i32) -> Vec<NaiveDate> {
        let start = self.season_start(winter);
        let (ex_lo, ex_hi) = self.exclusion(winter);
        (0..self.weeks as i64 * 7)
            .map(|d| start + Duration::days(d))
            .filter(|d| !(ex_lo <= *d && *d < ex_hi))
            .collect()
    }

    /// Number of included days in a season.
    pub fn season_days(&self) -> u32 {
        self.dates(2001).len() as u32
    }

    /// Winter membership of a calendar date.
    pub fn classify(&self, date: NaiveDate) -> Option<DayKey> {
        for winter in [date.year() - 1, date.year()] {
            let start = self.season_start(winter);
            let end = start + Duration::days(self.weeks as i64 * 7);
            if date < start || date >= end {
                continue;
            }
            let (ex_lo, ex_hi) = self.exclusion(winter);
            if ex_lo <= date && date < ex_hi {
                return None;
            }
            let mut day = (date - start).num_days() as u32;
            if date >= ex_hi {
                day -= (ex_hi - ex_lo).num_days() as u32;
            }
            return Some(DayKey { winter, day });
        }
        None
    }

    pub fn date_of(&self, key: DayKey) -> Option<NaiveDate> {
        self.dates(key.winter).get(key.day as usize).copied()
    }
}

pub fn weekday_index(date: NaiveDate) -> usize {
    date.weekday().num_days_from_monday() as usize
}

pub const WEEKDAYS: [Weekday; 7] = [
    Weekday::Mon,
    Weekday::Tue,
    Weekday::Wed,
    Weekday::Thu,
    Weekday::Fri,
    Weekday::Sat,
    Weekday::Sun,
];

/// Hourly values grouped into whole days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DayBlocks {
    keys: Vec<DayKey>,
    values: Vec<[f64; HOURS]>,
}

impl DayBlocks {
    pub fn new(keys: Vec<DayKey>, values: Vec<[f64; HOURS]>) -> Result<Self> {
        ensure(keys.len() == values.len(), || {
            format!("{} day keys for {} day blocks", keys.len(), values.len())
        })?;
        if let Some(i) = values.iter().position(|d| d.iter().any(|v| !v.is_finite())) {
            return Err(Error::validation(format!(
                "non-finite value in day {:?}",
                keys[i]
            )));
        }
        Ok(Self { keys, values })
    }

    /// Builds from a flat day-major hourly series.
    pub fn from_flat(keys: Vec<DayKey>, flat: &[f64]) -> Result<Self> {
        ensure(flat.len() == keys.len() * HOURS, || {
            format!("{} hourly values do not fill {} days", flat.len(), keys.len())
        })?;
        let values = flat
            .chunks_exact(HOURS)
            .map(|c| c.try_into().expect("chunk of 24"))
            .collect();
        Self::new(keys, values)
    }

    pub fn keys(&self) -> &[DayKey] {
        &self.keys
    }

    pub fn days(&self) -> &[[f64; HOURS]] {
        &self.values
    }

    pub fn n_days(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn flat(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flat_map(|d| d.iter().copied())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.flat().collect()
    }

    pub fn daily_max(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|d| d.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect()
    }

    pub fn max(&self) -> f64 {
        self.flat().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.flat().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.flat().sum::<f64>() / (self.n_days() * HOURS) as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            keys: self.keys.clone(),
            values: self.values.iter().map(|d| d.map(&f)).collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        self.map(|v| k * v)
    }

    /// Pointwise combination of two series over identical days.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure(self.keys == other.keys, || {
            "day blocks cover different days".to_string()
        })?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| std::array::from_fn(|h| f(a[h], b[h])))
            .collect();
        Ok(Self {
            keys: self.keys.clone(),
            values,
        })
    }

    pub fn winters(&self) -> Vec<i32> {
        let mut w: Vec<i32> = self.keys.iter().map(|k| k.winter).collect();
        w.dedup();
        w.sort_unstable();
        w.dedup();
        w
    }

    pub fn restrict(&self, keep: impl Fn(&DayKey) -> bool) -> Self {
        let (keys, values) = self
            .keys
            .iter()
            .zip(&self.values)
            .filter(|(k, _)| keep(k))
            .map(|(k, v)| (*k, *v))
            .unzip();
        Self { keys, values }
    }

    pub fn winter(&self, winter: i32) -> Self {
        self.restrict(|k| k.winter == winter)
    }

    /// Mean value at each hour of the day.
    pub fn hourly_mean(&self) -> [f64; HOURS] {
        let n = self.n_days().max(1) as f64;
        std::array::from_fn(|h| self.values.iter().map(|d| d[h]).sum::<f64>() / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn season_starts_on_first_sunday_of_november() {
        let rule = SeasonRule::default();
        assert_eq!(rule.season_start(2010), NaiveDate::from_ymd_opt(2010, 11, 7).unwrap());
        assert_eq!(rule.season_start(2020), NaiveDate::from_ymd_opt(2020, 11, 1).unwrap());
        for w in 1990..2030 {
            assert_eq!(rule.season_start(w).weekday(), Weekday::Sun);
        }
    }

    #[test]
    fn season_length_excludes_christmas_fortnight() {
        let rule = SeasonRule::default();
        assert_eq!(rule.season_days(), 126);
        for w in 1990..2030 {
            let dates = rule.dates(w);
            assert_eq!(dates.len(), 126);
            let xmas = NaiveDate::from_ymd_opt(w, 12, 25).unwrap();
            assert!(!dates.contains(&xmas));
            assert!(dates.contains(&NaiveDate::from_ymd_opt(w, 12, 20).unwrap()));
            assert!(dates.contains(&NaiveDate::from_ymd_opt(w + 1, 1, 4).unwrap()));
        }
    }

    #[test]
    fn classify_inverts_dates() {
        let rule = SeasonRule::default();
        for w in [2010, 2013, 2019] {
            for (i, d) in rule.dates(w).into_iter().enumerate() {
                assert_eq!(rule.classify(d), Some(DayKey { winter: w, day: i as u32 }));
                assert_eq!(rule.date_of(DayKey { winter: w, day: i as u32 }), Some(d));
            }
        }
        assert_eq!(rule.classify(NaiveDate::from_ymd_opt(2010, 7, 1).unwrap()), None);
        assert_eq!(rule.classify(NaiveDate::from_ymd_opt(2010, 12, 28).unwrap()), None);
        assert_eq!(rule.classify(NaiveDate::from_ymd_opt(2010, 11, 6).unwrap()), None);
    }

    #[test]
    fn day_blocks_basics() {
        let keys = vec![DayKey { winter: 1, day: 0 }, DayKey { winter: 2, day: 0 }];
        let flat: Vec<f64> = (0..48).map(|v| v as f64).collect();
        let b = DayBlocks::from_flat(keys, &flat).unwrap();
        assert_eq!(b.daily_max(), vec![23.0, 47.0]);
        assert_eq!(b.winter(2).n_days(), 1);
        assert_eq!(b.scaled(2.0).max(), 94.0);
        assert_eq!(b.winters(), vec![1, 2]);
        assert!(DayBlocks::from_flat(vec![], &[1.0]).is_err());
    }
}
