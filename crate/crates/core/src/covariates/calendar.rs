//! Calendar covariates: weekday dummies, annual harmonics, sunset time.

use std::f64::consts::PI;

use chrono::{DateTime, Datelike, NaiveDate, Timelike, Utc};

use crate::season::weekday_index;

pub const HARMONICS: usize = 3;
pub const YEAR_DAYS: f64 = 365.25;
pub const DEFAULT_REFERENCE_LATITUDE_DEG: f64 = 53.0;

/// Zero-based day of year (1 January is 0).
pub fn day_of_year(date: NaiveDate) -> f64 {
    date.ordinal0() as f64
}

/// Monday-first 0/1 dummies.
pub fn weekday_binaries(date: NaiveDate) -> [f64; 7] {
    let mut out = [0.0; 7];
    out[weekday_index(date)] = 1.0;
    out
}

/// `[cos 1, sin 1, cos 2, sin 2, cos 3, sin 3]` of the annual cycle at day `d`.
pub fn harmonics(d: f64) -> [f64; 2 * HARMONICS] {
    let mut out = [0.0; 2 * HARMONICS];
    for i in 0..HARMONICS {
        let phase = 2.0 * PI * (i + 1) as f64 * d / YEAR_DAYS;
        out[2 * i] = phase.cos();
        out[2 * i + 1] = phase.sin();
    }
    out
}

/// Solar declination in radians.
pub fn declination(date: NaiveDate) -> f64 {
    let n = day_of_year(date);
    -(23.44f64.to_radians()) * (2.0 * PI / 365.0 * (n + 10.0)).cos()
}

/// Sunset in hours of local solar time at the reference meridian.
pub fn sunset_hour(date: NaiveDate, latitude_deg: f64) -> f64 {
    let phi = latitude_deg.to_radians();
    let cos_w = (-phi.tan() * declination(date).tan()).clamp(-1.0, 1.0);
    12.0 + cos_w.acos().to_degrees() / 15.0
}

/// Calendar columns for one hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalendarRow {
    pub weekday: [f64; 7],
    pub harmonics: [f64; 2 * HARMONICS],
    pub sunset: f64,
    pub linear: f64,
}

/// Calendar covariates for each timestamp; `t_lin` counts hours since `origin`.
pub fn calendar_covariates(
    timestamps: &[DateTime<Utc>],
    latitude_deg: f64,
    origin: DateTime<Utc>,
) -> Vec<CalendarRow> {
    timestamps
        .iter()
        .map(|t| {
            let date = t.date_naive();
            CalendarRow {
                weekday: weekday_binaries(date),
                harmonics: harmonics(day_of_year(date)),
                sunset: sunset_hour(date, latitude_deg),
                linear: (*t - origin).num_hours() as f64,
            }
        })
        .collect()
}

pub fn hour_of_day(t: &DateTime<Utc>) -> usize {
    t.hour() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn saturday_dummy() {
        let sat = NaiveDate::from_ymd_opt(2010, 11, 13).unwrap();
        assert_eq!(weekday_binaries(sat), [0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn harmonics_at_day_zero() {
        let h = harmonics(day_of_year(NaiveDate::from_ymd_opt(2011, 1, 1).unwrap()));
        assert_eq!(h, [1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn solstice_sunset_earlier_than_equinox() {
        let sol = sunset_hour(NaiveDate::from_ymd_opt(2010, 12, 21).unwrap(), 53.0);
        let eq = sunset_hour(NaiveDate::from_ymd_opt(2011, 3, 20).unwrap(), 53.0);
        let summer = sunset_hour(NaiveDate::from_ymd_opt(2011, 6, 21).unwrap(), 53.0);
        assert!(sol < eq && eq < summer);
        assert!((eq - 18.0).abs() < 0.25, "{eq}");
        // Geometric sunset (no refraction) at 53N on the solstice.
        let w0 = (53f64.to_radians().tan() * 23.44f64.to_radians().tan()).acos().to_degrees();
        assert!((sol - (12.0 + w0 / 15.0)).abs() < 0.02, "{sol}");
    }

    #[test]
    fn linear_time_counts_hours() {
        let t0 = Utc.with_ymd_and_hms(2010, 11, 7, 0, 0, 0).unwrap();
        let ts = [t0, t0 + chrono::Duration::hours(30)];
        let rows = calendar_covariates(&ts, 53.0, t0);
        assert_eq!(rows[0].linear, 0.0);
        assert_eq!(rows[1].linear, 30.0);
        assert_eq!(rows[0].weekday[6], 1.0);
    }
}
