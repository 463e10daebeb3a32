//! Hourly weather and calendar covariates for the demand regressions.

pub mod calendar;
pub mod grid;
pub mod table;
pub mod weather;

pub use calendar::{calendar_covariates, sunset_hour, CalendarRow};
pub use grid::{Field, GridCell, PowerCurve, WeatherGrid, WeightKind, WeightingMap};
pub use table::{
    build_covariates, outturn_covariates, BuildSummary, ColumnMoments, Covariate, CovariateSettings,
    CovariateTable, Outturn, Standardization, WeatherInputs, N_COVARIATES,
};
pub use weather::{
    cold_uptick, solar_capacity_factor, trailing_mean_24h, weighted_mean, wind_capacity_factor, wind_chill,
    SolarModel,
};
