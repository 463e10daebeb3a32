//! Lasso regression: solver, regularization paths, blocked cross-validation
//! and the 24-hour demand model.

pub mod cv;
pub mod design;
pub mod hourly;
pub mod solver;

pub use cv::{cross_validate, one_se_select, CvResult};
pub use design::{DesignMatrix, Moments};
pub use hourly::{fit_hourly, FitConfig, HourFit, HourlyLassoModel, SensitivityRow, SensitivityTable, PEAK_HOURS};
pub use solver::{
    alpha_grid, alpha_max, kkt_violation, lasso_fit, lasso_path, least_squares, soft_threshold, LassoFit,
    LeastSquaresFit, SolverOptions,
};
