pub mod adequacy;
pub mod covariates;
mod csvio;
pub mod distcalc;
pub mod error;
pub mod heatmodel;
pub mod lasso;
pub mod season;
pub mod workbench;

pub use error::{Error, Result};
