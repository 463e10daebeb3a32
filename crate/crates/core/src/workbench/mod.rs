//! Study orchestration: configuration, data preparation, hindcasts and bundles.

pub mod config;
pub mod hindcast;
pub mod ingest;
pub mod report;
pub mod study;
pub mod synthetic;

pub use config::{StudyConfig, DataSource, DataFiles, InstalledCapacity, HeatSettings, AdequacyConfig, CostSettings};
pub use hindcast::{HindcastSettings, TrendPolicy};
pub use study::{prepare_inputs, run_study, run_study_to_dir, winter_climate, StudyInputs, StudyResult};
pub use synthetic::{SyntheticSpec, SyntheticData, GroundTruth};
