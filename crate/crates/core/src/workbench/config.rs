//! Study configuration: a single JSON document, validated before any work.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::hindcast::HindcastSettings;
use super::synthetic::SyntheticSpec;
use crate::adequacy::{AdequacySettings, DEFAULT_PEAK_TRIALS, DEFAULT_TARGET_LOLE_H};
use crate::covariates::CovariateSettings;
use crate::distcalc::{FleetSpec, GeneratingUnit, Interconnector, DEFAULT_STEP_MW};
use crate::error::{ensure, Error, Result};
use crate::heatmodel::{HeatProfile, DEFAULT_COP, DEFAULT_F_DOM, DEFAULT_G_HW_GW};
use crate::lasso::FitConfig;
use crate::season::SeasonRule;

pub const DEFAULT_CONE_GBP_M_PER_GW_YR: f64 = 49.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default)]
    pub seed: u64,
    /// Bundle directory; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub data: DataSource,
    #[serde(default)]
    pub season: SeasonRule,
    #[serde(default)]
    pub covariates: CovariateSettings,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default = "default_fleet")]
    pub fleet: FleetSpec,
    #[serde(default = "default_step")]
    pub step_mw: f64,
    #[serde(default)]
    pub installed: InstalledCapacity,
    #[serde(default)]
    pub heat: HeatSettings,
    #[serde(default)]
    pub hindcast: HindcastSettings,
    #[serde(default)]
    pub adequacy: AdequacyConfig,
    #[serde(default)]
    pub cost: CostSettings,
    /// Directory relative input and output paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    Files(DataFiles),
}

/// Input files. Weight files hold `cell_id,weight`; curves default to the
/// bundled stand-ins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFiles {
    pub grid: PathBuf,
    pub population_weights: PathBuf,
    pub onshore_weights: PathBuf,
    pub offshore_weights: PathBuf,
    pub solar_weights: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onshore_curve: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offshore_curve: Option<PathBuf>,
    pub demand: PathBuf,
    pub gas: PathBuf,
    /// Observed renewable output; derived from capacity factors when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renewables: Option<PathBuf>,
    /// 24-row `hour,adjustment_gw` file added to electrical demand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand_adjustment: Option<PathBuf>,
}

impl DataFiles {
    /// Copy with relative paths joined onto `base`.
    pub fn resolved(&self, base: &Path) -> Self {
        let mut out = self.clone();
        out.resolve(base);
        out
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [
            &mut self.grid,
            &mut self.population_weights,
            &mut self.onshore_weights,
            &mut self.offshore_weights,
            &mut self.solar_weights,
            &mut self.demand,
            &mut self.gas,
        ] {
            fix(p);
        }
        for p in [
            &mut self.onshore_curve,
            &mut self.offshore_curve,
            &mut self.renewables,
            &mut self.demand_adjustment,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }
}

/// Installed renewable capacity for output hindcasts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InstalledCapacity {
    pub onshore_gw: f64,
    pub offshore_gw: f64,
    pub solar_gw: f64,
}

impl Default for InstalledCapacity {
    fn default() -> Self {
        Self {
            onshore_gw: 14.0,
            offshore_gw: 12.0,
            solar_gw: 13.0,
        }
    }
}

impl InstalledCapacity {
    pub fn validate(&self) -> Result<()> {
        ensure(
            [self.onshore_gw, self.offshore_gw, self.solar_gw]
                .iter()
                .all(|v| v.is_finite() && *v >= 0.0),
            || "installed capacities must be non-negative".into(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatSettings {
    /// Bundled profile names or paths to `hour,h` CSV files.
    pub profiles: Vec<String>,
    pub cops: Vec<f64>,
    pub installations: f64,
    pub customers: f64,
    /// Overrides `installations / customers` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uptake: Option<f64>,
    pub f_dom: f64,
    pub g_hw_gw: f64,
    pub implicit: bool,
}

impl Default for HeatSettings {
    fn default() -> Self {
        Self {
            profiles: HeatProfile::BUNDLED.iter().map(|s| s.to_string()).collect(),
            cops: vec![1.5, DEFAULT_COP, 2.8],
            installations: 4.0e6,
            customers: 23.4e6,
            uptake: None,
            f_dom: DEFAULT_F_DOM,
            g_hw_gw: DEFAULT_G_HW_GW,
            implicit: true,
        }
    }
}

impl HeatSettings {
    pub fn uptake(&self) -> Result<f64> {
        match self.uptake {
            Some(u) => {
                ensure((0.0..=1.0).contains(&u), || format!("uptake {u} outside [0, 1]"))?;
                Ok(u)
            }
            None => crate::heatmodel::uptake_from_installations(self.installations, self.customers),
        }
    }

    pub fn load_profiles(&self, base: &Path) -> Result<Vec<HeatProfile>> {
        self.profiles
            .iter()
            .map(|p| match HeatProfile::bundled(p) {
                Some(profile) => Ok(profile),
                None => {
                    let path = if Path::new(p).is_relative() { base.join(p) } else { PathBuf::from(p) };
                    HeatProfile::read_csv(&path)
                }
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.profiles.is_empty(), || "heat.profiles is empty".into())?;
        ensure(!self.cops.is_empty(), || "heat.cops is empty".into())?;
        ensure(self.cops.iter().all(|c| c.is_finite() && *c > 0.0), || "every COP must be > 0".into())?;
        let mut seen = self.profiles.clone();
        seen.sort();
        seen.dedup();
        ensure(seen.len() == self.profiles.len(), || "heat.profiles lists a profile twice".into())?;
        ensure(self.f_dom.is_finite() && (0.0..=1.0).contains(&self.f_dom), || "f_dom outside [0, 1]".into())?;
        ensure(self.g_hw_gw.is_finite() && self.g_hw_gw >= 0.0, || "g_hw_gw must be non-negative".into())?;
        self.uptake().map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdequacyConfig {
    pub target_lole_h: f64,
    /// Defaults to the length of the configured season.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub season_days: Option<u32>,
    pub peak_trials: usize,
    pub conditional_winters: bool,
}

impl Default for AdequacyConfig {
    fn default() -> Self {
        Self {
            target_lole_h: DEFAULT_TARGET_LOLE_H,
            season_days: None,
            peak_trials: DEFAULT_PEAK_TRIALS,
            conditional_winters: true,
        }
    }
}

impl AdequacyConfig {
    pub fn resolve(&self, season: &SeasonRule) -> AdequacySettings {
        AdequacySettings {
            target_lole_h: self.target_lole_h,
            season_days: self.season_days.unwrap_or_else(|| season.season_days()),
            peak_trials: self.peak_trials,
            conditional_winters: self.conditional_winters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostSettings {
    pub cone_gbp_m_per_gw_yr: f64,
    pub years: f64,
    /// Explicit/implicit pair whose bias is the headline cost.
    pub reference_profile: String,
    pub reference_cop: f64,
}

impl Default for CostSettings {
    fn default() -> Self {
        Self {
            cone_gbp_m_per_gw_yr: DEFAULT_CONE_GBP_M_PER_GW_YR,
            years: 10.0,
            reference_profile: "central".into(),
            reference_cop: DEFAULT_COP,
        }
    }
}

fn default_step() -> f64 {
    DEFAULT_STEP_MW
}

/// A GB-sized thermal fleet with uniform interconnector imports.
pub fn default_fleet() -> FleetSpec {
    let unit = |name: &str, capacity_mw: f64, availability: f64, count: usize| GeneratingUnit {
        name: Some(name.into()),
        capacity_mw,
        availability,
        count,
    };
    let ic = |name: &str, capacity_mw: f64, cf_low: f64, cf_high: f64| Interconnector {
        name: Some(name.into()),
        capacity_mw,
        cf_low,
        cf_high,
    };
    FleetSpec {
        units: vec![
            unit("nuclear", 1100.0, 0.85, 7),
            unit("ccgt", 450.0, 0.87, 62),
            unit("coal", 500.0, 0.86, 4),
            unit("biomass", 650.0, 0.88, 4),
            unit("pumped_storage", 450.0, 0.97, 4),
            unit("ocgt_recip", 100.0, 0.94, 34),
            unit("hydro", 50.0, 0.91, 20),
        ],
        interconnectors: vec![
            ic("france", 3000.0, 0.4, 1.0),
            ic("netherlands", 1000.0, 0.3, 0.9),
            ic("belgium", 1000.0, 0.3, 0.9),
            ic("norway", 1400.0, 0.5, 1.0),
            ic("ireland", 1000.0, 0.0, 0.5),
        ],
    }
}

impl StudyConfig {
    /// Parses and validates a config file, resolving relative data paths
    /// against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text).map_err(|e| e.context(format!("config {}", path.display())))?;
        cfg.base_dir = path.parent().unwrap_or(Path::new("")).to_path_buf();
        Ok(cfg)
    }

    /// Bundle directory resolved against the config's directory.
    pub fn resolved_output_dir(&self) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|p| self.base_dir.join(p))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The default synthetic study.
    pub fn synthetic_default() -> Self {
        Self {
            seed: 7,
            output_dir: None,
            data: DataSource::Synthetic(SyntheticSpec::default()),
            season: SeasonRule::default(),
            covariates: CovariateSettings::default(),
            fit: FitConfig::default(),
            fleet: default_fleet(),
            step_mw: DEFAULT_STEP_MW,
            installed: InstalledCapacity::default(),
            heat: HeatSettings::default(),
            hindcast: HindcastSettings::default(),
            adequacy: AdequacyConfig::default(),
            cost: CostSettings::default(),
            base_dir: PathBuf::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tag = |section: &'static str| move |e: Error| e.context(section);
        if let DataSource::Synthetic(spec) = &self.data {
            spec.validate().map_err(tag("data.synthetic"))?;
        }
        self.season.validate().map_err(tag("season"))?;
        self.covariates.validate().map_err(tag("covariates"))?;
        self.fit.validate().map_err(tag("fit"))?;
        self.fleet.validate().map_err(tag("fleet"))?;
        ensure(self.fleet.unit_count() + self.fleet.interconnectors.len() > 0, || "fleet is empty".into())
            .map_err(tag("fleet"))?;
        ensure(self.step_mw > 0.0 && self.step_mw.is_finite(), || "step_mw must be > 0".into())
            .map_err(tag("step_mw"))?;
        self.installed.validate().map_err(tag("installed"))?;
        self.heat.validate().map_err(tag("heat"))?;
        self.adequacy.resolve(&self.season).validate().map_err(tag("adequacy"))?;
        ensure(
            self.cost.cone_gbp_m_per_gw_yr.is_finite() && self.cost.years.is_finite() && self.cost.years >= 0.0,
            || "cost settings must be finite".into(),
        )
        .map_err(tag("cost"))
    }

    /// Hex SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn digest(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    /// Header lines stamped onto every CSV output.
    pub fn preamble(&self) -> Vec<String> {
        vec![format!("config_digest={}, seed={}", self.digest(), self.seed)]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
