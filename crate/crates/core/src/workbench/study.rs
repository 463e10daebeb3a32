//! End-to-end study: covariates, hourly fits, hindcasts and the adequacy grid.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{DataFiles, DataSource, StudyConfig};
use super::hindcast::{add_bootstrap, hindcast_table, renewable_output, residuals, training_table};
use super::ingest::{demand_csv, gas_csv, ingest, read_adjustment, renewables_csv, DatasetFiles, IngestReport};
use super::synthetic::{daily_mean, generate_synthetic, GroundTruth, SyntheticData};
use crate::adequacy::{run_scenarios, ModelKind, PeakDraws, ScenarioCell, ScenarioSet};
use crate::covariates::{
    build_covariates, BuildSummary, Covariate, CovariateTable, PowerCurve, WeatherGrid, WeatherInputs, WeightKind,
    WeightingMap,
};
use crate::csvio::{num, render};
use crate::distcalc::fleet_pmf;
use crate::error::{Error, Result};
use crate::heatmodel::{calibrate_k_peak, explicit_demand, load_duration_curve, HeatProfile, HeatScenario, WinterDataset};
use crate::lasso::{fit_hourly, HourlyLassoModel, PEAK_HOURS};
use crate::season::DayBlocks;

/// Rendered bundle files keyed by relative path.
pub type Files = BTreeMap<String, Vec<u8>>;

/// Points per exported load duration curve.
pub const LDC_POINTS: usize = 500;

/// Everything a study needs before fitting.
#[derive(Debug, Clone)]
pub struct StudyInputs {
    /// Covariates over every climate winter; out-turn columns unset.
    pub table: CovariateTable,
    pub dataset: WinterDataset,
    pub build: BuildSummary,
    pub ingest: Option<IngestReport>,
    pub truth: Option<GroundTruth>,
}

pub fn prepare_inputs(config: &StudyConfig) -> Result<StudyInputs> {
    match &config.data {
        DataSource::Synthetic(spec) => {
            let data = synthesize(config)?;
            let _ = spec;
            Ok(StudyInputs {
                table: data.table,
                dataset: data.dataset,
                build: data.summary,
                ingest: None,
                truth: Some(data.truth),
            })
        }
        DataSource::Files(files) => {
            let files = files.resolved(&config.base_dir);
            let grid = WeatherGrid::read_csv(&files.grid)?;
            let population = WeightingMap::read_csv(&files.population_weights, WeightKind::Population)?;
            let onshore = WeightingMap::read_csv(&files.onshore_weights, WeightKind::WindCapacityOnshore)?;
            let offshore = WeightingMap::read_csv(&files.offshore_weights, WeightKind::WindCapacityOffshore)?;
            let solar = WeightingMap::read_csv(&files.solar_weights, WeightKind::SolarCapacity)?;
            let onshore_curve = match &files.onshore_curve {
                Some(p) => PowerCurve::read_csv(p)?,
                None => PowerCurve::onshore_standin(),
            };
            let offshore_curve = match &files.offshore_curve {
                Some(p) => PowerCurve::read_csv(p)?,
                None => PowerCurve::offshore_standin(),
            };
            let inputs = WeatherInputs {
                grid: &grid,
                population: &population,
                onshore: &onshore,
                offshore: &offshore,
                solar: &solar,
                onshore_curve: &onshore_curve,
                offshore_curve: &offshore_curve,
            };
            let (table, build) = build_covariates(&inputs, &config.covariates, &config.season)?;
            let derived = renewable_output(&table, &config.installed, |_| true)?;
            let adjustment = files.demand_adjustment.as_deref().map(read_adjustment).transpose()?;
            let (dataset, report) = ingest(
                DatasetFiles {
                    demand: &files.demand,
                    gas: &files.gas,
                    renewables: files.renewables.as_deref(),
                },
                &config.season,
                Some(&derived),
                adjustment.as_ref(),
            )?;
            Ok(StudyInputs {
                table,
                dataset,
                build,
                ingest: Some(report),
                truth: None,
            })
        }
    }
}

/// The synthetic data behind a synthetic config.
pub fn synthesize(config: &StudyConfig) -> Result<SyntheticData> {
    match &config.data {
        DataSource::Synthetic(spec) => generate_synthetic(spec, config.seed, &config.season, &config.covariates),
        DataSource::Files(_) => Err(Error::validation("config does not describe synthetic data")),
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioFit {
    pub scenario: HeatScenario,
    pub model: HourlyLassoModel,
}

impl ScenarioFit {
    pub fn profile(&self) -> &str {
        &self.scenario.profile.name
    }

    pub fn cop(&self) -> f64 {
        self.scenario.cop
    }
}

#[derive(Debug, Clone)]
pub struct FittedModels {
    /// Model of electrical demand alone.
    pub baseline: HourlyLassoModel,
    /// One model of electrical plus heat demand per profile and COP.
    pub explicit: Vec<ScenarioFit>,
}

pub fn heat_scenarios(config: &StudyConfig, profiles: &[HeatProfile]) -> Result<Vec<HeatScenario>> {
    let uptake = config.heat.uptake()?;
    let mut out = Vec::new();
    for p in profiles {
        for &cop in &config.heat.cops {
            let mut s = HeatScenario::new(p.clone(), cop, uptake)?;
            s.f_dom = config.heat.f_dom;
            s.g_hw_gw = config.heat.g_hw_gw;
            s.validate()?;
            out.push(s);
        }
    }
    Ok(out)
}

pub fn fit_models(config: &StudyConfig, inputs: &StudyInputs, scenarios: &[HeatScenario]) -> Result<FittedModels> {
    let train = training_table(&inputs.table, &inputs.dataset);
    let baseline =
        fit_hourly(&train, &inputs.dataset.electrical(), &config.fit).map_err(|e| e.context("baseline model"))?;
    let explicit = scenarios
        .par_iter()
        .map(|s| {
            let label = format!("explicit model {}/cop{}", s.profile.name, s.cop);
            let target = explicit_demand(&inputs.dataset, s).map_err(|e| e.context(label.clone()))?;
            let model = fit_hourly(&train, &target, &config.fit).map_err(|e| e.context(label))?;
            Ok(ScenarioFit {
                scenario: s.clone(),
                model,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FittedModels { baseline, explicit })
}

#[derive(Debug, Clone)]
pub struct Hindcasts {
    pub table: CovariateTable,
    pub renewables: DayBlocks,
    pub baseline: DayBlocks,
    pub explicit: Vec<DayBlocks>,
    /// Peak-matching scale factor per explicit scenario.
    pub k_peak: Vec<f64>,
    pub implicit: Vec<DayBlocks>,
}

pub fn hindcast_models(config: &StudyConfig, inputs: &StudyInputs, fits: &FittedModels) -> Result<Hindcasts> {
    let table = hindcast_table(&inputs.table, &inputs.dataset, config.hindcast.trend)?;
    let renewables = renewable_output(&table, &config.installed, |_| true)?;
    let train = training_table(&inputs.table, &inputs.dataset);
    let predict = |model: &HourlyLassoModel, target: &DayBlocks, index: u64| -> Result<DayBlocks> {
        let point = model.predict(&table, |_| true)?;
        if !config.hindcast.bootstrap_residuals {
            return Ok(point);
        }
        let res = residuals(model, &train, target)?;
        add_bootstrap(&point, &res, config.seed.wrapping_add(index))
    };
    let baseline = predict(&fits.baseline, &inputs.dataset.electrical(), 0).map_err(|e| e.context("baseline"))?;
    let explicit = fits
        .explicit
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let target = explicit_demand(&inputs.dataset, &f.scenario)?;
            predict(&f.model, &target, i as u64 + 1)
        })
        .collect::<Result<Vec<_>>>()?;
    let settings = config.adequacy.resolve(&config.season);
    let draws = PeakDraws::new(
        baseline.n_days(),
        settings.season_days as usize,
        settings.peak_trials,
        config.seed,
    )?;
    let base_peak = draws.peak_demand(&baseline)?;
    let k_peak = explicit
        .iter()
        .map(|d| calibrate_k_peak(draws.peak_demand(d)?, base_peak))
        .collect::<Result<Vec<_>>>()?;
    let implicit = k_peak.iter().map(|k| baseline.scaled(*k)).collect();
    Ok(Hindcasts {
        table,
        renewables,
        baseline,
        explicit,
        k_peak,
        implicit,
    })
}

/// Bias converted to money at a cost of new entry over a number of years.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostNote {
    pub profile: String,
    pub cop: f64,
    pub bias_gw: f64,
    pub cone_gbp_m_per_gw_yr: f64,
    pub years: f64,
    pub cost_gbp_m: f64,
    pub rendered: String,
}

pub fn cost_gbp_m(bias_gw: f64, cone_gbp_m_per_gw_yr: f64, years: f64) -> f64 {
    bias_gw * cone_gbp_m_per_gw_yr * years
}

/// Millions of pounds rounded to the nearest million, e.g. `£103m`.
pub fn render_gbp_m(value: f64) -> String {
    let r = value.round();
    if r < 0.0 {
        format!("-£{}m", -r)
    } else {
        format!("£{}m", r + 0.0)
    }
}

pub fn cost_note(profile: &str, cop: f64, bias_gw: f64, cone_gbp_m_per_gw_yr: f64, years: f64) -> CostNote {
    let cost = cost_gbp_m(bias_gw, cone_gbp_m_per_gw_yr, years);
    CostNote {
        profile: profile.to_string(),
        cop,
        bias_gw,
        cone_gbp_m_per_gw_yr,
        years,
        cost_gbp_m: cost,
        rendered: render_gbp_m(cost),
    }
}

/// Mean population-weighted temperature per climate winter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinterClimate {
    pub winter: i32,
    pub mean_t_c: f64,
    pub anomaly_c: f64,
}

pub fn winter_climate(table: &CovariateTable) -> Vec<WinterClimate> {
    let mut by: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for d in 0..table.n_days() {
        let e = by.entry(table.keys()[d].winter).or_insert((0.0, 0));
        e.0 += daily_mean(table, Covariate::T, d);
        e.1 += 1;
    }
    let means: Vec<(i32, f64)> = by.into_iter().map(|(w, (s, n))| (w, s / n as f64)).collect();
    let overall = means.iter().map(|m| m.1).sum::<f64>() / means.len().max(1) as f64;
    means
        .into_iter()
        .map(|(winter, mean_t_c)| WinterClimate {
            winter,
            mean_t_c,
            anomaly_c: mean_t_c - overall,
        })
        .collect()
}

/// JSON body stamped with the config digest and seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stamped<T> {
    pub config_digest: String,
    pub seed: u64,
    #[serde(flatten)]
    pub body: T,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub digest: String,
    pub seed: u64,
    pub inputs: StudyInputs,
    pub fits: FittedModels,
    pub hindcasts: Hindcasts,
    pub scenarios: ScenarioSet,
    pub headline_cost: Option<CostNote>,
    pub costs: Vec<CostNote>,
    /// Bundle files keyed by relative path, rendered in memory.
    pub files: Files,
}

impl StudyResult {
    pub fn explicit_label(&self, i: usize) -> String {
        explicit_label(&self.fits.explicit[i])
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.context(format!("stage {name}")))
}

/// Runs every stage and renders the bundle without touching the disk.
pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    stage("config", config.validate())?;
    let digest = config.digest();
    let inputs = stage("inputs", prepare_inputs(config))?;
    let profiles = stage("heat", config.heat.load_profiles(&config.base_dir))?;
    let scenarios = stage("heat", heat_scenarios(config, &profiles))?;
    let fits = stage("fit", fit_models(config, &inputs, &scenarios))?;
    let hindcasts = stage("hindcast", hindcast_models(config, &inputs, &fits))?;

    let settings = config.adequacy.resolve(&config.season);
    let fleet = stage("adequacy", fleet_pmf(&config.fleet, config.step_mw))?;
    let mut cells = vec![ScenarioCell {
        profile: "none".into(),
        cop: 0.0,
        kind: ModelKind::Baseline,
        demand_gw: hindcasts.baseline.clone(),
    }];
    for (i, f) in fits.explicit.iter().enumerate() {
        cells.push(ScenarioCell {
            profile: f.profile().to_string(),
            cop: f.cop(),
            kind: ModelKind::Explicit,
            demand_gw: hindcasts.explicit[i].clone(),
        });
        if config.heat.implicit {
            cells.push(ScenarioCell {
                profile: f.profile().to_string(),
                cop: f.cop(),
                kind: ModelKind::Implicit,
                demand_gw: hindcasts.implicit[i].clone(),
            });
        }
    }
    let mut set = stage(
        "adequacy",
        run_scenarios(&cells, &fleet, &hindcasts.renewables, &settings, config.seed),
    )?;
    for c in &mut set.cells {
        if let Some(r) = c.report.as_mut() {
            r.config_digest = digest.clone();
        }
    }

    let costs: Vec<CostNote> = set
        .cells
        .iter()
        .filter(|c| c.kind == ModelKind::Implicit)
        .filter_map(|c| {
            let b = c.report.as_ref()?.bias_gw?;
            Some(cost_note(&c.profile, c.cop, b, config.cost.cone_gbp_m_per_gw_yr, config.cost.years))
        })
        .collect();
    let headline_cost = costs
        .iter()
        .find(|c| c.profile == config.cost.reference_profile && c.cop == config.cost.reference_cop)
        .cloned();

    let mut result = StudyResult {
        digest,
        seed: config.seed,
        inputs,
        fits,
        hindcasts,
        scenarios: set,
        headline_cost,
        costs,
        files: BTreeMap::new(),
    };
    result.files = stage("outputs", render_bundle(config, &result))?;
    Ok(result)
}

fn stamped_json<T: Serialize>(digest: &str, seed: u64, body: T) -> Result<Vec<u8>> {
    let s = Stamped {
        config_digest: digest.to_string(),
        seed,
        body,
    };
    let mut v = serde_json::to_vec_pretty(&s)?;
    v.push(b'\n');
    Ok(v)
}

fn slug(label: &str) -> String {
    label.replace('/', "_")
}

fn render_bundle(config: &StudyConfig, r: &StudyResult) -> Result<Files> {
    let pre = config.preamble();
    let (digest, seed) = (r.digest.as_str(), r.seed);
    let mut files = BTreeMap::new();
    let mut canonical = config.clone();
    canonical.output_dir = None;
    files.insert("config.json".to_string(), stamped_json(digest, seed, &canonical)?);

    #[derive(Serialize)]
    struct InputSummary<'a> {
        build: &'a BuildSummary,
        ingest: Option<&'a IngestReport>,
        training_winters: Vec<i32>,
        climate_winters: Vec<i32>,
        training_days: usize,
        k_peak: Vec<(String, f64)>,
    }
    let k_peak = (0..r.fits.explicit.len())
        .map(|i| (r.explicit_label(i), r.hindcasts.k_peak[i]))
        .collect();
    files.insert(
        "inputs.json".into(),
        stamped_json(
            digest,
            seed,
            InputSummary {
                build: &r.inputs.build,
                ingest: r.inputs.ingest.as_ref(),
                training_winters: r.inputs.dataset.winters(),
                climate_winters: r.inputs.table.winters(),
                training_days: r.inputs.dataset.n_days(),
                k_peak,
            },
        )?,
    );

    files.extend(render_models(&pre, digest, seed, &r.fits, Some(&r.hindcasts.k_peak))?);

    let mut ldc_rows = Vec::new();
    let mut series: Vec<(String, &DayBlocks)> = vec![("baseline".into(), &r.hindcasts.baseline)];
    for i in 0..r.fits.explicit.len() {
        series.push((r.explicit_label(i), &r.hindcasts.explicit[i]));
        series.push((r.explicit_label(i).replacen("explicit", "implicit", 1), &r.hindcasts.implicit[i]));
    }
    for (label, blocks) in &series {
        for (p, v) in load_duration_curve(blocks)?.resampled(LDC_POINTS) {
            ldc_rows.push(vec![label.clone(), num(p), num(v)]);
        }
    }
    files.insert("ldc.csv".into(), render(&pre, &["label", "duration", "demand_gw"], &ldc_rows)?);

    files.insert("adequacy/scenarios.json".into(), stamped_json(digest, seed, &r.scenarios)?);
    files.insert("adequacy/summary.csv".into(), r.scenarios.summary_csv(&pre)?);
    files.insert("adequacy/conditional.csv".into(), r.scenarios.conditional_csv(&pre)?);
    let bias_rows: Vec<Vec<String>> = r
        .scenarios
        .cells
        .iter()
        .filter(|c| c.kind == ModelKind::Implicit)
        .filter_map(|c| {
            let im = c.report.as_ref()?;
            let ex = r.scenarios.report(ModelKind::Explicit, &c.profile, c.cop)?;
            Some(vec![c.profile.clone(), num(c.cop), num(ex.acts_gw), num(im.acts_gw), num(im.bias_gw?)])
        })
        .collect();
    files.insert(
        "adequacy/bias.csv".into(),
        render(&pre, &["profile", "cop", "acts_explicit_gw", "acts_implicit_gw", "bias_gw"], &bias_rows)?,
    );
    let climate: Vec<Vec<String>> = winter_climate(&r.hindcasts.table)
        .iter()
        .map(|w| vec![w.winter.to_string(), num(w.mean_t_c), num(w.anomaly_c)])
        .collect();
    files.insert("climate.csv".into(), render(&pre, &["winter", "mean_t_c", "anomaly_c"], &climate)?);

    #[derive(Serialize)]
    struct Costs<'a> {
        headline: Option<&'a CostNote>,
        pairs: &'a [CostNote],
    }
    files.insert(
        "cost.json".into(),
        stamped_json(
            digest,
            seed,
            Costs {
                headline: r.headline_cost.as_ref(),
                pairs: &r.costs,
            },
        )?,
    );
    if let Some(t) = &r.inputs.truth {
        files.insert("truth.json".into(), stamped_json(digest, seed, t)?);
    }

    add_manifest(&mut files, digest, seed)?;
    Ok(files)
}

/// Adds `manifest.json` listing the sha256 of every other file.
pub fn add_manifest(files: &mut Files, digest: &str, seed: u64) -> Result<()> {
    #[derive(Serialize)]
    struct Manifest {
        files: BTreeMap<String, String>,
    }
    files.remove("manifest.json");
    let manifest = Manifest {
        files: files
            .iter()
            .map(|(k, v)| (k.clone(), hex::encode(Sha256::digest(v))))
            .collect(),
    };
    files.insert("manifest.json".into(), stamped_json(digest, seed, manifest)?);
    Ok(())
}

fn explicit_label(f: &ScenarioFit) -> String {
    format!("explicit/{}/cop{}", f.profile(), f.cop())
}

/// Model JSON plus coefficient, CV and sensitivity tables per fitted model,
/// and scaled-baseline tables for each implicit scale factor given.
pub fn render_models(
    pre: &[String],
    digest: &str,
    seed: u64,
    fits: &FittedModels,
    k_peak: Option<&[f64]>,
) -> Result<Files> {
    let mut files = BTreeMap::new();
    let mut models: Vec<(String, &HourlyLassoModel)> = vec![("baseline".into(), &fits.baseline)];
    for f in &fits.explicit {
        models.push((explicit_label(f), &f.model));
    }
    for (label, model) in &models {
        let s = slug(label);
        files.insert(format!("models/{s}.json"), stamped_json(digest, seed, model)?);
        files.insert(format!("coefficients/{s}.csv"), model.coefficients_csv(pre)?);
        files.insert(format!("cv/{s}.csv"), model.cv_csv(pre)?);
        files.insert(format!("sensitivity/{s}.csv"), model.sensitivity(PEAK_HOURS).to_csv(pre)?);
    }
    for (f, k) in fits.explicit.iter().zip(k_peak.unwrap_or_default()) {
        let label = slug(&explicit_label(f).replacen("explicit", "implicit", 1));
        let scaled = fits.baseline.scaled(*k);
        files.insert(format!("sensitivity/{label}.csv"), scaled.sensitivity(PEAK_HOURS).to_csv(pre)?);
        files.insert(format!("coefficients/{label}.csv"), scaled.coefficients_csv(pre)?);
    }
    Ok(files)
}

/// Prefixes `#` comment lines onto CSV bytes.
fn with_preamble(pre: &[String], body: Vec<u8>) -> Vec<u8> {
    let mut out: Vec<u8> = pre.iter().flat_map(|l| format!("# {l}\n").into_bytes()).collect();
    out.extend(body);
    out
}

/// Covariate table and build summary for the configured inputs.
pub fn render_covariates(config: &StudyConfig) -> Result<Files> {
    stage("config", config.validate())?;
    let (digest, seed, pre) = (config.digest(), config.seed, config.preamble());
    let inputs = stage("inputs", prepare_inputs(config))?;
    let mut files = BTreeMap::new();
    files.insert("covariates.csv".into(), inputs.table.to_csv(&pre)?);
    files.insert("build_summary.json".into(), stamped_json(&digest, seed, inputs.build)?);
    if let Some(r) = &inputs.ingest {
        files.insert("ingest.json".into(), stamped_json(&digest, seed, r)?);
    }
    add_manifest(&mut files, &digest, seed)?;
    Ok(files)
}

/// Baseline and explicit fits without the adequacy stage.
pub fn render_fits(config: &StudyConfig) -> Result<Files> {
    stage("config", config.validate())?;
    let (digest, seed, pre) = (config.digest(), config.seed, config.preamble());
    let inputs = stage("inputs", prepare_inputs(config))?;
    let profiles = stage("heat", config.heat.load_profiles(&config.base_dir))?;
    let scenarios = stage("heat", heat_scenarios(config, &profiles))?;
    let fits = stage("fit", fit_models(config, &inputs, &scenarios))?;
    let mut files = stage("outputs", render_models(&pre, &digest, seed, &fits, None))?;
    if let Some(t) = &inputs.truth {
        files.insert("truth.json".into(), stamped_json(&digest, seed, t)?);
    }
    add_manifest(&mut files, &digest, seed)?;
    Ok(files)
}

/// Adequacy outputs of a full run: scenario reports, LDCs, climate and cost.
pub fn adequacy_files(result: &StudyResult) -> Result<Files> {
    let mut files: Files = result
        .files
        .iter()
        .filter(|(k, _)| {
            k.starts_with("adequacy/") || ["config.json", "cost.json", "climate.csv", "ldc.csv"].contains(&k.as_str())
        })
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    add_manifest(&mut files, &result.digest, result.seed)?;
    Ok(files)
}

/// Synthetic inputs as files, with a config that studies them.
///
/// The returned `study.json` references the files by relative name and
/// carries over every non-data setting from `config`.
pub fn render_synthetic(config: &StudyConfig) -> Result<Files> {
    stage("config", config.validate())?;
    let data = stage("inputs", synthesize(config))?;
    let (digest, seed, pre) = (config.digest(), config.seed, config.preamble());
    let mut files = BTreeMap::new();
    files.insert("grid.csv".into(), with_preamble(&pre, data.grid.to_csv()?));
    files.insert("population_weights.csv".into(), with_preamble(&pre, data.population.to_csv()?));
    files.insert("onshore_weights.csv".into(), with_preamble(&pre, data.onshore.to_csv()?));
    files.insert("offshore_weights.csv".into(), with_preamble(&pre, data.offshore.to_csv()?));
    files.insert("solar_weights.csv".into(), with_preamble(&pre, data.solar.to_csv()?));
    files.insert("onshore_curve.csv".into(), with_preamble(&pre, data.onshore_curve.to_csv()?));
    files.insert("offshore_curve.csv".into(), with_preamble(&pre, data.offshore_curve.to_csv()?));
    files.insert("demand.csv".into(), demand_csv(&data.dataset, &pre)?);
    files.insert("gas.csv".into(), gas_csv(&data.dataset, &pre)?);
    files.insert("renewables.csv".into(), renewables_csv(&data.dataset, &pre)?);
    files.insert("truth.json".into(), stamped_json(&digest, seed, &data.truth)?);
    let mut study = config.clone();
    study.output_dir = None;
    study.base_dir = Default::default();
    study.data = DataSource::Files(DataFiles {
        grid: "grid.csv".into(),
        population_weights: "population_weights.csv".into(),
        onshore_weights: "onshore_weights.csv".into(),
        offshore_weights: "offshore_weights.csv".into(),
        solar_weights: "solar_weights.csv".into(),
        onshore_curve: Some("onshore_curve.csv".into()),
        offshore_curve: Some("offshore_curve.csv".into()),
        demand: "demand.csv".into(),
        gas: "gas.csv".into(),
        renewables: Some("renewables.csv".into()),
        demand_adjustment: None,
    });
    files.insert("study.json".into(), format!("{}\n", study.to_json()).into_bytes());
    add_manifest(&mut files, &digest, seed)?;
    Ok(files)
}

/// Writes rendered bundle files under `dir`.
pub fn write_files(dir: &Path, files: &Files) -> Result<()> {
    for (rel, bytes) in files {
        crate::csvio::write_bytes(&dir.join(rel), bytes)?;
    }
    Ok(())
}

/// Machine-readable form of a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<String>,
    pub kind: String,
    pub exit_code: i32,
    pub message: String,
}

impl ErrorReport {
    pub fn from_error(e: &Error) -> Self {
        Self {
            stage: e.stage().map(str::to_string),
            kind: e.kind().to_string(),
            exit_code: e.exit_code(),
            message: e.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error report serializes")
    }
}

/// Records a failure as `diagnostics/error.json` under `dir`.
pub fn write_error(dir: &Path, e: &Error) -> Result<()> {
    let path = dir.join("diagnostics").join("error.json");
    crate::csvio::write_bytes(&path, ErrorReport::from_error(e).to_json().as_bytes())
}

/// Writes `files` under `dir`, or only the diagnostics if the computation
/// failed.
pub fn persist(dir: &Path, files: Result<Files>) -> Result<()> {
    match files {
        Ok(files) => write_files(dir, &files),
        Err(e) => {
            write_error(dir, &e)?;
            Err(e)
        }
    }
}

/// Runs the study and writes the bundle; on failure writes only
/// `diagnostics/error.json` under `dir`.
pub fn run_study_to_dir(config: &StudyConfig, dir: &Path) -> Result<StudyResult> {
    match run_study(config) {
        Ok(r) => {
            write_files(dir, &r.files)?;
            Ok(r)
        }
        Err(e) => {
            write_error(dir, &e)?;
            Err(e)
        }
    }
}
