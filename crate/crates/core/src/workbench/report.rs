//! Plot-ready tables derived from a rendered study bundle.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::study::Files;
use crate::csvio::{num, read_rows, render};
use crate::error::{Error, Result};

/// Bundle files keyed by relative path.
#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub files: Files,
}

#[derive(Deserialize)]
struct Manifest {
    config_digest: String,
    seed: u64,
    files: BTreeMap<String, String>,
}

impl Bundle {
    pub fn new(files: Files) -> Self {
        Self { files }
    }

    /// Reads every file listed in `manifest.json` and checks its hash.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join("manifest.json");
        let text = std::fs::read(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
        let manifest: Manifest = serde_json::from_slice(&text)?;
        let mut files = BTreeMap::new();
        for (rel, hash) in &manifest.files {
            let path = dir.join(rel);
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if hex::encode(Sha256::digest(&bytes)) != *hash {
                return Err(Error::validation(format!("{} does not match its manifest hash", path.display())));
            }
            files.insert(rel.clone(), bytes);
        }
        files.insert("manifest.json".into(), text);
        Ok(Self { files })
    }

    fn get(&self, rel: &str) -> Result<&[u8]> {
        self.files
            .get(rel)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::validation(format!("bundle has no {rel}")))
    }

    fn table<T: serde::de::DeserializeOwned>(&self, rel: &str, required: &[&str]) -> Result<Vec<T>> {
        let rows = read_rows(&PathBuf::from(rel), self.get(rel)?, required)?;
        Ok(rows.into_iter().map(|r| r.value).collect())
    }

    /// Model names in `dir/`, taken from `dir/<name>.csv`.
    fn models_in(&self, dir: &str) -> Vec<String> {
        let prefix = format!("{dir}/");
        self.files
            .keys()
            .filter_map(|k| k.strip_prefix(&prefix)?.strip_suffix(".csv").map(str::to_string))
            .collect()
    }

    fn preamble(&self) -> Result<Vec<String>> {
        let m: Manifest = serde_json::from_slice(self.get("manifest.json")?)?;
        Ok(vec![format!("config_digest={}, seed={}", m.config_digest, m.seed)])
    }
}

#[derive(Deserialize)]
struct CvRow {
    hour: usize,
    inverse_alpha: f64,
    mean_r2: f64,
    se: f64,
    nonzero: usize,
    selected: bool,
}

#[derive(Deserialize)]
struct CoefRow {
    hour: usize,
    covariate: String,
    coefficient: f64,
}

#[derive(Deserialize)]
struct ConditionalRow {
    label: String,
    winter: i32,
    change_gw: f64,
}

#[derive(Deserialize)]
struct ClimateRow {
    winter: i32,
    mean_t_c: f64,
    anomaly_c: f64,
}

#[derive(Deserialize)]
struct SummaryRow {
    label: String,
    lole_h: Option<f64>,
    acts_gw: Option<f64>,
    peak_demand_gw: Option<f64>,
    bias_gw: Option<f64>,
    error: String,
}

#[derive(Deserialize)]
struct CostFile {
    headline: Option<super::study::CostNote>,
}

/// Renders the report tables for a bundle, keyed by relative path.
pub fn build_report(bundle: &Bundle) -> Result<Files> {
    let pre = bundle.preamble()?;
    let mut out = BTreeMap::new();

    let mut rows = Vec::new();
    for model in bundle.models_in("cv") {
        for r in bundle.table::<CvRow>(&format!("cv/{model}.csv"), &["hour", "mean_r2"])? {
            rows.push(vec![
                model.clone(),
                r.hour.to_string(),
                num(r.inverse_alpha),
                num(r.mean_r2),
                num(r.se),
                r.nonzero.to_string(),
                r.selected.to_string(),
            ]);
        }
    }
    out.insert(
        "report/cv_paths.csv".into(),
        render(&pre, &["model", "hour", "inverse_alpha", "mean_r2", "se", "nonzero", "selected"], &rows)?,
    );

    let mut rows = Vec::new();
    for model in bundle.models_in("coefficients") {
        for r in bundle.table::<CoefRow>(&format!("coefficients/{model}.csv"), &["hour", "covariate"])? {
            if r.covariate != "intercept" {
                rows.push(vec![model.clone(), r.hour.to_string(), r.covariate, num(r.coefficient)]);
            }
        }
    }
    out.insert(
        "report/coefficients_by_hour.csv".into(),
        render(&pre, &["model", "hour", "covariate", "coefficient"], &rows)?,
    );

    out.insert("report/load_duration.csv".into(), {
        let mut rows = Vec::new();
        #[derive(Deserialize)]
        struct Ldc {
            label: String,
            duration: f64,
            demand_gw: f64,
        }
        for r in bundle.table::<Ldc>("ldc.csv", &["label", "duration", "demand_gw"])? {
            rows.push(vec![r.label, num(r.duration), num(r.demand_gw)]);
        }
        render(&pre, &["label", "duration", "demand_gw"], &rows)?
    });

    let climate: BTreeMap<i32, ClimateRow> = bundle
        .table::<ClimateRow>("climate.csv", &["winter", "anomaly_c"])?
        .into_iter()
        .map(|c| (c.winter, c))
        .collect();
    let mut rows = Vec::new();
    for r in bundle.table::<ConditionalRow>("adequacy/conditional.csv", &["label", "winter", "change_gw"])? {
        let c = climate
            .get(&r.winter)
            .ok_or_else(|| Error::validation(format!("climate.csv has no winter {}", r.winter)))?;
        rows.push(vec![r.label, r.winter.to_string(), num(c.mean_t_c), num(c.anomaly_c), num(r.change_gw)]);
    }
    out.insert(
        "report/winter_sensitivity.csv".into(),
        render(&pre, &["label", "winter", "mean_t_c", "anomaly_c", "acts_change_gw"], &rows)?,
    );

    out.insert("report/summary.txt".into(), summary_text(bundle)?.into_bytes());
    Ok(out)
}

/// Fixed-width adequacy table with the cost headline.
pub fn summary_text(bundle: &Bundle) -> Result<String> {
    let rows = bundle.table::<SummaryRow>("adequacy/summary.csv", &["label", "acts_gw"])?;
    let mut s = String::new();
    let _ = writeln!(s, "{:<28} {:>10} {:>9} {:>9} {:>8}", "cell", "LOLE h", "ACTS GW", "PD GW", "bias GW");
    let f = |v: Option<f64>, p: usize| v.map(|v| format!("{v:.p$}")).unwrap_or_else(|| "-".into());
    for r in rows {
        if !r.error.is_empty() {
            let _ = writeln!(s, "{:<28} failed: {}", r.label, r.error);
            continue;
        }
        let _ = writeln!(
            s,
            "{:<28} {:>10} {:>9} {:>9} {:>8}",
            r.label,
            f(r.lole_h, 3),
            f(r.acts_gw, 3),
            f(r.peak_demand_gw, 2),
            f(r.bias_gw, 3)
        );
    }
    let cost: CostFile = serde_json::from_slice(bundle.get("cost.json")?)?;
    if let Some(c) = cost.headline {
        let _ = writeln!(
            s,
            "bias of {:.3} GW for {}/cop{} costs {} over {} years",
            c.bias_gw, c.profile, c.cop, c.rendered, c.years
        );
    }
    Ok(s)
}
