//! Time-collapsed adequacy metrics: LOLE, ACTS, Peak Demand, Bias and RoCS.
//!
//! Demand and renewable series are carried in GW, fleet distributions in MW.
//! Net demand is converted to MW on entry; reports come back in GW.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvio::{num, render};
use crate::distcalc::{shifted_cdf, CapacityPmf, CdfTable};
use crate::error::{ensure, Error, Result};
use crate::season::{DayBlocks, HOURS};

pub const MW_PER_GW: f64 = 1000.0;
pub const DEFAULT_TARGET_LOLE_H: f64 = 3.0;
pub const DEFAULT_PEAK_TRIALS: usize = 1001;
pub const ACTS_SHIFT_TOL_MW: f64 = 0.01;
pub const ACTS_LOLE_TOL_H: f64 = 1e-6;
const MAX_BISECTIONS: usize = 200;

/// Hourly net demand `D − Y` on the hindcast days, in GW.
pub fn net_demand(demand_gw: &DayBlocks, renewables_gw: &DayBlocks) -> Result<DayBlocks> {
    demand_gw.zip_with(renewables_gw, |d, y| d - y)
}

/// `P(X < net demand)` for one hour.
pub fn lolp_hour(fleet: &CapacityPmf, net_demand_mw: f64) -> f64 {
    shifted_cdf(fleet, net_demand_mw)
}

/// Loss-of-load evaluator over a fixed set of net-demand days.
///
/// Holds the fleet CDF and the samples in MW so that repeated evaluations
/// under different capacity shifts cost one table lookup per hour.
#[derive(Debug, Clone)]
pub struct LoleEvaluator {
    cdf: CdfTable,
    fleet_max_mw: f64,
    step_mw: f64,
    days_mw: Vec<[f64; HOURS]>,
    season_days: f64,
}

impl LoleEvaluator {
    pub fn new(fleet: &CapacityPmf, net_demand_gw: &DayBlocks, season_days: f64) -> Result<Self> {
        ensure(!net_demand_gw.is_empty(), || "net demand has no days".into())?;
        ensure(season_days > 0.0 && season_days.is_finite(), || {
            format!("season_days must be positive, got {season_days}")
        })?;
        ensure(net_demand_gw.flat().all(f64::is_finite), || "net demand has non-finite values".into())?;
        let days_mw = net_demand_gw
            .days()
            .iter()
            .map(|d| d.map(|v| v * MW_PER_GW))
            .collect();
        Ok(Self {
            cdf: fleet.cdf_table(),
            fleet_max_mw: fleet.support().1,
            step_mw: fleet.step_mw(),
            days_mw,
            season_days,
        })
    }

    pub fn n_days(&self) -> usize {
        self.days_mw.len()
    }

    /// LOLE in hours per season with the fleet shifted by `shift_mw`.
    pub fn lole(&self, shift_mw: f64) -> f64 {
        let n = self.days_mw.len() as f64;
        let mut total = 0.0;
        for h in 0..HOURS {
            let s: f64 = self.days_mw.iter().map(|d| self.cdf.eval(d[h] - shift_mw)).sum();
            total += s / n;
        }
        self.season_days * total
    }

    /// Half-width of the search bracket for the capacity shift.
    pub fn bracket_mw(&self) -> f64 {
        let max_abs = self
            .days_mw
            .iter()
            .flat_map(|d| d.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        max_abs + self.fleet_max_mw.abs() + 2.0 * self.step_mw
    }

    /// Perfect-capacity shift bringing LOLE to `target_h`, by bisection.
    pub fn acts_mw(&self, target_h: f64) -> Result<ActsSolution> {
        ensure(target_h.is_finite() && target_h >= 0.0, || {
            format!("target LOLE must be non-negative, got {target_h}")
        })?;
        let b = self.bracket_mw();
        let (mut lo, mut hi) = (-b, b);
        let (l_lo, l_hi) = (self.lole(lo), self.lole(hi));
        if !(l_lo >= target_h && l_hi <= target_h) || l_lo == l_hi {
            return Err(Error::Numerical(format!(
                "target LOLE {target_h} h not bracketed: LOLE({lo:.1} MW) = {l_lo}, LOLE({hi:.1} MW) = {l_hi}"
            )));
        }
        let mut iterations = 0;
        let mut mid = 0.5 * (lo + hi);
        let mut lole = self.lole(mid);
        while iterations < MAX_BISECTIONS {
            iterations += 1;
            if (lole - target_h).abs() <= ACTS_LOLE_TOL_H || hi - lo <= ACTS_SHIFT_TOL_MW {
                break;
            }
            if lole > target_h {
                lo = mid;
            } else {
                hi = mid;
            }
            mid = 0.5 * (lo + hi);
            lole = self.lole(mid);
        }
        Ok(ActsSolution {
            shift_mw: mid,
            lole_h: lole,
            iterations,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActsSolution {
    pub shift_mw: f64,
    /// LOLE evaluated at the returned shift.
    pub lole_h: f64,
    pub iterations: usize,
}

pub fn lole(fleet: &CapacityPmf, net_demand_gw: &DayBlocks, season_days: f64) -> Result<f64> {
    Ok(LoleEvaluator::new(fleet, net_demand_gw, season_days)?.lole(0.0))
}

/// ACTS in GW.
pub fn acts(fleet: &CapacityPmf, net_demand_gw: &DayBlocks, season_days: f64, target_h: f64) -> Result<f64> {
    let sol = LoleEvaluator::new(fleet, net_demand_gw, season_days)?.acts_mw(target_h)?;
    Ok(sol.shift_mw / MW_PER_GW)
}

/// Day indices for Peak Demand trials, drawn once so that every demand
/// series evaluated with the same draws sees the same resampled seasons.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakDraws {
    n_days: usize,
    season_days: usize,
    draws: Vec<Vec<u32>>,
}

impl PeakDraws {
    pub fn new(n_days: usize, season_days: usize, trials: usize, seed: u64) -> Result<Self> {
        ensure(n_days > 0, || "peak demand needs a non-empty day pool".into())?;
        ensure(trials >= 1, || "peak demand needs at least one trial".into())?;
        ensure(season_days >= 1, || "season_days must be at least 1".into())?;
        ensure(n_days <= u32::MAX as usize, || "day pool too large".into())?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draws = (0..trials)
            .map(|_| (0..season_days).map(|_| rng.random_range(0..n_days as u32)).collect())
            .collect();
        Ok(Self {
            n_days,
            season_days,
            draws,
        })
    }

    pub fn trials(&self) -> usize {
        self.draws.len()
    }

    pub fn season_days(&self) -> usize {
        self.season_days
    }

    /// Per-trial seasonal maxima.
    pub fn trial_peaks(&self, demand: &DayBlocks) -> Result<Vec<f64>> {
        ensure(demand.n_days() == self.n_days, || {
            format!("draws were made for {} days, demand has {}", self.n_days, demand.n_days())
        })?;
        let daily = demand.daily_max();
        Ok(self
            .draws
            .iter()
            .map(|t| t.iter().fold(f64::NEG_INFINITY, |m, &i| m.max(daily[i as usize])))
            .collect())
    }

    /// Median over trials of the seasonal maximum.
    pub fn peak_demand(&self, demand: &DayBlocks) -> Result<f64> {
        let mut peaks = self.trial_peaks(demand)?;
        peaks.sort_by(f64::total_cmp);
        let n = peaks.len();
        Ok(if n % 2 == 1 {
            peaks[n / 2]
        } else {
            0.5 * (peaks[n / 2 - 1] + peaks[n / 2])
        })
    }
}

/// Median seasonal peak over `trials` resampled seasons of whole days.
pub fn peak_demand(demand: &DayBlocks, season_days: usize, trials: usize, seed: u64) -> Result<f64> {
    PeakDraws::new(demand.n_days(), season_days, trials, seed)?.peak_demand(demand)
}

pub fn bias(acts_implicit_gw: f64, acts_explicit_gw: f64) -> f64 {
    acts_implicit_gw - acts_explicit_gw
}

pub fn rocs(acts_gw: &[f64]) -> Result<f64> {
    ensure(!acts_gw.is_empty(), || "RoCS needs at least one scenario".into())?;
    let max = acts_gw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = acts_gw.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// ACTS with the weather expectation restricted to one winter, in GW.
pub fn conditional_acts(
    fleet: &CapacityPmf,
    net_demand_gw: &DayBlocks,
    winter: i32,
    season_days: f64,
    target_h: f64,
) -> Result<f64> {
    let days = net_demand_gw.winter(winter);
    ensure(!days.is_empty(), || format!("winter {winter} is not in the dataset"))?;
    acts(fleet, &days, season_days, target_h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WinterActs {
    pub winter: i32,
    pub acts_gw: f64,
    /// Winter ACTS minus the all-climate ACTS.
    pub change_gw: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdequacySettings {
    #[serde(default = "default_target")]
    pub target_lole_h: f64,
    /// Days per season used to scale LOLE and to size Peak Demand trials.
    pub season_days: u32,
    #[serde(default = "default_trials")]
    pub peak_trials: usize,
    #[serde(default = "default_true")]
    pub conditional_winters: bool,
}

fn default_target() -> f64 {
    DEFAULT_TARGET_LOLE_H
}
fn default_trials() -> usize {
    DEFAULT_PEAK_TRIALS
}
fn default_true() -> bool {
    true
}

impl AdequacySettings {
    pub fn new(season_days: u32) -> Self {
        Self {
            target_lole_h: DEFAULT_TARGET_LOLE_H,
            season_days,
            peak_trials: DEFAULT_PEAK_TRIALS,
            conditional_winters: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.target_lole_h.is_finite() && self.target_lole_h >= 0.0, || {
            format!("target_lole_h must be non-negative, got {}", self.target_lole_h)
        })?;
        ensure(self.season_days >= 1, || "season_days must be at least 1".into())?;
        ensure(self.peak_trials >= 1, || "peak_trials must be at least 1".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdequacyReport {
    pub label: String,
    pub lole_h: f64,
    pub acts_gw: f64,
    /// LOLE after adding the ACTS shift; equals the target within tolerance.
    pub forward_lole_h: f64,
    pub peak_demand_gw: f64,
    pub conditional: Vec<WinterActs>,
    pub bias_gw: Option<f64>,
    pub rocs_gw: Option<f64>,
    pub target_lole_h: f64,
    pub season_days: u32,
    pub seed: u64,
    pub config_digest: String,
}

/// Evaluates one demand series against the shared fleet and renewables.
pub fn evaluate(
    label: &str,
    fleet: &CapacityPmf,
    demand_gw: &DayBlocks,
    renewables_gw: &DayBlocks,
    draws: &PeakDraws,
    settings: &AdequacySettings,
    seed: u64,
) -> Result<AdequacyReport> {
    settings.validate()?;
    let nd = net_demand(demand_gw, renewables_gw)?;
    let sd = settings.season_days as f64;
    let eval = LoleEvaluator::new(fleet, &nd, sd)?;
    let lole_h = eval.lole(0.0);
    let sol = eval.acts_mw(settings.target_lole_h)?;
    let acts_gw = sol.shift_mw / MW_PER_GW;
    let peak_demand_gw = draws.peak_demand(demand_gw)?;
    let conditional = if settings.conditional_winters {
        nd.winters()
            .into_par_iter()
            .map(|w| {
                let a = conditional_acts(fleet, &nd, w, sd, settings.target_lole_h)
                    .map_err(|e| e.context(format!("winter {w}")))?;
                Ok(WinterActs {
                    winter: w,
                    acts_gw: a,
                    change_gw: a - acts_gw,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(AdequacyReport {
        label: label.to_string(),
        lole_h,
        acts_gw,
        forward_lole_h: sol.lole_h,
        peak_demand_gw,
        conditional,
        bias_gw: None,
        rocs_gw: None,
        target_lole_h: settings.target_lole_h,
        season_days: settings.season_days,
        seed,
        config_digest: String::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Explicit,
    Implicit,
    Baseline,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Explicit => "explicit",
            ModelKind::Implicit => "implicit",
            ModelKind::Baseline => "baseline",
        }
    }
}

/// One cell of a scenario grid with its hindcast demand already built.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioCell {
    pub profile: String,
    pub cop: f64,
    pub kind: ModelKind,
    pub demand_gw: DayBlocks,
}

impl ScenarioCell {
    pub fn label(&self) -> String {
        match self.kind {
            ModelKind::Baseline => "baseline".into(),
            k => format!("{}/{}/cop{}", k.name(), self.profile, self.cop),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub label: String,
    pub profile: String,
    pub cop: f64,
    pub kind: ModelKind,
    pub report: Option<AdequacyReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub cells: Vec<CellOutcome>,
    /// Max minus min ACTS over the successful explicit cells.
    pub rocs_gw: Option<f64>,
}

impl ScenarioSet {
    pub fn report(&self, kind: ModelKind, profile: &str, cop: f64) -> Option<&AdequacyReport> {
        self.cells
            .iter()
            .find(|c| c.kind == kind && c.profile == profile && c.cop == cop)
            .and_then(|c| c.report.as_ref())
    }

    pub fn reports(&self) -> impl Iterator<Item = &AdequacyReport> {
        self.cells.iter().filter_map(|c| c.report.as_ref())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per cell.
    pub fn summary_csv(&self, preamble: &[String]) -> Result<Vec<u8>> {
        let header = [
            "label", "kind", "profile", "cop", "lole_h", "acts_gw", "forward_lole_h", "peak_demand_gw", "bias_gw",
            "error",
        ];
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let rows = self.cells.iter().map(|c| {
            let r = c.report.as_ref();
            vec![
                c.label.clone(),
                c.kind.name().to_string(),
                c.profile.clone(),
                num(c.cop),
                opt(r.map(|r| r.lole_h)),
                opt(r.map(|r| r.acts_gw)),
                opt(r.map(|r| r.forward_lole_h)),
                opt(r.map(|r| r.peak_demand_gw)),
                opt(r.and_then(|r| r.bias_gw)),
                c.error.clone().unwrap_or_default(),
            ]
        });
        render(preamble, &header, &rows.collect::<Vec<_>>())
    }

    /// Per-winter ACTS and change for every successful cell.
    pub fn conditional_csv(&self, preamble: &[String]) -> Result<Vec<u8>> {
        let header = ["label", "winter", "acts_gw", "change_gw"];
        let rows = self.reports().flat_map(|r| {
            r.conditional
                .iter()
                .map(|w| vec![r.label.clone(), w.winter.to_string(), num(w.acts_gw), num(w.change_gw)])
        });
        render(preamble, &header, &rows.collect::<Vec<_>>())
    }
}

/// Evaluates every cell against shared inputs.
///
/// All cells use the same Peak Demand draws, so differences between cells
/// come from demand alone. A failing cell records its error and the rest
/// of the grid still runs.
pub fn run_scenarios(
    cells: &[ScenarioCell],
    fleet: &CapacityPmf,
    renewables_gw: &DayBlocks,
    settings: &AdequacySettings,
    seed: u64,
) -> Result<ScenarioSet> {
    settings.validate()?;
    let draws = PeakDraws::new(
        renewables_gw.n_days(),
        settings.season_days as usize,
        settings.peak_trials,
        seed,
    )?;
    let mut outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|c| {
            let label = c.label();
            let result = evaluate(&label, fleet, &c.demand_gw, renewables_gw, &draws, settings, seed);
            let (report, error) = match result {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            CellOutcome {
                label,
                profile: c.profile.clone(),
                cop: c.cop,
                kind: c.kind,
                report,
                error,
            }
        })
        .collect();

    let explicit: Vec<(String, f64, f64)> = outcomes
        .iter()
        .filter(|c| c.kind == ModelKind::Explicit)
        .filter_map(|c| c.report.as_ref().map(|r| (c.profile.clone(), c.cop, r.acts_gw)))
        .collect();
    for c in outcomes.iter_mut().filter(|c| c.kind == ModelKind::Implicit) {
        let paired = explicit.iter().find(|(p, cop, _)| *p == c.profile && *cop == c.cop);
        if let (Some(r), Some((_, _, ex))) = (c.report.as_mut(), paired) {
            r.bias_gw = Some(bias(r.acts_gw, *ex));
        }
    }
    let acts: Vec<f64> = explicit.iter().map(|e| e.2).collect();
    let rocs_gw = if acts.is_empty() { None } else { Some(rocs(&acts)?) };
    for c in outcomes.iter_mut().filter(|c| c.kind == ModelKind::Explicit) {
        if let Some(r) = c.report.as_mut() {
            r.rocs_gw = rocs_gw;
        }
    }
    Ok(ScenarioSet {
        cells: outcomes,
        rocs_gw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distcalc::{fleet_pmf, two_state_pmf, FleetSpec, GeneratingUnit};
    use crate::season::DayKey;

    fn blocks(days: &[[f64; HOURS]]) -> DayBlocks {
        let keys = (0..days.len())
            .map(|i| DayKey {
                winter: 2000 + (i / 2) as i32,
                day: (i % 2) as u32,
            })
            .collect();
        DayBlocks::new(keys, days.to_vec()).unwrap()
    }

    #[test]
    fn point_mass_lolp() {
        let pmf = CapacityPmf::point_mass(1000.0, 1.0).unwrap();
        assert_eq!(lolp_hour(&pmf, 999.0), 0.0);
        assert_eq!(lolp_hour(&pmf, 1001.0), 1.0);
    }

    #[test]
    fn lolp_matches_enumeration() {
        let units = [(300.0, 0.9), (200.0, 0.8), (100.0, 0.95)];
        let spec = FleetSpec {
            units: units.iter().map(|&(c, a)| GeneratingUnit::new(c, a)).collect(),
            interconnectors: vec![],
        };
        let pmf = fleet_pmf(&spec, 10.0).unwrap();
        for d in [50.0, 150.0, 250.0, 305.0, 450.0, 550.0, 650.0] {
            let mut p = 0.0;
            for mask in 0..8u32 {
                let (mut cap, mut prob) = (0.0, 1.0);
                for (i, &(c, a)) in units.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        cap += c;
                        prob *= a;
                    } else {
                        prob *= 1.0 - a;
                    }
                }
                if cap < d {
                    p += prob;
                }
            }
            assert!((lolp_hour(&pmf, d) - p).abs() < 1e-12, "demand {d}");
        }
    }

    #[test]
    fn lole_extremes_and_single_hour() {
        let firm = CapacityPmf::point_mass(1000.0, 10.0).unwrap();
        assert_eq!(lole(&firm, &blocks(&[[0.9; HOURS]]), 119.0).unwrap(), 0.0);
        assert_eq!(lole(&firm, &blocks(&[[1.1; HOURS]]), 119.0).unwrap(), 24.0 * 119.0);
        let pmf = two_state_pmf(1000.0, 0.5, 10.0).unwrap();
        // Only one hour sits between the two states.
        let mut day = [-1.0; HOURS];
        day[18] = 0.5;
        assert!((lole(&pmf, &blocks(&[day]), 119.0).unwrap() - 59.5).abs() < 1e-12);
    }

    #[test]
    fn acts_round_trip() {
        let spec = FleetSpec {
            units: (0..40).map(|_| GeneratingUnit::new(500.0, 0.9)).collect(),
            interconnectors: vec![],
        };
        let pmf = fleet_pmf(&spec, 10.0).unwrap();
        let mut days = Vec::new();
        for i in 0..6 {
            let mut d = [0.0; HOURS];
            for (h, v) in d.iter_mut().enumerate() {
                *v = 15.0 + 2.0 * (h as f64 / 23.0) + 0.3 * i as f64;
            }
            days.push(d);
        }
        let nd = blocks(&days);
        let eval = LoleEvaluator::new(&pmf, &nd, 126.0).unwrap();
        let sol = eval.acts_mw(3.0).unwrap();
        assert!((sol.lole_h - 3.0).abs() < 0.02);
        // At the target already: ACTS is zero.
        let at = eval.lole(0.0);
        let zero = eval.acts_mw(at).unwrap();
        assert!(zero.shift_mw.abs() < 1.0, "{}", zero.shift_mw);
        // Adding a point-mass unit of size ACTS reproduces the target.
        let shifted = pmf.shifted(sol.shift_mw);
        assert!((lole(&shifted, &nd, 126.0).unwrap() - 3.0).abs() < 0.02);
    }

    #[test]
    fn acts_unbracketed_target() {
        let pmf = two_state_pmf(1000.0, 0.5, 10.0).unwrap();
        let nd = blocks(&[[0.5; HOURS]]);
        let err = acts(&pmf, &nd, 10.0, 1000.0).unwrap_err();
        assert!(err.to_string().contains("not bracketed"));
    }

    #[test]
    fn peak_demand_properties() {
        let same = blocks(&[[1.0; HOURS], [1.0; HOURS]]);
        assert_eq!(peak_demand(&same, 5, 11, 3).unwrap(), 1.0);
        let mut a = [1.0; HOURS];
        a[7] = 3.0;
        let mut b = [2.0; HOURS];
        b[18] = 4.5;
        let d = blocks(&[a, b, [0.5; HOURS]]);
        let base = peak_demand(&d, 2, 101, 9).unwrap();
        let scaled = peak_demand(&d.scaled(1.7), 2, 101, 9).unwrap();
        assert!((scaled - 1.7 * base).abs() < 1e-9);
        assert!(PeakDraws::new(0, 1, 1, 0).is_err());
        assert!(PeakDraws::new(3, 1, 0, 0).is_err());
    }

    #[test]
    fn two_day_pool_median() {
        let mut lo = [0.0; HOURS];
        lo[0] = 50.0;
        let mut hi = [0.0; HOURS];
        hi[0] = 60.0;
        let d = blocks(&[lo, hi]);
        let even = peak_demand(&d, 1, 10, 4).unwrap();
        assert!([50.0, 55.0, 60.0].contains(&even));
        // Direct simulation of the same draws gives the same median.
        let draws = PeakDraws::new(2, 1, 10_001, 11).unwrap();
        let n_hi = draws.draws.iter().filter(|t| t[0] == 1).count();
        let expect = if n_hi > 5000 { 60.0 } else { 50.0 };
        assert_eq!(draws.peak_demand(&d).unwrap(), expect);
    }

    #[test]
    fn bias_and_rocs_arithmetic() {
        assert!((bias(7.05, 6.26) - 0.79).abs() < 1e-12);
        assert!((bias(15.15, 12.82) - 2.33).abs() < 1e-12);
        assert_eq!(bias(1.0, 1.0), 0.0);
        assert_eq!(rocs(&[4.2]).unwrap(), 0.0);
        assert!((rocs(&[-3.03, 2.75]).unwrap() - 5.78).abs() < 1e-12);
        assert_eq!(rocs(&[2.75, -3.03]).unwrap(), rocs(&[-3.03, 2.75]).unwrap());
        assert!(rocs(&[]).is_err());
    }

    #[test]
    fn conditional_winters() {
        let spec = FleetSpec {
            units: (0..30).map(|_| GeneratingUnit::new(600.0, 0.9)).collect(),
            interconnectors: vec![],
        };
        let pmf = fleet_pmf(&spec, 10.0).unwrap();
        let keys = vec![
            DayKey { winter: 1, day: 0 },
            DayKey { winter: 1, day: 1 },
            DayKey { winter: 2, day: 0 },
            DayKey { winter: 2, day: 1 },
        ];
        let warm = [14.0; HOURS];
        let cold = [15.5; HOURS];
        let nd = DayBlocks::new(keys, vec![warm, warm, cold, cold]).unwrap();
        let all = acts(&pmf, &nd, 126.0, 3.0).unwrap();
        let c = conditional_acts(&pmf, &nd, 2, 126.0, 3.0).unwrap();
        let w = conditional_acts(&pmf, &nd, 1, 126.0, 3.0).unwrap();
        assert!(c >= all && all >= w);
        assert!(conditional_acts(&pmf, &nd, 3, 126.0, 3.0).is_err());
    }

    #[test]
    fn scenario_grid_pairs_bias_and_isolates_failures() {
        let spec = FleetSpec {
            units: (0..30).map(|_| GeneratingUnit::new(600.0, 0.9)).collect(),
            interconnectors: vec![],
        };
        let pmf = fleet_pmf(&spec, 10.0).unwrap();
        let base = blocks(&[[14.0; HOURS], [15.0; HOURS], [14.5; HOURS], [13.0; HOURS]]);
        let zero = base.scaled(0.0);
        let cell = |kind, cop: f64, d: &DayBlocks| ScenarioCell {
            profile: "flat".into(),
            cop,
            kind,
            demand_gw: d.clone(),
        };
        let mut bad = base.clone();
        bad = bad.map(|v| if v > 14.9 { f64::NAN } else { v });
        let cells = vec![
            cell(ModelKind::Explicit, 2.0, &base.scaled(1.02)),
            cell(ModelKind::Implicit, 2.0, &base.scaled(1.03)),
            cell(ModelKind::Explicit, 3.0, &base),
            cell(ModelKind::Explicit, 4.0, &bad),
        ];
        let set = run_scenarios(&cells, &pmf, &zero, &AdequacySettings::new(126), 5).unwrap();
        assert!(set.cells[3].error.is_some() && set.cells[3].report.is_none());
        let ex = set.report(ModelKind::Explicit, "flat", 2.0).unwrap().acts_gw;
        let im = set.report(ModelKind::Implicit, "flat", 2.0).unwrap();
        assert_eq!(im.bias_gw, Some(im.acts_gw - ex));
        let ex3 = set.report(ModelKind::Explicit, "flat", 3.0).unwrap().acts_gw;
        assert_eq!(set.rocs_gw, Some((ex - ex3).abs()));
        let again = run_scenarios(&cells, &pmf, &zero, &AdequacySettings::new(126), 5).unwrap();
        assert_eq!(set.to_json().unwrap(), again.to_json().unwrap());
    }
}
