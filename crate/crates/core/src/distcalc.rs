//! Discrete probability algebra for dispatchable capacity on a uniform MW grid.
//!
//! A [`CapacityPmf`] places probability mass on the lattice
//! `origin_mw + i * step_mw`. Each mass is read as spread uniformly over its
//! cell `[v - step/2, v + step/2]`, which gives the continuous, piecewise-linear
//! CDF used by the adequacy calculations. With that reading,
//! `P(V < v_i - step/2)` is exact at every cell boundary.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Default lattice spacing.
pub const DEFAULT_STEP_MW: f64 = 10.0;

const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityPmf {
    origin_mw: f64,
    step_mw: f64,
    mass: Vec<f64>,
}

impl CapacityPmf {
    /// Builds a pmf after checking non-negativity and unit total (1e-9).
    pub fn new(origin_mw: f64, step_mw: f64, mass: Vec<f64>) -> Result<Self> {
        ensure(origin_mw.is_finite(), || {
            format!("pmf origin must be finite, got {origin_mw}")
        })?;
        check_step(step_mw)?;
        ensure(!mass.is_empty(), || "pmf must have at least one cell".into())?;
        if let Some((i, m)) = mass
            .iter()
            .enumerate()
            .find(|(_, m)| !m.is_finite() || **m < 0.0)
        {
            return Err(Error::validation(format!(
                "pmf mass at cell {i} is {m}; masses must be finite and non-negative"
            )));
        }
        let total: f64 = mass.iter().sum();
        ensure((total - 1.0).abs() <= MASS_TOL, || {
            format!("pmf masses sum to {total}, expected 1")
        })?;
        Ok(Self {
            origin_mw,
            step_mw,
            mass,
        })
    }

    /// All mass at a single value.
    pub fn point_mass(value_mw: f64, step_mw: f64) -> Result<Self> {
        Self::new(value_mw, step_mw, vec![1.0])
    }

    pub fn origin_mw(&self) -> f64 {
        self.origin_mw
    }

    pub fn step_mw(&self) -> f64 {
        self.step_mw
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Lattice value of cell `i`.
    pub fn value_at(&self, i: usize) -> f64 {
        self.origin_mw + i as f64 * self.step_mw
    }

    /// (value, probability) for every cell with non-zero mass.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(i, m)| (self.value_at(i), *m))
    }

    /// Smallest and largest lattice values carrying mass.
    pub fn support(&self) -> (f64, f64) {
        let first = self.mass.iter().position(|m| *m > 0.0).unwrap_or(0);
        let last = self.mass.iter().rposition(|m| *m > 0.0).unwrap_or(0);
        (self.value_at(first), self.value_at(last))
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(v, m)| v * m).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.atoms().map(|(v, m)| m * (v - mean) * (v - mean)).sum()
    }

    /// Same distribution translated by `shift_mw`.
    pub fn shifted(&self, shift_mw: f64) -> Self {
        Self {
            origin_mw: self.origin_mw + shift_mw,
            ..self.clone()
        }
    }

    /// Precomputed cumulative table for repeated CDF evaluation.
    pub fn cdf_table(&self) -> CdfTable {
        CdfTable::new(self)
    }

    /// Two-column CSV (`value_mw,probability`), one row per lattice cell.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["value_mw", "probability"])?;
        for (i, m) in self.mass.iter().enumerate() {
            w.write_record([self.value_at(i).to_string(), m.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn check_step(step_mw: f64) -> Result<()> {
    ensure(step_mw.is_finite() && step_mw > 0.0, || {
        format!("grid step must be positive and finite, got {step_mw}")
    })
}

fn lattice_index(value_mw: f64, step_mw: f64) -> i64 {
    (value_mw / step_mw).round() as i64
}

/// Generator that is fully available with probability `availability`, else zero.
pub fn two_state_pmf(capacity_mw: f64, availability: f64, step_mw: f64) -> Result<CapacityPmf> {
    check_step(step_mw)?;
    ensure(capacity_mw.is_finite() && capacity_mw >= 0.0, || {
        format!("unit capacity must be finite and non-negative, got {capacity_mw}")
    })?;
    ensure((0.0..=1.0).contains(&availability), || {
        format!("availability must lie in [0, 1], got {availability}")
    })?;
    let top = lattice_index(capacity_mw, step_mw) as usize;
    let mut mass = vec![0.0; top + 1];
    mass[0] += 1.0 - availability;
    mass[top] += availability;
    // Trim a zero-probability outage state so a perfect unit is a point mass.
    if availability == 1.0 {
        return CapacityPmf::new(top as f64 * step_mw, step_mw, vec![1.0]);
    }
    CapacityPmf::new(0.0, step_mw, mass)
}

/// Continuous uniform on `[cf_low * capacity, cf_high * capacity]`, discretized
/// by integrating the density over each lattice cell.
pub fn uniform_pmf(capacity_mw: f64, cf_low: f64, cf_high: f64, step_mw: f64) -> Result<CapacityPmf> {
    check_step(step_mw)?;
    ensure(capacity_mw.is_finite() && capacity_mw >= 0.0, || {
        format!("interconnector capacity must be finite and non-negative, got {capacity_mw}")
    })?;
    ensure(
        cf_low.is_finite() && cf_high.is_finite() && 0.0 <= cf_low && cf_low <= cf_high && cf_high <= 1.0,
        || format!("capacity factors must satisfy 0 <= low <= high <= 1, got [{cf_low}, {cf_high}]"),
    )?;
    let lo = cf_low * capacity_mw;
    let hi = cf_high * capacity_mw;
    let h = step_mw;
    if hi - lo <= 1e-12 * capacity_mw.max(1.0) {
        let k = lattice_index(lo, h);
        return CapacityPmf::point_mass(k as f64 * h, h);
    }
    let k_lo = (lo / h + 0.5).floor() as i64;
    let k_hi = (hi / h - 0.5).ceil() as i64;
    let width = hi - lo;
    let mut mass: Vec<f64> = (k_lo..=k_hi)
        .map(|k| {
            let cell_lo = (k as f64 - 0.5) * h;
            let cell_hi = (k as f64 + 0.5) * h;
            (hi.min(cell_hi) - lo.max(cell_lo)).max(0.0) / width
        })
        .collect();
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    CapacityPmf::new(k_lo as f64 * h, h, mass)
}

/// Distribution of the sum of two independent variables on the same lattice step.
pub fn convolve(a: &CapacityPmf, b: &CapacityPmf) -> Result<CapacityPmf> {
    let rel = (a.step_mw - b.step_mw).abs() / a.step_mw.max(b.step_mw);
    ensure(rel <= 1e-12, || {
        format!(
            "cannot convolve pmfs with grid steps {} and {} MW; re-grid first",
            a.step_mw, b.step_mw
        )
    })?;
    // Iterate over the sparser operand's atoms.
    let (dense, sparse) = if a.atoms().count() >= b.atoms().count() {
        (a, b)
    } else {
        (b, a)
    };
    let mut mass = vec![0.0; a.len() + b.len() - 1];
    for (j, &mj) in sparse.mass.iter().enumerate() {
        if mj == 0.0 {
            continue;
        }
        for (i, &mi) in dense.mass.iter().enumerate() {
            mass[i + j] += mi * mj;
        }
    }
    Ok(CapacityPmf {
        origin_mw: a.origin_mw + b.origin_mw,
        step_mw: a.step_mw,
        mass,
    })
}

fn default_count() -> usize {
    1
}

/// A two-state generating unit, optionally repeated `count` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratingUnit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub capacity_mw: f64,
    pub availability: f64,
    #[serde(default = "default_count")]
    pub count: usize,
}

impl GeneratingUnit {
    pub fn new(capacity_mw: f64, availability: f64) -> Self {
        Self {
            name: None,
            capacity_mw,
            availability,
            count: 1,
        }
    }
}

/// Interconnector whose import is uniform between two capacity factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interconnector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub capacity_mw: f64,
    pub cf_low: f64,
    pub cf_high: f64,
}

impl Interconnector {
    pub fn new(capacity_mw: f64, cf_low: f64, cf_high: f64) -> Self {
        Self {
            name: None,
            capacity_mw,
            cf_low,
            cf_high,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetSpec {
    #[serde(default)]
    pub units: Vec<GeneratingUnit>,
    #[serde(default)]
    pub interconnectors: Vec<Interconnector>,
}

impl FleetSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, u) in self.units.iter().enumerate() {
            ensure(u.capacity_mw.is_finite() && u.capacity_mw >= 0.0, || {
                format!("unit {i}: capacity {} must be non-negative", u.capacity_mw)
            })?;
            ensure((0.0..=1.0).contains(&u.availability), || {
                format!("unit {i}: availability {} outside [0, 1]", u.availability)
            })?;
        }
        for (i, c) in self.interconnectors.iter().enumerate() {
            ensure(c.capacity_mw.is_finite() && c.capacity_mw >= 0.0, || {
                format!("interconnector {i}: capacity {} must be non-negative", c.capacity_mw)
            })?;
            ensure(0.0 <= c.cf_low && c.cf_low <= c.cf_high && c.cf_high <= 1.0, || {
                format!(
                    "interconnector {i}: need 0 <= cf_low <= cf_high <= 1, got [{}, {}]",
                    c.cf_low, c.cf_high
                )
            })?;
        }
        Ok(())
    }

    /// Installed capacity with everything available at its upper bound.
    pub fn max_capacity_mw(&self) -> f64 {
        let units: f64 = self.units.iter().map(|u| u.capacity_mw * u.count as f64).sum();
        let ics: f64 = self.interconnectors.iter().map(|c| c.capacity_mw * c.cf_high).sum();
        units + ics
    }

    pub fn unit_count(&self) -> usize {
        self.units.iter().map(|u| u.count).sum()
    }
}

/// Sequential convolution of every unit and interconnector.
pub fn fleet_pmf(fleet: &FleetSpec, step_mw: f64) -> Result<CapacityPmf> {
    check_step(step_mw)?;
    fleet.validate()?;
    let mut acc = CapacityPmf::point_mass(0.0, step_mw)?;
    for unit in &fleet.units {
        let pmf = two_state_pmf(unit.capacity_mw, unit.availability, step_mw)?;
        for _ in 0..unit.count {
            acc = convolve(&acc, &pmf)?;
        }
    }
    for ic in &fleet.interconnectors {
        acc = convolve(&acc, &uniform_pmf(ic.capacity_mw, ic.cf_low, ic.cf_high, step_mw)?)?;
    }
    Ok(acc)
}

/// `P(V < x)` under the cell-spread reading of the lattice masses.
pub fn shifted_cdf(pmf: &CapacityPmf, x: f64) -> f64 {
    let h = pmf.step_mw;
    let u = (x - (pmf.origin_mw - 0.5 * h)) / h;
    if u <= 0.0 {
        return 0.0;
    }
    let j = u.floor();
    if j >= pmf.len() as f64 {
        return 1.0;
    }
    let j = j as usize;
    let below: f64 = pmf.mass[..j].iter().sum();
    (below + pmf.mass[j] * (u - j as f64)).clamp(0.0, 1.0)
}

/// Generalized inverse of [`shifted_cdf`]: the smallest `x` with `P(V < x) >= p`.
pub fn quantile(pmf: &CapacityPmf, p: f64) -> Result<f64> {
    pmf.cdf_table().quantile(p)
}

/// Prefix sums of a pmf for O(1) CDF evaluation.
#[derive(Debug, Clone)]
pub struct CdfTable {
    lower_edge: f64,
    step: f64,
    mass: Vec<f64>,
    /// `cum[j]` = total mass of cells `0..j`.
    cum: Vec<f64>,
}

impl CdfTable {
    pub fn new(pmf: &CapacityPmf) -> Self {
        let mut cum = Vec::with_capacity(pmf.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for m in &pmf.mass {
            acc += m;
            cum.push(acc);
        }
        Self {
            lower_edge: pmf.origin_mw - 0.5 * pmf.step_mw,
            step: pmf.step_mw,
            mass: pmf.mass.clone(),
            cum,
        }
    }

    /// `P(V < x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.lower_edge) / self.step;
        if u <= 0.0 {
            return 0.0;
        }
        let j = u.floor();
        if j >= self.mass.len() as f64 {
            return 1.0;
        }
        let j = j as usize;
        (self.cum[j] + self.mass[j] * (u - j as f64)).clamp(0.0, 1.0)
    }

    /// Upper edge of the last cell.
    pub fn upper_edge(&self) -> f64 {
        self.lower_edge + self.step * self.mass.len() as f64
    }

    pub fn lower_edge(&self) -> f64 {
        self.lower_edge
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        ensure((0.0..=1.0).contains(&p), || {
            format!("quantile level must lie in [0, 1], got {p}")
        })?;
        let first = self.mass.iter().position(|m| *m > 0.0).unwrap_or(0);
        if p == 0.0 {
            return Ok(self.lower_edge + first as f64 * self.step);
        }
        // First cell whose upper-edge cumulative reaches p.
        let j = self.cum[1..].partition_point(|c| *c < p);
        if j >= self.mass.len() {
            let last = self.mass.iter().rposition(|m| *m > 0.0).unwrap_or(0);
            return Ok(self.lower_edge + (last + 1) as f64 * self.step);
        }
        let frac = if self.mass[j] > 0.0 {
            ((p - self.cum[j]) / self.mass[j]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok(self.lower_edge + (j as f64 + frac) * self.step)
    }
}
