//! Builds the covariate table from a synthetic weather grid and prints
//! per-column summaries.

use heat_adequacy::covariates::Covariate;
use heat_adequacy::workbench::{prepare_inputs, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = StudyConfig::synthetic_default();
    let inputs = prepare_inputs(&config)?;
    let table = &inputs.table;
    println!(
        "{} days over winters {:?}; {} hours outside the season, {} incomplete days",
        table.n_days(),
        table.winters(),
        inputs.build.hours_outside_season,
        inputs.build.incomplete_days
    );
    println!("{:<12} {:>10} {:>10} {:>10}", "covariate", "min", "mean", "max");
    for c in Covariate::ALL {
        let v: Vec<f64> = table.column(c).filter(|v| v.is_finite()).collect();
        if v.is_empty() {
            println!("{:<12} {:>10}", c.name(), "unset");
            continue;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("{:<12} {lo:>10.3} {mean:>10.3} {hi:>10.3}", c.name());
    }
    Ok(())
}
