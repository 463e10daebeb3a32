//! Contrasts the explicit and implicit demand models cell by cell: equal
//! Peak Demand by construction, different ACTS.

use heat_adequacy::adequacy::ModelKind;
use heat_adequacy::workbench::{run_study, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let result = run_study(&StudyConfig::synthetic_default())?;
    let s = &result.scenarios;
    println!("{:<10} {:>4} {:>9} {:>9} {:>9} {:>9} {:>8}", "profile", "cop", "PD exp", "PD imp", "ACTS exp", "ACTS imp", "bias");
    for cell in s.cells.iter().filter(|c| c.kind == ModelKind::Explicit) {
        let (Some(e), Some(i)) = (
            s.report(ModelKind::Explicit, &cell.profile, cell.cop),
            s.report(ModelKind::Implicit, &cell.profile, cell.cop),
        ) else {
            continue;
        };
        println!(
            "{:<10} {:>4} {:>9.2} {:>9.2} {:>9.3} {:>9.3} {:>8.3}",
            cell.profile,
            cell.cop,
            e.peak_demand_gw,
            i.peak_demand_gw,
            e.acts_gw,
            i.acts_gw,
            i.bias_gw.unwrap_or(f64::NAN)
        );
    }
    for c in &result.costs {
        println!("{}/cop{}: bias {:.3} GW costs {}", c.profile, c.cop, c.bias_gw, c.rendered);
    }
    Ok(())
}
