//! Runs the default synthetic study and prints the adequacy summary.

use heat_adequacy::adequacy::ModelKind;
use heat_adequacy::workbench::{run_study, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = StudyConfig::synthetic_default();
    let result = run_study(&config)?;
    println!("{:<28} {:>9} {:>9} {:>9} {:>8}", "cell", "LOLE h", "ACTS GW", "PD GW", "bias GW");
    for cell in &result.scenarios.cells {
        let Some(r) = &cell.report else {
            println!("{:<28} failed: {}", cell.label, cell.error.as_deref().unwrap_or(""));
            continue;
        };
        let bias = r.bias_gw.map(|b| format!("{b:8.3}")).unwrap_or_default();
        println!(
            "{:<28} {:>9.3} {:>9.3} {:>9.2} {bias}",
            cell.label, r.lole_h, r.acts_gw, r.peak_demand_gw
        );
    }
    if let Some(rocs) = result.scenarios.rocs_gw {
        println!("RoCS across explicit cells: {rocs:.3} GW");
    }
    if let Some(c) = &result.headline_cost {
        println!("cost of bias for {}/cop{}: {} over {} years", c.profile, c.cop, c.rendered, c.years);
    }
    let implicit = result.scenarios.cells.iter().filter(|c| c.kind == ModelKind::Implicit).count();
    println!("{} files rendered, {implicit} implicit cells", result.files.len());
    Ok(())
}
