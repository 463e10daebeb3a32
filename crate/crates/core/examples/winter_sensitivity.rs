//! Conditional ACTS per climate winter against that winter's temperature
//! anomaly.

use heat_adequacy::workbench::{run_study, winter_climate, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let result = run_study(&StudyConfig::synthetic_default())?;
    let climate = winter_climate(&result.hindcasts.table);
    for cell in &result.scenarios.cells {
        let Some(r) = &cell.report else { continue };
        println!("{} (ACTS {:.3} GW)", cell.label, r.acts_gw);
        for w in &r.conditional {
            let anomaly = climate.iter().find(|c| c.winter == w.winter).map_or(f64::NAN, |c| c.anomaly_c);
            println!("  {}: anomaly {anomaly:>+6.2} C, ACTS change {:>+7.3} GW", w.winter, w.change_gw);
        }
    }
    Ok(())
}
