//! Converts synthetic gas demand into heat pump load under each bundled
//! profile and compares the peak against the implicit scaled baseline.

use heat_adequacy::heatmodel::{
    calibrate_k_peak, explicit_demand, implicit_demand, load_duration_curve, HeatProfile, HeatScenario,
};
use heat_adequacy::workbench::{prepare_inputs, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = StudyConfig::synthetic_default();
    let inputs = prepare_inputs(&config)?;
    let baseline = inputs.dataset.electrical();
    let base_peak = baseline.max();
    println!("baseline peak {base_peak:.2} GW over {} days", baseline.n_days());

    for name in HeatProfile::BUNDLED {
        let profile = HeatProfile::bundled(name).expect("bundled");
        for cop in [2.0, 3.0] {
            let scenario = HeatScenario::new(profile.clone(), cop, 0.2)?;
            let explicit = explicit_demand(&inputs.dataset, &scenario)?;
            let k = calibrate_k_peak(explicit.max(), base_peak)?;
            let implicit = implicit_demand(&baseline, k)?;
            let ldc_e = load_duration_curve(&explicit)?;
            let ldc_i = load_duration_curve(&implicit)?;
            println!(
                "{name:<8} cop{cop}: peak hour {:>2}, k {k:.3}, 1% duration explicit {:.2} GW implicit {:.2} GW",
                profile.peak_hour(),
                ldc_e.at_duration(0.01),
                ldc_i.at_duration(0.01)
            );
        }
    }
    Ok(())
}
