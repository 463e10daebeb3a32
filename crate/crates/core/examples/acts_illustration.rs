//! LOLE as a function of added firm capacity, and the shift that meets a
//! 3 h target, on a toy fleet and a synthetic winter of demand.

use heat_adequacy::adequacy::LoleEvaluator;
use heat_adequacy::distcalc::{fleet_pmf, FleetSpec, GeneratingUnit};
use heat_adequacy::season::{DayBlocks, DayKey, HOURS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fleet = FleetSpec {
        units: vec![GeneratingUnit { count: 100, ..GeneratingUnit::new(500.0, 0.92) }],
        interconnectors: vec![],
    };
    let pmf = fleet_pmf(&fleet, 10.0)?;

    // Net demand with an evening peak that grows towards mid-winter.
    let n = 120;
    let keys: Vec<DayKey> = (0..n).map(|d| DayKey { winter: 2020, day: d as u32 }).collect();
    let days: Vec<[f64; HOURS]> = (0..n)
        .map(|d| {
            let cold = 1.0 - ((d as f64 - 60.0) / 60.0).powi(2);
            std::array::from_fn(|h| {
                let shape = (-((h as f64 - 17.5) / 3.0).powi(2)).exp();
                34.0 + 4.0 * cold + 6.0 * shape * (0.6 + 0.4 * cold)
            })
        })
        .collect();
    let nd = DayBlocks::new(keys, days)?;

    let eval = LoleEvaluator::new(&pmf, &nd, n as f64)?;
    println!("{:>10} {:>12}", "shift MW", "LOLE h");
    for shift in (-4000..=4000).step_by(1000) {
        println!("{shift:>10} {:>12.4}", eval.lole(shift as f64));
    }
    let sol = eval.acts_mw(3.0)?;
    println!("ACTS for 3 h: {:.1} MW (LOLE there {:.6} h)", sol.shift_mw, sol.lole_h);
    Ok(())
}
