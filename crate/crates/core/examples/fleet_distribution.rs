//! Builds a small conventional fleet with one interconnector and prints its
//! available-capacity distribution.

use heat_adequacy::distcalc::{fleet_pmf, quantile, FleetSpec, GeneratingUnit, Interconnector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fleet = FleetSpec {
        units: vec![
            GeneratingUnit { count: 20, ..GeneratingUnit::new(450.0, 0.9) },
            GeneratingUnit { count: 10, ..GeneratingUnit::new(100.0, 0.95) },
        ],
        interconnectors: vec![Interconnector::new(1000.0, 0.2, 0.8)],
    };
    let pmf = fleet_pmf(&fleet, 10.0)?;
    println!("{} units, installed {:.0} MW", fleet.unit_count(), fleet.max_capacity_mw());
    println!("mean {:.1} MW, sd {:.1} MW, total mass {:.12}", pmf.mean(), pmf.variance().sqrt(), pmf.total());
    for p in [0.001, 0.01, 0.1, 0.5, 0.9] {
        println!("  P(X < x) = {p:<6} at x = {:.0} MW", quantile(&pmf, p)?);
    }
    let cdf = pmf.cdf_table();
    for x in [7000.0, 8000.0, 9000.0, 10000.0] {
        println!("  P(X < {x:.0}) = {:.3e}", cdf.eval(x));
    }
    Ok(())
}
