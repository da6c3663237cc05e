//! Downlink SNR distribution from the quadrature decomposition next to the
//! empirical CDF of simulated cycles.

use swipt_aoi::analytic::{DestSnrDistribution, GcqSettings};
use swipt_aoi::mcsim::{oracle_cdf_dest_snr, McOptions};
use swipt_aoi::quad::GaussChebyshev;
use swipt_aoi::validation::dkw_band;
use swipt_aoi::{Scenario, Source, SystemConfig};

fn main() -> swipt_aoi::Result<()> {
    let sc = Scenario::new(SystemConfig::default())?;
    let dist = DestSnrDistribution::new(Source::B, &sc);
    let rule = GaussChebyshev::new(GcqSettings::default().nodes_m);
    let grid: Vec<f64> = vec![0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0];
    let trials = 1_000_000;
    let empirical = oracle_cdf_dest_snr(&sc, Source::B, &grid, trials, &McOptions::with_seed(3))?;
    println!("{:>6} {:>10} {:>10} {:>10}", "z", "analytic", "empirical", "gap");
    for (z, e) in grid.iter().zip(&empirical) {
        let a = dist.cdf_gcq(*z, &rule);
        println!("{z:>6.2} {a:>10.6} {e:>10.6} {:>10.2e}", (a - e).abs());
    }
    println!("99% DKW band for {trials} samples: {:.3e}", dkw_band(trials, 0.01));
    Ok(())
}
