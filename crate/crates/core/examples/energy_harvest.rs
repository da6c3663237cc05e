//! Harvested energy, the three relay regimes and the resulting downlink SNR.

use swipt_aoi::analytic::DestSnrDistribution;
use swipt_aoi::channel::FadingDraw;
use swipt_aoi::energy::{available_energy, dest_snr, harvested_energy};
use swipt_aoi::{Scenario, Source, SystemConfig};

fn main() -> swipt_aoi::Result<()> {
    let sc = Scenario::new(SystemConfig {
        e_max: 5e-9,
        ..SystemConfig::default()
    })?;
    let h = sc.harvest();
    println!("T1 = {} ms, T2 = {} ms", h.t1 * 1e3, h.t2 * 1e3);
    println!("E_min = {:e} J, E_max = {:e} J", h.e_min(), h.e_max);
    println!("{:>6} {:>12} {:>8} {:>12} {:>10}", "g", "E_R [J]", "regime", "P_R [W]", "snr_A");
    for g in [0.05, 0.15, 0.3, 1.0, 2.0, 4.0] {
        let draw = FadingDraw::uniform(g);
        let out = available_energy(harvested_energy(&draw, &sc), h);
        println!(
            "{g:>6.2} {:>12.4e} {:>8} {:>12.4e} {:>10.4}",
            out.harvested_j,
            format!("{:?}", out.regime),
            out.relay_power_w,
            dest_snr(&draw, &out, Source::A, &sc)
        );
    }
    for rho in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let sc = Scenario::new(SystemConfig {
            rho,
            ..SystemConfig::default()
        })?;
        println!("rho = {rho}: P(relay off) = {:.4}", DestSnrDistribution::new(Source::A, &sc).prob_off());
    }
    Ok(())
}
