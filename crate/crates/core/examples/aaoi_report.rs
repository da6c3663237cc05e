//! Error probabilities and average age at the default operating point,
//! from the closed form, the exact-kernel quadrature and a short simulation.

use swipt_aoi::analytic::{analytic_report, exact_report, AoiReport, DestSnrDistribution};
use swipt_aoi::mcsim::{mc_report, McOptions};
use swipt_aoi::quad::Adaptive;
use swipt_aoi::{Scenario, Source, SystemConfig};

fn show(r: &AoiReport) {
    println!(
        "{:>8}  eps_R(A)={:.4e}  eps_D(A)={:.5}  phi_A={:.5}  aaoi_A={:.4} ms  sum={:.4} ms  ci={:.3} ms",
        r.method.tag(),
        r.eps_relay_a,
        r.eps_dest_a,
        r.phi_a,
        r.aaoi_a.as_f64() * 1e3,
        r.weighted_sum.as_f64() * 1e3,
        r.ci_radius * 1e3,
    );
}

fn main() -> swipt_aoi::Result<()> {
    let p: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("power in watts"));
    let sc = Scenario::new(SystemConfig {
        p_a: p,
        p_b: p,
        ..SystemConfig::default()
    })?;
    println!("P = {p} W, T = {} ms", sc.cycle_time() * 1e3);
    println!("P(relay off) = {:.5}", DestSnrDistribution::new(Source::A, &sc).prob_off());
    show(&analytic_report(&sc));
    show(&exact_report(&sc, &Adaptive::default())?);
    show(&mc_report(&sc, 200_000, &McOptions::with_seed(1))?);
    Ok(())
}
