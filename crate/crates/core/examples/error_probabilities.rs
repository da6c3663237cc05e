//! Uplink and downlink block error probabilities: closed form and GCQ
//! against adaptive quadrature with the linear and the exact kernel.

use swipt_aoi::analytic::{
    eps_dest_adaptive, eps_dest_gcq, eps_exact_numeric, eps_relay_closed_form, GcqSettings, LinkRef,
};
use swipt_aoi::quad::Adaptive;
use swipt_aoi::{Scenario, Source, SystemConfig};

fn main() -> swipt_aoi::Result<()> {
    let quad = Adaptive::default();
    println!("{:>7} {:>12} {:>12} {:>10} {:>10} {:>10}", "P [W]", "relay lin", "relay exact", "dest gcq", "dest adapt", "dest exact");
    for p in [0.05, 0.1, 0.3, 1.0, 3.0, 10.0] {
        let sc = Scenario::new(SystemConfig {
            p_a: p,
            p_b: p,
            ..SystemConfig::default()
        })?;
        println!(
            "{p:>7.2} {:>12.4e} {:>12.4e} {:>10.6} {:>10.6} {:>10.6}",
            eps_relay_closed_form(Source::A, &sc),
            eps_exact_numeric(LinkRef::Relay(Source::A), &sc, &quad)?,
            eps_dest_gcq(Source::A, &sc, GcqSettings::default()),
            eps_dest_adaptive(Source::A, &sc, &Adaptive::new(1e-11))?,
            eps_exact_numeric(LinkRef::Dest(Source::A), &sc, &quad)?,
        );
    }

    let sc = Scenario::new(SystemConfig::default())?;
    println!("\nGCQ refinement at the default point:");
    for k in [5usize, 10, 20, 50, 100, 200] {
        println!("  V = M = {k:>3}: {:.12}", eps_dest_gcq(Source::A, &sc, GcqSettings::uniform(k)));
    }
    Ok(())
}
