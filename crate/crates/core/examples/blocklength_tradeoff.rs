//! Age against blocklength and payload size. A longer block lowers the
//! error but lengthens the cycle.

use swipt_aoi::analytic::analytic_report;
use swipt_aoi::{Scenario, SystemConfig};

fn main() -> swipt_aoi::Result<()> {
    for p in [0.3, 1.0, 10.0] {
        println!("P = {p} W");
        for n in [40u32, 60, 80, 100, 150, 200, 300, 400, 600] {
            let sc = Scenario::new(SystemConfig {
                p_a: p,
                p_b: p,
                n_ar: n,
                n_br: n,
                n_ra: n,
                n_rb: n,
                ..SystemConfig::default()
            })?;
            let r = analytic_report(&sc);
            println!(
                "  n = {n:>3}  T = {:>5.1} ms  phi = {:.4}  sum AAoI = {:.3} ms",
                sc.cycle_time() * 1e3,
                r.phi_a,
                r.weighted_sum.as_f64() * 1e3
            );
        }
    }
    println!("payload size at n = 200, P = 10 W:");
    for k in [16u32, 32, 64, 128] {
        let sc = Scenario::new(SystemConfig {
            p_a: 10.0,
            p_b: 10.0,
            k_ar: k,
            k_br: k,
            k_ra: k,
            k_rb: k,
            ..SystemConfig::default()
        })?;
        println!("  k = {k:>3}  sum AAoI = {:.4} ms", analytic_report(&sc).weighted_sum.as_f64() * 1e3);
    }
    Ok(())
}
