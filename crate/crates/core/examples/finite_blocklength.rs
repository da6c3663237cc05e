//! Normal-approximation block error against its linear surrogate for a
//! 32-bit update in 200 channel uses.

use swipt_aoi::fbl::{capacity, dispersion, eps_conditional, linearization, LinkCode};

fn main() -> swipt_aoi::Result<()> {
    let code = LinkCode::new(200, 32)?;
    let c = linearization(&code);
    println!("rate {:.3} bit/use", code.rate());
    println!("psi = {:.6}  beta = {:.6}  window = [{:.6}, {:.6}]", c.psi, c.beta, c.phi_low, c.delta_high);
    println!("{:>8} {:>8} {:>8} {:>12} {:>12}", "snr", "C", "V", "eps", "theta");
    for i in 0..=12 {
        let g = 0.02 * i as f64;
        println!(
            "{g:>8.3} {:>8.4} {:>8.4} {:>12.4e} {:>12.4e}",
            capacity(g)?,
            dispersion(g)?,
            eps_conditional(g, &code),
            c.theta(g)
        );
    }
    println!("\nerror at snr 0.2 for growing blocks at the same rate:");
    for n in [50u32, 100, 200, 400, 800] {
        let code = LinkCode::new(n, n * 4 / 25)?;
        println!("  n = {n:>4}: {:.3e}", eps_conditional(0.2, &code));
    }
    Ok(())
}
