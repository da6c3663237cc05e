//! Weighted-sum age against source power for three distances, written as a
//! CSV plus one plot-data file per curve.

use swipt_aoi::analytic::Method;
use swipt_aoi::sweep::{emit_plotdata, parse_grid, run_sweep, write_sweep_file, Axis, Series, SweepSpec};
use swipt_aoi::SystemConfig;

fn main() -> swipt_aoi::Result<()> {
    let out_dir = std::env::temp_dir().join("swipt-aoi-power-sweep");
    std::fs::create_dir_all(&out_dir)?;
    let mut spec = SweepSpec::new(
        Axis::Power,
        parse_grid("0.01:10:20:log", Axis::Power)?,
        vec![Method::ClosedForm, Method::ExactQuadrature],
    );
    spec.series = [30, 45, 60]
        .iter()
        .map(|d| Series {
            label: format!("d{d}"),
            overrides: vec![("d_ar".into(), d.to_string()), ("d_br".into(), d.to_string())],
        })
        .collect();
    let outcome = run_sweep(&SystemConfig::default(), &spec)?;
    for row in &outcome.rows {
        let ws = row.results[0].report.weighted_sum.as_f64();
        println!("{:<4} P = {:>8.4} W  sum AAoI = {:>12.4} ms", row.series, row.x, ws * 1e3);
    }
    let csv = out_dir.join("power.csv");
    write_sweep_file(&outcome, &csv)?;
    for f in emit_plotdata(&csv, &out_dir, None)? {
        println!("{}", f.display());
    }
    Ok(())
}
