//! Cross-checks between the analytic chain and the simulator.
//!
//! Every check compares a measured gap against a tolerance; the whole set
//! is written to `validate.csv` with the same formatting on every run.

use std::io::Write;
use std::path::Path;

use crate::analytic::{analytic_report, DestSnrDistribution, GcqSettings};
use crate::config::{Scenario, Source, SystemConfig};
use crate::error::Result;
use crate::mcsim::{estimate_success, oracle_cdf_dest_snr, simulate_aoi, DecodeModel, McOptions};
use crate::quad::GaussChebyshev;
use crate::sweep::{fmt_full, write_comment_header};

/// Sup-distance allowed between an empirical CDF of `n` samples and the
/// true CDF at confidence `1 - alpha`.
pub fn dkw_band(n: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub reference: f64,
    /// `|measured - reference|`, or the statistic itself for sup-gaps.
    pub gap: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, reference: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            reference,
            gap: (measured - reference).abs(),
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.gap <= self.tolerance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidateOptions {
    /// Trials for the CDF and success-probability checks.
    pub trials: u64,
    /// Cycles for the age checks.
    pub cycles: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            cycles: 1_000_000,
            seed: 1,
            workers: None,
        }
    }
}

impl ValidateOptions {
    fn mc(&self, model: DecodeModel) -> McOptions {
        McOptions {
            seed: self.seed,
            workers: self.workers,
            model,
        }
    }
}

/// 50-point grid over the bulk of the downlink SNR law, zero included.
pub fn cdf_grid() -> Vec<f64> {
    (0..50).map(|i| 0.4 * i as f64).collect()
}

/// Sup-gap between the quadrature CDF and the empirical CDF at `dest`.
pub fn check_cdf(sc: &Scenario, dest: Source, opts: &ValidateOptions) -> Result<Check> {
    let grid = cdf_grid();
    let empirical = oracle_cdf_dest_snr(sc, dest, &grid, opts.trials, &opts.mc(DecodeModel::ExactQ))?;
    let dist = DestSnrDistribution::new(dest, sc);
    let rule = GaussChebyshev::new(GcqSettings::from_scenario(sc).nodes_m);
    let sup = grid
        .iter()
        .zip(&empirical)
        .map(|(&z, &e)| (dist.cdf_gcq(z, &rule) - e).abs())
        .fold(0.0, f64::max);
    let band = dkw_band(opts.trials, 0.01);
    Ok(Check {
        name: format!("cdf_sup_gap_{}", tag(dest)),
        measured: sup,
        reference: 0.0,
        gap: sup,
        tolerance: band,
    })
}

/// Analytic success probability against the joint simulation with the
/// linearized kernel.
pub fn check_success(sc: &Scenario, opts: &ValidateOptions) -> Result<Vec<Check>> {
    let est = estimate_success(sc, opts.trials, &opts.mc(DecodeModel::Linearized))?;
    let rep = analytic_report(sc);
    Ok(Source::BOTH
        .iter()
        .map(|&d| {
            Check::new(
                format!("success_{}", tag(d)),
                est.phi(d),
                rep.phi(d),
                (3.0 * est.stderr(d)).max(0.02),
            )
        })
        .collect())
}

/// Time-average age against `T/2 + T/φ̂` from the same run.
pub fn check_renewal(sc: &Scenario, label: &str, opts: &ValidateOptions) -> Result<Vec<Check>> {
    let trace = simulate_aoi(sc, opts.cycles, &opts.mc(DecodeModel::ExactQ))?;
    Ok(Source::BOTH
        .iter()
        .map(|&d| {
            Check::new(
                format!("renewal_{label}_{}", tag(d)),
                trace.age(d).as_f64(),
                trace.renewal_prediction(d).as_f64(),
                3.0 * trace.stderr(d),
            )
        })
        .collect())
}

/// Age floor at high power: the analytic sum inside [18.0, 18.2] ms and the
/// simulated sum within three standard errors of it.
pub fn check_floor(base: &SystemConfig, opts: &ValidateOptions) -> Result<Vec<Check>> {
    let sc = Scenario::new(SystemConfig {
        p_a: 10.0,
        p_b: 10.0,
        ..base.clone()
    })?;
    let analytic = analytic_report(&sc).weighted_sum.as_f64();
    let mc = simulate_aoi(&sc, opts.cycles, &opts.mc(DecodeModel::ExactQ))?.to_report(&sc);
    let floor_mid = 18.1e-3;
    Ok(vec![
        Check::new("floor_analytic", analytic, floor_mid, 0.1e-3),
        Check::new("floor_mc", mc.weighted_sum.as_f64(), analytic, mc.ci_radius),
    ])
}

/// Low-power companion of the default point used by the renewal check.
pub fn low_power(base: &SystemConfig) -> SystemConfig {
    SystemConfig {
        p_a: 0.05,
        p_b: 0.05,
        ..base.clone()
    }
}

/// Runs all checks on `base`.
pub fn run_validation(base: &SystemConfig, opts: &ValidateOptions) -> Result<Vec<Check>> {
    let sc = Scenario::new(base.clone())?;
    let mut checks = vec![check_cdf(&sc, Source::A, opts)?];
    checks.extend(check_success(&sc, opts)?);
    checks.extend(check_renewal(&sc, "default", opts)?);
    checks.extend(check_renewal(&Scenario::new(low_power(base))?, "low_power", opts)?);
    checks.extend(check_floor(base, opts)?);
    Ok(checks)
}

/// CSV with one row per check.
pub fn write_validation_csv<W: Write>(checks: &[Check], base: &SystemConfig, opts: &ValidateOptions, mut out: W) -> Result<()> {
    write_comment_header(
        &mut out,
        &[
            ("trials", opts.trials.to_string()),
            ("cycles", opts.cycles.to_string()),
            ("seed", opts.seed.to_string()),
        ],
        base,
    )?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["check", "measured", "reference", "gap", "tolerance", "pass"])?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            fmt_full(c.measured),
            fmt_full(c.reference),
            fmt_full(c.gap),
            fmt_full(c.tolerance),
            c.passed().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_validation_file(checks: &[Check], base: &SystemConfig, opts: &ValidateOptions, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_validation_csv(checks, base, opts, std::io::BufWriter::new(file))
}

fn tag(d: Source) -> &'static str {
    match d {
        Source::A => "a",
        Source::B => "b",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dkw_band_value() {
        assert!((dkw_band(1_000_000, 0.01) - 1.6276e-3).abs() < 1e-7);
    }

    #[test]
    fn check_pass_rule() {
        assert!(Check::new("x", 1.0, 1.04, 0.05).passed());
        assert!(!Check::new("x", 1.0, 1.2, 0.05).passed());
        assert!(!Check::new("x", f64::INFINITY, 1.0, 0.05).passed());
    }

    #[test]
    fn small_run_is_reproducible() {
        let opts = ValidateOptions {
            trials: 20_000,
            cycles: 20_000,
            seed: 4,
            workers: Some(2),
        };
        let base = SystemConfig::default();
        let a = run_validation(&base, &opts).unwrap();
        let b = run_validation(&base, &ValidateOptions { workers: Some(5), ..opts }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 9);
        let mut buf = Vec::new();
        write_validation_csv(&a, &base, &opts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\ncheck,measured,reference,gap,tolerance,pass\n"));
    }
}
