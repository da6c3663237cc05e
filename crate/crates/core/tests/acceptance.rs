//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use swipt_aoi::analytic::{
    analytic_report, eps_dest_adaptive, eps_dest_gcq, eps_relay_closed_form, DestSnrDistribution, GcqSettings,
};
use swipt_aoi::channel::exp_cdf;
use swipt_aoi::fbl::linearization;
use swipt_aoi::quad::Adaptive;
use swipt_aoi::sweep::parse_grid;
use swipt_aoi::sweep::Axis;
use swipt_aoi::validation::{check_cdf, check_floor, check_renewal, check_success, low_power, Check, ValidateOptions};
use swipt_aoi::{Scenario, Source, SystemConfig};

fn report(n: u32, pass: bool, detail: impl AsRef<str>) {
    println!("criterion {n}: {} {}", if pass { "PASS" } else { "FAIL" }, detail.as_ref());
}

fn scenario(f: impl FnOnce(&mut SystemConfig)) -> Scenario {
    let mut cfg = SystemConfig::default();
    f(&mut cfg);
    Scenario::new(cfg).expect("valid scenario")
}

fn weighted_sum(sc: &Scenario) -> f64 {
    analytic_report(sc).weighted_sum.as_f64()
}

fn with_power(p: f64, f: impl FnOnce(&mut SystemConfig)) -> Scenario {
    scenario(|c| {
        c.p_a = p;
        c.p_b = p;
        f(c);
    })
}

fn describe(checks: &[Check]) -> String {
    checks
        .iter()
        .map(|c| format!("{} gap {:.3e} tol {:.3e}", c.name, c.gap, c.tolerance))
        .collect::<Vec<_>>()
        .join("; ")
}

#[test]
fn criterion_01_relay_closed_form_matches_quadrature() {
    let start = Instant::now();
    let quad = Adaptive::new(1e-12);
    let mut worst: f64 = 0.0;
    for p in [0.01, 0.1, 1.0, 10.0] {
        for d in [10.0, 30.0, 100.0] {
            for (n, k) in [(100, 32), (200, 32), (400, 64)] {
                let sc = scenario(|c| {
                    c.p_a = p;
                    c.d_ar = d;
                    c.n_ar = n;
                    c.k_ar = k;
                });
                let m = sc.relay_snr_mean(Source::A);
                let lc = linearization(&sc.uplink_code(Source::A));
                let oracle = lc.slope()
                    * quad
                        .integrate(lc.phi_low, lc.delta_high, |z| exp_cdf(z / m))
                        .unwrap()
                        .value;
                worst = worst.max((eps_relay_closed_form(Source::A, &sc) - oracle).abs());
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-9 && elapsed < Duration::from_secs(1);
    report(1, pass, format!("max gap {worst:.3e} (tol 1e-9) in {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn criterion_02_dest_gcq_matches_adaptive() {
    let start = Instant::now();
    let sc = Scenario::new(SystemConfig::default()).unwrap();
    let mut worst: f64 = 0.0;
    for dest in Source::BOTH {
        let gcq = eps_dest_gcq(dest, &sc, GcqSettings::uniform(100));
        let reference = eps_dest_adaptive(dest, &sc, &Adaptive::new(1e-10)).unwrap();
        worst = worst.max((gcq - reference).abs());
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-6 && elapsed < Duration::from_secs(5);
    report(2, pass, format!("gap {worst:.3e} (tol 1e-6) in {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn criterion_03_dest_cdf_within_dkw_band() {
    let start = Instant::now();
    let sc = Scenario::new(SystemConfig::default()).unwrap();
    let c = check_cdf(&sc, Source::A, &ValidateOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let pass = c.passed() && elapsed < Duration::from_secs(60);
    report(3, pass, format!("sup gap {:.3e} band {:.3e} in {elapsed:.2?}", c.gap, c.tolerance));
    assert!(pass);
}

#[test]
fn criterion_04_success_probability_against_joint_simulation() {
    let sc = Scenario::new(SystemConfig::default()).unwrap();
    let checks = check_success(&sc, &ValidateOptions::default()).unwrap();
    let pass = checks.iter().all(Check::passed);
    let gaps: Vec<String> = checks
        .iter()
        .map(|c| format!("{} analytic {:.6} mc {:.6}", c.name, c.reference, c.measured))
        .collect();
    report(4, pass, format!("{}; {}", describe(&checks), gaps.join("; ")));
    assert!(pass);
}

#[test]
fn criterion_05_renewal_identity() {
    let start = Instant::now();
    let opts = ValidateOptions::default();
    let mut checks = check_renewal(&Scenario::new(SystemConfig::default()).unwrap(), "default", &opts).unwrap();
    checks.extend(check_renewal(&Scenario::new(low_power(&SystemConfig::default())).unwrap(), "low_power", &opts).unwrap());
    let elapsed = start.elapsed();
    let pass = checks.iter().all(Check::passed) && elapsed < Duration::from_secs(120);
    report(5, pass, format!("{} in {elapsed:.2?}", describe(&checks)));
    assert!(pass);
}

#[test]
fn criterion_06_age_floor_at_high_power() {
    let checks = check_floor(&SystemConfig::default(), &ValidateOptions::default()).unwrap();
    let analytic = checks[0].measured;
    let in_range = (18.0e-3..=18.2e-3).contains(&analytic);
    let pass = in_range && checks[1].passed();
    report(
        6,
        pass,
        format!(
            "analytic {:.4} ms, mc {:.4} ms, 3 stderr {:.4} ms",
            analytic * 1e3,
            checks[1].measured * 1e3,
            checks[1].tolerance * 1e3
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_power_trend() {
    let grid = parse_grid("0.01:10:20:log", Axis::Power).unwrap();
    let near: Vec<f64> = grid.iter().map(|&p| weighted_sum(&with_power(p, |_| {}))).collect();
    let far: Vec<f64> = grid
        .iter()
        .map(|&p| {
            weighted_sum(&with_power(p, |c| {
                c.d_ar = 60.0;
                c.d_br = 60.0;
            }))
        })
        .collect();
    let nonincreasing = near.windows(2).all(|w| w[1] <= w[0]);
    let farther_worse = near.iter().zip(&far).all(|(n, f)| f > n);
    let pass = nonincreasing && farther_worse;
    report(
        7,
        pass,
        format!(
            "nonincreasing {nonincreasing}, d=60 above d=30 everywhere {farther_worse}; at 10 W {:.4} vs {:.4} ms",
            near[19] * 1e3,
            far[19] * 1e3
        ),
    );
    assert!(pass);
}

const BLOCKLENGTHS: [u32; 9] = [40, 60, 80, 100, 150, 200, 300, 400, 600];

fn blocklength_curve(p: f64) -> Vec<f64> {
    BLOCKLENGTHS
        .iter()
        .map(|&n| {
            weighted_sum(&with_power(p, |c| {
                c.n_ar = n;
                c.n_br = n;
                c.n_ra = n;
                c.n_rb = n;
            }))
        })
        .collect()
}

/// Lowest power on a coarse grid whose default-blocklength downlink error
/// lies in [0.05, 0.5].
fn low_power_setting() -> f64 {
    let grid = parse_grid("0.05:10:60:log", Axis::Power).unwrap();
    grid.into_iter()
        .find(|&p| {
            let e = eps_dest_gcq(Source::A, &with_power(p, |_| {}), GcqSettings::default());
            (0.05..=0.5).contains(&e)
        })
        .expect("some power puts the error in range")
}

#[test]
fn criterion_08_blocklength_trend() {
    let p_low = low_power_setting();
    let eps = eps_dest_gcq(Source::A, &with_power(p_low, |_| {}), GcqSettings::default());
    let low = blocklength_curve(p_low);
    let (arg, min) = low
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
    let interior = arg > 0 && arg < low.len() - 1 && min < low[0] && min < low[low.len() - 1];
    let high = blocklength_curve(10.0);
    let from_100 = BLOCKLENGTHS.iter().position(|&n| n == 100).unwrap();
    let high_nondecreasing = high[from_100..].windows(2).all(|w| w[1] >= w[0]);
    let pass = interior && high_nondecreasing;
    let curve: Vec<String> = BLOCKLENGTHS
        .iter()
        .zip(&low)
        .map(|(n, v)| format!("{n}:{:.3}", v * 1e3))
        .collect();
    report(
        8,
        pass,
        format!(
            "P = {p_low:.4} W (eps_dest {eps:.3}): argmin n = {}, interior {interior}; 10 W nondecreasing from n=100 {high_nondecreasing}; ms [{}]",
            BLOCKLENGTHS[arg],
            curve.join(" ")
        ),
    );
    assert!(pass);
}

fn payload_curve(p: f64) -> Vec<f64> {
    [16u32, 32, 64, 128]
        .iter()
        .map(|&k| {
            weighted_sum(&with_power(p, |c| {
                c.k_ar = k;
                c.k_br = k;
                c.k_ra = k;
                c.k_rb = k;
            }))
        })
        .collect()
}

#[test]
fn criterion_09_payload_trend() {
    let p_low = low_power_setting();
    let low = payload_curve(p_low);
    let nondecreasing = low.windows(2).all(|w| w[1] >= w[0]);
    let high = payload_curve(10.0);
    let lo = high.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = high.iter().copied().fold(0.0, f64::max);
    let spread = (hi - lo) / lo;
    let pass = nondecreasing && spread < 0.01;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{:.4}", x * 1e3)).collect::<Vec<_>>().join(" ");
    report(
        9,
        pass,
        format!(
            "low power {p_low:.4} W nondecreasing {nondecreasing} [{}] ms; 10 W spread {:.2}% (limit 1%) [{}] ms",
            fmt(&low),
            spread * 100.0,
            fmt(&high)
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_minimum_power_trend() {
    let grid = parse_grid("1e-8:1e-4:41:log", Axis::PMin).unwrap();
    let mut ages = Vec::new();
    let mut saturated = None;
    for &pm in &grid {
        let sc = scenario(|c| c.p_min = pm);
        let age = weighted_sum(&sc);
        ages.push(age);
        let off = DestSnrDistribution::new(Source::A, &sc).prob_off();
        if saturated.is_none() && off > 0.99 {
            saturated = Some((pm, off, age, eps_dest_gcq(Source::A, &sc, GcqSettings::default())));
        }
    }
    let nondecreasing = ages.windows(2).all(|w| w[1] >= w[0]);
    let floor = 1.5 * Scenario::new(SystemConfig::default()).unwrap().cycle_time();
    let (pm, off, age, eps) = saturated.expect("grid reaches P(off) > 0.99");
    let high = age > 10.0 * floor && eps > 0.99;
    let pass = nondecreasing && high;
    report(
        10,
        pass,
        format!(
            "nondecreasing {nondecreasing}; first P(off) > 0.99 at p_min {pm:.3e} W (P(off) {off:.4}, eps_dest {eps:.4}): age {:.1} ms vs 10x floor {:.0} ms",
            age * 1e3,
            10.0 * floor * 1e3
        ),
    );
    assert!(pass);
}

fn run_validate(out: &Path, workers: usize) -> Vec<u8> {
    let status = Command::new(env!("CARGO_BIN_EXE_swipt-aoi"))
        .args(["validate", "--seed", "11", "--workers", &workers.to_string(), "--out"])
        .arg(out)
        .output()
        .expect("binary runs");
    assert!(status.status.code().is_some());
    std::fs::read(out.join("validate.csv")).expect("validate.csv written")
}

#[test]
fn criterion_11_validate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let one = run_validate(&dir.path().join("w1"), 1);
    let many = run_validate(&dir.path().join("w4"), 4);
    let again = run_validate(&dir.path().join("w4b"), 4);
    let pass = !one.is_empty() && one == many && many == again;
    report(11, pass, format!("{} bytes, identical across 1/4/4 workers: {pass}", one.len()));
    assert!(pass);
}
