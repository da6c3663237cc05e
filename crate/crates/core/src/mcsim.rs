//! Cycle-level Monte Carlo of the relay network.
//!
//! Each cycle draws four fading gains, runs the harvest, computes all four
//! SNRs and flips one biased coin per link. Trials are grouped in fixed-size
//! batches; batch `b` uses the ChaCha8 stream `b` of the run seed, so the
//! outcome sequence depends only on the seed, never on the worker count.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{aaoi, weighted_sum_aaoi, Age, AoiReport, Method};
use crate::channel::{sample_fading, FadingDraw};
use crate::config::{Scenario, Source};
use crate::energy::{available_energy, dest_snr, harvested_energy, EnergyOutcome, Regime};
use crate::error::{Error, Result};
use crate::fbl::{eps_conditional, linearization, LinearizationCoeffs, LinkCode};

/// Trials per generator stream.
pub const BATCH_SIZE: u64 = 10_000;

/// Fraction of cycles discarded before age averaging starts.
pub const WARMUP_FRACTION: f64 = 0.01;

/// Conditional error used for the per-link coin flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DecodeModel {
    #[default]
    ExactQ,
    Linearized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct McOptions {
    pub seed: u64,
    /// Thread count; `None` uses the global pool.
    pub workers: Option<usize>,
    pub model: DecodeModel,
}

impl McOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn model(self, model: DecodeModel) -> Self {
        Self { model, ..self }
    }

    pub fn workers(self, workers: usize) -> Self {
        Self {
            workers: Some(workers),
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub draw: FadingDraw,
    pub energy: EnergyOutcome,
    pub gamma_relay_a: f64,
    pub gamma_relay_b: f64,
    pub gamma_dest_a: f64,
    pub gamma_dest_b: f64,
    pub uplink_ok_a: bool,
    pub uplink_ok_b: bool,
    pub downlink_ok_a: bool,
    pub downlink_ok_b: bool,
    /// B's update reached A.
    pub delivered_a: bool,
    /// A's update reached B.
    pub delivered_b: bool,
}

impl TrialOutcome {
    pub fn delivered(&self, dest: Source) -> bool {
        match dest {
            Source::A => self.delivered_a,
            Source::B => self.delivered_b,
        }
    }

    fn flags(&self) -> Flags {
        let mut bits = 0;
        for (bit, on) in [
            (UP_A, self.uplink_ok_a),
            (UP_B, self.uplink_ok_b),
            (DOWN_A, self.downlink_ok_a),
            (DOWN_B, self.downlink_ok_b),
            (DELIVERED_A, self.delivered_a),
            (DELIVERED_B, self.delivered_b),
        ] {
            if on {
                bits |= bit;
            }
        }
        Flags(bits)
    }
}

const UP_A: u8 = 1;
const UP_B: u8 = 2;
const DOWN_A: u8 = 4;
const DOWN_B: u8 = 8;
const DELIVERED_A: u8 = 16;
const DELIVERED_B: u8 = 32;

/// Compact per-cycle decode record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Flags(u8);

impl Flags {
    fn has(self, bit: u8) -> bool {
        self.0 & bit != 0
    }

    fn delivered(self, dest: Source) -> bool {
        self.has(match dest {
            Source::A => DELIVERED_A,
            Source::B => DELIVERED_B,
        })
    }
}

enum Kernel {
    Exact(LinkCode),
    Linear(LinearizationCoeffs),
}

impl Kernel {
    fn new(code: LinkCode, model: DecodeModel) -> Self {
        match model {
            DecodeModel::ExactQ => Kernel::Exact(code),
            DecodeModel::Linearized if code.k() == 0 => Kernel::Exact(code),
            DecodeModel::Linearized => Kernel::Linear(linearization(&code)),
        }
    }

    fn error(&self, gamma: f64) -> f64 {
        match self {
            Kernel::Exact(code) => eps_conditional(gamma, code),
            Kernel::Linear(c) => c.theta(gamma),
        }
    }
}

/// Per-scenario constants for the inner loop.
struct CycleModel<'a> {
    sc: &'a Scenario,
    // uplink A, uplink B, downlink A, downlink B
    kernels: [Kernel; 4],
}

impl<'a> CycleModel<'a> {
    fn new(sc: &'a Scenario, model: DecodeModel) -> Self {
        Self {
            sc,
            kernels: [
                Kernel::new(sc.uplink_code(Source::A), model),
                Kernel::new(sc.uplink_code(Source::B), model),
                Kernel::new(sc.downlink_code(Source::A), model),
                Kernel::new(sc.downlink_code(Source::B), model),
            ],
        }
    }

    fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialOutcome {
        let sc = self.sc;
        let draw = sample_fading(rng);
        let energy = available_energy(harvested_energy(&draw, sc), sc.harvest());
        let gamma_relay_a = sc.relay_snr(Source::A, draw.g_ar);
        let gamma_relay_b = sc.relay_snr(Source::B, draw.g_br);
        let gamma_dest_a = dest_snr(&draw, &energy, Source::A, sc);
        let gamma_dest_b = dest_snr(&draw, &energy, Source::B, sc);
        // always consume four uniforms so the stream layout is fixed
        let u: [f64; 4] = [rng.random(), rng.random(), rng.random(), rng.random()];
        let gammas = [gamma_relay_a, gamma_relay_b, gamma_dest_a, gamma_dest_b];
        let ok: [bool; 4] = std::array::from_fn(|i| u[i] >= self.kernels[i].error(gammas[i]));
        let on = energy.regime != Regime::Off;
        TrialOutcome {
            draw,
            energy,
            gamma_relay_a,
            gamma_relay_b,
            gamma_dest_a,
            gamma_dest_b,
            uplink_ok_a: ok[0],
            uplink_ok_b: ok[1],
            downlink_ok_a: ok[2] && on,
            downlink_ok_b: ok[3] && on,
            delivered_a: ok[1] && ok[2] && on,
            delivered_b: ok[0] && ok[3] && on,
        }
    }
}

/// Simulates one cycle.
pub fn run_trial<R: Rng + ?Sized>(rng: &mut R, sc: &Scenario, model: DecodeModel) -> TrialOutcome {
    CycleModel::new(sc, model).run(rng)
}

/// Generator for batch `index` of a run.
pub fn batch_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f(rng, len)` for every batch covering `total` trials and returns
/// the results in batch order.
pub fn map_batches<T, F>(total: u64, opts: &McOptions, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let batches = total.div_ceil(BATCH_SIZE);
    let job = || {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let len = BATCH_SIZE.min(total - b * BATCH_SIZE);
                f(&mut batch_rng(opts.seed, b), len)
            })
            .collect::<Vec<T>>()
    };
    match opts.workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::invalid("workers", e.to_string()))?;
            Ok(pool.install(job))
        }
    }
}

/// Trial outcomes in trial order.
pub fn trial_outcomes(sc: &Scenario, trials: u64, opts: &McOptions) -> Result<Vec<TrialOutcome>> {
    let model = CycleModel::new(sc, opts.model);
    let batches = map_batches(trials, opts, |rng, len| (0..len).map(|_| model.run(rng)).collect::<Vec<_>>())?;
    Ok(batches.into_iter().flatten().collect())
}

fn cycle_flags(sc: &Scenario, cycles: u64, opts: &McOptions) -> Result<Vec<Flags>> {
    let model = CycleModel::new(sc, opts.model);
    let batches = map_batches(cycles, opts, |rng, len| {
        (0..len).map(|_| model.run(rng).flags()).collect::<Vec<_>>()
    })?;
    Ok(batches.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessEstimate {
    pub trials: u64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub stderr_a: f64,
    pub stderr_b: f64,
}

impl SuccessEstimate {
    pub fn phi(&self, dest: Source) -> f64 {
        match dest {
            Source::A => self.phi_a,
            Source::B => self.phi_b,
        }
    }

    pub fn stderr(&self, dest: Source) -> f64 {
        match dest {
            Source::A => self.stderr_a,
            Source::B => self.stderr_b,
        }
    }
}

fn binomial(hits: u64, n: u64) -> (f64, f64) {
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Fraction of cycles delivering to each destination.
pub fn estimate_success(sc: &Scenario, trials: u64, opts: &McOptions) -> Result<SuccessEstimate> {
    if trials == 0 {
        return Err(Error::invalid("trials", "must be at least 1"));
    }
    let model = CycleModel::new(sc, opts.model);
    let counts = map_batches(trials, opts, |rng, len| {
        let mut c = (0u64, 0u64);
        for _ in 0..len {
            let t = model.run(rng);
            c.0 += t.delivered_a as u64;
            c.1 += t.delivered_b as u64;
        }
        c
    })?;
    let (a, b) = counts.iter().fold((0, 0), |s, c| (s.0 + c.0, s.1 + c.1));
    let (phi_a, stderr_a) = binomial(a, trials);
    let (phi_b, stderr_b) = binomial(b, trials);
    Ok(SuccessEstimate {
        trials,
        phi_a,
        phi_b,
        stderr_a,
        stderr_b,
    })
}

/// Time-average of one destination's sawtooth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgeSummary {
    /// Cycles inside the averaging window.
    pub cycles: u64,
    pub deliveries: u64,
    pub time_avg_age: Age,
    pub success_rate: f64,
    /// Regenerative standard error over complete inter-delivery periods;
    /// infinite when fewer than two are available.
    pub stderr_age: f64,
}

/// Age process in units of `cycle`: it starts at one cycle, grows linearly
/// and falls back to one cycle at the end of every delivering cycle. The
/// first `warmup` cycles move the state but are not averaged.
pub fn sawtooth_age(delivered: impl IntoIterator<Item = bool>, cycle: f64, warmup: u64) -> AgeSummary {
    let mut age: u64 = 1;
    let mut cycles = 0u64;
    let mut deliveries = 0u64;
    // twice the area in units of cycle², exact in integers
    let mut area2: u128 = 0;
    // regenerative sums over complete inter-delivery periods
    let mut open: Option<(u128, u64)> = None;
    let mut periods: Vec<(u128, u64)> = Vec::new();
    for (i, ok) in delivered.into_iter().enumerate() {
        let piece = 2 * age as u128 + 1;
        let measured = i as u64 >= warmup;
        if measured {
            cycles += 1;
            area2 += piece;
            if let Some((a, l)) = open.as_mut() {
                *a += piece;
                *l += 1;
            }
        }
        if ok {
            age = 1;
            if measured {
                deliveries += 1;
                if let Some(done) = open.take() {
                    periods.push(done);
                }
                open = Some((0, 0));
            }
        } else {
            age += 1;
        }
    }
    let success_rate = if cycles == 0 { 0.0 } else { deliveries as f64 / cycles as f64 };
    if deliveries == 0 {
        return AgeSummary {
            cycles,
            deliveries,
            time_avg_age: Age::Unbounded,
            success_rate,
            stderr_age: f64::INFINITY,
        };
    }
    let mean = 0.5 * area2 as f64 / cycles as f64 * cycle;
    AgeSummary {
        cycles,
        deliveries,
        time_avg_age: Age::Finite(mean),
        success_rate,
        stderr_age: regenerative_stderr(&periods, cycle),
    }
}

fn regenerative_stderr(periods: &[(u128, u64)], cycle: f64) -> f64 {
    let n = periods.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let (sum_r, sum_l) = periods
        .iter()
        .fold((0.0, 0.0), |(r, l), &(a, len)| (r + 0.5 * a as f64, l + len as f64));
    let ratio = sum_r / sum_l;
    let ss: f64 = periods
        .iter()
        .map(|&(a, len)| {
            let d = 0.5 * a as f64 - ratio * len as f64;
            d * d
        })
        .sum();
    let mean_len = sum_l / n as f64;
    (ss / (n - 1) as f64).sqrt() / (mean_len * (n as f64).sqrt()) * cycle
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgeTrace {
    pub cycle_count: u64,
    pub warmup: u64,
    pub cycle_time: f64,
    pub time_avg_age_a: Age,
    pub time_avg_age_b: Age,
    pub success_rate_a: f64,
    pub success_rate_b: f64,
    pub stderr_age_a: f64,
    pub stderr_age_b: f64,
    /// Per-link failure rates over all cycles; downlink failures include
    /// cycles where the relay stayed silent.
    pub eps_relay_a: f64,
    pub eps_relay_b: f64,
    pub eps_dest_a: f64,
    pub eps_dest_b: f64,
}

impl AgeTrace {
    pub fn age(&self, dest: Source) -> Age {
        match dest {
            Source::A => self.time_avg_age_a,
            Source::B => self.time_avg_age_b,
        }
    }

    pub fn stderr(&self, dest: Source) -> f64 {
        match dest {
            Source::A => self.stderr_age_a,
            Source::B => self.stderr_age_b,
        }
    }

    pub fn success_rate(&self, dest: Source) -> f64 {
        match dest {
            Source::A => self.success_rate_a,
            Source::B => self.success_rate_b,
        }
    }

    /// `T/2 + T/φ̂` from this run's own success rate.
    pub fn renewal_prediction(&self, dest: Source) -> Age {
        aaoi(self.cycle_time, self.success_rate(dest))
    }

    /// Converts into a report for `sc`'s weights; `ci_radius` is three
    /// weighted standard errors.
    pub fn to_report(&self, sc: &Scenario) -> AoiReport {
        let (w_a, w_b) = (sc.weight(Source::A), sc.weight(Source::B));
        let weighted_sum = weighted_sum_aaoi(self.time_avg_age_a, self.time_avg_age_b, w_a, w_b);
        let mut spread = 0.0;
        for (w, se) in [(w_a, self.stderr_age_a), (w_b, self.stderr_age_b)] {
            if w > 0.0 {
                spread += w * se;
            }
        }
        AoiReport {
            eps_relay_a: self.eps_relay_a,
            eps_relay_b: self.eps_relay_b,
            eps_dest_a: self.eps_dest_a,
            eps_dest_b: self.eps_dest_b,
            phi_a: self.success_rate_a,
            phi_b: self.success_rate_b,
            aaoi_a: self.time_avg_age_a,
            aaoi_b: self.time_avg_age_b,
            weighted_sum,
            method: Method::MonteCarlo,
            ci_radius: 3.0 * spread,
            cycle_time: self.cycle_time,
        }
    }
}

/// Number of warm-up cycles for a run of `cycles`.
pub fn warmup_cycles(cycles: u64) -> u64 {
    (cycles as f64 * WARMUP_FRACTION).floor() as u64
}

/// Simulates `cycles` transmission cycles and averages both age processes.
pub fn simulate_aoi(sc: &Scenario, cycles: u64, opts: &McOptions) -> Result<AgeTrace> {
    if cycles == 0 {
        return Err(Error::invalid("cycles", "must be at least 1"));
    }
    let flags = cycle_flags(sc, cycles, opts)?;
    let warmup = warmup_cycles(cycles);
    let cycle = sc.cycle_time();
    let a = sawtooth_age(flags.iter().map(|f| f.delivered(Source::A)), cycle, warmup);
    let b = sawtooth_age(flags.iter().map(|f| f.delivered(Source::B)), cycle, warmup);
    let fail = |bit: u8| flags.iter().filter(|f| !f.has(bit)).count() as f64 / cycles as f64;
    Ok(AgeTrace {
        cycle_count: a.cycles,
        warmup,
        cycle_time: cycle,
        time_avg_age_a: a.time_avg_age,
        time_avg_age_b: b.time_avg_age,
        success_rate_a: a.success_rate,
        success_rate_b: b.success_rate,
        stderr_age_a: a.stderr_age,
        stderr_age_b: b.stderr_age,
        eps_relay_a: fail(UP_A),
        eps_relay_b: fail(UP_B),
        eps_dest_a: fail(DOWN_A),
        eps_dest_b: fail(DOWN_B),
    })
}

/// Monte Carlo report with the exact-Q decode model unless `opts` says
/// otherwise.
pub fn mc_report(sc: &Scenario, cycles: u64, opts: &McOptions) -> Result<AoiReport> {
    Ok(simulate_aoi(sc, cycles, opts)?.to_report(sc))
}

/// Empirical `P(γ_dest ≤ z)` at each grid point from `trials` cycles.
pub fn oracle_cdf_dest_snr(sc: &Scenario, dest: Source, z_grid: &[f64], trials: u64, opts: &McOptions) -> Result<Vec<f64>> {
    if trials < 10_000 {
        return Err(Error::invalid("trials", format!("need at least 10000, got {trials}")));
    }
    let batches = map_batches(trials, opts, |rng, len| {
        (0..len)
            .map(|_| {
                let draw = sample_fading(rng);
                let energy = available_energy(harvested_energy(&draw, sc), sc.harvest());
                // keep the same stream layout as a full cycle
                for _ in 0..4 {
                    let _: f64 = rng.random();
                }
                dest_snr(&draw, &energy, dest, sc)
            })
            .collect::<Vec<f64>>()
    })?;
    let mut gammas: Vec<f64> = batches.into_iter().flatten().collect();
    gammas.sort_by(f64::total_cmp);
    Ok(z_grid
        .iter()
        .map(|&z| gammas.partition_point(|&g| g <= z) as f64 / trials as f64)
        .collect())
}

/// First and second moments of the gap between consecutive deliveries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapMoments {
    pub gaps: u64,
    pub mean: f64,
    pub second_moment: f64,
    pub stderr_mean: f64,
    pub stderr_second: f64,
}

/// Moments of the inter-delivery times in a delivery sequence, in seconds.
pub fn interdeparture_moments(delivered: impl IntoIterator<Item = bool>, cycle: f64, min_gaps: u64) -> Result<GapMoments> {
    let mut gaps: Vec<u64> = Vec::new();
    let mut since: Option<u64> = None;
    for ok in delivered {
        if let Some(s) = since.as_mut() {
            *s += 1;
        }
        if ok {
            if let Some(s) = since {
                gaps.push(s);
            }
            since = Some(0);
        }
    }
    let n = gaps.len() as u64;
    if n < min_gaps.max(2) {
        return Err(Error::InsufficientDeliveries {
            observed: n,
            required: min_gaps.max(2),
        });
    }
    let x: Vec<f64> = gaps.iter().map(|&g| g as f64 * cycle).collect();
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let second = x.iter().map(|v| v * v).sum::<f64>() / nf;
    let var1 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let var2 = x.iter().map(|v| (v * v - second).powi(2)).sum::<f64>() / (nf - 1.0);
    Ok(GapMoments {
        gaps: n,
        mean,
        second_moment: second,
        stderr_mean: (var1 / nf).sqrt(),
        stderr_second: (var2 / nf).sqrt(),
    })
}

/// Simulated inter-delivery moments at `dest`; needs at least 100 gaps.
pub fn moment_check_interdeparture(sc: &Scenario, dest: Source, cycles: u64, opts: &McOptions) -> Result<GapMoments> {
    let flags = cycle_flags(sc, cycles, opts)?;
    interdeparture_moments(flags.iter().map(|f| f.delivered(dest)), sc.cycle_time(), 100)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SystemConfig;
    use approx::assert_abs_diff_eq;

    fn scenario(f: impl FnOnce(&mut SystemConfig)) -> Scenario {
        let mut cfg = SystemConfig::default();
        f(&mut cfg);
        Scenario::new(cfg).unwrap()
    }

    #[test]
    fn full_power_split_never_delivers() {
        let sc = scenario(|c| c.rho = 1.0);
        let mut rng = batch_rng(1, 0);
        for _ in 0..1000 {
            let t = run_trial(&mut rng, &sc, DecodeModel::ExactQ);
            assert!(!t.delivered_a && !t.delivered_b);
            assert_eq!(t.gamma_relay_a, 0.0);
        }
    }

    #[test]
    fn error_free_limit() {
        let sc = scenario(|c| {
            c.e_max = 1e9;
            c.p_a = 1e6;
            c.p_b = 1e6;
        });
        let est = estimate_success(&sc, 100_000, &McOptions::with_seed(2)).unwrap();
        assert!(est.phi_a > 0.999 && est.phi_b > 0.999, "{est:?}");
    }

    #[test]
    fn vanishing_power_never_delivers() {
        let sc = scenario(|c| {
            c.p_a = 1e-9;
            c.p_b = 1e-9;
        });
        let est = estimate_success(&sc, 20_000, &McOptions::with_seed(2)).unwrap();
        assert_eq!((est.phi_a, est.phi_b), (0.0, 0.0));
    }

    #[test]
    fn trial_invariants() {
        let sc = scenario(|c| c.e_max = 3e-9);
        let outcomes = trial_outcomes(&sc, 30_000, &McOptions::with_seed(4)).unwrap();
        let mut regimes = [0usize; 3];
        for t in &outcomes {
            let back = t.energy.relay_power_w * sc.harvest().t2;
            assert!((back - t.energy.available_j).abs() <= f64::EPSILON * t.energy.available_j);
            match t.energy.regime {
                Regime::Off => {
                    regimes[0] += 1;
                    assert!(!t.delivered_a && !t.delivered_b);
                    assert_eq!((t.gamma_dest_a, t.gamma_dest_b), (0.0, 0.0));
                }
                Regime::Linear => regimes[1] += 1,
                Regime::Capped => regimes[2] += 1,
            }
            assert_eq!(t.delivered_a, t.uplink_ok_b && t.downlink_ok_a);
        }
        assert!(regimes.iter().all(|&c| c > 0), "{regimes:?}");
    }

    #[test]
    fn outcomes_independent_of_worker_count() {
        let sc = Scenario::new(SystemConfig::default()).unwrap();
        let opts = McOptions::with_seed(9);
        let one = trial_outcomes(&sc, 35_000, &opts.workers(1)).unwrap();
        let four = trial_outcomes(&sc, 35_000, &opts.workers(4)).unwrap();
        assert_eq!(one, four);
        let t1 = simulate_aoi(&sc, 35_000, &opts.workers(1)).unwrap();
        let t3 = simulate_aoi(&sc, 35_000, &opts.workers(3)).unwrap();
        assert_eq!(t1, t3);
        let other = trial_outcomes(&sc, 100, &McOptions::with_seed(10)).unwrap();
        assert_ne!(&one[..100], &other[..]);
    }

    #[test]
    fn always_delivered_sawtooth() {
        let s = sawtooth_age(std::iter::repeat(true).take(10_000), 12e-3, 100);
        assert_abs_diff_eq!(s.time_avg_age.as_f64(), 18e-3, epsilon = 1e-15);
        assert_eq!(s.success_rate, 1.0);
        assert_eq!(s.cycles, 9_900);
    }

    #[test]
    fn alternating_sawtooth() {
        // ages cycle through 1T and 2T at the start of each cycle: mean 2T
        let s = sawtooth_age((0..10_000).map(|i| i % 2 == 1), 1.0, 0);
        assert_abs_diff_eq!(s.time_avg_age.as_f64(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.success_rate, 0.5, epsilon = 1e-12);
        assert!(s.stderr_age < 1e-12);
    }

    #[test]
    fn never_delivered_is_unbounded() {
        let s = sawtooth_age(std::iter::repeat(false).take(100), 1.0, 1);
        assert_eq!(s.time_avg_age, Age::Unbounded);
        assert_eq!(s.success_rate, 0.0);
        assert!(s.stderr_age.is_infinite());
    }

    #[test]
    fn sawtooth_matches_hand_enumeration() {
        // ages 1,2,3 | 1 | 1,2 ; delivered at cycles 2, 3, 5
        let pattern = [false, false, true, true, false, true];
        let s = sawtooth_age(pattern, 1.0, 0);
        let areas = [1.5, 2.5, 3.5, 1.5, 1.5, 2.5];
        assert_abs_diff_eq!(s.time_avg_age.as_f64(), areas.iter().sum::<f64>() / 6.0, epsilon = 1e-15);
        assert_eq!(s.deliveries, 3);
    }

    #[test]
    fn deterministic_gap_moments() {
        let m = interdeparture_moments(std::iter::repeat(true).take(500), 12e-3, 100).unwrap();
        assert_abs_diff_eq!(m.mean, 12e-3, epsilon = 1e-15);
        assert_abs_diff_eq!(m.second_moment, 144e-6, epsilon = 1e-15);
        let err = interdeparture_moments([true, false, true], 1.0, 100).unwrap_err();
        assert!(matches!(err, Error::InsufficientDeliveries { observed: 1, .. }));
    }

    #[test]
    fn coin_flip_gap_moments() {
        let mut rng = batch_rng(77, 0);
        let flips: Vec<bool> = (0..400_000).map(|_| rng.random::<bool>()).collect();
        let m = interdeparture_moments(flips.iter().copied(), 1.0, 100).unwrap();
        assert!((m.mean - 2.0).abs() < 3.0 * m.stderr_mean, "{m:?}");
        assert!((m.second_moment - 6.0).abs() < 3.0 * m.stderr_second, "{m:?}");
        // same process through the age average: T/2 + T/φ = 2.5T
        let s = sawtooth_age(flips.iter().copied(), 1.0, 4_000);
        assert!((s.time_avg_age.as_f64() - 2.5).abs() < 3.0 * s.stderr_age, "{s:?}");
    }

    #[test]
    fn renewal_identity_at_defaults() {
        let sc = Scenario::new(SystemConfig::default()).unwrap();
        let trace = simulate_aoi(&sc, 200_000, &McOptions::with_seed(5)).unwrap();
        for dest in Source::BOTH {
            let age = trace.age(dest).as_f64();
            let predicted = trace.renewal_prediction(dest).as_f64();
            assert!((age - predicted).abs() <= 3.0 * trace.stderr(dest), "{trace:?}");
            assert!(age >= 1.5 * sc.cycle_time() - 3.0 * trace.stderr(dest));
        }
    }

    #[test]
    fn simulated_moments_match_geometric() {
        let sc = Scenario::new(SystemConfig::default()).unwrap();
        let opts = McOptions::with_seed(6);
        let phi = simulate_aoi(&sc, 200_000, &opts).unwrap().success_rate_a;
        let m = moment_check_interdeparture(&sc, Source::A, 200_000, &opts).unwrap();
        let t = sc.cycle_time();
        assert!((m.mean - t / phi).abs() < 3.0 * m.stderr_mean + 1e-3 * t);
        let second = t * t * (2.0 - phi) / (phi * phi);
        assert!((m.second_moment - second).abs() < 3.0 * m.stderr_second + 1e-3 * t * t);
    }

    #[test]
    fn cdf_oracle_endpoints() {
        let sc = Scenario::new(SystemConfig::default()).unwrap();
        let opts = McOptions::with_seed(8);
        let v = oracle_cdf_dest_snr(&sc, Source::A, &[0.0, f64::INFINITY], 50_000, &opts).unwrap();
        let off = trial_outcomes(&sc, 50_000, &opts)
            .unwrap()
            .iter()
            .filter(|t| t.energy.regime == Regime::Off)
            .count() as f64
            / 50_000.0;
        assert_eq!(v[0], off);
        assert_eq!(v[1], 1.0);
        assert!(oracle_cdf_dest_snr(&sc, Source::A, &[1.0], 10, &opts).is_err());
    }

    #[test]
    fn mc_report_fields() {
        let sc = Scenario::new(SystemConfig::default()).unwrap();
        let r = mc_report(&sc, 50_000, &McOptions::with_seed(1)).unwrap();
        assert_eq!(r.method, Method::MonteCarlo);
        assert!(r.ci_radius > 0.0);
        let phi = (1.0 - r.eps_relay_b) * (1.0 - r.eps_dest_a);
        assert!((phi - r.phi_a).abs() < 0.02);
        let unbounded = mc_report(&scenario(|c| c.rho = 0.0), 20_000, &McOptions::with_seed(1)).unwrap();
        assert_eq!(unbounded.weighted_sum, Age::Unbounded);
    }
}
