//! Analytic error probabilities and average age.
//!
//! The uplink error probability has a closed form because the relay SNR is
//! exponential. The downlink SNR is `ρηT₁ I α g / (T₂σ²)` gated by the
//! harvest thresholds, where `I = P_A α_AR g_AR + P_B α_BR g_BR` is
//! hypoexponential. Its survival function splits into
//!
//! ```text
//! L₁ = P(Ω₁ < I < Ω₂, I g > Ω₃) = L₃ + (F_I(Ω₂) - F_I(Ω₁)) (1 - F_g(Ω₃/Ω₁))
//! L₂ = P(I ≥ Ω₂, g > Ω₄)        = (1 - F_I(Ω₂)) (1 - F_g(Ω₄))
//! L₃ = ∫_{Ω₃/Ω₂}^{Ω₃/Ω₁} f_g(x) (F_I(Ω₂) - F_I(Ω₃/x)) dx
//! ```
//!
//! and `F(z) = 1 - L₁ - L₂`. Both the `L₃` integral and the averaging of
//! `F` over the linearization window use Gauss-Chebyshev quadrature.

use std::cell::Cell;

use crate::channel::{exp_pdf, exp_sf, hypoexp_cdf, hypoexp_sf, HypoExpParams};
use crate::config::{Scenario, Source};
use crate::error::{Error, Result};
use crate::fbl::{eps_conditional, eps_conditional_derivative, linearization, LinearizationCoeffs, LinkCode};
use crate::quad::{Adaptive, GaussChebyshev};

/// `e^{-x}` is below 5e-18 past this many unit-mean fading gains.
const FADING_TAIL: f64 = 40.0;

/// Node counts for the two quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GcqSettings {
    /// Nodes for the error-probability integral over the SNR window.
    pub nodes_v: usize,
    /// Nodes for the inner integral over the downlink fading gain.
    pub nodes_m: usize,
}

impl Default for GcqSettings {
    fn default() -> Self {
        Self {
            nodes_v: 100,
            nodes_m: 100,
        }
    }
}

impl GcqSettings {
    pub fn uniform(nodes: usize) -> Self {
        Self {
            nodes_v: nodes,
            nodes_m: nodes,
        }
    }

    pub fn from_scenario(sc: &Scenario) -> Self {
        Self {
            nodes_v: sc.config().gcq_v as usize,
            nodes_m: sc.config().gcq_m as usize,
        }
    }
}

/// Harvest thresholds expressed on the incident-power axis, and the SNR
/// scalings that map `z` onto it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaBundle {
    /// `E_min / (ρηT₁)`, watts.
    pub omega1: f64,
    /// `E_max / (ρηT₁)`, watts.
    pub omega2: f64,
    omega3_per_snr: f64,
    omega4_per_snr: f64,
}

impl OmegaBundle {
    /// `None` when nothing is ever harvested (`ρ = 0`).
    pub fn new(dest: Source, sc: &Scenario) -> Option<Self> {
        let h = sc.harvest();
        let factor = h.harvest_factor();
        if factor <= 0.0 {
            return None;
        }
        let noise_t2 = sc.noise(dest) * h.t2;
        Some(Self {
            omega1: h.e_min() / factor,
            omega2: h.e_max / factor,
            omega3_per_snr: noise_t2 / (factor * sc.alpha(dest)),
            omega4_per_snr: noise_t2 / (h.e_max * sc.alpha(dest)),
        })
    }

    /// `z σ_i² T₂ / (ρηT₁ α_Ri)`, watts.
    pub fn omega3(&self, z: f64) -> f64 {
        z * self.omega3_per_snr
    }

    /// `z σ_i² T₂ / (E_max α_Ri)`, dimensionless.
    pub fn omega4(&self, z: f64) -> f64 {
        z * self.omega4_per_snr
    }
}

/// Inner integrator for the `L₃` term.
#[derive(Debug, Clone, Copy)]
pub enum InnerRule<'a> {
    Gcq(&'a GaussChebyshev),
    Adaptive(&'a Adaptive),
}

/// The pieces of the downlink SNR survival function at one `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalTerms {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

impl SurvivalTerms {
    pub fn survival(&self) -> f64 {
        self.l1 + self.l2
    }

    pub fn cdf_unclamped(&self) -> f64 {
        1.0 - self.l1 - self.l2
    }
}

/// Law of the SNR at `dest` during the downlink slot.
#[derive(Debug, Clone, Copy)]
pub struct DestSnrDistribution {
    incident: HypoExpParams,
    omega: Option<OmegaBundle>,
}

impl DestSnrDistribution {
    pub fn new(dest: Source, sc: &Scenario) -> Self {
        let incident = HypoExpParams::new(
            sc.power(Source::A) * sc.alpha(Source::A),
            sc.power(Source::B) * sc.alpha(Source::B),
        )
        .expect("validated powers and gains");
        Self {
            incident,
            omega: OmegaBundle::new(dest, sc),
        }
    }

    pub fn omega(&self) -> Option<&OmegaBundle> {
        self.omega.as_ref()
    }

    pub fn incident(&self) -> &HypoExpParams {
        &self.incident
    }

    /// Probability that the relay stays silent, `F_I(Ω₁)`.
    pub fn prob_off(&self) -> f64 {
        match &self.omega {
            Some(om) => hypoexp_cdf(om.omega1, &self.incident),
            None => 1.0,
        }
    }

    fn prob_on(&self) -> f64 {
        match &self.omega {
            Some(om) => hypoexp_sf(om.omega1, &self.incident),
            None => 0.0,
        }
    }

    // Integration window for the fading gain in L₃/L₄.
    fn window(&self, om: &OmegaBundle, z: f64) -> (f64, f64) {
        let o3 = om.omega3(z);
        let lo = o3 / om.omega2;
        let hi = if om.omega1 > 0.0 { o3 / om.omega1 } else { f64::INFINITY };
        (lo, hi.min(lo + FADING_TAIL))
    }

    /// Survival decomposition at `z > 0`.
    pub fn terms(&self, z: f64, inner: InnerRule<'_>) -> Result<SurvivalTerms> {
        let Some(om) = self.omega else {
            return Ok(SurvivalTerms { l1: 0.0, l2: 0.0, l3: 0.0 });
        };
        if z <= 0.0 {
            let on = if z < 0.0 { 1.0 } else { self.prob_on() };
            return Ok(SurvivalTerms { l1: on, l2: 0.0, l3: 0.0 });
        }
        let p = &self.incident;
        let o3 = om.omega3(z);
        let sf_cap = hypoexp_sf(om.omega2, p);
        let (lo, hi) = self.window(&om, z);
        // F_I(Ω₂) - F_I(Ω₃/x) written with survival functions so tiny
        // probabilities keep their relative precision
        let integrand = |x: f64| exp_pdf(x) * (hypoexp_sf(o3 / x, p) - sf_cap).max(0.0);
        let l3 = match inner {
            InnerRule::Gcq(rule) => rule.integrate_corrected(lo, hi, integrand),
            InnerRule::Adaptive(quad) => quad.integrate(lo, hi, integrand)?.value,
        };
        let upper_gain = if om.omega1 > 0.0 { exp_sf(o3 / om.omega1) } else { 0.0 };
        let l1 = l3 + (hypoexp_sf(om.omega1, p) - sf_cap) * upper_gain;
        let l2 = sf_cap * exp_sf(om.omega4(z));
        Ok(SurvivalTerms { l1, l2, l3 })
    }

    /// `P(γ_i ≤ z)` with GCQ for the inner integral, clamped to `[0, 1]`.
    pub fn cdf_gcq(&self, z: f64, rule: &GaussChebyshev) -> f64 {
        self.cdf_gcq_unclamped(z, rule).clamp(0.0, 1.0)
    }

    pub fn cdf_gcq_unclamped(&self, z: f64, rule: &GaussChebyshev) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        if z == 0.0 {
            return self.prob_off();
        }
        self.terms(z, InnerRule::Gcq(rule))
            .expect("fixed rule cannot fail")
            .cdf_unclamped()
    }

    /// `P(γ_i > z)`, GCQ inner integral.
    pub fn ccdf_gcq(&self, z: f64, rule: &GaussChebyshev) -> f64 {
        if z < 0.0 {
            return 1.0;
        }
        if z == 0.0 {
            return self.prob_on();
        }
        self.terms(z, InnerRule::Gcq(rule))
            .expect("fixed rule cannot fail")
            .survival()
            .clamp(0.0, 1.0)
    }

    /// `P(γ_i ≤ z)` with an adaptive inner integral.
    pub fn cdf_adaptive(&self, z: f64, quad: &Adaptive) -> Result<f64> {
        if z < 0.0 {
            return Ok(0.0);
        }
        if z == 0.0 {
            return Ok(self.prob_off());
        }
        Ok(self.terms(z, InnerRule::Adaptive(quad))?.cdf_unclamped().clamp(0.0, 1.0))
    }

    /// `L₄ = ∫ f_g(x) F_I(Ω₃/x) dx` over the same window as `L₃`.
    pub fn l4_gcq(&self, z: f64, rule: &GaussChebyshev) -> f64 {
        let Some(om) = self.omega else { return 0.0 };
        if z <= 0.0 {
            return 0.0;
        }
        let (lo, hi) = self.window(&om, z);
        let o3 = om.omega3(z);
        rule.integrate_corrected(lo, hi, |x| exp_pdf(x) * hypoexp_cdf(o3 / x, &self.incident))
    }
}

/// `P(γ_i ≤ z)` at `dest`, inner integral by GCQ with `gcq.nodes_m` nodes.
pub fn cdf_dest_snr(z: f64, dest: Source, sc: &Scenario, gcq: GcqSettings) -> f64 {
    DestSnrDistribution::new(dest, sc).cdf_gcq(z, &GaussChebyshev::new(gcq.nodes_m))
}

/// Error probability and its complement, computed separately so that a
/// success probability near zero keeps relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    pub eps: f64,
    pub success: f64,
}

impl ErrorPair {
    fn certain_failure() -> Self {
        Self { eps: 1.0, success: 0.0 }
    }

    fn clamped(eps: f64, success: f64) -> Self {
        Self {
            eps: eps.clamp(0.0, 1.0),
            success: success.clamp(0.0, 1.0),
        }
    }
}

/// Closed-form uplink error for the packet sent by `src`,
/// `β√n ∫_{φ}^{δ} (1 - e^{-z/m}) dz` with `m` the mean relay SNR.
pub fn eps_relay_closed_form(src: Source, sc: &Scenario) -> f64 {
    relay_closed_form(src, sc).eps
}

pub fn relay_closed_form(src: Source, sc: &Scenario) -> ErrorPair {
    let mean = sc.relay_snr_mean(src);
    let code = sc.uplink_code(src);
    if code.k() == 0 {
        return ErrorPair { eps: 0.0, success: 1.0 };
    }
    if mean <= 0.0 {
        return ErrorPair::certain_failure();
    }
    let c = linearization(&code);
    let lo = c.support_low();
    // m (e^{-lo/m} - e^{-δ/m}) = ∫_lo^δ e^{-z/m} dz
    let survival_area = mean * (-lo / mean).exp() * -(-(c.delta_high - lo) / mean).exp_m1();
    let slope = c.slope();
    ErrorPair::clamped(
        slope * ((c.delta_high - lo) - survival_area),
        slope * ((lo - c.phi_low) + survival_area),
    )
}

/// Averages a CDF against the linearized kernel:
/// `β√n ∫_{max(φ,0)}^{δ} F(z) dz`, using the endpoint-corrected GCQ rule.
fn windowed_error(c: &LinearizationCoeffs, rule: &GaussChebyshev, cdf: impl Fn(f64) -> f64, ccdf: impl Fn(f64) -> f64) -> ErrorPair {
    let lo = c.support_low();
    let slope = c.slope();
    let eps = slope * rule.integrate_corrected(lo, c.delta_high, &cdf);
    let success = slope * ((lo - c.phi_low) + rule.integrate_corrected(lo, c.delta_high, &ccdf));
    ErrorPair::clamped(eps, success)
}

/// Downlink error at `dest` through GCQ.
pub fn eps_dest_gcq(dest: Source, sc: &Scenario, gcq: GcqSettings) -> f64 {
    dest_gcq(dest, sc, gcq).eps
}

pub fn dest_gcq(dest: Source, sc: &Scenario, gcq: GcqSettings) -> ErrorPair {
    let code = sc.downlink_code(dest);
    let dist = DestSnrDistribution::new(dest, sc);
    if dist.omega.is_none() {
        return ErrorPair::certain_failure();
    }
    let inner = GaussChebyshev::new(gcq.nodes_m);
    let outer = GaussChebyshev::new(gcq.nodes_v);
    let c = linearization(&code);
    windowed_error(&c, &outer, |z| dist.cdf_gcq(z, &inner), |z| dist.ccdf_gcq(z, &inner))
}

/// Reference for the downlink error of the linearized kernel: adaptive
/// quadrature for both the inner and the outer integral.
pub fn eps_dest_adaptive(dest: Source, sc: &Scenario, quad: &Adaptive) -> Result<f64> {
    let dist = DestSnrDistribution::new(dest, sc);
    if dist.omega.is_none() {
        return Ok(1.0);
    }
    let c = linearization(&sc.downlink_code(dest));
    let inner = Adaptive::new(quad.abs_tol * 1e-2);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let area = quad.integrate(c.support_low(), c.delta_high, |z| {
        dist.cdf_adaptive(z, &inner).unwrap_or_else(|e| {
            failure.set(Some(e));
            f64::NAN
        })
    });
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok((c.slope() * area?.value).clamp(0.0, 1.0))
}

/// Which link an exact error probability refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkRef {
    /// Uplink carrying the packet of the given source.
    Relay(Source),
    /// Downlink towards the given destination.
    Dest(Source),
}

// SNR beyond which the Q-kernel is below 1e-17.
fn kernel_cutoff(code: &LinkCode) -> f64 {
    let mut z = linearization(code).delta_high.max(1e-3);
    while eps_conditional(z, code) > 1e-17 {
        z *= 2.0;
    }
    z
}

/// Error probability with the exact Q-kernel averaged over the SNR law,
/// by adaptive quadrature. Downlink errors integrate by parts against the
/// CDF, which carries the atom at zero SNR.
pub fn eps_exact_numeric(link: LinkRef, sc: &Scenario, quad: &Adaptive) -> Result<f64> {
    match link {
        LinkRef::Relay(src) => {
            let code = sc.uplink_code(src);
            if code.k() == 0 {
                return Ok(0.0);
            }
            let mean = sc.relay_snr_mean(src);
            if mean <= 0.0 {
                return Ok(1.0);
            }
            let top = kernel_cutoff(&code).min(FADING_TAIL * mean);
            let value = quad
                .integrate(0.0, top, |z| (-z / mean).exp() / mean * eps_conditional(z, &code))?
                .value;
            // mass beyond `top` decodes with certainty or is negligible
            let tail = (-top / mean).exp() * eps_conditional(top, &code);
            Ok((value + tail).clamp(0.0, 1.0))
        }
        LinkRef::Dest(dest) => {
            let code = sc.downlink_code(dest);
            if code.k() == 0 {
                return Ok(0.0);
            }
            let dist = DestSnrDistribution::new(dest, sc);
            if dist.omega.is_none() {
                return Ok(1.0);
            }
            let top = kernel_cutoff(&code);
            let inner = Adaptive::new(quad.abs_tol * 1e-2);
            let failure: Cell<Option<Error>> = Cell::new(None);
            let cdf = |z: f64| {
                dist.cdf_adaptive(z, &inner).unwrap_or_else(|e| {
                    failure.set(Some(e));
                    f64::NAN
                })
            };
            let boundary = eps_conditional(top, &code) * cdf(top);
            let area = quad.integrate(0.0, top, |z| -eps_conditional_derivative(z, &code) * cdf(z));
            if let Some(e) = failure.take() {
                return Err(e);
            }
            Ok((area?.value + boundary).clamp(0.0, 1.0))
        }
    }
}

/// `1 - (ε_R + (1 - ε_R) ε_D) = (1 - ε_R)(1 - ε_D)`.
pub fn success_probability(eps_r: f64, eps_d: f64) -> f64 {
    (1.0 - eps_r) * (1.0 - eps_d)
}

/// Average age, or the marker for an age that grows without bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Age {
    Finite(f64),
    Unbounded,
}

impl Age {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Age::Finite(s) => Some(s),
            Age::Unbounded => None,
        }
    }

    /// Seconds, with `+∞` standing in for an unbounded age.
    pub fn as_f64(self) -> f64 {
        self.seconds().unwrap_or(f64::INFINITY)
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Age::Unbounded)
    }
}

/// `T/2 + T/φ`.
pub fn aaoi(cycle: f64, phi: f64) -> Age {
    if !(phi > 0.0) {
        return Age::Unbounded;
    }
    let age = 0.5 * cycle + cycle / phi;
    if age.is_finite() {
        Age::Finite(age)
    } else {
        Age::Unbounded
    }
}

/// `ω_A Δ_A + ω_B Δ_B`; a zero weight hides an unbounded age.
pub fn weighted_sum_aaoi(age_a: Age, age_b: Age, w_a: f64, w_b: f64) -> Age {
    let mut total = 0.0;
    for (age, w) in [(age_a, w_a), (age_b, w_b)] {
        if w == 0.0 {
            continue;
        }
        match age {
            Age::Finite(s) => total += w * s,
            Age::Unbounded => return Age::Unbounded,
        }
    }
    Age::Finite(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ClosedForm,
    ExactQuadrature,
    MonteCarlo,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::ClosedForm => "analytic",
            Method::ExactQuadrature => "exact",
            Method::MonteCarlo => "mc",
        }
    }
}

/// Success probabilities and ages of both directions.
///
/// `eps_relay_a` is the uplink error of the packet sent by A; `phi_a` and
/// `aaoi_a` describe the updates delivered *to* A, so
/// `phi_a = (1 - eps_relay_b)(1 - eps_dest_a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiReport {
    pub eps_relay_a: f64,
    pub eps_relay_b: f64,
    pub eps_dest_a: f64,
    pub eps_dest_b: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub aaoi_a: Age,
    pub aaoi_b: Age,
    pub weighted_sum: Age,
    pub method: Method,
    /// Half-width of the confidence interval on `weighted_sum`; zero for the
    /// analytic methods.
    pub ci_radius: f64,
    pub cycle_time: f64,
}

impl AoiReport {
    pub fn phi(&self, dest: Source) -> f64 {
        match dest {
            Source::A => self.phi_a,
            Source::B => self.phi_b,
        }
    }

    pub fn aaoi(&self, dest: Source) -> Age {
        match dest {
            Source::A => self.aaoi_a,
            Source::B => self.aaoi_b,
        }
    }

    pub fn eps_dest(&self, dest: Source) -> f64 {
        match dest {
            Source::A => self.eps_dest_a,
            Source::B => self.eps_dest_b,
        }
    }

    fn assemble(sc: &Scenario, method: Method, relay: [ErrorPair; 2], dest: [ErrorPair; 2]) -> Self {
        let cycle = sc.cycle_time();
        // updates to A come from B
        let phi_a = relay[1].success * dest[0].success;
        let phi_b = relay[0].success * dest[1].success;
        let aaoi_a = aaoi(cycle, phi_a);
        let aaoi_b = aaoi(cycle, phi_b);
        Self {
            eps_relay_a: relay[0].eps,
            eps_relay_b: relay[1].eps,
            eps_dest_a: dest[0].eps,
            eps_dest_b: dest[1].eps,
            phi_a,
            phi_b,
            aaoi_a,
            aaoi_b,
            weighted_sum: weighted_sum_aaoi(aaoi_a, aaoi_b, sc.weight(Source::A), sc.weight(Source::B)),
            method,
            ci_radius: 0.0,
            cycle_time: cycle,
        }
    }
}

/// Closed-form uplink errors and GCQ downlink errors.
pub fn analytic_report(sc: &Scenario) -> AoiReport {
    let gcq = GcqSettings::from_scenario(sc);
    AoiReport::assemble(
        sc,
        Method::ClosedForm,
        [relay_closed_form(Source::A, sc), relay_closed_form(Source::B, sc)],
        [dest_gcq(Source::A, sc, gcq), dest_gcq(Source::B, sc, gcq)],
    )
}

/// Exact Q-kernel errors by adaptive quadrature.
pub fn exact_report(sc: &Scenario, quad: &Adaptive) -> Result<AoiReport> {
    let pair = |eps: f64| ErrorPair { eps, success: 1.0 - eps };
    let relay = [
        pair(eps_exact_numeric(LinkRef::Relay(Source::A), sc, quad)?),
        pair(eps_exact_numeric(LinkRef::Relay(Source::B), sc, quad)?),
    ];
    let dest = [
        pair(eps_exact_numeric(LinkRef::Dest(Source::A), sc, quad)?),
        pair(eps_exact_numeric(LinkRef::Dest(Source::B), sc, quad)?),
    ];
    Ok(AoiReport::assemble(sc, Method::ExactQuadrature, relay, dest))
}
