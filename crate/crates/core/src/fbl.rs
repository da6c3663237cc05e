//! Finite-blocklength error model: AWGN capacity and dispersion, the normal
//! approximation of the block error probability and its three-piece linear
//! surrogate.

use std::f64::consts::{LN_2, LOG2_E, PI};

use crate::error::{Error, Result};

/// Blocklength `n` (channel uses) and payload `k` (information bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkCode {
    n: u32,
    k: u32,
}

impl LinkCode {
    /// `n` must be positive. `k = 0` is accepted as the degenerate empty
    /// payload, which decodes with certainty.
    pub fn new(n: u32, k: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", "blocklength must be at least one"));
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }
}

fn check_snr(gamma: f64) -> Result<()> {
    if gamma >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("gamma", format!("SNR must be non-negative, got {gamma}")))
    }
}

/// `log2(1 + γ)` in bits per channel use.
pub fn capacity(gamma: f64) -> Result<f64> {
    check_snr(gamma)?;
    Ok(capacity_raw(gamma))
}

/// `(log2² e / 2) · (1 - (1 + γ)^-2)`.
pub fn dispersion(gamma: f64) -> Result<f64> {
    check_snr(gamma)?;
    Ok(dispersion_raw(gamma))
}

fn capacity_raw(gamma: f64) -> f64 {
    gamma.ln_1p() / LN_2
}

fn dispersion_raw(gamma: f64) -> f64 {
    // 1 - (1+γ)^-2 = -expm1(-2 ln(1+γ)), accurate at both ends
    0.5 * LOG2_E * LOG2_E * -(-2.0 * gamma.ln_1p()).exp_m1()
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Argument of the Q-kernel, `(nC(γ) - k) / sqrt(nV(γ))`.
fn q_argument(gamma: f64, code: &LinkCode) -> f64 {
    let n = code.n as f64;
    (n * capacity_raw(gamma) - code.k as f64) / (n * dispersion_raw(gamma)).sqrt()
}

/// Block error probability conditioned on the SNR,
/// `Q((nC(γ) - k) / sqrt(nV(γ)))`.
///
/// At `γ = 0` the dispersion vanishes; the right limit is used, which is 1
/// for any positive payload and 0 for the empty one. Negative SNRs are
/// treated as zero.
pub fn eps_conditional(gamma: f64, code: &LinkCode) -> f64 {
    if gamma.is_nan() || gamma <= 0.0 {
        return if code.k == 0 { 0.0 } else { 1.0 };
    }
    if gamma.is_infinite() {
        return 0.0;
    }
    q_function(q_argument(gamma, code)).clamp(0.0, 1.0)
}

/// Derivative of [`eps_conditional`] with respect to `γ`.
pub fn eps_conditional_derivative(gamma: f64, code: &LinkCode) -> f64 {
    if !(gamma > 0.0) || gamma.is_infinite() {
        return 0.0;
    }
    let kappa = q_argument(gamma, code);
    if kappa.abs() > 40.0 {
        return 0.0;
    }
    let n = code.n as f64;
    let one_plus = 1.0 + gamma;
    let v = dispersion_raw(gamma);
    let dc = LOG2_E / one_plus;
    let dv = LOG2_E * LOG2_E / (one_plus * one_plus * one_plus);
    let dkappa = n.sqrt() * dc / v.sqrt() - kappa * dv / (2.0 * v);
    -normal_density(kappa) * dkappa
}

/// Coefficients of the linearized kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationCoeffs {
    pub beta: f64,
    pub psi: f64,
    pub phi_low: f64,
    pub delta_high: f64,
    sqrt_n: f64,
}

impl LinearizationCoeffs {
    /// `β·sqrt(n)`, the slope magnitude of the middle segment.
    pub fn slope(&self) -> f64 {
        self.beta * self.sqrt_n
    }

    pub fn sqrt_n(&self) -> f64 {
        self.sqrt_n
    }

    /// Lower end of the averaging window clipped to the SNR support.
    pub fn support_low(&self) -> f64 {
        self.phi_low.max(0.0)
    }

    pub fn theta(&self, gamma: f64) -> f64 {
        if gamma <= self.phi_low {
            1.0
        } else if gamma >= self.delta_high {
            0.0
        } else {
            (0.5 - self.slope() * (gamma - self.psi)).clamp(0.0, 1.0)
        }
    }
}

pub fn linearization(code: &LinkCode) -> LinearizationCoeffs {
    let rate_ln = code.rate() * LN_2;
    // 2^{2k/n} - 1 via expm1 keeps precision for short payloads
    let beta = 1.0 / (2.0 * PI * (2.0 * rate_ln).exp_m1().sqrt());
    let psi = rate_ln.exp_m1();
    let sqrt_n = (code.n as f64).sqrt();
    let half_width = 1.0 / (2.0 * beta * sqrt_n);
    LinearizationCoeffs {
        beta,
        psi,
        phi_low: psi - half_width,
        delta_high: psi + half_width,
        sqrt_n,
    }
}

/// Linearized kernel `Θ(γ)`.
pub fn theta(gamma: f64, coeffs: &LinearizationCoeffs) -> f64 {
    coeffs.theta(gamma)
}
