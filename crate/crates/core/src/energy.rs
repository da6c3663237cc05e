//! Power-splitting energy harvesting during the uplink slot and the
//! threshold-limited relay transmit power of the downlink slot.

use crate::channel::FadingDraw;
use crate::config::{Scenario, Source, SystemConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestConfig {
    pub rho: f64,
    pub eta: f64,
    pub e_max: f64,
    pub p_min: f64,
    pub t1: f64,
    pub t2: f64,
}

impl HarvestConfig {
    pub fn new(rho: f64, eta: f64, e_max: f64, p_min: f64, t1: f64, t2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::invalid("rho", format!("must lie in [0, 1], got {rho}")));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid("eta", format!("must lie in (0, 1], got {eta}")));
        }
        if !(e_max > 0.0) {
            return Err(Error::invalid("e_max", "must be positive"));
        }
        if !(p_min >= 0.0) {
            return Err(Error::invalid("p_min", "must be non-negative"));
        }
        if !(t1 > 0.0 && t2 > 0.0) {
            return Err(Error::invalid("t1/t2", "slot durations must be positive"));
        }
        if p_min * t2 >= e_max {
            return Err(Error::invalid("p_min", "minimum energy must stay below e_max"));
        }
        Ok(Self {
            rho,
            eta,
            e_max,
            p_min,
            t1,
            t2,
        })
    }

    /// Smallest energy that lets the relay transmit, `P_min · T₂`.
    pub fn e_min(&self) -> f64 {
        self.p_min * self.t2
    }

    /// `ρ η T₁`, joules harvested per watt of incident power.
    pub fn harvest_factor(&self) -> f64 {
        self.rho * self.eta * self.t1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// Harvest reached the storage cap.
    Capped,
    /// Harvest between the thresholds is used as is.
    Linear,
    /// Not enough energy; the relay stays silent and both updates are lost.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyOutcome {
    pub harvested_j: f64,
    pub available_j: f64,
    pub regime: Regime,
    pub relay_power_w: f64,
}

/// Slot lengths `(T₁, T₂)`.
///
/// Both sources transmit at once on orthogonal channels, so the uplink slot
/// lasts as long as the longer of the two uplink blocks.
pub fn slot_durations(cfg: &SystemConfig) -> Result<(f64, f64)> {
    if !(cfg.t_s > 0.0) {
        return Err(Error::invalid("t_s", "symbol duration must be positive"));
    }
    let uplink = cfg.n_ar.max(cfg.n_br);
    if uplink == 0 {
        return Err(Error::invalid("n_ar", "uplink blocklengths must be positive"));
    }
    if cfg.n_ra == 0 || cfg.n_rb == 0 {
        let key = if cfg.n_ra == 0 { "n_ra" } else { "n_rb" };
        return Err(Error::invalid(key, "downlink blocklengths must be positive"));
    }
    let t1 = uplink as f64 * cfg.t_s;
    let t2 = (cfg.n_ra as f64 + cfg.n_rb as f64) * cfg.t_s;
    Ok((t1, t2))
}

/// `E_R = ρ η T₁ (P_A α_AR g_AR + P_B α_BR g_BR)`.
pub fn harvested_energy(draw: &FadingDraw, sc: &Scenario) -> f64 {
    let incident = sc.power(Source::A) * sc.alpha(Source::A) * draw.g_ar
        + sc.power(Source::B) * sc.alpha(Source::B) * draw.g_br;
    sc.harvest().harvest_factor() * incident
}

/// Applies the cap and the minimum-energy threshold: capped iff
/// `e_r ≥ E_max`, off iff `e_r ≤ E_min`.
pub fn available_energy(e_r: f64, cfg: &HarvestConfig) -> EnergyOutcome {
    let (available_j, regime) = if e_r >= cfg.e_max {
        (cfg.e_max, Regime::Capped)
    } else if e_r <= cfg.e_min() {
        (0.0, Regime::Off)
    } else {
        (e_r, Regime::Linear)
    };
    EnergyOutcome {
        harvested_j: e_r,
        available_j,
        regime,
        relay_power_w: available_j / cfg.t2,
    }
}

/// SNR at `dest` during the downlink slot,
/// `E_R^T α_Ri g_Ri / (T₂ σ_i²)`.
pub fn dest_snr(draw: &FadingDraw, outcome: &EnergyOutcome, dest: Source, sc: &Scenario) -> f64 {
    if outcome.regime == Regime::Off {
        return 0.0;
    }
    let g = match dest {
        Source::A => draw.g_ra,
        Source::B => draw.g_rb,
    };
    outcome.available_j * sc.alpha(dest) * g / (sc.harvest().t2 * sc.noise(dest))
}
