//! Large-scale path loss, Rayleigh block fading and the exponential and
//! hypoexponential laws built on top of it.

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Propagation speed used by the free-space model, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Relative scale gap under which the two hypoexponential rates are treated
/// as equal.
pub const HYPOEXP_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    distance_m: f64,
    carrier_hz: f64,
}

impl LinkGeometry {
    pub fn new(distance_m: f64, carrier_hz: f64) -> Result<Self> {
        if !(distance_m > 0.0 && distance_m.is_finite()) {
            return Err(Error::invalid("distance_m", format!("must be positive, got {distance_m}")));
        }
        if !(carrier_hz > 0.0 && carrier_hz.is_finite()) {
            return Err(Error::invalid("carrier_hz", format!("must be positive, got {carrier_hz}")));
        }
        Ok(Self {
            distance_m,
            carrier_hz,
        })
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }

    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    /// Distance at which the free-space gain equals one.
    pub fn unit_gain_distance(carrier_hz: f64) -> f64 {
        SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * carrier_hz)
    }
}

/// Linear large-scale power gain `α`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LargeScaleGain(f64);

impl LargeScaleGain {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        10.0 * self.0.log10()
    }
}

/// Free-space gain `(c / (4π f_c d))²`.
pub fn path_loss_alpha(geom: &LinkGeometry) -> LargeScaleGain {
    let ratio = LinkGeometry::unit_gain_distance(geom.carrier_hz) / geom.distance_m;
    LargeScaleGain(ratio * ratio)
}

/// Small-scale power gains of the four links for one transmission cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingDraw {
    pub g_ar: f64,
    pub g_br: f64,
    pub g_ra: f64,
    pub g_rb: f64,
}

impl FadingDraw {
    pub fn uniform(g: f64) -> Self {
        Self {
            g_ar: g,
            g_br: g,
            g_ra: g,
            g_rb: g,
        }
    }
}

/// Draws four independent unit-mean exponential gains, in the order
/// `g_ar, g_br, g_ra, g_rb`.
pub fn sample_fading<R: Rng + ?Sized>(rng: &mut R) -> FadingDraw {
    FadingDraw {
        g_ar: rng.sample(Exp1),
        g_br: rng.sample(Exp1),
        g_ra: rng.sample(Exp1),
        g_rb: rng.sample(Exp1),
    }
}

pub fn exp_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        -(-z).exp_m1()
    }
}

pub fn exp_pdf(z: f64) -> f64 {
    if z < 0.0 {
        0.0
    } else {
        (-z).exp()
    }
}

/// Survival function `1 - exp_cdf(z)`.
pub fn exp_sf(z: f64) -> f64 {
    if z <= 0.0 {
        1.0
    } else {
        (-z).exp()
    }
}

/// Scales (means) of the two exponential terms of `I = μ₁ + μ₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypoExpParams {
    scale_a: f64,
    scale_b: f64,
}

impl HypoExpParams {
    pub fn new(scale_a: f64, scale_b: f64) -> Result<Self> {
        for (key, v) in [("scale_a", scale_a), ("scale_b", scale_b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(key, format!("must be positive, got {v}")));
            }
        }
        Ok(Self { scale_a, scale_b })
    }

    pub fn scale_a(&self) -> f64 {
        self.scale_a
    }

    pub fn scale_b(&self) -> f64 {
        self.scale_b
    }

    pub fn mean(&self) -> f64 {
        self.scale_a + self.scale_b
    }

    pub fn is_tied(&self) -> bool {
        (self.scale_a - self.scale_b).abs() <= HYPOEXP_TIE_TOLERANCE * self.scale_a.max(self.scale_b)
    }

    fn ordered(&self) -> (f64, f64) {
        if self.scale_a >= self.scale_b {
            (self.scale_a, self.scale_b)
        } else {
            (self.scale_b, self.scale_a)
        }
    }

    fn tied_scale(&self) -> f64 {
        0.5 * (self.scale_a + self.scale_b)
    }
}

// (e^{-z/hi} - e^{-z/lo}) / (hi - lo), written so nothing cancels.
fn distinct_kernel(z: f64, hi: f64, lo: f64) -> f64 {
    (-z / hi).exp() * (z * (lo - hi) / (hi * lo)).exp_m1() / (lo - hi)
}

pub fn hypoexp_pdf(z: f64, p: &HypoExpParams) -> f64 {
    if z < 0.0 {
        return 0.0;
    }
    if p.is_tied() {
        let s = p.tied_scale();
        z / (s * s) * (-z / s).exp()
    } else {
        let (hi, lo) = p.ordered();
        distinct_kernel(z, hi, lo)
    }
}

/// Survival function `P(I > z)`.
pub fn hypoexp_sf(z: f64, p: &HypoExpParams) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if p.is_tied() {
        let u = z / p.tied_scale();
        (-u).exp() * (1.0 + u)
    } else {
        // (hi e^{-z/hi} - lo e^{-z/lo}) / (hi - lo) = e^{-z/hi} + lo · kernel
        let (hi, lo) = p.ordered();
        ((-z / hi).exp() + lo * distinct_kernel(z, hi, lo)).clamp(0.0, 1.0)
    }
}

pub fn hypoexp_cdf(z: f64, p: &HypoExpParams) -> f64 {
    (1.0 - hypoexp_sf(z, p)).clamp(0.0, 1.0)
}

/// Distinct-rate CDF branch evaluated literally, regardless of how close the
/// scales are. Exposed to check continuity against the tied branch.
pub fn hypoexp_cdf_distinct_branch(z: f64, a: f64, b: f64) -> f64 {
    1.0 + b / (a - b) * (-z / b).exp() - a / (a - b) * (-z / a).exp()
}

/// Equal-rate CDF branch with common scale `s`.
pub fn hypoexp_cdf_tied_branch(z: f64, s: f64) -> f64 {
    1.0 - (-z / s).exp() * (1.0 + z / s)
}
