//! Scenario parameters and their flat `key = value` text form.
//!
//! ```text
//! # two-way relay, SI base units
//! p_a = 1.0
//! d_ar = 30
//! rho = 0.5
//! ```
//!
//! Keys are exactly the [`SystemConfig`] field names. Missing keys keep the
//! default value, unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use crate::channel::{path_loss_alpha, LinkGeometry};
use crate::energy::HarvestConfig;
use crate::error::{Error, Result};
use crate::fbl::LinkCode;

/// One of the two end nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    A,
    B,
}

impl Source {
    pub const BOTH: [Source; 2] = [Source::A, Source::B];

    pub fn other(self) -> Source {
        match self {
            Source::A => Source::B,
            Source::B => Source::A,
        }
    }
}

/// Every scenario parameter, in SI base units.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub p_a: f64,
    pub p_b: f64,
    pub d_ar: f64,
    pub d_br: f64,
    pub carrier_hz: f64,
    pub t_s: f64,
    pub n_ar: u32,
    pub n_br: u32,
    pub n_ra: u32,
    pub n_rb: u32,
    pub k_ar: u32,
    pub k_br: u32,
    pub k_ra: u32,
    pub k_rb: u32,
    pub noise_r: f64,
    pub noise_a: f64,
    pub noise_b: f64,
    pub rho: f64,
    pub eta: f64,
    pub e_max: f64,
    pub p_min: f64,
    pub w_a: f64,
    pub w_b: f64,
    pub gcq_v: u32,
    pub gcq_m: u32,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            p_a: 1.0,
            p_b: 1.0,
            d_ar: 30.0,
            d_br: 30.0,
            carrier_hz: 900e6,
            t_s: 20e-6,
            n_ar: 200,
            n_br: 200,
            n_ra: 200,
            n_rb: 200,
            k_ar: 32,
            k_br: 32,
            k_ra: 32,
            k_rb: 32,
            // -100 dBm
            noise_r: 1e-13,
            noise_a: 1e-13,
            noise_b: 1e-13,
            rho: 0.5,
            eta: 0.9,
            e_max: 1e-3,
            p_min: 1e-7,
            w_a: 0.5,
            w_b: 0.5,
            gcq_v: 100,
            gcq_m: 100,
        }
    }
}

/// Value of a single key.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Count(u32),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            // `{:?}` is the shortest string that parses back to the same f64
            Value::Real(v) => write!(f, "{v:?}"),
            Value::Count(v) => write!(f, "{v}"),
        }
    }
}

impl SystemConfig {
    pub const KEYS: [&'static str; 25] = [
        "p_a", "p_b", "d_ar", "d_br", "carrier_hz", "t_s", "n_ar", "n_br", "n_ra", "n_rb", "k_ar",
        "k_br", "k_ra", "k_rb", "noise_r", "noise_a", "noise_b", "rho", "eta", "e_max", "p_min",
        "w_a", "w_b", "gcq_v", "gcq_m",
    ];

    pub fn is_count_key(key: &str) -> bool {
        matches!(
            key,
            "n_ar" | "n_br" | "n_ra" | "n_rb" | "k_ar" | "k_br" | "k_ra" | "k_rb" | "gcq_v" | "gcq_m"
        )
    }

    pub fn get(&self, key: &str) -> Result<Value> {
        use Value::{Count, Real};
        Ok(match key {
            "p_a" => Real(self.p_a),
            "p_b" => Real(self.p_b),
            "d_ar" => Real(self.d_ar),
            "d_br" => Real(self.d_br),
            "carrier_hz" => Real(self.carrier_hz),
            "t_s" => Real(self.t_s),
            "n_ar" => Count(self.n_ar),
            "n_br" => Count(self.n_br),
            "n_ra" => Count(self.n_ra),
            "n_rb" => Count(self.n_rb),
            "k_ar" => Count(self.k_ar),
            "k_br" => Count(self.k_br),
            "k_ra" => Count(self.k_ra),
            "k_rb" => Count(self.k_rb),
            "noise_r" => Real(self.noise_r),
            "noise_a" => Real(self.noise_a),
            "noise_b" => Real(self.noise_b),
            "rho" => Real(self.rho),
            "eta" => Real(self.eta),
            "e_max" => Real(self.e_max),
            "p_min" => Real(self.p_min),
            "w_a" => Real(self.w_a),
            "w_b" => Real(self.w_b),
            "gcq_v" => Count(self.gcq_v),
            "gcq_m" => Count(self.gcq_m),
            _ => return Err(Error::UnknownKey(key.to_string())),
        })
    }

    /// Parses `raw` for `key` and stores it. No invariant checks; see
    /// [`SystemConfig::validate`].
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let raw = raw.trim();
        if Self::is_count_key(key) {
            let v: u32 = raw
                .parse()
                .map_err(|_| Error::invalid(key, format!("expected a non-negative integer, got `{raw}`")))?;
            let slot = match key {
                "n_ar" => &mut self.n_ar,
                "n_br" => &mut self.n_br,
                "n_ra" => &mut self.n_ra,
                "n_rb" => &mut self.n_rb,
                "k_ar" => &mut self.k_ar,
                "k_br" => &mut self.k_br,
                "k_ra" => &mut self.k_ra,
                "k_rb" => &mut self.k_rb,
                "gcq_v" => &mut self.gcq_v,
                _ => &mut self.gcq_m,
            };
            *slot = v;
            return Ok(());
        }
        let slot = match key {
            "p_a" => &mut self.p_a,
            "p_b" => &mut self.p_b,
            "d_ar" => &mut self.d_ar,
            "d_br" => &mut self.d_br,
            "carrier_hz" => &mut self.carrier_hz,
            "t_s" => &mut self.t_s,
            "noise_r" => &mut self.noise_r,
            "noise_a" => &mut self.noise_a,
            "noise_b" => &mut self.noise_b,
            "rho" => &mut self.rho,
            "eta" => &mut self.eta,
            "e_max" => &mut self.e_max,
            "p_min" => &mut self.p_min,
            "w_a" => &mut self.w_a,
            "w_b" => &mut self.w_b,
            _ => return Err(Error::UnknownKey(key.to_string())),
        };
        let v: f64 = raw
            .parse()
            .map_err(|_| Error::invalid(key, format!("expected a number, got `{raw}`")))?;
        if !v.is_finite() {
            return Err(Error::invalid(key, "must be finite"));
        }
        *slot = v;
        Ok(())
    }

    /// Parses the flat text form on top of the defaults and validates.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Like [`SystemConfig::parse`], with `overrides` applied after the file
    /// (later entries win).
    pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Syntax {
                line: idx + 1,
                reason: format!("expected `key = value`, got `{body}`"),
            })?;
            cfg.set(key.trim(), value)?;
        }
        for (key, value) in overrides {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_with_overrides(&text, overrides)
    }

    /// Flat text form; [`SystemConfig::parse`] reads it back to an equal value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in Self::KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("known key"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_a", self.p_a),
            ("p_b", self.p_b),
            ("d_ar", self.d_ar),
            ("d_br", self.d_br),
            ("carrier_hz", self.carrier_hz),
            ("t_s", self.t_s),
            ("noise_r", self.noise_r),
            ("noise_a", self.noise_a),
            ("noise_b", self.noise_b),
            ("e_max", self.e_max),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(key, format!("must be positive, got {v}")));
            }
        }
        for (key, v) in [
            ("n_ar", self.n_ar),
            ("n_br", self.n_br),
            ("n_ra", self.n_ra),
            ("n_rb", self.n_rb),
            ("k_ar", self.k_ar),
            ("k_br", self.k_br),
            ("k_ra", self.k_ra),
            ("k_rb", self.k_rb),
            ("gcq_v", self.gcq_v),
            ("gcq_m", self.gcq_m),
        ] {
            if v == 0 {
                return Err(Error::invalid(key, "must be at least 1"));
            }
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid("rho", format!("must lie in [0, 1], got {}", self.rho)));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::invalid("eta", format!("must lie in (0, 1], got {}", self.eta)));
        }
        if !(self.p_min >= 0.0 && self.p_min.is_finite()) {
            return Err(Error::invalid("p_min", format!("must be non-negative, got {}", self.p_min)));
        }
        for (key, v) in [("w_a", self.w_a), ("w_b", self.w_b)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(key, format!("must be non-negative, got {v}")));
            }
        }
        for (key, d) in [("d_ar", self.d_ar), ("d_br", self.d_br)] {
            let alpha = path_loss_alpha(&LinkGeometry::new(d, self.carrier_hz)?).value();
            if alpha > 1.0 {
                return Err(Error::invalid(
                    key,
                    format!(
                        "distance {d} m is inside the unit-gain distance {:.4} m",
                        LinkGeometry::unit_gain_distance(self.carrier_hz)
                    ),
                ));
            }
        }
        let t2 = (self.n_ra as f64 + self.n_rb as f64) * self.t_s;
        if self.p_min * t2 >= self.e_max {
            return Err(Error::invalid(
                "p_min",
                format!(
                    "minimum energy {:e} J must stay below e_max {:e} J",
                    self.p_min * t2,
                    self.e_max
                ),
            ));
        }
        Ok(())
    }
}

/// A validated configuration together with everything derived from it.
#[derive(Debug, Clone)]
pub struct Scenario {
    cfg: SystemConfig,
    alpha_a: f64,
    alpha_b: f64,
    harvest: HarvestConfig,
}

impl Scenario {
    pub fn new(cfg: SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let alpha_a = path_loss_alpha(&LinkGeometry::new(cfg.d_ar, cfg.carrier_hz)?).value();
        let alpha_b = path_loss_alpha(&LinkGeometry::new(cfg.d_br, cfg.carrier_hz)?).value();
        let (t1, t2) = crate::energy::slot_durations(&cfg)?;
        let harvest = HarvestConfig::new(cfg.rho, cfg.eta, cfg.e_max, cfg.p_min, t1, t2)?;
        Ok(Self {
            cfg,
            alpha_a,
            alpha_b,
            harvest,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn harvest(&self) -> &HarvestConfig {
        &self.harvest
    }

    /// Cycle length `T = T₁ + T₂`.
    pub fn cycle_time(&self) -> f64 {
        self.harvest.t1 + self.harvest.t2
    }

    /// Large-scale gain between `src` and the relay; links are reciprocal.
    pub fn alpha(&self, src: Source) -> f64 {
        match src {
            Source::A => self.alpha_a,
            Source::B => self.alpha_b,
        }
    }

    pub fn power(&self, src: Source) -> f64 {
        match src {
            Source::A => self.cfg.p_a,
            Source::B => self.cfg.p_b,
        }
    }

    pub fn noise(&self, dest: Source) -> f64 {
        match dest {
            Source::A => self.cfg.noise_a,
            Source::B => self.cfg.noise_b,
        }
    }

    pub fn weight(&self, dest: Source) -> f64 {
        match dest {
            Source::A => self.cfg.w_a,
            Source::B => self.cfg.w_b,
        }
    }

    /// Code of the uplink `src → R`.
    pub fn uplink_code(&self, src: Source) -> LinkCode {
        let (n, k) = match src {
            Source::A => (self.cfg.n_ar, self.cfg.k_ar),
            Source::B => (self.cfg.n_br, self.cfg.k_br),
        };
        LinkCode::new(n, k).expect("validated blocklength")
    }

    /// Code of the downlink `R → dest`.
    pub fn downlink_code(&self, dest: Source) -> LinkCode {
        let (n, k) = match dest {
            Source::A => (self.cfg.n_ra, self.cfg.k_ra),
            Source::B => (self.cfg.n_rb, self.cfg.k_rb),
        };
        LinkCode::new(n, k).expect("validated blocklength")
    }

    /// Mean uplink SNR at the relay, `(1 - ρ) P α / σ_R²`.
    pub fn relay_snr_mean(&self, src: Source) -> f64 {
        (1.0 - self.cfg.rho) * self.power(src) * self.alpha(src) / self.cfg.noise_r
    }

    /// Uplink SNR at the relay for small-scale gain `g`.
    pub fn relay_snr(&self, src: Source, g: f64) -> f64 {
        self.relay_snr_mean(src) * g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = SystemConfig::parse("").unwrap();
        assert_eq!(cfg, SystemConfig::default());
        assert_eq!(cfg.p_a, 1.0);
        assert_eq!(cfg.d_ar, 30.0);
        assert_eq!(cfg.n_ar, 200);
        assert_eq!(cfg.k_ar, 32);
        assert_eq!(cfg.t_s, 20e-6);
        assert_eq!(cfg.noise_r, 1e-13);
        assert_eq!(cfg.e_max, 1e-3);
        assert_eq!(cfg.p_min, 1e-7);
        assert_eq!(cfg.rho, 0.5);
        assert_eq!(cfg.w_a, 0.5);
        assert_eq!(cfg.eta, 0.9);
    }

    #[test]
    fn comments_and_whitespace() {
        let cfg = SystemConfig::parse("# header\n  p_a = 2.5   # trailing\n\nn_ra=100\n").unwrap();
        assert_eq!(cfg.p_a, 2.5);
        assert_eq!(cfg.n_ra, 100);
    }

    #[test]
    fn range_violation_names_key() {
        let err = SystemConfig::parse("rho = 1.5").unwrap_err();
        assert!(matches!(&err, Error::InvalidParameter { key, .. } if key == "rho"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let err = SystemConfig::parse("p_c = 1").unwrap_err();
        assert!(matches!(&err, Error::UnknownKey(k) if k == "p_c"));
    }

    #[test]
    fn non_numeric_value_rejected() {
        let err = SystemConfig::parse("d_ar = far").unwrap_err();
        assert!(matches!(&err, Error::InvalidParameter { key, .. } if key == "d_ar"));
        let err = SystemConfig::parse("n_ar = 2.5").unwrap_err();
        assert!(matches!(&err, Error::InvalidParameter { key, .. } if key == "n_ar"));
        assert!(matches!(
            SystemConfig::parse("p_a 1").unwrap_err(),
            Error::Syntax { line: 1, .. }
        ));
    }

    #[test]
    fn override_wins_over_file() {
        let cfg =
            SystemConfig::parse_with_overrides("p_a = 1.0", &[("p_a".into(), "2.0".into())]).unwrap();
        assert_eq!(cfg.p_a, 2.0);
    }

    #[test]
    fn rejects_distance_inside_unit_gain() {
        let err = SystemConfig::parse("d_ar = 0.01").unwrap_err();
        assert!(matches!(&err, Error::InvalidParameter { key, .. } if key == "d_ar"));
    }

    #[test]
    fn rejects_minimum_energy_above_cap() {
        let err = SystemConfig::parse("p_min = 1.0").unwrap_err();
        assert!(matches!(&err, Error::InvalidParameter { key, .. } if key == "p_min"));
    }

    #[test]
    fn zero_downlink_blocklength_rejected() {
        assert!(SystemConfig::parse("n_ra = 0\nn_rb = 0").is_err());
    }

    #[test]
    fn scenario_accessors() {
        let sc = Scenario::new(SystemConfig::default()).unwrap();
        assert!((sc.cycle_time() - 12e-3).abs() < 1e-15);
        assert_eq!(sc.uplink_code(Source::B).n(), 200);
        assert_eq!(Source::A.other(), Source::B);
        assert!((sc.relay_snr_mean(Source::A) - 0.5 * 7.817_992_564_995e-7 / 1e-13).abs() < 1e-3);
    }

    fn arb_config() -> impl Strategy<Value = SystemConfig> {
        (
            (1e-3f64..100.0, 1e-3f64..100.0, 1.0f64..500.0, 1.0f64..500.0),
            (1u32..2000, 1u32..2000, 1u32..500, 1u32..500),
            (0.0f64..=1.0, 1e-3f64..=1.0, 1e-15f64..1e-9, 0.0f64..10.0),
            (1u32..300, 1u32..300, 0.0f64..1e-6),
        )
            .prop_map(|((pa, pb, da, db), (na, nr, ka, kr), (rho, eta, noise, w), (v, m, pmin))| {
                SystemConfig {
                    p_a: pa,
                    p_b: pb,
                    d_ar: da,
                    d_br: db,
                    n_ar: na,
                    n_br: na,
                    n_ra: nr,
                    n_rb: nr + 1,
                    k_ar: ka,
                    k_br: ka,
                    k_ra: kr,
                    k_rb: kr,
                    rho,
                    eta,
                    noise_r: noise,
                    noise_a: noise * 2.0,
                    noise_b: noise * 3.0,
                    w_a: w,
                    w_b: 1.0 / (1.0 + w),
                    gcq_v: v,
                    gcq_m: m,
                    p_min: pmin,
                    ..SystemConfig::default()
                }
            })
    }

    proptest! {
        #[test]
        fn text_round_trip(cfg in arb_config()) {
            prop_assume!(cfg.validate().is_ok());
            let back = SystemConfig::parse(&cfg.to_text()).unwrap();
            prop_assert_eq!(back, cfg);
        }
    }
}
