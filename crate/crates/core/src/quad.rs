//! Quadrature rules.
//!
//! Two independent engines live here:
//!
//! * [`GaussChebyshev`], the fixed-node rule used by the analytic error
//!   probability chain. On a finite interval `[a, b]` it evaluates
//!
//!   ```text
//!   ∫ f ≈ (b - a)/2 · Σ_m (π/M) · sqrt(1 - x_m²) · f(mid + (b - a)/2 · x_m)
//!   x_m = cos((2m - 1)π / (2M))
//!   ```
//!
//!   which is the midpoint rule in `θ = acos(x)`. Its leading error term is
//!   `(π/M)²/24 · (b - a)/2 · (f(a) + f(b))`, so [`GaussChebyshev::integrate_corrected`]
//!   integrates the endpoint chord exactly and applies the rule only to the
//!   residual, which vanishes at both ends.
//!
//! * [`Adaptive`], a globally adaptive 15-point Gauss-Kronrod integrator
//!   used as the reference oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss-Chebyshev (first kind) rule applied to an unweighted integrand.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussChebyshev {
    // (abscissa on [-1, 1], weight including the sqrt(1 - x²) factor)
    nodes: Vec<(f64, f64)>,
}

impl GaussChebyshev {
    /// Builds the rule with `count` nodes. `count` must be at least one.
    pub fn new(count: usize) -> Self {
        assert!(count >= 1, "Gauss-Chebyshev rule needs at least one node");
        let step = PI / count as f64;
        let nodes = (1..=count)
            .map(|m| {
                let theta = (2 * m - 1) as f64 * PI / (2 * count) as f64;
                // sin(theta) == sqrt(1 - cos²(theta)) without the cancellation
                (theta.cos(), step * theta.sin())
            })
            .collect();
        Self { nodes }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied()
    }

    /// Plain rule over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        if half == 0.0 {
            return 0.0;
        }
        half * self
            .nodes
            .iter()
            .map(|&(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Endpoint-corrected rule: the chord through `(a, f(a))` and `(b, f(b))`
    /// is integrated exactly and the rule handles `f - chord`.
    pub fn integrate_corrected<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        if a == b {
            return 0.0;
        }
        let fa = f(a);
        let fb = f(b);
        let width = b - a;
        let chord = |t: f64| fa + (fb - fa) * (t - a) / width;
        0.5 * width * (fa + fb) + self.integrate(a, b, |t| f(t) - chord(t))
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Globally adaptive Gauss-Kronrod (G7/K15) integration with an absolute
/// error target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            max_intervals: 1_000_000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(a: f64, b: f64, f: &mut F) -> Piece {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = WGK[7] * fc.abs();
    let mut values = [(0.0, 0.0); 7];
    for (j, slot) in values.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *slot = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in values.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Piece { a, b, value, error }
}

impl Adaptive {
    pub fn new(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrates `f` over the finite interval `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> Result<Estimate> {
        if a == b {
            return Ok(Estimate {
                value: 0.0,
                error: 0.0,
                intervals: 1,
            });
        }
        let first = kronrod15(a, b, &mut f);
        let mut heap = BinaryHeap::new();
        let mut total_err = first.error;
        heap.push(first);
        while total_err > self.abs_tol && heap.len() < self.max_intervals {
            let worst = heap.pop().expect("heap is never empty");
            let mid = 0.5 * (worst.a + worst.b);
            if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
                // interval cannot be split further in floating point
                heap.push(worst);
                break;
            }
            let left = kronrod15(worst.a, mid, &mut f);
            let right = kronrod15(mid, worst.b, &mut f);
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }
        // resum to shed the drift from incremental updates
        let intervals = heap.len();
        let (value, error) = heap
            .into_sorted_vec()
            .iter()
            .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        if error > self.abs_tol {
            return Err(Error::QuadratureDiverged {
                lower: a,
                upper: b,
                tolerance: self.abs_tol,
                estimate: error,
                intervals,
            });
        }
        Ok(Estimate {
            value,
            error,
            intervals,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn chebyshev_weights_sum_close_to_two() {
        let rule = GaussChebyshev::new(100);
        let total: f64 = rule.nodes().map(|(_, w)| w).sum();
        // known O(1/M²) bias of the unweighted rule
        assert!((total - 2.0).abs() < 1e-4);
        assert!((total - 2.0).abs() > 1e-5);
    }

    #[test]
    fn corrected_rule_is_exact_for_linear_functions() {
        let rule = GaussChebyshev::new(7);
        let v = rule.integrate_corrected(-0.5, 2.0, |x| 3.0 * x - 1.0);
        assert_abs_diff_eq!(v, 1.5 * (4.0 - 0.25) - 2.5, epsilon = 1e-14);
    }

    #[test]
    fn corrected_rule_converges_faster_than_plain() {
        let exact = 1.0 - (-2.0f64).exp();
        let f = |x: f64| (-x).exp();
        let rule = GaussChebyshev::new(100);
        let plain = (rule.integrate(0.0, 2.0, f) - exact).abs();
        let corrected = (rule.integrate_corrected(0.0, 2.0, f) - exact).abs();
        assert!(plain > 1e-6, "plain error {plain}");
        assert!(corrected < 1e-8 && corrected < plain / 100.0, "corrected error {corrected}");
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let quad = Adaptive::new(1e-10);
        let est = quad
            .integrate(0.0, 1.0, |x| 1.0 / ((x - 0.3).powi(2) + 1e-4))
            .unwrap();
        let exact = 100.0 * ((70.0f64).atan() + (30.0f64).atan());
        assert_abs_diff_eq!(est.value, exact, epsilon = 1e-9);
        assert!(est.intervals > 1);
    }

    #[test]
    fn adaptive_reports_divergence() {
        let quad = Adaptive {
            abs_tol: 1e-12,
            max_intervals: 4,
        };
        let err = quad.integrate(1e-12, 1.0, |x| x.powf(-0.9)).unwrap_err();
        assert!(matches!(err, Error::QuadratureDiverged { .. }));
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let quad = Adaptive::default();
        let fwd = quad.integrate(0.0, 1.0, |x| x * x).unwrap().value;
        let rev = quad.integrate(1.0, 0.0, |x| x * x).unwrap().value;
        assert_abs_diff_eq!(fwd, -rev, epsilon = 1e-15);
        let rule = GaussChebyshev::new(10);
        assert_abs_diff_eq!(
            rule.integrate_corrected(1.0, 0.0, |x| x * x),
            -rule.integrate_corrected(0.0, 1.0, |x| x * x),
            epsilon = 1e-15
        );
    }
}
