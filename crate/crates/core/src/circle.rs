//! Magnitude of circles.
//!
//! A circle of circumference `ℓ` carries a one-parameter family of metrics
//! indexed by the relative curvature `κ ≤ 1`: the distance between points an
//! arc `x` apart is
//!
//! * `κ > 0`: `(ℓ/(√κ π)) asin(√κ sin(πx/ℓ))`, a small circle on a sphere;
//! * `κ = 0`: `(ℓ/π) sin(πx/ℓ)`, the chord metric of the round planar circle;
//! * `κ < 0`: `(ℓ/(√−κ π)) asinh(√−κ sin(πx/ℓ))`, a circle in a hyperbolic plane.
//!
//! `κ = 1` is the intrinsic arc-length metric. Evenly spaced points on the
//! circle form a homogeneous space, and their magnitudes are Riemann sums
//! converging to `|C_{ℓ,κ}| = (∫₀¹ e^{−ℓ D_{1,κ}(s)} ds)⁻¹`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::numerics::{integrate_panels, Quadrature};

/// Below this `|κ|` the distance uses the series `u + κu³/6` instead of the
/// inverse-sine forms.
pub const KAPPA_SERIES_THRESHOLD: f64 = 1e-8;

/// Circumference beyond which quadrature starts from panels clustered at the
/// endpoints, where the integrand is concentrated.
pub const CLUSTERED_PANELS_ABOVE: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleParams {
    pub length: f64,
    pub kappa: f64,
}

impl CircleParams {
    pub fn new(length: f64, kappa: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("circumference {length}")));
        }
        if !(kappa <= 1.0) || !kappa.is_finite() {
            return Err(Error::OutOfRange(format!("relative curvature {kappa} must be <= 1")));
        }
        Ok(Self { length, kappa })
    }

    /// Distance between points an arc `y ∈ [0, ℓ/2]` apart.
    fn folded(&self, y: f64) -> f64 {
        let Self { length, kappa } = *self;
        if kappa == 1.0 {
            return y;
        }
        let u = (PI * y / length).sin();
        let scale = length / PI;
        if kappa.abs() < KAPPA_SERIES_THRESHOLD {
            scale * (u + kappa * u * u * u / 6.0)
        } else if kappa > 0.0 {
            let r = kappa.sqrt();
            scale * (r * u).asin() / r
        } else {
            let r = (-kappa).sqrt();
            scale * (r * u).asinh() / r
        }
    }
}

/// `D_{ℓ,κ}(x)`: distance between two points an arc `x` apart.
pub fn kappa_distance(params: &CircleParams, x: f64) -> Result<f64> {
    if !(0.0..=params.length).contains(&x) {
        return Err(Error::OutOfRange(format!(
            "arc {x} outside [0, {}]",
            params.length
        )));
    }
    Ok(params.folded(x.min(params.length - x)))
}

/// `D_{1,κ}(s)` for `s ∈ [0, 1]`, the distance on the unit-circumference circle.
fn unit_distance(kappa: f64, s: f64) -> f64 {
    CircleParams { length: 1.0, kappa }.folded(s.min(1.0 - s))
}

/// Distances `D(mℓ/n)` for circular index gaps `m = 0..=n/2`.
fn gap_distances(params: &CircleParams, n: usize) -> Vec<f64> {
    let step = params.length / n as f64;
    (0..=n / 2).map(|m| params.folded(step * m as f64)).collect()
}

fn check_points(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 points, got {n}")));
    }
    Ok(())
}

/// `n` equally spaced points on the circle, point `i` at arc position `iℓ/n`.
pub fn circle_points_space(params: &CircleParams, n: usize) -> Result<FiniteMetricSpace> {
    check_points(n)?;
    let table = gap_distances(params, n);
    let dist = DMatrix::from_fn(n, n, |i, j| {
        let m = i.abs_diff(j);
        table[m.min(n - m)]
    });
    Ok(FiniteMetricSpace::from_trusted(dist))
}

/// Speyer's formula for `n` evenly spaced points:
/// `n / Σ_{j=1}^n e^{−D(jℓ/n)}`, the `j = n` term being the point itself.
pub fn circle_points_magnitude(params: &CircleParams, n: usize) -> Result<f64> {
    check_points(n)?;
    let table = gap_distances(params, n);
    let sum: f64 = (1..=n)
        .map(|j| {
            let m = j % n;
            (-table[m.min(n - m)]).exp()
        })
        .sum();
    Ok(n as f64 / sum)
}

fn panel_breaks(length: f64) -> Vec<f64> {
    let mut left = vec![0.0];
    if length > CLUSTERED_PANELS_ABOVE {
        let mut s = 1.0 / length;
        while s < 0.25 {
            left.push(s);
            s *= 2.0;
        }
    }
    let right: Vec<f64> = left.iter().rev().map(|s| 1.0 - s).collect();
    left.push(0.5);
    left.extend(right);
    left
}

/// `|C_{ℓ,κ}| = (∫₀¹ e^{−ℓ D_{1,κ}(s)} ds)⁻¹`.
pub fn circle_magnitude(params: &CircleParams, q: Quadrature) -> Result<f64> {
    let CircleParams { length, kappa } = *params;
    let integral = integrate_panels(
        |s| (-length * unit_distance(kappa, s)).exp(),
        &panel_breaks(length),
        q,
    )?;
    Ok(1.0 / integral)
}

/// Intrinsic (arc-length) circle: `(ℓ/2) / (1 − e^{−ℓ/2})`.
pub fn intrinsic_circle_magnitude(length: f64) -> Result<f64> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidParameter(format!("circumference {length}")));
    }
    Ok(0.5 * length / -(-0.5 * length).exp_m1())
}

/// Large-`ℓ` expansion `ℓ/2 + π²(κ − 1)/(2ℓ)`.
pub fn circle_asymptotic(params: &CircleParams) -> f64 {
    let CircleParams { length, kappa } = *params;
    0.5 * length + PI * PI * (kappa - 1.0) / (2.0 * length)
}

/// Forward-difference estimate of `d|C_{ℓ,κ}|/dℓ` at `ℓ = 0` with step `h`.
pub fn circle_slope_at_zero(kappa: f64, h: f64, q: Quadrature) -> Result<f64> {
    let at_h = circle_magnitude(&CircleParams::new(h, kappa)?, q)?;
    Ok((at_h - 1.0) / h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceEntry {
    pub n: usize,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub limit: f64,
    pub entries: Vec<ConvergenceEntry>,
}

/// Compares `|K^n_{ℓ,κ}|` against the integral value for each `n`.
pub fn circle_convergence(params: &CircleParams, n_list: &[usize], q: Quadrature) -> Result<ConvergenceReport> {
    if n_list.iter().any(|&n| n < 2) || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "point counts must be strictly increasing and at least 2".into(),
        ));
    }
    let limit = circle_magnitude(params, q)?;
    let entries = n_list
        .iter()
        .map(|&n| {
            let value = circle_points_magnitude(params, n)?;
            Ok(ConvergenceEntry {
                n,
                value,
                error: (value - limit).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport { limit, entries })
}
