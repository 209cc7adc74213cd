//! Magnitude of the ternary Cantor set of length `ℓ`.
//!
//! The level-`k` approximation `T^k_ℓ` is the set of endpoints of the `2^k`
//! intervals left after `k` middle-third removals. It is a linear space, so
//! its magnitude has a closed form, and the limit `|T_ℓ|` is a convergent
//! series. That limit splits as `p(ℓ) + q₂(ℓ)` where `p(3ℓ) = 2p(ℓ)` and
//! `q₂(ℓ) → 0`; writing `p(ℓ) = f(ℓ) ℓ^{log₃2}` leaves a multiplicatively
//! periodic `f` that is very nearly constant.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linear::GapTuple;
use crate::numerics::sum_series;

/// Default truncation tolerance for the series below.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Deepest approximation level handled by the closed form.
pub const MAX_LEVEL: u32 = 62;

/// Deepest level for which the gap sequence is materialised (2^21 gaps).
pub const MAX_ENUMERATED_LEVEL: u32 = 20;

/// `log₃ 2`, the Hausdorff dimension of the Cantor set.
pub fn dimension() -> f64 {
    2f64.ln() / 3f64.ln()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantorParams {
    pub length: f64,
    pub eps: f64,
}

impl CantorParams {
    pub fn new(length: f64, eps: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("Cantor set length {length}")));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("series tolerance {eps}")));
        }
        Ok(Self { length, eps })
    }

    pub fn with_length(length: f64) -> Result<Self> {
        Self::new(length, DEFAULT_EPS)
    }
}

fn check_level(k: u32, max: u32) -> Result<()> {
    if k > max {
        return Err(Error::OutOfRange(format!("level {k} exceeds {max}")));
    }
    Ok(())
}

/// Left-to-right gaps of `T^k_ℓ`: `2^{k+1} − 1` gaps between `2^{k+1}` points.
pub fn cantor_approx_gaps(length: f64, k: u32) -> Result<GapTuple> {
    check_level(k, MAX_ENUMERATED_LEVEL)?;
    fn fill(out: &mut Vec<f64>, length: f64, k: u32) {
        if k == 0 {
            out.push(length);
            return;
        }
        let third = length / 3.0;
        fill(out, third, k - 1);
        out.push(third);
        fill(out, third, k - 1);
    }
    let mut gaps = Vec::with_capacity((1usize << (k + 1)) - 1);
    fill(&mut gaps, length, k);
    GapTuple::new(gaps)
}

fn half_tanh_scaled(length: f64, i: i32) -> f64 {
    (length / (2.0 * 3f64.powi(i))).tanh()
}

/// `|T^k_ℓ| = 1 + 2^k tanh(ℓ/(2·3^k)) + ½ Σ_{i=1}^k 2^i tanh(ℓ/(2·3^i))`.
pub fn cantor_approx_magnitude(length: f64, k: u32) -> Result<f64> {
    check_level(k, MAX_LEVEL)?;
    if !(length > 0.0) {
        return Err(Error::InvalidParameter(format!("Cantor set length {length}")));
    }
    let k = k as i32;
    let inner: f64 = (1..=k).rev().map(|i| 2f64.powi(i) * half_tanh_scaled(length, i)).sum();
    Ok(1.0 + 2f64.powi(k) * half_tanh_scaled(length, k) + 0.5 * inner)
}

/// `Σ_{i≥1} 2^i tanh(ℓ/(2·3^i))`, bounded termwise by `tanh c ≤ c`.
fn shrinking_sum(length: f64, eps: f64) -> Result<f64> {
    sum_series(
        1,
        |i| 2f64.powi(i as i32) * half_tanh_scaled(length, i as i32),
        |n| 1.5 * length * (2.0f64 / 3.0).powi(n as i32),
        eps,
    )
}

/// `Σ_{j≥0} 2^{-j} tanh(3^j ℓ/2)`, bounded termwise by `tanh c ≤ 1`.
fn growing_sum(length: f64, eps: f64) -> Result<f64> {
    sum_series(
        0,
        |j| 0.5f64.powi(j as i32) * half_tanh_scaled(length, -(j as i32)),
        |n| 2f64.powi(1 - n as i32),
        eps,
    )
}

/// `|T_ℓ| = 1 + ½ Σ_{i≥1} 2^i tanh(ℓ/(2·3^i))`.
pub fn cantor_magnitude(p: &CantorParams) -> Result<f64> {
    Ok(1.0 + 0.5 * shrinking_sum(p.length, p.eps)?)
}

/// `p(ℓ) = ½ Σ_{i∈ℤ} 2^i tanh(ℓ/(2·3^i))`, the part of `|T_ℓ|` satisfying
/// `p(3ℓ) = 2p(ℓ)`.
pub fn cantor_p(p: &CantorParams) -> Result<f64> {
    let half = 0.5 * p.eps;
    Ok(0.5 * (shrinking_sum(p.length, half)? + growing_sum(p.length, half)?))
}

/// `q₂(ℓ) = 1 − ½ Σ_{i≥0} 2^{-i} tanh(3^i ℓ/2)`, the part of `|T_ℓ|` that
/// vanishes as `ℓ → ∞`.
pub fn cantor_q2(p: &CantorParams) -> Result<f64> {
    Ok(1.0 - 0.5 * growing_sum(p.length, p.eps)?)
}

/// `f(ℓ) = p(ℓ) ℓ^{-log₃2}`, which satisfies `f(3ℓ) = f(ℓ)`.
pub fn cantor_f(length: f64, eps: f64) -> Result<f64> {
    let params = CantorParams::new(length, eps)?;
    Ok(cantor_p(&params)? * length.powf(-dimension()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Harmonic {
    pub frequency: usize,
    pub amplitude: f64,
    pub phase: f64,
}

/// Fourier coefficients of `x ↦ f(3^x)` on one period, in the form
/// `mean + Σ_k amplitude_k · sin(2πkx + phase_k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierReport {
    pub mean: f64,
    pub harmonics: Vec<Harmonic>,
}

impl FourierReport {
    pub fn amplitude(&self, k: usize) -> Option<f64> {
        self.harmonics.iter().find(|h| h.frequency == k).map(|h| h.amplitude)
    }

    /// Evaluates the truncated expansion at `x`.
    pub fn evaluate(&self, x: f64) -> f64 {
        self.mean
            + self
                .harmonics
                .iter()
                .map(|h| h.amplitude * (2.0 * PI * h.frequency as f64 * x + h.phase).sin())
                .sum::<f64>()
    }
}

pub fn cantor_fourier(samples: usize, harmonics: usize, eps: f64) -> Result<FourierReport> {
    if samples < 256 || !samples.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "sample count {samples} must be a power of two >= 256"
        )));
    }
    if harmonics >= samples / 2 {
        return Err(Error::InvalidParameter(format!(
            "{harmonics} harmonics need more than {samples} samples"
        )));
    }
    let values = (0..samples)
        .into_par_iter()
        .map(|j| cantor_f(3f64.powf(j as f64 / samples as f64), eps))
        .collect::<Result<Vec<f64>>>()?;

    let n = samples as f64;
    let mean = values.iter().sum::<f64>() / n;
    let harmonics = (1..=harmonics)
        .map(|k| {
            let (mut cos_part, mut sin_part) = (0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                // Reduce the angle modulo the period before scaling.
                let angle = 2.0 * PI * ((k * j) % samples) as f64 / n;
                cos_part += v * angle.cos();
                sin_part += v * angle.sin();
            }
            let (a, b) = (2.0 * cos_part / n, 2.0 * sin_part / n);
            // a·cos + b·sin = r·sin(θ + φ) with r sin φ = a, r cos φ = b.
            Harmonic {
                frequency: k,
                amplitude: a.hypot(b),
                phase: a.atan2(b),
            }
        })
        .collect();
    Ok(FourierReport { mean, harmonics })
}
