//! Weightings and magnitude of finite metric spaces.
//!
//! A weighting assigns `w_x` to each point so that `Σ_{x'} e^{-d(x,x')} w_{x'} = 1`
//! for every `x`; the magnitude is `Σ_x w_x`. When the exponentiated distance
//! matrix `Z` is invertible the weighting is unique and the magnitude equals the
//! sum of the entries of `Z⁻¹`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::numerics::{solve_symmetric, SolveDiagnostics};

/// Residual allowed in the weighting equations.
pub const WEIGHTING_RESIDUAL: f64 = 1e-9;

/// Tolerance on sorted-row comparison in the homogeneity test.
pub const HOMOGENEITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weighting {
    pub weights: Vec<f64>,
}

impl Weighting {
    /// Largest `|Σ_{x'} Z_{x,x'} w_{x'} − 1|` over the points of `space`.
    pub fn residual(&self, space: &FiniteMetricSpace) -> f64 {
        let z = exponentiated_matrix(space);
        let w = DVector::from_column_slice(&self.weights);
        (z * w).iter().fold(0.0, |m, v| m.max((v - 1.0).abs()))
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagnitudeResult {
    pub value: f64,
    pub weighting: Weighting,
    pub diagnostics: SolveDiagnostics,
}

/// The matrix `Z` with entries `e^{-d(x,x')}`.
pub fn exponentiated_matrix(space: &FiniteMetricSpace) -> DMatrix<f64> {
    space.distances().map(|d| (-d).exp())
}

fn solve_weighting(space: &FiniteMetricSpace) -> Result<(Weighting, SolveDiagnostics)> {
    let z = exponentiated_matrix(space);
    let ones = DVector::from_element(space.len(), 1.0);
    let (w, diagnostics) =
        solve_symmetric(&z, &ones).map_err(|e| Error::MagnitudeUndefined(Box::new(e)))?;
    Ok((
        Weighting {
            weights: w.iter().copied().collect(),
        },
        diagnostics,
    ))
}

pub fn weighting(space: &FiniteMetricSpace) -> Result<Weighting> {
    solve_weighting(space).map(|(w, _)| w)
}

pub fn magnitude(space: &FiniteMetricSpace) -> Result<MagnitudeResult> {
    let (weighting, diagnostics) = solve_weighting(space)?;
    Ok(MagnitudeResult {
        value: weighting.total(),
        weighting,
        diagnostics,
    })
}

/// Sum of all entries of an explicitly inverted `Z`, computed by Gauss-Jordan
/// elimination independently of the solver used by [`magnitude`].
pub fn magnitude_by_inverse(space: &FiniteMetricSpace) -> Result<f64> {
    exponentiated_matrix(space)
        .try_inverse()
        .map(|inv| inv.sum())
        .ok_or(Error::MagnitudeUndefined(Box::new(Error::SingularMatrix { rcond: 0.0 })))
}

fn sorted_row(space: &FiniteMetricSpace, i: usize) -> Vec<f64> {
    let mut row: Vec<f64> = space.distances().row(i).iter().copied().collect();
    row.sort_by(f64::total_cmp);
    row
}

/// True when every row of the distance matrix carries the same multiset of
/// distances as row 0.
pub fn is_homogeneous(space: &FiniteMetricSpace) -> bool {
    first_inhomogeneous_row(space).is_none()
}

fn first_inhomogeneous_row(space: &FiniteMetricSpace) -> Option<usize> {
    if space.len() < 2 {
        return None;
    }
    let reference = sorted_row(space, 0);
    let scale = reference.last().copied().unwrap_or(0.0).max(1.0);
    (1..space.len()).find(|&i| {
        sorted_row(space, i)
            .iter()
            .zip(&reference)
            .any(|(a, b)| (a - b).abs() > HOMOGENEITY_TOL * scale)
    })
}

/// Speyer's formula: in a homogeneous space all points carry the same weight,
/// so `|X| = n / Σ_{x'} e^{-d(x₀,x')}`.
pub fn magnitude_homogeneous(space: &FiniteMetricSpace) -> Result<f64> {
    if let Some(row) = first_inhomogeneous_row(space) {
        return Err(Error::NotHomogeneous { row });
    }
    let n = space.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut terms: Vec<f64> = space.distances().row(0).iter().map(|d| (-d).exp()).collect();
    terms.sort_by(f64::total_cmp);
    Ok(n as f64 / terms.iter().sum::<f64>())
}

/// Whether every pair of distinct points is further apart than `ln(n − 1)`,
/// which makes `Z` strictly diagonally dominant.
pub fn is_sufficiently_separated(space: &FiniteMetricSpace) -> bool {
    let n = space.len();
    if n <= 1 {
        return true;
    }
    let threshold = ((n - 1) as f64).ln();
    space.min_separation().is_some_and(|d| d > threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagnitudeSample {
    pub t: f64,
    /// `None` where the magnitude of `tX` could not be computed.
    pub value: Option<f64>,
}

/// The magnitude function `t ↦ |tX|` sampled on a strictly increasing grid of
/// positive scales. Points where `Z` is numerically singular are reported as
/// undefined rather than aborting the sweep.
pub fn magnitude_function(space: &FiniteMetricSpace, t_grid: &[f64]) -> Result<Vec<MagnitudeSample>> {
    if t_grid.iter().any(|&t| !(t > 0.0) || !t.is_finite())
        || t_grid.windows(2).any(|w| !(w[1] > w[0]))
    {
        return Err(Error::InvalidParameter(
            "scale grid must be positive and strictly increasing".into(),
        ));
    }
    Ok(t_grid
        .par_iter()
        .map(|&t| MagnitudeSample {
            t,
            value: space
                .scale(t)
                .and_then(|s| magnitude(&s))
                .ok()
                .map(|r| r.value),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn equilateral(n: usize, d: f64) -> FiniteMetricSpace {
        let m = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { d });
        FiniteMetricSpace::from_distances(m, None).unwrap()
    }

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        FiniteMetricSpace::from_points(&pts).unwrap()
    }

    #[test]
    fn exponentiated_matrix_examples() {
        assert_eq!(exponentiated_matrix(&line(&[0.0])), DMatrix::from_element(1, 1, 1.0));
        let z = exponentiated_matrix(&line(&[0.0, 2f64.ln()]));
        assert_relative_eq!(z[(0, 1)], 0.5, epsilon = 1e-15);
        assert_eq!(z[(0, 0)], 1.0);
        let z = exponentiated_matrix(&equilateral(3, 0.7));
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { (-0.7f64).exp() };
                assert_eq!(z[(i, j)], e);
            }
        }
    }

    #[test]
    fn one_point() {
        let s = line(&[0.0]);
        assert_eq!(weighting(&s).unwrap().weights, vec![1.0]);
        assert_eq!(magnitude(&s).unwrap().value, 1.0);
        assert_eq!(magnitude_homogeneous(&s).unwrap(), 1.0);
    }

    #[test]
    fn two_points() {
        for d in [0.2, 1.0, 3f64.ln(), 4.0] {
            let s = line(&[0.0, d]);
            let w = weighting(&s).unwrap();
            let expect = 1.0 / (1.0 + (-d).exp());
            for wi in &w.weights {
                assert_relative_eq!(*wi, expect, max_relative = 1e-14);
            }
            let m = magnitude(&s).unwrap().value;
            assert_relative_eq!(m, 2.0 / (1.0 + (-d).exp()), max_relative = 1e-14);
            assert_relative_eq!(magnitude_homogeneous(&s).unwrap(), m, max_relative = 1e-14);
        }
        let m = magnitude(&line(&[0.0, 3f64.ln()])).unwrap().value;
        assert_relative_eq!(m, 1.5, max_relative = 1e-14);
    }

    #[test]
    fn equilateral_triangle() {
        for d in [0.3, 1.0, 2.5] {
            let s = equilateral(3, d);
            let expect = 3.0 / (1.0 + 2.0 * (-d).exp());
            assert_relative_eq!(magnitude(&s).unwrap().value, expect, max_relative = 1e-13);
            assert_relative_eq!(magnitude_homogeneous(&s).unwrap(), expect, max_relative = 1e-13);
            assert_relative_eq!(magnitude_by_inverse(&s).unwrap(), expect, max_relative = 1e-13);
        }
    }

    #[test]
    fn weighting_solves_equations() {
        let s = FiniteMetricSpace::from_points(&[
            vec![0.0, 0.0],
            vec![1.0, 0.2],
            vec![0.3, 2.0],
            vec![-1.0, 0.5],
        ])
        .unwrap();
        let r = magnitude(&s).unwrap();
        assert!(r.weighting.residual(&s) <= WEIGHTING_RESIDUAL);
        assert_relative_eq!(r.value, r.weighting.total(), max_relative = 1e-12);
        assert_relative_eq!(r.value, magnitude_by_inverse(&s).unwrap(), max_relative = 1e-9);
    }

    #[test]
    fn inhomogeneous_space_rejected() {
        let s = line(&[0.0, 1.0, 3.0]);
        assert!(!is_homogeneous(&s));
        assert!(matches!(magnitude_homogeneous(&s), Err(Error::NotHomogeneous { row: 1 })));
    }

    #[test]
    fn separation_examples() {
        assert!(is_sufficiently_separated(&line(&[0.0])));
        assert!(!is_sufficiently_separated(&equilateral(3, 0.5)));
        assert!(is_sufficiently_separated(&equilateral(3, 1.0)));
        // Two points: ln(1) = 0, so any separated pair qualifies.
        assert!(is_sufficiently_separated(&line(&[0.0, 1e-6])));
    }

    #[test]
    fn sweep_examples() {
        let s = line(&[0.0, 1.0]);
        let sweep = magnitude_function(&s, &[1.0, 2.0, 3.0]).unwrap();
        for sample in sweep {
            let expect = 2.0 / (1.0 + (-sample.t).exp());
            assert_relative_eq!(sample.value.unwrap(), expect, max_relative = 1e-14);
        }
        let one = magnitude_function(&line(&[0.0]), &[0.1, 1.0, 100.0]).unwrap();
        assert!(one.iter().all(|s| s.value == Some(1.0)));
        assert!(magnitude_function(&s, &[1.0, 1.0]).is_err());
        assert!(magnitude_function(&s, &[-1.0, 1.0]).is_err());
    }

    #[test]
    fn sweep_marks_undefined_points() {
        // Near-coincident points make Z numerically rank one at small scales.
        let s = line(&[0.0, 1e-15, 1.0]);
        let sweep = magnitude_function(&s, &[1e-3, 1e3]).unwrap();
        assert_eq!(sweep[0].value, None);
        assert!(sweep[1].value.is_some());
    }
}
