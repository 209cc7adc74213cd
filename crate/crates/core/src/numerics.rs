//! Numerical kernels shared by the solvers: symmetric linear solves with a
//! positive-definiteness diagnostic, composite Gauss-Legendre quadrature
//! refined by panel doubling, and series summation driven by analytic tail
//! bounds.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Reciprocal condition estimates below this are treated as singular.
pub const RCOND_SINGULAR: f64 = 1e-13;

/// Required relative residual `‖Ax − b‖∞ / ‖b‖∞` of a successful solve.
pub const SOLVE_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Cholesky,
    Lu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveDiagnostics {
    pub method: SolveMethod,
    /// Set exactly when the Cholesky factorisation succeeded.
    pub positive_definite: bool,
    /// Estimate of `1 / (‖A‖₁ ‖A⁻¹‖₁)`.
    pub rcond_estimate: f64,
}

enum Factor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Cholesky(c) => Some(c.solve(b)),
            Factor::Lu(lu) => lu.solve(b),
        }
    }
}

/// Hager's estimate of `‖A⁻¹‖₁` for symmetric `A`, using only solves.
fn inverse_norm1_estimate(factor: &Factor, n: usize) -> Option<f64> {
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    for _ in 0..5 {
        let y = factor.solve(&x)?;
        estimate = y.iter().map(|v| v.abs()).sum::<f64>();
        let sign = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = factor.solve(&sign)?;
        let (jmax, zmax) = z
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.abs()))
            .fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
        if zmax <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[jmax] = 1.0;
    }
    estimate.is_finite().then_some(estimate)
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn norm_inf(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `A x = b` for symmetric `A`, trying Cholesky before falling back to
/// partially pivoted LU.
pub fn solve_symmetric(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, SolveDiagnostics)> {
    let n = a.nrows();
    if !a.is_square() || b.len() != n {
        return Err(Error::Shape(format!(
            "{}x{} matrix with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if n == 0 {
        let diag = SolveDiagnostics {
            method: SolveMethod::Cholesky,
            positive_definite: true,
            rcond_estimate: 1.0,
        };
        return Ok((DVector::zeros(0), diag));
    }

    let (factor, method) = match a.clone().cholesky() {
        Some(c) => (Factor::Cholesky(c), SolveMethod::Cholesky),
        None => (Factor::Lu(a.clone().lu()), SolveMethod::Lu),
    };
    let singular = |rcond: f64| Error::SingularMatrix { rcond };

    let rcond = match inverse_norm1_estimate(&factor, n) {
        Some(inv) if inv > 0.0 => 1.0 / (norm1(a) * inv),
        _ => return Err(singular(0.0)),
    };
    if !(rcond >= RCOND_SINGULAR) {
        return Err(singular(rcond));
    }

    let mut x = factor.solve(b).ok_or_else(|| singular(0.0))?;
    let bnorm = norm_inf(b);
    let limit = SOLVE_RESIDUAL * bnorm.max(f64::MIN_POSITIVE);
    let mut residual = b - a * &x;
    // One step of iterative refinement if the first solve falls short.
    if norm_inf(&residual) > limit {
        if let Some(dx) = factor.solve(&residual) {
            x += dx;
            residual = b - a * &x;
        }
    }
    if !(norm_inf(&residual) <= limit) {
        return Err(singular(rcond));
    }

    let diag = SolveDiagnostics {
        method,
        positive_definite: method == SolveMethod::Cholesky,
        rcond_estimate: rcond,
    };
    Ok((x, diag))
}

/// Controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub tol: f64,
    pub max_refinements: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_refinements: 24,
        }
    }
}

impl Quadrature {
    pub fn new(tol: f64, max_refinements: usize) -> Result<Self> {
        if !(tol > 0.0) || max_refinements < 1 {
            return Err(Error::InvalidParameter(format!(
                "quadrature needs tol > 0 and max_refinements >= 1, got {tol}, {max_refinements}"
            )));
        }
        Ok(Self {
            tol,
            max_refinements,
        })
    }
}

/// Points per panel of the underlying Gauss-Legendre rule (exact for
/// polynomials of degree `2 * GAUSS_POINTS - 1`).
pub const GAUSS_POINTS: usize = 8;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n(x) and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GAUSS_POINTS))
}

fn panel_sum<F: Fn(f64) -> f64>(f: &F, breaks: &[f64]) -> f64 {
    let (nodes, weights) = rule();
    breaks
        .windows(2)
        .map(|w| {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            half * nodes
                .iter()
                .zip(weights)
                .map(|(x, wt)| wt * f(mid + half * x))
                .sum::<f64>()
        })
        .sum()
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, q: Quadrature) -> Result<f64> {
    integrate_panels(f, &[a, b], q)
}

/// Integrates `f` over `[breaks[0], breaks[last]]`, starting from the given
/// panel boundaries and bisecting every panel until two successive estimates
/// differ by less than `q.tol`.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], q: Quadrature) -> Result<f64> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "panel boundaries must be strictly increasing".into(),
        ));
    }
    let mut panels = breaks.to_vec();
    let mut previous = panel_sum(&f, &panels);
    let mut last_change = f64::INFINITY;
    for _ in 0..q.max_refinements {
        panels = panels
            .windows(2)
            .flat_map(|w| [w[0], 0.5 * (w[0] + w[1])])
            .chain(std::iter::once(*panels.last().unwrap()))
            .collect();
        let current = panel_sum(&f, &panels);
        last_change = (current - previous).abs();
        if last_change < q.tol {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::NoConvergence {
        iterations: q.max_refinements,
        last_change,
    })
}

/// Upper limit on terms examined by [`sum_series`].
pub const SERIES_MAX_TERMS: i64 = 100_000;

/// Sums `term(start) + term(start + 1) + …`, stopping at the first `N` with
/// `tail_bound(N) <= eps`, where `tail_bound(N)` must bound `|Σ_{i≥N} term(i)|`.
pub fn sum_series<T, B>(start: i64, term: T, tail_bound: B, eps: f64) -> Result<f64>
where
    T: Fn(i64) -> f64,
    B: Fn(i64) -> f64,
{
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("series tolerance {eps}")));
    }
    let cutoff = (start..start + SERIES_MAX_TERMS)
        .find(|&n| tail_bound(n) <= eps)
        .ok_or(Error::NoConvergence {
            iterations: SERIES_MAX_TERMS as usize,
            last_change: tail_bound(start + SERIES_MAX_TERMS),
        })?;
    // Smallest terms first.
    Ok((start..cutoff).rev().map(term).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn identity_solve_is_positive_definite() {
        let a = DMatrix::<f64>::identity(4, 4);
        let b = DVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        let (x, d) = solve_symmetric(&a, &b).unwrap();
        assert_eq!(x, b);
        assert!(d.positive_definite);
        assert_eq!(d.method, SolveMethod::Cholesky);
        assert_relative_eq!(d.rcond_estimate, 1.0);
    }

    #[test]
    fn two_by_two_exponentiated() {
        for d in [0.1f64, 1.0, 3.0] {
            let a_ = (-d).exp();
            let a = DMatrix::from_row_slice(2, 2, &[1.0, a_, a_, 1.0]);
            let b = DVector::from_element(2, 1.0);
            let (x, diag) = solve_symmetric(&a, &b).unwrap();
            let expect = 1.0 / (1.0 + a_);
            assert_relative_eq!(x[0], expect, max_relative = 1e-14);
            assert_relative_eq!(x[1], expect, max_relative = 1e-14);
            assert!(diag.positive_definite);
        }
    }

    #[test]
    fn rank_one_is_singular() {
        let a = DMatrix::from_element(3, 3, 1.0);
        let b = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert!(matches!(solve_symmetric(&a, &b), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn indefinite_falls_back_to_lu() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let b = DVector::from_vec(vec![2.0, 3.0]);
        let (x, d) = solve_symmetric(&a, &b).unwrap();
        assert_eq!(d.method, SolveMethod::Lu);
        assert!(!d.positive_definite);
        assert_relative_eq!(x[0], 3.0);
        assert_relative_eq!(x[1], 2.0);
    }

    #[test]
    fn rcond_tracks_conditioning() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-6]);
        let (_, d) = solve_symmetric(&a, &DVector::from_element(2, 1.0)).unwrap();
        assert_relative_eq!(d.rcond_estimate, 1e-6, max_relative = 1e-12);
    }

    #[test]
    fn legendre_rule_weights_sum_to_two() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
            for (a, b) in x.iter().zip(x.iter().rev()) {
                assert_relative_eq!(*a, -*b, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn quadrature_examples() {
        let q = Quadrature::default();
        assert_relative_eq!(integrate(|_| 1.0, 0.0, 1.0, q).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(
            integrate(|s| (PI * s).sin(), 0.0, 1.0, q).unwrap(),
            2.0 / PI,
            epsilon = 1e-12
        );
        let ell = 0.0;
        assert_relative_eq!(
            integrate(|s| (-ell * (PI * s).sin() / PI).exp(), 0.0, 1.0, q).unwrap(),
            1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn quadrature_exact_for_rule_degree() {
        // Degree 15 is the highest integrated exactly by an 8-point rule.
        let q = Quadrature::default();
        for deg in 0..(2 * GAUSS_POINTS as i32) {
            let got = integrate(|s| s.powi(deg), -1.0, 2.0, q).unwrap();
            let exact = (2f64.powi(deg + 1) - (-1f64).powi(deg + 1)) / (deg + 1) as f64;
            assert_relative_eq!(got, exact, max_relative = 1e-13);
        }
    }

    #[test]
    fn quadrature_reports_non_convergence() {
        let q = Quadrature::new(1e-30, 2).unwrap();
        let r = integrate(|s| (s * 50.0).sin().abs(), 0.0, 1.0, q);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
        assert!(Quadrature::new(0.0, 4).is_err());
        assert!(Quadrature::new(1e-3, 0).is_err());
    }

    #[test]
    fn geometric_series() {
        let s = sum_series(1, |i| 0.5f64.powi(i as i32), |n| 0.5f64.powi(n as i32 - 1), 1e-12).unwrap();
        assert!((s - 1.0).abs() <= 1e-12);
        assert_eq!(sum_series(1, |_| 0.0, |_| 0.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn cantor_tail_series_matches_long_sum() {
        for ell in [0.1, 1.0, 10.0, 100.0] {
            let term = |i: i64| 2f64.powi(i as i32) * (ell / (2.0 * 3f64.powi(i as i32))).tanh();
            let bound = |n: i64| 1.5 * ell * (2.0f64 / 3.0).powi(n as i32);
            let eps = 1e-12;
            let fast = sum_series(1, term, bound, eps).unwrap();
            let long: f64 = (1..=200).rev().map(term).sum();
            assert!((fast - long).abs() <= eps + 1e-13 * long, "ell={ell}");
        }
    }

    #[test]
    fn series_without_decaying_bound_fails() {
        let r = sum_series(0, |_| 1.0, |_| 1.0, 1e-3);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }
}
