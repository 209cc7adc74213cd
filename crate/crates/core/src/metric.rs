//! Finite metric spaces: construction, validation, ingestion and scaling.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed in triangle-inequality checks, as a multiple of the
/// largest distance in the space.
pub const TRIANGLE_REL_TOL: f64 = 1e-9;

/// Upper bound on the number of violations recorded in a single report.
const MAX_REPORTED: usize = 1024;

/// A finite set of points with a symmetric, separated distance matrix that
/// satisfies the triangle inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    dist: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Asymmetry,
    NonzeroDiagonal,
    /// Off-diagonal distance that is zero, negative or not a number.
    #[serde(rename = "zero-offdiagonal")]
    ZeroOffdiagonal,
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Zero-based point indices. Triangle violations list `(i, j, k)` with
    /// `d(i,k) > d(i,j) + d(j,k)`.
    pub indices: Vec<usize>,
    /// Size of the violation (asymmetry gap, offending value, or triangle excess).
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            ok: violations.is_empty(),
            violations,
        }
    }
}

/// Checks the metric axioms on a raw distance matrix.
pub fn validate_matrix(dist: &DMatrix<f64>) -> ValidationReport {
    let n = dist.nrows();
    let mut violations = Vec::new();
    let mut push = |v: Violation| {
        if violations.len() < MAX_REPORTED {
            violations.push(v);
        }
    };
    if dist.ncols() != n {
        // Callers construct square matrices; treat anything else as wholly asymmetric.
        push(Violation {
            kind: ViolationKind::Asymmetry,
            indices: vec![n, dist.ncols()],
            amount: f64::INFINITY,
        });
        return ValidationReport::from_violations(violations);
    }

    for i in 0..n {
        let d = dist[(i, i)];
        if d != 0.0 {
            push(Violation {
                kind: ViolationKind::NonzeroDiagonal,
                indices: vec![i],
                amount: d,
            });
        }
        for j in (i + 1)..n {
            let (a, b) = (dist[(i, j)], dist[(j, i)]);
            if a != b {
                push(Violation {
                    kind: ViolationKind::Asymmetry,
                    indices: vec![i, j],
                    amount: (a - b).abs(),
                });
            }
            for value in [a, b] {
                if value.is_nan() || value <= 0.0 {
                    push(Violation {
                        kind: ViolationKind::ZeroOffdiagonal,
                        indices: vec![i, j],
                        amount: value,
                    });
                    break;
                }
            }
        }
    }

    let max = dist.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
    let slack = TRIANGLE_REL_TOL * max;
    for i in 0..n {
        for k in (i + 1)..n {
            let direct = dist[(i, k)];
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let excess = direct - (dist[(i, j)] + dist[(j, k)]);
                if excess > slack {
                    push(Violation {
                        kind: ViolationKind::Triangle,
                        indices: vec![i, j, k],
                        amount: excess,
                    });
                }
            }
        }
    }
    ValidationReport::from_violations(violations)
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl FiniteMetricSpace {
    /// Euclidean subspace metric on a point cloud.
    pub fn from_points(coords: &[Vec<f64>]) -> Result<Self> {
        let n = coords.len();
        let dim = coords.first().map_or(0, Vec::len);
        if n > 0 && dim == 0 {
            return Err(Error::DimensionMismatch {
                index: 0,
                expected: 1,
                found: 0,
            });
        }
        for (index, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::DimensionMismatch {
                    index,
                    expected: dim,
                    found: c.len(),
                });
            }
        }
        let mut dist = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let d = coords[i]
                    .iter()
                    .zip(&coords[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if d == 0.0 {
                    return Err(Error::DuplicatePoint(i, j));
                }
                dist[(i, j)] = d;
                dist[(j, i)] = d;
            }
        }
        Ok(Self {
            labels: default_labels(n),
            dist,
        })
    }

    /// Builds a space from an explicit distance matrix, rejecting it with the
    /// full validation report if any axiom fails.
    pub fn from_distances(dist: DMatrix<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if !dist.is_square() {
            return Err(Error::Shape(format!(
                "{}x{} distance matrix",
                dist.nrows(),
                dist.ncols()
            )));
        }
        let n = dist.nrows();
        let labels = match labels {
            Some(l) if l.len() != n => {
                return Err(Error::Shape(format!("{} labels for {n} points", l.len())))
            }
            Some(l) => l,
            None => default_labels(n),
        };
        let report = validate_matrix(&dist);
        if !report.ok {
            return Err(Error::InvalidMetric(report));
        }
        Ok(Self { labels, dist })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<String>>) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Shape(format!("row {i} has {} entries, expected {n}", r.len())));
        }
        let dist = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_distances(dist, labels)
    }

    /// Internal constructor for families whose metric axioms hold by construction.
    pub(crate) fn from_trusted(dist: DMatrix<f64>) -> Self {
        debug_assert!(dist.is_square());
        Self {
            labels: default_labels(dist.nrows()),
            dist,
        }
    }

    pub fn len(&self) -> usize {
        self.dist.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn distances(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[(i, j)]
    }

    pub fn validate(&self) -> ValidationReport {
        validate_matrix(&self.dist)
    }

    /// The space `tX` with every distance multiplied by `t`.
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::NonpositiveScale(t));
        }
        Ok(Self {
            labels: self.labels.clone(),
            dist: &self.dist * t,
        })
    }

    /// Smallest distance between distinct points, or `None` for fewer than two points.
    pub fn min_separation(&self) -> Option<f64> {
        let n = self.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| self.dist[(i, j)])
            .reduce(f64::min)
    }

    /// Relabels points by a permutation: point `i` of the result is point
    /// `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter("not a permutation".into()));
        }
        Ok(Self {
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            dist: DMatrix::from_fn(n, n, |i, j| self.dist[(perm[i], perm[j])]),
        })
    }
}

/// JSON input accepted by the command-line tool.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum SpaceInput {
    Points {
        points: Vec<Vec<f64>>,
    },
    Distances {
        distances: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

impl SpaceInput {
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn into_space(self) -> Result<FiniteMetricSpace> {
        match self {
            SpaceInput::Points { points } => FiniteMetricSpace::from_points(&points),
            SpaceInput::Distances { distances, labels } => {
                FiniteMetricSpace::from_rows(&distances, labels)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    #[test]
    fn two_points_on_a_line() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.distance(0, 1), 1.0);
        assert_eq!(s.labels(), ["0", "1"]);
    }

    #[test]
    fn pythagorean_pair() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(s.distance(0, 1), 5.0);
        assert!(s.validate().ok);
    }

    #[test]
    fn coincident_points_rejected() {
        let err = FiniteMetricSpace::from_points(&[vec![0.0], vec![0.0]]).unwrap_err();
        assert!(matches!(err, Error::DuplicatePoint(0, 1)));
    }

    #[test]
    fn ragged_points_rejected() {
        let err = FiniteMetricSpace::from_points(&[vec![0.0, 1.0], vec![0.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { index: 1, .. }));
    }

    #[test]
    fn triangle_violation_reported() {
        let m = raw(&[&[0.0, 1.0, 5.0], &[1.0, 0.0, 1.0], &[5.0, 1.0, 0.0]]);
        let report = validate_matrix(&m);
        assert!(!report.ok);
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.kind, ViolationKind::Triangle);
        assert_eq!(v.indices, vec![0, 1, 2]);
        assert_eq!(v.amount, 3.0);
    }

    #[test]
    fn nonzero_diagonal_reported() {
        let m = raw(&[&[0.1, 1.0], &[1.0, 0.0]]);
        let report = validate_matrix(&m);
        assert!(!report.ok);
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::NonzeroDiagonal && v.indices == [0]));
    }

    #[test]
    fn asymmetry_and_zero_distance_reported() {
        let m = raw(&[&[0.0, 1.0, 0.0], &[1.5, 0.0, 1.0], &[0.0, 1.0, 0.0]]);
        let kinds: Vec<_> = validate_matrix(&m).violations.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::Asymmetry));
        assert!(kinds.contains(&ViolationKind::ZeroOffdiagonal));
    }

    #[test]
    fn triangle_slack_absorbs_rounding() {
        let eps = 1e-12;
        let m = raw(&[&[0.0, 1.0, 2.0 + eps], &[1.0, 0.0, 1.0], &[2.0 + eps, 1.0, 0.0]]);
        assert!(validate_matrix(&m).ok);
    }

    #[test]
    fn from_distances_returns_report() {
        let rows = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        match FiniteMetricSpace::from_rows(&rows, None) {
            Err(Error::InvalidMetric(r)) => assert!(!r.ok),
            other => panic!("expected InvalidMetric, got {other:?}"),
        }
    }

    #[test]
    fn scaling() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(s.scale(3.0).unwrap().distance(0, 1), 3.0);
        assert_eq!(s.scale(1.0).unwrap(), s);
        let c = FiniteMetricSpace::from_points(&[vec![0.0, 0.0], vec![3.0, 0.0], vec![3.0, 4.0]])
            .unwrap()
            .scale(2.0)
            .unwrap();
        let mut d = vec![c.distance(0, 1), c.distance(1, 2), c.distance(0, 2)];
        d.sort_by(f64::total_cmp);
        assert_eq!(d, vec![6.0, 8.0, 10.0]);
        assert!(matches!(s.scale(0.0), Err(Error::NonpositiveScale(_))));
        assert!(matches!(s.scale(-1.0), Err(Error::NonpositiveScale(_))));
    }

    #[test]
    fn json_ingestion() {
        let s = SpaceInput::from_json(r#"{"points": [[0,0],[3,4]]}"#)
            .unwrap()
            .into_space()
            .unwrap();
        assert_eq!(s.distance(0, 1), 5.0);

        let s = SpaceInput::from_json(r#"{"distances": [[0,2],[2,0]], "labels": ["a","b"]}"#)
            .unwrap()
            .into_space()
            .unwrap();
        assert_eq!(s.labels(), ["a", "b"]);
        assert_eq!(s.distance(1, 0), 2.0);

        let bad = SpaceInput::from_json(r#"{"distances": [[0,1,5],[1,0,1],[5,1,0]]}"#)
            .unwrap()
            .into_space();
        assert!(matches!(bad, Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn permutation_relabels() {
        let s = FiniteMetricSpace::from_points(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let p = s.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.labels(), ["2", "0", "1"]);
        assert_eq!(p.distance(0, 1), 3.0);
        assert!(s.permute(&[0, 0, 1]).is_err());
    }
}
