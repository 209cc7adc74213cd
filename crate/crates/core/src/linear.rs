//! Points on a line.
//!
//! A linear space is fixed by its consecutive gaps `d₁, …, d_{n−1}`. Its
//! weighting and magnitude have closed forms in `tanh(d_i / 2)`, and spreading
//! more and more points along a segment of length `ℓ` drives the magnitude to
//! `ℓ/2 + 1`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::solver::Weighting;

/// Strictly positive consecutive gaps of `n = gaps.len() + 1` collinear points.
#[derive(Debug, Clone, PartialEq)]
pub struct GapTuple(Vec<f64>);

impl GapTuple {
    pub fn new(gaps: Vec<f64>) -> Result<Self> {
        if let Some((i, g)) = gaps.iter().enumerate().find(|(_, g)| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter(format!("gap {i} is {g}, must be positive")));
        }
        Ok(Self(gaps))
    }

    pub fn gaps(&self) -> &[f64] {
        &self.0
    }

    pub fn points(&self) -> usize {
        self.0.len() + 1
    }

    pub fn total_length(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max_gap(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// Positions of the points, starting at 0.
    pub fn positions(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.0.iter().scan(0.0, |acc, g| {
                *acc += g;
                Some(*acc)
            }))
            .collect()
    }

    pub fn as_space(&self) -> FiniteMetricSpace {
        let n = self.points();
        let mut dist = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut acc = 0.0;
            for j in (i + 1)..n {
                acc += self.0[j - 1];
                dist[(i, j)] = acc;
                dist[(j, i)] = acc;
            }
        }
        FiniteMetricSpace::from_trusted(dist)
    }
}

fn half_tanh(gap: f64) -> f64 {
    (0.5 * gap).tanh()
}

/// Weight of each point: `½(tanh(d_{i−1}/2) + tanh(d_i/2))`, where the missing
/// gap beyond either end contributes `tanh(∞) = 1`.
pub fn linear_weights(g: &GapTuple) -> Weighting {
    let gaps = g.gaps();
    let n = g.points();
    let side = |i: isize| -> f64 {
        if i < 0 || i as usize >= gaps.len() {
            1.0
        } else {
            half_tanh(gaps[i as usize])
        }
    };
    Weighting {
        weights: (0..n as isize).map(|i| 0.5 * (side(i - 1) + side(i))).collect(),
    }
}

/// `1 + Σ tanh(d_i / 2)`.
pub fn linear_magnitude(g: &GapTuple) -> f64 {
    1.0 + g.gaps().iter().map(|&d| half_tanh(d)).sum::<f64>()
}

/// Magnitude of the segment of length `ℓ`: `ℓ/2 + 1`.
pub fn segment_magnitude(length: f64) -> Result<f64> {
    if !(length >= 0.0) || !length.is_finite() {
        return Err(Error::InvalidParameter(format!("segment length {length}")));
    }
    Ok(0.5 * length + 1.0)
}

/// Ratio between consecutive gaps in [`Scheme::Geometric`].
pub const GEOMETRIC_RATIO: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Equal gaps.
    Uniform,
    /// Gap proportions drawn uniformly from the simplex.
    Random { seed: u64 },
    /// Gaps shrinking by [`GEOMETRIC_RATIO`] from left to right.
    Geometric,
}

/// A family of finite subsets of a segment of the given length, each
/// containing both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentApproximation {
    pub length: f64,
    pub scheme: Scheme,
}

impl SegmentApproximation {
    pub fn new(length: f64, scheme: Scheme) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("segment length {length}")));
        }
        Ok(Self { length, scheme })
    }

    /// Gaps of the `n`-point approximation; they sum to the segment length.
    pub fn gaps(&self, n: usize) -> Result<GapTuple> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 points, got {n}")));
        }
        let m = n - 1;
        let weights: Vec<f64> = match self.scheme {
            Scheme::Uniform => vec![1.0; m],
            Scheme::Geometric => (0..m).map(|i| GEOMETRIC_RATIO.powi(i as i32)).collect(),
            Scheme::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(n as u64);
                // Normalised unit exponentials are uniform on the simplex.
                (0..m).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect()
            }
        };
        let total: f64 = weights.iter().sum();
        GapTuple::new(weights.iter().map(|w| self.length * w / total).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentSample {
    pub n: usize,
    pub magnitude: f64,
    /// `|magnitude − (ℓ/2 + 1)|`.
    pub error: f64,
    pub max_gap: f64,
}

pub fn segment_convergence(approx: &SegmentApproximation, n_list: &[usize]) -> Result<Vec<SegmentSample>> {
    let limit = segment_magnitude(approx.length)?;
    n_list
        .iter()
        .map(|&n| {
            let g = approx.gaps(n)?;
            let magnitude = linear_magnitude(&g);
            Ok(SegmentSample {
                n,
                magnitude,
                error: (magnitude - limit).abs(),
                max_gap: g.max_gap(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{magnitude, weighting};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gaps(v: &[f64]) -> GapTuple {
        GapTuple::new(v.to_vec()).unwrap()
    }

    #[test]
    fn as_space_examples() {
        assert_eq!(gaps(&[]).as_space().len(), 1);
        let s = gaps(&[1.0, 2.0]).as_space();
        assert_eq!((s.distance(0, 1), s.distance(1, 2), s.distance(0, 2)), (1.0, 2.0, 3.0));
        assert!(s.validate().ok);
        assert_eq!(gaps(&[1.0, 1.0, 1.0]).as_space().distance(0, 3), 3.0);
    }

    #[test]
    fn invalid_gaps_rejected() {
        assert!(GapTuple::new(vec![1.0, 0.0]).is_err());
        assert!(GapTuple::new(vec![-1.0]).is_err());
        assert!(GapTuple::new(vec![f64::NAN]).is_err());
        assert!(GapTuple::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn weights_examples() {
        assert_eq!(linear_weights(&gaps(&[])).weights, vec![1.0]);
        for d in [0.1, 1.0, 5.0] {
            let w = linear_weights(&gaps(&[d])).weights;
            assert_relative_eq!(w[0], 1.0 / (1.0 + (-d).exp()), max_relative = 1e-15);
            assert_eq!(w[0], w[1]);
        }
        let g = gaps(&[1.0, 1.0]);
        let w = linear_weights(&g).weights;
        let t = 0.5f64.tanh();
        assert_relative_eq!(w[0], 0.5 * (1.0 + t));
        assert_relative_eq!(w[1], t);
        assert_relative_eq!(w[2], 0.5 * (1.0 + t));
        let oracle = weighting(&g.as_space()).unwrap().weights;
        for (a, b) in w.iter().zip(&oracle) {
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn magnitude_examples() {
        assert_eq!(linear_magnitude(&gaps(&[])), 1.0);
        for d in [0.1, 1.0, 5.0] {
            assert_relative_eq!(
                linear_magnitude(&gaps(&[d])),
                2.0 / (1.0 + (-d).exp()),
                max_relative = 1e-15
            );
        }
        let g = gaps(&[1.0, 1.0]);
        let m = linear_magnitude(&g);
        assert_relative_eq!(m, 1.924_234_314_520_019_5, max_relative = 1e-15);
        assert_relative_eq!(m, magnitude(&g.as_space()).unwrap().value, max_relative = 1e-13);
    }

    #[test]
    fn segment_examples() {
        assert_eq!(segment_magnitude(0.0).unwrap(), 1.0);
        assert_eq!(segment_magnitude(2.0).unwrap(), 2.0);
        assert_eq!(segment_magnitude(10.0).unwrap(), 6.0);
        assert!(segment_magnitude(-1.0).is_err());
    }

    #[test]
    fn schemes_cover_the_segment() {
        for scheme in [Scheme::Uniform, Scheme::Geometric, Scheme::Random { seed: 42 }] {
            let a = SegmentApproximation::new(7.0, scheme).unwrap();
            for n in [2, 3, 10, 500] {
                let g = a.gaps(n).unwrap();
                assert_eq!(g.points(), n);
                assert_relative_eq!(g.total_length(), 7.0, max_relative = 1e-13);
            }
            assert!(a.gaps(1).is_err());
        }
        let r = SegmentApproximation::new(1.0, Scheme::Random { seed: 42 }).unwrap();
        assert_eq!(r.gaps(20).unwrap(), r.gaps(20).unwrap());
        let other = SegmentApproximation::new(1.0, Scheme::Random { seed: 7 }).unwrap();
        assert_ne!(r.gaps(20).unwrap(), other.gaps(20).unwrap());
    }

    #[test]
    fn uniform_convergence() {
        let a = SegmentApproximation::new(1.0, Scheme::Uniform).unwrap();
        let table = segment_convergence(&a, &[2, 4, 8, 16, 64, 256, 1024]).unwrap();
        assert_relative_eq!(table[0].magnitude, 1.0 + 0.5f64.tanh());
        for w in table.windows(2) {
            assert!(w[1].error < w[0].error);
        }
        for row in &table {
            let bound = a.length * a.length / (4.0 * (row.n - 1) as f64);
            assert!(row.error <= bound, "n={} error={} bound={bound}", row.n, row.error);
        }
        assert!(table.last().unwrap().error < 1e-6);
    }

    #[test]
    fn random_scheme_converges() {
        let a = SegmentApproximation::new(3.0, Scheme::Random { seed: 42 }).unwrap();
        let table = segment_convergence(&a, &[10, 10_000]).unwrap();
        assert!(table[1].error < table[0].error);
        assert!(table[1].error < 1e-3);
    }

    #[test]
    fn tanh_remainder_on_dense_grid() {
        for i in 1..=100_000 {
            let c = 10.0 * i as f64 / 100_000.0;
            assert!((c.tanh() - c).abs() <= c * c, "c={c}");
        }
    }

    proptest! {
        #[test]
        fn weights_sum_to_magnitude(g in prop::collection::vec(0.01f64..5.0, 0..30)) {
            let g = GapTuple::new(g).unwrap();
            let w = linear_weights(&g);
            prop_assert!((w.total() - linear_magnitude(&g)).abs() <= 1e-12 * w.total());
            prop_assert!(w.residual(&g.as_space()) <= 1e-12);
        }
    }
}
