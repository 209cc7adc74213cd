//! Magnitude of metric spaces.
//!
//! Finite metric spaces are handled directly through their matrix of
//! exponentiated distances. Three families of compact spaces are reached as
//! limits of finite approximations with closed or integral forms:
//! line segments, ternary Cantor sets, and circles under a one-parameter
//! family of metrics interpolating between the intrinsic (arc-length) and
//! the Euclidean chord metric, extended to hyperbolic-type curvatures.

pub mod cantor;
pub mod circle;
pub mod error;
pub mod linear;
pub mod metric;
pub mod numerics;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use metric::{FiniteMetricSpace, ValidationReport, Violation, ViolationKind};
pub use solver::{MagnitudeResult, Weighting};
