//! Conformal Killing 2-forms on four-dimensional metric Lie algebras.
//!
//! Given structure constants on an orthonormal frame, the crate computes the
//! curvature decomposition of the left-invariant metric, builds the split
//! Killing connections on `Λ²± ⊕ T ⊕ Λ²∓`, and counts conformal Killing
//! 2-forms exactly through the parallel sections of those connections.
//!
//! All algorithms are generic over [`Scalar`]: use [`Rational`] for exact
//! answers and `f64` together with a [`Tolerance`] otherwise.

pub mod curvature;
pub mod exterior4;
pub mod identities;
pub mod killing;
pub mod liealg;
pub mod linalg;
pub mod report;
pub mod scalar;

pub use curvature::{flags, levi_civita, riemann, CurvatureData, GeometryFlags};
pub use exterior4::{Bivector, Form, Side, Vector4};
pub use killing::{ck_dims, classify_theorem_main, CkDims, Classification, TheoremCase};
pub use liealg::{AlmostComplexStructure, MetricLieAlgebra};
pub use linalg::Matrix;
pub use scalar::{Rational, Scalar, Tolerance};
