//! Densities of corner projections of unitary orbits, with the splines,
//! kernels, integer counts and random-matrix samplers they are checked against.

pub mod density;
pub mod discrete;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod matrixmodel;
pub mod quadrature;
pub mod splines;
pub mod stats;
pub mod verify;

pub use density::{
    compose_kernel, corner_density, gt_volume, hciz, kernel_density, normalization,
    ComplexSpectrum, CornerDensity, QuadratureSpec,
};
pub use discrete::{count_between, count_schemes, relative_dimension, Signature};
pub use error::{Error, Result};
pub use geometry::{interlaces, GtPattern, Spectrum};
pub use linalg::CMatrix;
pub use num_complex::Complex64;
pub use matrixmodel::{RandomStream, McEstimate};
pub use splines::{b_spline, fundamental_spline, spline_tail_integrals, KnotVector};
pub use stats::SampleSet;
pub use verify::{run_suite, CheckReport, Suite, SuiteReport, VerifyParams};
