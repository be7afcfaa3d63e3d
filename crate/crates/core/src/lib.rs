//! Matrix quantization of vector fields, flows and densities on the sphere.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blob;
pub mod dynamics;
pub mod error;
pub mod harmonics;
pub mod laplacian;
pub mod linalg;
pub mod quantization;
pub mod reference;
pub mod spin;

pub use error::{Error, Result};
pub use harmonics::{analyze, harmonic, synthesize, GridField, HarmonicCoefficients};
pub use laplacian::{
    apply_laplacian, build_eigenbasis, quantized_gradient, solve_poisson, solve_stream, LaplacianEigenbasis, Model,
};
pub use linalg::{matrix_exponential, CMatrix};
pub use quantization::{
    blob_at, blob_center, blob_north, dequantize, dequantize_function, quantize, quantize_function, quantize_generator,
};
pub use spin::{build_spin_basis, coordinate_matrices, rotation_operator, SpinBasis, UnitVector3};
