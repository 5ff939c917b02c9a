//! Finite element solver and verification suite for the Landau-Lifshitz-Gilbert
//! equation with a second-order BDF2 tangent-plane integrator.
//!
//! The crate is generic over the scalar type through [`num::Real`]; the
//! aliases below fix the two supported precisions. Linear systems additionally
//! require [`sparse::FactorScalar`], implemented for `f32` and `f64`.

// Indexed loops mirror the math (several parallel arrays share one index),
// and negated comparisons like `!(x <= tol)` deliberately catch NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem;
pub mod field;
pub mod harness;
pub mod integrator;
pub mod mesh;
pub mod num;
pub mod problem;
pub mod quad;
pub mod sparse;
pub mod tangent;
pub mod verify;

pub use error::{Error, SolveError};

/// Double precision aliases. All production runs use these.
pub type TriMesh64 = mesh::TriMesh<f64>;
pub type ScalarField64 = field::ScalarField<f64>;
pub type VectorField64 = field::VectorField<f64>;
pub type CsrMatrix64 = sparse::CsrMatrix<f64>;

/// Single precision aliases, mainly for cross-precision sanity checks.
pub type TriMesh32 = mesh::TriMesh<f32>;
pub type ScalarField32 = field::ScalarField<f32>;
pub type VectorField32 = field::VectorField<f32>;
pub type CsrMatrix32 = sparse::CsrMatrix<f32>;
