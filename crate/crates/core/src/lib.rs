//! Lattice toolkit for the two-dimensional principal chiral model and its
//! dual formulation: Lie algebra data, discrete exterior calculus on a
//! Lorentzian lattice, dual currents, Lax connections, Lagrangians and the
//! Frobenius reconstruction of the group field.
//!
//! Numerical code is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the precision.

pub mod algebra;
pub mod dense;
pub mod dual_current;
pub mod ensemble;
pub mod error;
pub mod expr;
pub mod frobenius;
pub mod geometry;
pub mod lagrangian;
pub mod lax;
pub mod matrix;
pub mod residual;
pub mod scalar;

pub use error::{Error, Result};
pub use num_complex::Complex;

pub type LieAlgebraF64 = algebra::LieAlgebraData<f64>;
pub type LieAlgebraF32 = algebra::LieAlgebraData<f32>;
pub type LatticeF64 = geometry::Lattice2D<f64>;
pub type LatticeF32 = geometry::Lattice2D<f32>;
pub type FrameF64 = geometry::LorentzFrame<f64>;
pub type FrameF32 = geometry::LorentzFrame<f32>;
pub type FieldSetF64 = geometry::FieldSet<f64>;
pub type FieldSetF32 = geometry::FieldSet<f32>;
pub type OneFormF64 = geometry::LieOneForm<f64>;
pub type OneFormF32 = geometry::LieOneForm<f32>;
pub type TwoFormF64 = geometry::LieTwoForm<f64>;
pub type TwoFormF32 = geometry::LieTwoForm<f32>;
pub type MatrixF64 = matrix::Matrix<f64>;
pub type MatrixF32 = matrix::Matrix<f32>;
pub type ComplexMatrixF64 = matrix::Matrix<num_complex::Complex<f64>>;
pub type ComplexMatrixF32 = matrix::Matrix<num_complex::Complex<f32>>;
