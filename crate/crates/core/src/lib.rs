//! Verification engine for Kähler–Frobenius geometry.

pub mod catalog;
pub mod expr;
pub mod frobenius;
pub mod kahler;
pub mod sampling;
pub mod tensor;
pub mod theta;
pub mod wirtinger;

pub use num_complex::Complex64;
