//! Numerical laboratory for regularized traces of higher-order operators
//! `(-i)^n D^n` on `[0, 1]` with Birkhoff-regular two-point boundary
//! conditions, perturbed by finite complex measures.
//!
//! The crate is organised bottom-up:
//!
//! * [`bc`]: boundary forms, validation, normalization, shape classes.
//! * [`determinants`]: leading-coefficient determinants, Birkhoff roots,
//!   regularity class and the midpoint-atom coefficient, plus the scaled
//!   characteristic determinant and its column-replaced minors.
//! * [`spectrum`]: measures, propagators, perturbed characteristic
//!   functions and contour-bracketed eigenvalue slices.
//! * [`trace`]: partial sums, Cesàro summation and trace predictions.
//! * [`green`]: Green-function diagonal, contour trace integrals and the
//!   half-line integral oracle for the midpoint coefficient.
//! * [`config`]: declarative problem files used by the `tracelab` binary.

pub mod bc;
pub mod config;
pub mod cplx;
pub mod determinants;
pub mod error;
pub mod green;
pub mod linalg;
pub mod quad;
pub mod spectrum;
pub mod trace;

pub use error::{Error, Result};
pub use num_complex::Complex64;
