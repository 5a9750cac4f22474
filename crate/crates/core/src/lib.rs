//! Interference of two non-overlapping field modes through one giant atom.
//!
//! - [`hilbert`]: truncated Fock-space operators and states.
//! - [`collective`]: collective-mode algebra and the full two-mode quantum model.
//! - [`circuit`]: two driven resonators coupled to one atom.
//! - [`dynamics`]: Schrödinger integration and observables.
//! - [`effective`]: dispersive reduction to a driven two-level atom.
//! - [`parallel`]: batch evaluation, rayon-backed behind the `parallel` feature.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod circuit;
pub mod collective;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod hilbert;
pub mod parallel;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
