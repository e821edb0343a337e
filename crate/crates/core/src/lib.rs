//! Cross curvature flows on the locally homogeneous 3-geometries.
//!
//! In a Milnor frame the metric stays diagonal, `g = A f¹⊗f¹ + B f²⊗f² + C f³⊗f³`,
//! and the positive and negative cross curvature flows `∂g/∂t = ±2h` reduce to
//! ODEs in `(A, B, C)`. This crate holds those ODEs together with the pieces
//! needed to study them numerically:
//!
//! - [`geometry`]: Milnor-frame metrics, sectional curvatures and the cross
//!   curvature tensor (two independent routes).
//! - [`flow`]: the ±XCF vector fields, their auxiliary polynomials and the
//!   closed-form rate identities.
//! - [`integrator`]: adaptive Dormand–Prince integration with dense output,
//!   event location and finite-time blow-up handling.
//! - [`exact`]: closed-form solution families.
//! - [`asymptotics`]: power-law fits, limit functionals and sub-Riemannian
//!   limit coefficients near the singular time.
//! - [`sl2`]: the SL(2,ℝ) regime classifier and separatrix bisection.
//!
//! The crate is `no_std` (it needs `alloc`); IO lives in the companion crate.

#![no_std]
// `!(x > 0.0)` is how NaN gets rejected along with the rest
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod flow;
pub mod geometry;
pub mod integrator;
pub mod sl2;

mod fit;
mod math;

pub use error::{Error, Result};
pub use flow::{FlowSign, VectorField, Xcf};
pub use geometry::{CrossCurvature, Geometry, MilnorMetric, SectionalCurvatures};
pub use integrator::{IntegratorControls, Termination, Trajectory, VariableMode};
