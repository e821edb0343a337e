//! Command-line laboratory for ±XCF on the Milnor-frame 3-geometries.
//!
//! Runs and analyses live in [`analysis`], file formats in [`output`], parallel
//! grid runs in [`sweep`] and the acceptance checks in [`verify`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;
pub mod verify;

pub use error::{LabError, Result};
