//! Greedy sparse recovery and class-dependent sparse-representation
//! classification.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: column-major matrices, minimum-norm least squares and
//!   ridged SPD solves;
//! - [`pursuit`]: OMP, OLS, restart-COLS and an exhaustive subset oracle on
//!   an explicit dictionary;
//! - [`kernel`]: kernels, Gram matrices and the same pursuits expressed
//!   through a Gram matrix and a cross-kernel vector;
//! - [`classify`]: SRC/KSRC and the class-dependent classifiers built on the
//!   pursuits;
//! - [`data`]: CSV ingestion, stratified splits, synthetic subspace data,
//!   cross-validation and accuracy summaries;
//! - [`cli`]: the `cdols` command-line tool.

pub mod classify;
pub mod cli;
pub mod data;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod pursuit;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
