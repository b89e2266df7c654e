//! Squared eigenfunction values of one-dimensional Dirichlet Schrödinger
//! operators recovered from eigenvalue data alone.
//!
//! The crate is split into five layers:
//!
//! * [`matrix_identity`]: the finite-dimensional eigenvector/eigenvalue
//!   identity for Hermitian matrices, used as a baseline and cross-check.
//! * [`sl_engine`]: potentials, boundary-anchored solutions, Dirichlet
//!   spectra on an interval and on the interval split at an interior point,
//!   and directly computed eigenfunctions.
//! * [`green_trace`]: Green's functions, the Krein resolvent and trace
//!   identities, and the spectral shift function of the pair.
//! * [`reconstruction`]: `e_k(x0)^2` from the two eigenvalue sequences, with
//!   either a large-|z| limit or a ratio against the free operator fixing
//!   the normalization.
//! * [`cli`]: the `s2m` command-line harness.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::too_many_arguments)]

pub mod cli;
pub mod error;
pub mod green_trace;
pub mod matrix_identity;
pub mod numeric;
pub mod reconstruction;
pub mod sl_engine;

pub use error::{Error, Result};
