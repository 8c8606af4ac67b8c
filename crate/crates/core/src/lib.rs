//! Core toolkit for higher-order quasi-Monte Carlo integration on the unit
//! cube: digital nets over GF(2), digit interlacing, reproducing-kernel
//! worst-case errors, Haar/Faber coefficient analysis, and convergence
//! experiments.
//!
//! Everything that can be exact is exact: points are dyadic rationals,
//! oracles run over arbitrary-precision rationals, and floating point enters
//! only in the fast kernel-sum paths (double-double compensated) and at
//! output boundaries.
//!
//! With the default `parallel` feature the data-parallel loops run on rayon;
//! disabling it falls back to sequential execution with bit-identical
//! results, because work is always split into the same fixed-size blocks and
//! combined in block order.

pub mod dd;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod export;
pub mod f2;
pub mod faber;
pub mod generators;
pub mod kernel;
pub mod util;

pub use error::{Error, Result};
