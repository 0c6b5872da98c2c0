//! Sparse polynomial surrogates of holomorphic maps with values in a Hilbert
//! or Banach space, trained by convex recovery and emulated by ReLU, RePU
//! and tanh networks.

pub mod banachspace;
pub mod dnnbuilder;
pub mod error;
pub mod harness;
pub mod models;
pub mod multiindex;
pub mod polybasis;
pub mod rng;
pub mod selftest;
pub mod sensing;
pub mod solvers;
pub mod theory;

pub use error::{Error, Result};
