//! Proper orthogonal decomposition and POD-Galerkin reduced-order models for the
//! one-dimensional heat equation, with and without difference quotients in the
//! snapshot set.

pub mod error;
pub mod experiments;
pub mod fem1d;
pub mod numfmt;
pub mod pod;
pub mod projections;
pub mod rom;
pub mod snapshots;

pub use error::{PodError, Result};
