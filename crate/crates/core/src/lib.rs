//! Exact and numerical tools for sequence-space extensions of hyperbolic
//! toral automorphisms.

pub mod closing;
pub mod cocycle;
pub mod construction;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod lp;
pub mod separation;
pub mod sequence;
pub mod skew;
pub mod torus;

pub use error::{Error, Result};
