//! Generalised directed last passage percolation (GLPP).
//!
//! Cells of a cylinder or quarter-plane arrive a random time after both of
//! their predecessors, with a waiting law that depends on the gap between
//! the predecessors' arrival times. This crate simulates the model, computes
//! the exact stationary front-line laws available for integrable families,
//! and checks every formula against brute-force oracles.

pub mod acceptance;
pub mod bridges;
pub mod chain;
pub mod error;
pub mod exact;
pub mod growth;
pub mod harness;
pub mod measures;
pub mod numeric;
pub mod oracle;
pub mod pca;

pub use error::{GlppError, Result};
