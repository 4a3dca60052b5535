//! Balanced separators and sparsest cuts via single-commodity flows and
//! multiplicative weights, with checkable certificates.

pub mod brute;
pub mod cover;
pub mod cutmatch;
pub mod decomp;
pub mod driver;
pub mod directions;
pub mod embedding;
pub mod error;
pub mod generators;
pub mod graph;
pub mod maxflow;
pub mod mwu;
pub mod params;
pub mod spectral;

pub use error::{Error, Result};
