//! Clearing engine for lattice liability networks.
//!
//! Vertices carry complete lattices of payment states and edges carry nominal
//! liabilities. Clearing sections are fixed points of the clearing operator
//! and are computed by monotone iteration.

pub mod builders;
pub mod error;
pub mod lattice;
pub mod model;
pub mod multivalued;
pub mod residuated;
pub mod sim;
pub mod solver;
pub mod spec_file;

pub use error::{Error, Result};
