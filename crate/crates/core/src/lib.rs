//! Planar percolation laboratory: lattice geometry, samplers, crossing-type
//! events, duality, extended-range homeomorphism arithmetic and Monte Carlo
//! checks of crossing-probability inequalities.

pub mod cli;
pub mod error;
pub mod events;
pub mod homeo;
pub mod lattice;
pub mod models;
pub mod planar;
pub mod rng;
pub mod unionfind;
pub mod verify;

pub use error::{Error, Result};
