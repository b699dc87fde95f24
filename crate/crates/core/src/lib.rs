//! Numerical laboratory for geometric Lorenz attractors.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, parallel drivers
//! and the command line live in the `geolorenz-lab` crate.

#![no_std]

extern crate alloc;

pub mod distortion;
pub mod error;
pub mod flow;
pub mod geometric;
pub mod inducing;
pub mod linalg;
pub mod section;
pub mod stats;
pub mod transfer;

pub use error::{Error, Result};
