//! Expander products, nonlinear spectral gaps over finite metrics, Euclidean
//! cones, explicit L1 embeddings and random regular graph analysis.
//!
//! Everything here is `no_std` with `alloc`; file formats, the experiment
//! runner and the command line live in the `zigzag` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

mod error;
pub mod flow;
pub mod linalg;
pub mod math;
pub mod rng;

pub mod approximator;
pub mod combinators;
pub mod conegeom;
pub mod embeddings;
pub mod multigraph;
pub mod randgraph;
pub mod spectral;

pub use error::{Error, Result};
pub use multigraph::{Multigraph, RotationMap, SimplicialPoint};
