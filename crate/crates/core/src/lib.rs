//! Exact Wick combinatorics, Gaussian scaling searches and Monte Carlo
//! checks for trace invariants of real Gaussian random tensors.

pub mod cli;
mod dsu;
pub mod error;
pub mod faces;
pub mod graph;
pub mod io;
pub mod montecarlo;
pub mod numeric;
pub mod partitions;
pub mod poly;
pub mod rng;
pub mod wick;

pub use error::{Error, Result};
pub use graph::{ColoredGraph, Matching};
