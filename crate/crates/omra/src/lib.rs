//! File IO, synthetic sequences, reports and the command line for `omra-core`.

pub mod args;
mod error;
pub mod eval;
pub mod io;
pub mod report;
pub mod synth;

pub use error::{Error, Result};
