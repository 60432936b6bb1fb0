//! Hierarchical B-frame video codec with online motion resolution adaptation.
//!
//! Every B frame is coded once per candidate downsampling factor `S` in
//! `{1, 2, 4, 8}`: motion is estimated and coded at `1/S` resolution, the
//! decoded flows are upsampled back to full resolution for warping, and the
//! candidate with the smallest `lambda * mse + bits` is kept.
//!
//! The crate is `no_std` and only needs `alloc`. File IO, synthetic content
//! and the command line live in the `omra` crate.

#![no_std]

extern crate alloc;

pub mod container;
pub mod engine;
pub mod entropy;
mod error;
pub mod frame;
pub mod gop;
pub mod metrics;
pub mod motion;
pub mod motion_codec;
pub mod resample;
pub mod texture;

pub use engine::{
    decode_sequence, encode_sequence, EncodeOutput, EncoderConfig, FrameReport, RdCandidate,
    Variant,
};
pub use error::{Error, Result};
pub use frame::{Frame, Sequence};
pub use gop::{FrameKind, GopPlan, PlanEntry};
pub use motion::{EstimatorConfig, FlowField};
pub use resample::ScaleFactor;
