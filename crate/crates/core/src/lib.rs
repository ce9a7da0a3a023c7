//! Temporal video-forensics toolkit built around Eulerian magnification.
//!
//! The pipeline: decompose frames spatially (binomial pyramids), bandpass
//! every sample's time series, amplify and recombine, then quantify the
//! result with structural-similarity features and spectral pulse estimates,
//! feeding small deterministic classifiers.

pub mod detect;
pub mod error;
pub mod evm;
pub mod frame;
pub mod io;
pub mod pulse;
pub mod pyramid;
pub mod ssim;
pub mod synth;
pub mod tfilter;

pub use error::{Error, Result};
pub use frame::{Colorspace, Frame, FrameSequence, Roi};
