//! Automatic construction, scheduling and evaluation of length-1 predecoders
//! for qLDPC codes.
//!
//! The flow starts from a detector error model ([`dem`]), turns every error
//! mechanism into a predecoding primitive `(S, O)`, prunes the set down to an
//! irreducible core and classifies it ([`primitives`]), colors per-class
//! conflict graphs into a priority-ordered hardware pipeline ([`pipeline`]),
//! and measures the pipeline against a BP+OSD second level ([`decode2`]) with
//! a seeded Monte-Carlo harness ([`sim`]). [`flow`] strings the stages
//! together the way the command-line tool does.
//!
//! Numerical decoders are generic over the message scalar ([`Real`]); the
//! aliases below fix the common choices.

pub mod decode2;
pub mod dem;
pub mod error;
pub mod flow;
pub mod pipeline;
pub mod primitives;
pub mod real;
pub mod sim;

pub use error::{Error, Result};
pub use real::Real;

/// Tanner graph with double-precision messages.
pub type TannerGraph = decode2::TannerGraph<f64>;
/// Tanner graph with single-precision messages.
pub type TannerGraphF32 = decode2::TannerGraph<f32>;
/// BP+OSD-0 decoder with double-precision messages.
pub type BpOsdDecoder = decode2::BpOsdDecoder<f64>;
/// BP+OSD-0 decoder with single-precision messages.
pub type BpOsdDecoderF32 = decode2::BpOsdDecoder<f32>;
/// Belief-propagation result with double-precision marginals.
pub type BpResult = decode2::BpResult<f64>;
