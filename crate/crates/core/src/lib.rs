//! Polar codes with successive-cancellation decoding and CRC-aided flip
//! decoders.
//!
//! The crate covers code construction and encoding ([`code_spec`]), the SC
//! tree decoder ([`sc_kernel`]), the multi-attempt flip decoders and the
//! genie decoder ([`flip`]), a BPSK/AWGN channel ([`channel`]), a
//! reproducible Monte Carlo harness ([`campaign`]), the logic-cost
//! estimator for flip decoders ([`cost`]) and the command-line front end
//! ([`cli`]).

pub mod campaign;
pub mod channel;
pub mod cli;
pub mod code_spec;
pub mod config;
pub mod cost;
mod error;
pub mod flip;
pub mod io;
pub mod sc_kernel;

pub use campaign::{ErrorProfile, FerPoint};
pub use channel::ChannelConfig;
pub use code_spec::{BitVector, CodeSpec, CrcPoly};
pub use cost::{CostBreakdown, CostModel, CostWeights};
pub use error::{Error, Result};
pub use flip::{DecodeOutcome, Engine, FlipPlan, PlanMode};
pub use sc_kernel::{ForcedDecisions, LlrFrame, ScDecoder, ScResult};
