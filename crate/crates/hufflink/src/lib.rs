//! Blind one-shot communication over unknown FIR channels using Huffman
//! sequences.
//!
//! A transmitter encodes `L-1` bits into a length-`L` complex Huffman
//! sequence whose aperiodic autocorrelation is an impulse up to two unit
//! end sidelobes. After convolution with an unknown FIR channel and
//! additive noise, the receiver estimates the channel autocorrelation and
//! the transmit energy directly from the received frame, then recovers
//! data and channel jointly by solving a positive-semidefinite
//! least-squares program on the lifted rank-1 matrix, followed by a rank-1
//! extraction, a global phase fix, and a zero-grid bit decision.
//!
//! Module map:
//! - [`seqcore`]: complex sequences as signals and polynomials
//!   (convolution, correlation, root expansion, evaluation, PAPR).
//! - [`huffman`]: Huffman codebook parameters, encoder, decoder.
//! - [`channel`]: FIR channel model, AWGN, co-primality diagnostic.
//! - [`receiver`]: segment extraction and channel/energy estimation.
//! - [`lifted_sdp`]: correlation measurement operator and the PSD
//!   least-squares solver.
//! - [`harness`]: seeded Monte Carlo trials, rSNR sweeps, CSV output.

pub mod channel;
pub mod harness;
pub mod huffman;
pub mod lifted_sdp;
pub mod receiver;
pub mod seqcore;

pub use channel::{ChannelTaps, FrameConfig};
pub use huffman::{BitMessage, HuffmanParams};
pub use lifted_sdp::{LiftedMatrix, MeasurementVector, SolveOptions, SolveReport};
pub use seqcore::{ComplexSequence, CorrelationVector};

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("sequence must contain at least one coefficient")]
    EmptySequence,
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("sequence length {0} is unsupported: length must be even and at least 2")]
    UnsupportedLength(usize),
    #[error("energy {0} is out of range: the codebook needs E > 2")]
    EnergyOutOfRange(f64),
    #[error("operation undefined for the all-zero sequence")]
    ZeroSequence,
    #[error("invalid frame geometry L={l}, K={k}: need even L with L >= 2K and K >= 1")]
    InvalidFrame { l: usize, k: usize },
    #[error("channel taps must be nonempty with nonvanishing first and last coefficients")]
    InvalidChannel,
    #[error("estimation failed: {0}")]
    Estimation(&'static str),
    #[error("eigendecomposition did not converge")]
    EigenFailure,
    #[error("recovered matrix has no positive leading eigenvalue")]
    DegenerateSolution,
    #[error("global phase undefined: leading recovered coefficient is numerically zero")]
    PhaseUndefined,
    #[error("polynomial root finding did not converge")]
    RootFinding,
    #[error("invalid bit string: {0}")]
    BitParse(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
