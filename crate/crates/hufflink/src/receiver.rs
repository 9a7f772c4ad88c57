//! Receiver front end: from the received frame to the measurement stack.
//!
//! Because every codeword shares the autocorrelation
//! `(-1, 0_{L-2}, E, 0_{L-2}, -1)`, the autocorrelation of the received
//! frame splits into five known windows: a copy of `-a_h`, a pure-noise
//! gap, `E a_h`, another gap, and the mirrored `-a_h`. Reading those
//! windows yields the channel autocorrelation (after conjugate
//! symmetrization) and the transmit energy (from a norm ratio); together
//! with the received frame itself they complete the `4N-4` correlation
//! measurements the lifted solver needs.

use crate::channel::FrameConfig;
use crate::huffman;
use crate::lifted_sdp::MeasurementVector;
use crate::seqcore::{self, ComplexSequence, CorrelationVector};
use crate::{Error, Result};
use num_complex::Complex64;

/// The five windows of the received-frame autocorrelation.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentBundle {
    seg1: CorrelationVector,
    seg3: CorrelationVector,
    seg5: CorrelationVector,
    gap2: Vec<Complex64>,
    gap4: Vec<Complex64>,
}

impl SegmentBundle {
    /// Leading window, `-a_h` plus noise.
    pub fn seg1(&self) -> &CorrelationVector {
        &self.seg1
    }

    /// Center window, `E a_h` plus noise.
    pub fn seg3(&self) -> &CorrelationVector {
        &self.seg3
    }

    /// Trailing window, the exact conjugate mirror of `seg1`.
    pub fn seg5(&self) -> &CorrelationVector {
        &self.seg5
    }

    /// First pure-noise gap (`M` entries).
    pub fn gap2(&self) -> &[Complex64] {
        &self.gap2
    }

    /// Second pure-noise gap (`M` entries).
    pub fn gap4(&self) -> &[Complex64] {
        &self.gap4
    }
}

/// Receiver-side estimates feeding the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverEstimates {
    a_h_hat: CorrelationVector,
    e_hat: f64,
    e_used: f64,
    a_x_hat: CorrelationVector,
}

impl ReceiverEstimates {
    /// Estimated channel autocorrelation (conjugate-symmetric).
    pub fn a_h_hat(&self) -> &CorrelationVector {
        &self.a_h_hat
    }

    /// Energy estimate from the norm ratio, clamped below at `2 + 1e-9`.
    pub fn e_hat(&self) -> f64 {
        self.e_hat
    }

    /// The energy the template was built with: the estimate, or the true
    /// value when the receiver knows it.
    pub fn e_used(&self) -> f64 {
        self.e_used
    }

    /// Codeword autocorrelation template built with [`Self::e_used`].
    pub fn a_x_hat(&self) -> &CorrelationVector {
        &self.a_x_hat
    }
}

/// Autocorrelation of the received frame; length `2(L+K-1) - 1`.
pub fn received_autocorr(r: &ComplexSequence, cfg: &FrameConfig) -> Result<CorrelationVector> {
    if r.len() != cfg.frame_len() {
        return Err(Error::DimensionMismatch {
            context: "received frame length",
            expected: cfg.frame_len(),
            got: r.len(),
        });
    }
    Ok(seqcore::correlate(r, r))
}

/// Splits the received autocorrelation into the five windows.
pub fn extract_segments(a_r: &CorrelationVector, cfg: &FrameConfig) -> Result<SegmentBundle> {
    if a_r.len() != cfg.autocorr_len() {
        return Err(Error::DimensionMismatch {
            context: "received autocorrelation length",
            expected: cfg.autocorr_len(),
            got: a_r.len(),
        });
    }
    let (l, k, m) = (cfg.l(), cfg.k(), cfg.slack());
    let values = a_r.values();
    let window = |start: usize| -> Result<CorrelationVector> {
        CorrelationVector::from_values(values[start..start + 2 * k - 1].to_vec())
    };
    let seg1 = window(0)?;
    let gap2 = values[2 * k - 1..2 * k - 1 + m].to_vec();
    let seg3 = window(l - 1)?;
    let gap4 = values[l + 2 * k - 2..l + 2 * k - 2 + m].to_vec();
    let seg5 = window(2 * l - 2)?;
    debug_assert_eq!(2 * l - 2 + 2 * k - 1, cfg.autocorr_len());
    Ok(SegmentBundle {
        seg1,
        seg3,
        seg5,
        gap2,
        gap4,
    })
}

/// Conjugate-symmetrized channel autocorrelation estimate
/// `-(seg1 + conj_reverse(seg1)) / 2`; exact in the noiseless case.
pub fn estimate_channel_autocorr(bundle: &SegmentBundle) -> CorrelationVector {
    let seg1 = bundle.seg1.values();
    let n = seg1.len();
    let values = (0..n)
        .map(|i| -(seg1[i] + seg1[n - 1 - i].conj()) * 0.5)
        .collect();
    CorrelationVector::from_values(values).expect("segment windows are nonempty")
}

/// Energy estimate `||seg3|| / ||sym(seg1)||`, clamped below at `2 + 1e-9`
/// (smaller values are infeasible for a Huffman codebook).
pub fn estimate_energy(bundle: &SegmentBundle) -> Result<f64> {
    let sym_norm = estimate_channel_autocorr(bundle).norm();
    if sym_norm == 0.0 {
        return Err(Error::Estimation(
            "symmetrized channel autocorrelation is zero",
        ));
    }
    let raw = bundle.seg3.norm() / sym_norm;
    Ok(raw.max(2.0 + 1e-9))
}

/// Runs both estimators and assembles the template; `known_energy`
/// overrides the energy used for the template (the estimate is still
/// reported for diagnostics).
pub fn estimate(
    bundle: &SegmentBundle,
    cfg: &FrameConfig,
    known_energy: Option<f64>,
) -> Result<ReceiverEstimates> {
    let a_h_hat = estimate_channel_autocorr(bundle);
    let e_hat = estimate_energy(bundle)?;
    let e_used = known_energy.unwrap_or(e_hat);
    let params = huffman::make_params(cfg.l(), e_used)?;
    Ok(ReceiverEstimates {
        a_h_hat,
        e_hat,
        e_used,
        a_x_hat: huffman::autocorr_template(&params),
    })
}

/// Stacks the measurement vector `b = (a_x; a_h; r; conj_reverse(r))`.
///
/// Block identities: `a11` is the codeword autocorrelation template,
/// `a22` the channel autocorrelation (which equals the autocorrelation of
/// the conjugate-reversed channel), `a12` the received frame, and `a21`
/// its conjugate reversal, so only `3N - 3` quantities are ever measured.
pub fn build_measurements(
    estimates: &ReceiverEstimates,
    r: &ComplexSequence,
    cfg: &FrameConfig,
) -> Result<MeasurementVector> {
    if r.len() != cfg.frame_len() {
        return Err(Error::DimensionMismatch {
            context: "received frame length",
            expected: cfg.frame_len(),
            got: r.len(),
        });
    }
    MeasurementVector::from_blocks(
        estimates.a_x_hat.values().to_vec(),
        estimates.a_h_hat.values().to_vec(),
        r.coeffs().to_vec(),
        seqcore::conj_reverse(r).coeffs().to_vec(),
        (*cfg).into(),
    )
}
