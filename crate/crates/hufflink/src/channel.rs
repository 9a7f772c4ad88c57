//! FIR channel model: random edge-nonvanishing taps, transmit-side
//! convolution, AWGN at a prescribed received SNR, and a co-primality
//! diagnostic.
//!
//! Every randomized operation is a pure function of its inputs and a
//! 64-bit seed, so independent trials can run on independent threads with
//! seeds derived by the harness splitting rule.

use crate::seqcore::{self, ComplexSequence};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A length-`K` FIR impulse response with nonvanishing first and last taps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTaps {
    taps: Vec<Complex64>,
}

impl ChannelTaps {
    pub fn new(taps: Vec<Complex64>) -> Result<Self> {
        if taps.is_empty()
            || taps[0].norm_sqr() == 0.0
            || taps[taps.len() - 1].norm_sqr() == 0.0
        {
            return Err(Error::InvalidChannel);
        }
        Ok(Self { taps })
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn to_sequence(&self) -> ComplexSequence {
        ComplexSequence::new(self.taps.clone()).expect("taps are nonempty")
    }

    pub fn norm(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// The dimensional contract binding transmitter, channel, and receiver:
/// codeword length `L = 2K + M` (even, `M >= 0`), channel length `K`, and
/// lifted dimension `N = L + K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameConfig {
    l: usize,
    k: usize,
}

impl FrameConfig {
    pub fn new(l: usize, k: usize) -> Result<Self> {
        if k < 1 || l < 2 * k || !l.is_multiple_of(2) || l < 2 {
            return Err(Error::InvalidFrame { l, k });
        }
        Ok(Self { l, k })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Slack `M = L - 2K`.
    pub fn slack(&self) -> usize {
        self.l - 2 * self.k
    }

    /// Lifted dimension `N = L + K`.
    pub fn lifted_dim(&self) -> usize {
        self.l + self.k
    }

    /// Received frame length `L + K - 1`.
    pub fn frame_len(&self) -> usize {
        self.l + self.k - 1
    }

    /// Length of the received-frame autocorrelation, `2L + 2K - 3`.
    pub fn autocorr_len(&self) -> usize {
        2 * self.frame_len() - 1
    }
}

/// Draws i.i.d. circularly-symmetric complex Gaussian taps, normalized to
/// unit norm and redrawn until both edge taps clear
/// `edge_floor * max_k |h_k|`. Deterministic in the seed.
pub fn random_channel(k: usize, seed: u64, edge_floor: f64) -> Result<ChannelTaps> {
    if k < 1 {
        return Err(Error::InvalidChannel);
    }
    if !(edge_floor > 0.0 && edge_floor < 1.0) {
        return Err(Error::Estimation("edge_floor must lie in (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut taps: Vec<Complex64> = (0..k)
            .map(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
            .collect();
        let norm = taps.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        for t in &mut taps {
            *t /= norm;
        }
        let peak = taps.iter().map(|t| t.norm()).fold(0.0, f64::max);
        if taps[0].norm() >= edge_floor * peak && taps[k - 1].norm() >= edge_floor * peak {
            return ChannelTaps::new(taps);
        }
    }
}

/// The noiseless channel output `y = x * h`.
pub fn transmit(x: &ComplexSequence, h: &ChannelTaps) -> ComplexSequence {
    seqcore::convolve(x, &h.to_sequence())
}

/// Adds circularly-symmetric complex Gaussian noise so that the realized
/// per-sample received power over the noise variance equals `rsnr_db`:
/// `sigma^2 = (|y|^2 / len(y)) * 10^(-rsnr_db/10)`.
///
/// `rsnr_db = None` means noiseless and returns `y` exactly.
pub fn add_awgn(y: &ComplexSequence, rsnr_db: Option<f64>, seed: u64) -> ComplexSequence {
    let Some(db) = rsnr_db else {
        return y.clone();
    };
    let len = y.len() as f64;
    let sigma_sq = y.energy() / len * 10f64.powf(-db / 10.0);
    let per_component = (sigma_sq / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = y
        .coeffs()
        .iter()
        .map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(re * per_component, im * per_component)
        })
        .collect();
    ComplexSequence::new(coeffs).expect("noisy frame is nonempty")
}

/// Minimum distance between the w-roots of `x` and those of the
/// conjugate-time-reversed channel, the quantity that must stay away from
/// zero for the lifted program to have a unique solution.
///
/// Returns `+inf` for a one-tap channel (no roots) and
/// [`Error::RootFinding`] when either root extraction fails, which callers
/// treat as diagnostic-unavailable.
pub fn coprimality_margin(x: &ComplexSequence, h: &ChannelTaps) -> Result<f64> {
    if h.len() == 1 {
        return Ok(f64::INFINITY);
    }
    let roots_x = seqcore::poly_roots(x)?;
    let reversed = seqcore::conj_reverse(&h.to_sequence());
    let roots_h = seqcore::poly_roots(&reversed)?;
    let mut margin = f64::INFINITY;
    for a in &roots_x {
        for b in &roots_h {
            margin = margin.min((a - b).norm());
        }
    }
    Ok(margin)
}
