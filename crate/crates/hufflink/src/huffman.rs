//! Huffman sequence codebook: parameter derivation, bit-to-sequence
//! encoding via zero selection, and the magnitude-test decoder.
//!
//! A length-`L` Huffman sequence has the aperiodic autocorrelation
//! `(-1, 0_{L-2}, E, 0_{L-2}, -1)`. Its `2L-2` z-plane zeros sit on two
//! reciprocal circles of radius `R+ = r+^{1/(L-1)}` and `R- = 1/R+`, one
//! zero pair per phase slot. Choosing one zero of each pair encodes `L-1`
//! bits; all `2^{L-1}` codewords share the same autocorrelation and the
//! same energy `E`.
//!
//! Everything here works in the `w = z^-1` domain: a z-plane zero `zeta`
//! is the w-root `1/zeta`, so bit `k = 1` (z-zero on the outer circle)
//! places the w-root at `e^{2 pi i (k-1)/(L-1)} R-`.

use crate::seqcore::{self, ComplexSequence, CorrelationVector};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Codebook parameters derived from the pair `(L, E)`.
#[derive(Debug, Clone)]
pub struct HuffmanParams {
    l: usize,
    energy: f64,
    r_plus: f64,
    r_minus: f64,
    radius_plus: f64,
    radius_minus: f64,
    /// `e^{-2 pi i (k-1)/(L-1)}` for `k = 1..L-1` (z-domain phase slots).
    zero_phases: Vec<Complex64>,
}

impl HuffmanParams {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// The radical pair `r+- = E/2 +- sqrt(E^2/4 - 1)`; `r+ r- = 1`.
    pub fn r_plus(&self) -> f64 {
        self.r_plus
    }

    pub fn r_minus(&self) -> f64 {
        self.r_minus
    }

    /// Zero radius `R+ = r+^{1/(L-1)} >= 1`.
    pub fn radius_plus(&self) -> f64 {
        self.radius_plus
    }

    /// Zero radius `R- = 1/R+`.
    pub fn radius_minus(&self) -> f64 {
        self.radius_minus
    }

    pub fn zero_phases(&self) -> &[Complex64] {
        &self.zero_phases
    }

    /// Number of bit slots, `L - 1`.
    pub fn slots(&self) -> usize {
        self.l - 1
    }

    /// The candidate w-root of phase slot `slot` (0-based): inner radius
    /// `R-` for bit 1, outer radius `R+` for bit 0.
    pub fn w_root(&self, slot: usize, bit: bool) -> Complex64 {
        let radius = if bit { self.radius_minus } else { self.radius_plus };
        self.zero_phases[slot].conj() * radius
    }
}

/// An ordered list of `L-1` bits; slot `k` (1-based) selects the zero on
/// phase slot `k`. The wire format is an ASCII string of '0'/'1' with
/// slot 1 leftmost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMessage {
    bits: Vec<bool>,
}

impl BitMessage {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::BitParse("empty bit vector".into()));
        }
        Ok(Self { bits })
    }

    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|ch| match ch {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::BitParse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Self::new(bits)
    }

    pub fn to_bit_str(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn all_ones(n: usize) -> Result<Self> {
        Self::new(vec![true; n])
    }

    pub fn all_zeros(n: usize) -> Result<Self> {
        Self::new(vec![false; n])
    }

    pub fn random<R: rand::Rng>(n: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..n).map(|_| rng.gen::<bool>()).collect())
    }

    /// The message with index `idx` in lexicographic order, slot 1 holding
    /// the most significant bit; `idx < 2^n`.
    pub fn from_index(idx: u64, n: usize) -> Result<Self> {
        Self::new((0..n).map(|s| (idx >> (n - 1 - s)) & 1 == 1).collect())
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bit(&self, slot: usize) -> bool {
        self.bits[slot]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn hamming_distance(&self, other: &Self) -> usize {
        assert_eq!(self.len(), other.len(), "bit messages must have equal length");
        self.bits
            .iter()
            .zip(other.bits.iter())
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Derives codebook parameters; `L` must be even and `E > 2`.
///
/// `E = 2` collapses both circles onto the unit circle and destroys the
/// code structure, so it is rejected. Odd `L` flips the sign convention of
/// the scaling factor and is not supported.
pub fn make_params(l: usize, energy: f64) -> Result<HuffmanParams> {
    if l < 2 || !l.is_multiple_of(2) {
        return Err(Error::UnsupportedLength(l));
    }
    if !energy.is_finite() || energy <= 2.0 {
        return Err(Error::EnergyOutOfRange(energy));
    }
    let r_plus = energy / 2.0 + (energy * energy / 4.0 - 1.0).sqrt();
    let r_minus = 1.0 / r_plus;
    let radius_plus = r_plus.powf(1.0 / (l as f64 - 1.0));
    let radius_minus = 1.0 / radius_plus;
    let slots = l - 1;
    let zero_phases = (0..slots)
        .map(|s| Complex64::from_polar(1.0, -2.0 * PI * s as f64 / slots as f64))
        .collect();
    Ok(HuffmanParams {
        l,
        energy,
        r_plus,
        r_minus,
        radius_plus,
        radius_minus,
        zero_phases,
    })
}

/// Encodes `L-1` bits into a Huffman codeword.
///
/// The w-roots are the selected zero of each phase slot; the scaling is
/// fixed so that the first autocorrelation entry is exactly -1, which
/// makes the codeword energy exactly `E` and the first coefficient real
/// positive (last coefficient real negative, `L` even).
pub fn encode(params: &HuffmanParams, msg: &BitMessage) -> Result<ComplexSequence> {
    if msg.len() != params.slots() {
        return Err(Error::DimensionMismatch {
            context: "huffman encode bit count",
            expected: params.slots(),
            got: msg.len(),
        });
    }
    let roots: Vec<Complex64> = (0..params.slots())
        .map(|s| params.w_root(s, msg.bit(s)))
        .collect();
    // c = (prod |root|)^(-1/2), accumulated in log space
    let log_prod: f64 = roots.iter().map(|r| r.norm().ln()).sum();
    let scale = Complex64::new(-(-0.5 * log_prod).exp(), 0.0);
    let x = seqcore::poly_from_roots(&roots, scale);
    debug_assert!(
        seqcore::correlate(&x, &x)
            .max_abs_diff(&autocorr_template(params))
            < 1e-9,
        "encoded codeword does not reproduce the autocorrelation template"
    );
    Ok(x)
}

/// The shared autocorrelation `(-1, 0_{L-2}, E, 0_{L-2}, -1)`.
pub fn autocorr_template(params: &HuffmanParams) -> CorrelationVector {
    let l = params.l;
    let mut values = vec![Complex64::new(0.0, 0.0); 2 * l - 1];
    values[0] = Complex64::new(-1.0, 0.0);
    values[l - 1] = Complex64::new(params.energy, 0.0);
    values[2 * l - 2] = Complex64::new(-1.0, 0.0);
    CorrelationVector::from_values(values).expect("template is nonempty")
}

/// Recovers the bits from an estimated codeword by comparing the
/// polynomial magnitude at the two candidate w-roots of every slot.
///
/// Slot `k` decodes to 1 when the inner candidate (radius `R-`) gives the
/// smaller magnitude. The test is invariant under a global phase and needs
/// no root extraction; on a noise-free codeword it inverts [`encode`]
/// exactly.
pub fn decode(params: &HuffmanParams, xhat: &ComplexSequence) -> BitMessage {
    let bits = (0..params.slots())
        .map(|s| {
            let inner = seqcore::poly_eval(xhat, params.w_root(s, true)).norm();
            let outer = seqcore::poly_eval(xhat, params.w_root(s, false)).norm();
            inner <= outer
        })
        .collect();
    BitMessage { bits }
}

/// PAPR of the all-ones codeword in dB; by reciprocal symmetry the
/// all-zeros codeword attains the same value, and for `E >> 2` this is the
/// codebook maximum.
pub fn worst_case_papr(params: &HuffmanParams) -> Result<f64> {
    let msg = BitMessage::all_ones(params.slots())?;
    seqcore::papr_db(&encode(params, &msg)?)
}
