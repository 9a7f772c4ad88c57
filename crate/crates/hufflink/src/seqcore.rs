//! Complex sequences viewed both as time-domain signals and as polynomials
//! in `w = z^-1`.
//!
//! Index `k` of a [`ComplexSequence`] holds the time sample `x_k`, which is
//! also the coefficient of `w^k`. All kernels are exact O(n^2) loops in
//! double-precision complex arithmetic; the frame lengths in this crate are
//! small enough that FFT acceleration buys nothing.

use crate::{Error, Result};
use num_complex::Complex64;

/// An ordered, nonempty list of complex coefficients.
///
/// Doubles as a time-domain signal and as the polynomial
/// `sum_k coeffs[k] w^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    coeffs: Vec<Complex64>,
}

impl ComplexSequence {
    /// Wraps a coefficient vector; rejects the empty one.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { coeffs })
    }

    /// Builds a sequence from real samples.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// The unit impulse of the given length: `(1, 0, ..., 0)`.
    pub fn delta(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::EmptySequence);
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len];
        coeffs[0] = Complex64::new(1.0, 0.0);
        Ok(Self { coeffs })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty coefficient lists
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `sum_k |x_k|^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// True when the first and last coefficients are both nonzero.
    pub fn is_edge_nonvanishing(&self) -> bool {
        self.coeffs[0].norm_sqr() > 0.0 && self.coeffs[self.len() - 1].norm_sqr() > 0.0
    }

    /// Componentwise scaling by a complex factor.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
    }

    /// Componentwise sum; lengths must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                context: "sequence addition",
                expected: self.len(),
                got: other.len(),
            });
        }
        Ok(Self {
            coeffs: self
                .coeffs
                .iter()
                .zip(other.coeffs.iter())
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    /// `max_k |self_k - other_k|` for equal-length sequences.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ComplexSequence {
    type Output = Complex64;
    fn index(&self, idx: usize) -> &Complex64 {
        &self.coeffs[idx]
    }
}

/// A correlation between two sequences of lengths `Li` and `Lj`; entry `k`
/// sits at lag `k - (Lj - 1)`.
///
/// Autocorrelations are conjugate-symmetric:
/// `values[k] == conj(values[len-1-k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    values: Vec<Complex64>,
}

impl CorrelationVector {
    pub fn from_values(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The zero-lag entry of an odd-length (auto)correlation.
    pub fn center(&self) -> Complex64 {
        self.values[(self.values.len() - 1) / 2]
    }

    /// Conjugate time-reversal of the correlation vector.
    pub fn conj_reversed(&self) -> Self {
        Self {
            values: self.values.iter().rev().map(|v| v.conj()).collect(),
        }
    }

    /// Checks `values[k] == conj(values[len-1-k])` up to `tol`.
    pub fn is_conjugate_symmetric(&self, tol: f64) -> bool {
        let n = self.values.len();
        (0..n).all(|k| (self.values[k] - self.values[n - 1 - k].conj()).norm() <= tol)
    }

    /// Reinterprets the correlation as a plain sequence (for convolving
    /// correlations with each other, as in the Wiener-Lee identity).
    pub fn to_sequence(&self) -> ComplexSequence {
        ComplexSequence {
            coeffs: self.values.clone(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for CorrelationVector {
    type Output = Complex64;
    fn index(&self, idx: usize) -> &Complex64 {
        &self.values[idx]
    }
}

pub(crate) fn convolve_slices(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); u.len() + v.len() - 1];
    for (i, &a) in u.iter().enumerate() {
        for (j, &b) in v.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Linear convolution: `out[k] = sum_l u[l] v[k-l]`, length `a + b - 1`.
pub fn convolve(u: &ComplexSequence, v: &ComplexSequence) -> ComplexSequence {
    ComplexSequence {
        coeffs: convolve_slices(u.coeffs(), v.coeffs()),
    }
}

/// Conjugate time-reversal: `out[k] = conj(u[L-1-k])`. An involution.
pub fn conj_reverse(u: &ComplexSequence) -> ComplexSequence {
    ComplexSequence {
        coeffs: u.coeffs.iter().rev().map(|c| c.conj()).collect(),
    }
}

/// Aperiodic correlation `u * conj(v^-)`; entry `k` equals
/// `sum_l u[l] conj(v[l + Lv - 1 - k])`.
pub fn correlate(u: &ComplexSequence, v: &ComplexSequence) -> CorrelationVector {
    let rev = conj_reverse(v);
    CorrelationVector {
        values: convolve_slices(u.coeffs(), rev.coeffs()),
    }
}

/// Expands `scale * prod_k (w - roots[k])` into ascending-power coefficients.
///
/// Factors are multiplied in Leja order (greedily maximizing the distance
/// to the roots already absorbed), which keeps the partial products bounded
/// even when many roots share one circle, as Huffman zero sets do.
pub fn poly_from_roots(roots: &[Complex64], scale: Complex64) -> ComplexSequence {
    let ordered = leja_order(roots);
    let mut coeffs = Vec::with_capacity(roots.len() + 1);
    coeffs.push(scale);
    for root in ordered {
        coeffs.push(Complex64::new(0.0, 0.0));
        for k in (0..coeffs.len() - 1).rev() {
            let c = coeffs[k];
            coeffs[k + 1] += c;
            coeffs[k] = -root * c;
        }
    }
    ComplexSequence { coeffs }
}

fn leja_order(roots: &[Complex64]) -> Vec<Complex64> {
    let mut remaining: Vec<Complex64> = roots.to_vec();
    let mut ordered = Vec::with_capacity(roots.len());
    if remaining.is_empty() {
        return ordered;
    }
    let first = remaining
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(i, _)| i)
        .unwrap();
    ordered.push(remaining.swap_remove(first));
    let mut log_dist: Vec<f64> = remaining
        .iter()
        .map(|&r| (r - ordered[0]).norm().ln())
        .collect();
    while !remaining.is_empty() {
        let next = log_dist
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let root = remaining.swap_remove(next);
        log_dist.swap_remove(next);
        for (d, &r) in log_dist.iter_mut().zip(remaining.iter()) {
            *d += (r - root).norm().ln();
        }
        ordered.push(root);
    }
    ordered
}

// Error-free transformations for the compensated Horner scheme.
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn prod_with_err(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (m1, e1) = two_prod(a.re, b.re);
    let (m2, e2) = two_prod(a.im, b.im);
    let (re, e3) = two_sum(m1, -m2);
    let (m3, e4) = two_prod(a.re, b.im);
    let (m4, e5) = two_prod(a.im, b.re);
    let (im, e6) = two_sum(m3, m4);
    (
        Complex64::new(re, im),
        Complex64::new(e1 - e2 + e3, e4 + e5 + e6),
    )
}

fn sum_with_err(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (re, e_re) = two_sum(a.re, b.re);
    let (im, e_im) = two_sum(a.im, b.im);
    (Complex64::new(re, im), Complex64::new(e_re, e_im))
}

/// Compensated Horner evaluation of the polynomial at `w`.
///
/// Rounding errors of every product and sum are captured exactly and
/// accumulated in a first-order correction, so residuals at roots stay
/// tiny even for high-degree polynomials evaluated off the unit circle.
pub fn poly_eval(u: &ComplexSequence, w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut correction = Complex64::new(0.0, 0.0);
    for &c in u.coeffs.iter().rev() {
        let (product, product_err) = prod_with_err(acc, w);
        let (sum, sum_err) = sum_with_err(product, c);
        acc = sum;
        correction = correction * w + (product_err + sum_err);
    }
    acc + correction
}

/// Peak-to-average power ratio `L * max|u_k|^2 / sum|u_k|^2`, in `[1, L]`.
pub fn papr(u: &ComplexSequence) -> Result<f64> {
    let total = u.energy();
    if total <= 0.0 {
        return Err(Error::ZeroSequence);
    }
    let peak = u
        .coeffs
        .iter()
        .map(|c| c.norm_sqr())
        .fold(0.0, f64::max);
    Ok(u.len() as f64 * peak / total)
}

/// [`papr`] in decibels.
pub fn papr_db(u: &ComplexSequence) -> Result<f64> {
    Ok(10.0 * papr(u)?.log10())
}

/// All roots of the polynomial `sum_k p[k] w^k` via Durand-Kerner iteration.
///
/// Trailing zero coefficients are stripped first; a degree-0 polynomial has
/// no roots. Fails with [`Error::RootFinding`] when the simultaneous
/// iteration does not settle, which the callers treat as a
/// diagnostic-unavailable signal.
pub fn poly_roots(p: &ComplexSequence) -> Result<Vec<Complex64>> {
    let mut coeffs: Vec<Complex64> = p.coeffs().to_vec();
    while coeffs.len() > 1 && coeffs.last().unwrap().norm_sqr() == 0.0 {
        coeffs.pop();
    }
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    let monic: Vec<Complex64> = coeffs.iter().map(|&c| c / lead).collect();

    // Distinct start points on a circle slightly above the Cauchy root bound,
    // rotated off the axes so real-coefficient symmetry cannot stall.
    let bound = 1.0 + monic[..degree].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..degree)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / degree as f64 + 0.5;
            Complex64::from_polar(bound, angle)
        })
        .collect();

    let eval = |w: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in monic.iter().rev() {
            acc = acc * w + c;
        }
        acc
    };

    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for j in 0..degree {
            let mut denom = Complex64::new(1.0, 0.0);
            for m in 0..degree {
                if m != j {
                    denom *= z[j] - z[m];
                }
            }
            if denom.norm_sqr() == 0.0 {
                return Err(Error::RootFinding);
            }
            let step = eval(z[j]) / denom;
            z[j] -= step;
            max_step = max_step.max(step.norm() / z[j].norm().max(1.0));
        }
        if max_step < 5e-13 {
            return Ok(z);
        }
    }
    Err(Error::RootFinding)
}
