//! The lifted correlation measurement operator, its adjoint, and the
//! positive-semidefinite least-squares solver.
//!
//! A stacked unknown `x = (x1; x2)` of block lengths `(L1, L2)` is lifted
//! to the `N x N` Hermitian rank-1 matrix `X = x x*`, `N = L1 + L2`. The
//! four auto-/cross-correlations of `x1` and `x2` are then linear in `X`:
//! entry `k` of block `(i, j)` is a plain diagonal sum over the `(i, j)`
//! block of `X`. The receiver feeds the measured correlation stack into
//!
//! ```text
//!     minimize  || b - A(X) ||^2   subject to  X >= 0,
//! ```
//!
//! solved here by projected gradient descent with optional Nesterov
//! momentum (restarted when the momentum turns against the projected
//! step direction). The projection onto the PSD cone clamps negative
//! eigenvalues of a dense Hermitian eigendecomposition. When the two
//! z-transforms are co-prime the noiseless program has the unique
//! solution `x x*`, so the leading eigenpair recovers the transmitted
//! pair up to one global phase.

use crate::channel::FrameConfig;
use crate::seqcore::ComplexSequence;
use crate::{Error, Result};
use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Block split `(L1, L2)` of the lifted dimension `N = L1 + L2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockShape {
    l1: usize,
    l2: usize,
}

impl BlockShape {
    pub fn new(l1: usize, l2: usize) -> Result<Self> {
        if l1 == 0 || l2 == 0 {
            return Err(Error::EmptySequence);
        }
        Ok(Self { l1, l2 })
    }

    pub fn l1(&self) -> usize {
        self.l1
    }

    pub fn l2(&self) -> usize {
        self.l2
    }

    pub fn n(&self) -> usize {
        self.l1 + self.l2
    }

    /// Total measurement count `4N - 4`.
    pub fn measurement_len(&self) -> usize {
        4 * self.n() - 4
    }
}

impl From<FrameConfig> for BlockShape {
    fn from(cfg: FrameConfig) -> Self {
        Self {
            l1: cfg.l(),
            l2: cfg.k(),
        }
    }
}

/// An `N x N` complex matrix carrying its block split; the lifted unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedMatrix {
    mat: DMatrix<Complex64>,
    shape: BlockShape,
}

impl LiftedMatrix {
    pub fn from_matrix(mat: DMatrix<Complex64>, shape: BlockShape) -> Result<Self> {
        if mat.nrows() != shape.n() || mat.ncols() != shape.n() {
            return Err(Error::DimensionMismatch {
                context: "lifted matrix dimension",
                expected: shape.n(),
                got: mat.nrows(),
            });
        }
        Ok(Self { mat, shape })
    }

    pub fn zeros(shape: BlockShape) -> Self {
        Self {
            mat: DMatrix::zeros(shape.n(), shape.n()),
            shape,
        }
    }

    /// The rank-1 lift `x x*` of a stacked vector.
    pub fn from_stacked(x: &ComplexSequence, shape: BlockShape) -> Result<Self> {
        if x.len() != shape.n() {
            return Err(Error::DimensionMismatch {
                context: "stacked vector length",
                expected: shape.n(),
                got: x.len(),
            });
        }
        let n = shape.n();
        let mat = DMatrix::from_fn(n, n, |i, j| x[i] * x[j].conj());
        Ok(Self { mat, shape })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |X - X^H|` entrywise; zero for an exactly Hermitian matrix.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.shape.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Entrywise inner product `sum X conj(M)`; real when both are Hermitian.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }
}

/// The stacked correlation measurements `b = (a11; a22; a12; a21)` with
/// block lengths `(2L1-1, 2L2-1, N-1, N-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector {
    a11: Vec<Complex64>,
    a22: Vec<Complex64>,
    a12: Vec<Complex64>,
    a21: Vec<Complex64>,
    shape: BlockShape,
}

impl MeasurementVector {
    pub fn from_blocks(
        a11: Vec<Complex64>,
        a22: Vec<Complex64>,
        a12: Vec<Complex64>,
        a21: Vec<Complex64>,
        shape: BlockShape,
    ) -> Result<Self> {
        let checks = [
            ("measurement block a11", 2 * shape.l1() - 1, a11.len()),
            ("measurement block a22", 2 * shape.l2() - 1, a22.len()),
            ("measurement block a12", shape.n() - 1, a12.len()),
            ("measurement block a21", shape.n() - 1, a21.len()),
        ];
        for (context, expected, got) in checks {
            if expected != got {
                return Err(Error::DimensionMismatch {
                    context,
                    expected,
                    got,
                });
            }
        }
        Ok(Self {
            a11,
            a22,
            a12,
            a21,
            shape,
        })
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn a11(&self) -> &[Complex64] {
        &self.a11
    }

    pub fn a22(&self) -> &[Complex64] {
        &self.a22
    }

    pub fn a12(&self) -> &[Complex64] {
        &self.a12
    }

    pub fn a21(&self) -> &[Complex64] {
        &self.a21
    }

    pub fn total_len(&self) -> usize {
        self.a11.len() + self.a22.len() + self.a12.len() + self.a21.len()
    }

    /// All four blocks concatenated in canonical order.
    pub fn stacked(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.total_len());
        out.extend_from_slice(&self.a11);
        out.extend_from_slice(&self.a22);
        out.extend_from_slice(&self.a12);
        out.extend_from_slice(&self.a21);
        out
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    fn norm_sq(&self) -> f64 {
        [&self.a11, &self.a22, &self.a12, &self.a21]
            .iter()
            .flat_map(|block| block.iter())
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// Entrywise inner product `sum self conj(other)`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let pairs = [
            (&self.a11, &other.a11),
            (&self.a22, &other.a22),
            (&self.a12, &other.a12),
            (&self.a21, &other.a21),
        ];
        pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()))
            .map(|(x, y)| x * y.conj())
            .sum()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch {
                context: "measurement subtraction",
                expected: self.shape.n(),
                got: other.shape.n(),
            });
        }
        let diff = |a: &[Complex64], b: &[Complex64]| {
            a.iter().zip(b.iter()).map(|(&x, &y)| x - y).collect()
        };
        Ok(Self {
            a11: diff(&self.a11, &other.a11),
            a22: diff(&self.a22, &other.a22),
            a12: diff(&self.a12, &other.a12),
            a21: diff(&self.a21, &other.a21),
            shape: self.shape,
        })
    }

    fn scale_a11(&mut self, factor: f64) {
        for v in &mut self.a11 {
            *v *= factor;
        }
    }
}

/// `(row offset, column offset, Li, Lj)` for the four blocks in order.
fn block_layout(shape: BlockShape) -> [(usize, usize, usize, usize); 4] {
    let (l1, l2) = (shape.l1(), shape.l2());
    [
        (0, 0, l1, l1),
        (l1, l1, l2, l2),
        (0, l1, l1, l2),
        (l1, 0, l2, l1),
    ]
}

fn operator_on_mat(mat: &DMatrix<Complex64>, shape: BlockShape) -> MeasurementVector {
    let mut blocks: [Vec<Complex64>; 4] = Default::default();
    for (block, (row_off, col_off, li, lj)) in blocks.iter_mut().zip(block_layout(shape)) {
        *block = (0..li + lj - 1)
            .map(|k| {
                // diagonal sum over entries (l, l + Lj - 1 - k) of the block
                let lo = (k + 1).saturating_sub(lj);
                let hi = k.min(li - 1);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut l = lo;
                while l <= hi {
                    acc += mat[(row_off + l, col_off + l + lj - 1 - k)];
                    l += 1;
                }
                acc
            })
            .collect();
    }
    let [a11, a22, a12, a21] = blocks;
    MeasurementVector {
        a11,
        a22,
        a12,
        a21,
        shape,
    }
}

/// Applies the correlation measurement operator to a lifted matrix.
///
/// On `X = x x*` every block reproduces `correlate(x_i, x_j)`; the map is
/// linear in `X` and costs O(N^2).
pub fn apply_operator(x: &LiftedMatrix) -> MeasurementVector {
    operator_on_mat(&x.mat, x.shape)
}

fn adjoint_to_mat(v: &MeasurementVector) -> DMatrix<Complex64> {
    let shape = v.shape;
    let n = shape.n();
    let mut mat = DMatrix::<Complex64>::zeros(n, n);
    let blocks = [&v.a11, &v.a22, &v.a12, &v.a21];
    for (block, (row_off, col_off, li, lj)) in blocks.iter().zip(block_layout(shape)) {
        for (k, &value) in block.iter().enumerate() {
            let lo = (k + 1).saturating_sub(lj);
            let hi = k.min(li - 1);
            let mut l = lo;
            while l <= hi {
                mat[(row_off + l, col_off + l + lj - 1 - k)] += value;
                l += 1;
            }
        }
    }
    mat
}

/// Adjoint of [`apply_operator`]: spreads each measurement entry back
/// along its block diagonal and Hermitianizes the result.
///
/// For measurement vectors respecting the natural symmetry (conjugate
/// symmetric `a11`/`a22` and `a21 = conj_reverse(a12)`) the spread matrix
/// is already Hermitian and `<A(X), v> = <X, adjoint(v)>` holds exactly
/// for every Hermitian `X`. For arbitrary `v` the Hermitianization keeps
/// the real part of that identity, which is the inner product the solver
/// works with on the real vector space of Hermitian matrices.
pub fn apply_adjoint(v: &MeasurementVector) -> LiftedMatrix {
    let raw = adjoint_to_mat(v);
    LiftedMatrix {
        mat: hermitianized(&raw),
        shape: v.shape,
    }
}

fn hermitianized(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn herm_eigen(mat: DMatrix<Complex64>) -> Result<SymmetricEigen<Complex64, nalgebra::Dyn>> {
    let max_iters = 100 * mat.nrows().max(8);
    SymmetricEigen::try_new(mat, f64::EPSILON, max_iters).ok_or(Error::EigenFailure)
}

fn psd_project_mat(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = m.nrows();
    let eig = herm_eigen(hermitianized(m))?;
    let positive: Vec<usize> = (0..n).filter(|&j| eig.eigenvalues[j] > 0.0).collect();
    if positive.is_empty() {
        return Ok(DMatrix::zeros(n, n));
    }
    // B = V_+ diag(sqrt(lambda_+)), projection = B B^H
    let mut basis = DMatrix::<Complex64>::zeros(n, positive.len());
    for (col, &j) in positive.iter().enumerate() {
        let scale = eig.eigenvalues[j].sqrt();
        for i in 0..n {
            basis[(i, col)] = eig.eigenvectors[(i, j)] * scale;
        }
    }
    Ok(&basis * basis.adjoint())
}

/// Frobenius-nearest positive-semidefinite matrix: eigendecompose, clamp
/// negative eigenvalues to zero, reassemble. Idempotent.
pub fn psd_project(h: &LiftedMatrix) -> Result<LiftedMatrix> {
    Ok(LiftedMatrix {
        mat: psd_project_mat(&h.mat)?,
        shape: h.shape,
    })
}

/// Solver knobs for [`solve_psd_least_squares`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Iteration cap; hitting it with the residual still above
    /// [`Self::rel_tol`] flags the result as non-converged.
    pub max_iters: usize,
    /// Relative residual target `||b - A(X)|| / ||b||`. Noisy problems
    /// never reach it; they stop as converged once the residual
    /// plateaus (no relative progress over a patience window).
    pub rel_tol: f64,
    /// Nesterov momentum with adaptive restart; disabling it gives the
    /// plain, objective-monotone projected gradient method.
    pub accelerated: bool,
    /// Weight applied to the synthetic autocorrelation template block
    /// `a11` in the least squares; 1 keeps all blocks at unit weight.
    pub template_weight: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            rel_tol: 1e-7,
            accelerated: true,
            template_weight: 1.0,
        }
    }
}

/// Outcome summary of one solver run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    /// Unweighted `||b - A(X)|| / ||b||` of the returned iterate.
    pub relative_residual: f64,
    /// `lambda_2 / lambda_1` of the returned iterate.
    pub rank1_gap: f64,
    pub converged: bool,
    /// Relative residual after every iteration, for convergence checks.
    pub residual_trace: Vec<f64>,
}

const STALL_PATIENCE: usize = 40;
// Relative residual improvement over one patience window below which the
// iteration counts as plateaued. Conservative: slow crawls through
// ill-conditioned faces still progress by much more than this, while a
// true noise floor flattens to essentially zero improvement.
const PLATEAU_REL_IMPROVEMENT: f64 = 1e-5;

/// Largest eigenvalue of `adjoint . operator` on the Hermitian space,
/// estimated with 50 power iterations from a fixed pseudo-random start.
/// Depends only on the block shape.
fn operator_norm_sq(shape: BlockShape) -> f64 {
    let n = shape.n();
    let mut state = 0x243F_6A88_85A3_08D3u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let start = DMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
    let mut x = hermitianized(&start);
    let scale = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    x /= Complex64::new(scale, 0.0);
    let mut lambda = 1.0f64;
    for _ in 0..50 {
        let y = adjoint_to_mat(&operator_on_mat(&x, shape));
        let y = hermitianized(&y);
        lambda = x
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        x = y / Complex64::new(norm, 0.0);
    }
    lambda.max(f64::MIN_POSITIVE)
}

// Residual b - A(X) with the template block pre-scaled by weight^2, so
// that its adjoint is the gradient of the weighted objective. The
// returned norm is the unweighted residual norm.
fn weighted_residual(
    b: &MeasurementVector,
    mat: &DMatrix<Complex64>,
    weight: f64,
) -> (MeasurementVector, f64) {
    let mut res = b
        .sub(&operator_on_mat(mat, b.shape))
        .expect("shapes agree inside the solver");
    let plain_norm = res.norm();
    if weight != 1.0 {
        res.scale_a11(weight * weight);
    }
    (res, plain_norm)
}

/// Least-squares recovery `min_{X >= 0} ||b - A(X)||^2` by accelerated
/// projected gradient descent, initialized at the PSD projection of
/// `adjoint(b)`.
///
/// Returns the best iterate seen together with a [`SolveReport`]; hitting
/// `max_iters` without stalling marks the report non-converged and the
/// caller decides what to do with the iterate.
pub fn solve_psd_least_squares(
    b: &MeasurementVector,
    opts: &SolveOptions,
) -> Result<(LiftedMatrix, SolveReport)> {
    let shape = b.shape;
    let norm_b = b.norm();
    if norm_b == 0.0 {
        let report = SolveReport {
            iterations: 0,
            relative_residual: 0.0,
            rank1_gap: 1.0,
            converged: true,
            residual_trace: Vec::new(),
        };
        return Ok((LiftedMatrix::zeros(shape), report));
    }

    let weight = opts.template_weight;
    let lipschitz = operator_norm_sq(shape) * weight.max(1.0).powi(2);
    let step = Complex64::new(0.95 / lipschitz, 0.0);

    let mut x = psd_project_mat(&adjoint_to_mat(b))?;
    let mut momentum = x.clone();
    let mut t = 1.0f64;
    let (_, res_norm) = weighted_residual(b, &x, weight);

    let mut best_mat = x.clone();
    let mut best_rr = res_norm / norm_b;
    let mut reference_rr = best_rr;
    let mut last_improvement = 0usize;
    let mut converged = false;
    let mut trace = Vec::with_capacity(opts.max_iters.min(4096));
    let mut iterations = 0usize;

    for iter in 1..=opts.max_iters {
        iterations = iter;
        let (res, _) = weighted_residual(b, &momentum, weight);
        let gradient = hermitianized(&adjoint_to_mat(&res));
        let x_next = psd_project_mat(&(&momentum + &gradient * step))?;
        let (_, plain) = weighted_residual(b, &x_next, weight);
        let rr = plain / norm_b;
        trace.push(rr);

        if opts.accelerated {
            // restart when the momentum points against the gradient
            // mapping (the projected step direction), the criterion that
            // stays effective under the PSD projection
            let uphill: f64 = momentum
                .iter()
                .zip(x_next.iter())
                .zip(x.iter())
                .map(|((&y, &xn), &xp)| ((y - xn).conj() * (xn - xp)).re)
                .sum();
            if uphill > 0.0 {
                t = 1.0;
                momentum = x_next.clone();
            } else {
                let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                let beta = Complex64::new((t - 1.0) / t_next, 0.0);
                momentum = &x_next + (&x_next - &x) * beta;
                t = t_next;
            }
        } else {
            momentum = x_next.clone();
        }
        x = x_next;

        if rr < best_rr {
            best_rr = rr;
            best_mat = x.clone();
        }
        if best_rr < reference_rr * (1.0 - PLATEAU_REL_IMPROVEMENT) {
            reference_rr = best_rr;
            last_improvement = iter;
        }
        if best_rr <= opts.rel_tol || iter - last_improvement >= STALL_PATIENCE {
            converged = true;
            break;
        }
    }

    let lifted = LiftedMatrix {
        mat: best_mat,
        shape,
    };
    let gap = rank1_gap(&lifted)?;
    let report = SolveReport {
        iterations,
        relative_residual: best_rr,
        rank1_gap: gap,
        converged,
        residual_trace: trace,
    };
    Ok((lifted, report))
}

fn sorted_herm_eigen(x: &LiftedMatrix) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let eig = herm_eigen(hermitianized(&x.mat))?;
    let n = x.shape.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, col| eig.eigenvectors[(i, order[col])]);
    Ok((values, vectors))
}

fn rank1_gap(x: &LiftedMatrix) -> Result<f64> {
    let (values, _) = sorted_herm_eigen(x)?;
    if values[0] <= 0.0 {
        return Ok(1.0);
    }
    Ok((values[1].max(0.0)) / values[0])
}

/// Leading eigenpair of a PSD lifted matrix: returns
/// `x = sqrt(lambda_1) u_1` (the best rank-1 factor in Frobenius norm)
/// and the rank-1 gap `lambda_2 / lambda_1`.
pub fn extract_rank1(x: &LiftedMatrix) -> Result<(ComplexSequence, f64)> {
    let (values, vectors) = sorted_herm_eigen(x)?;
    let lambda1 = values[0];
    if lambda1 <= 0.0 {
        return Err(Error::DegenerateSolution);
    }
    let scale = Complex64::new(lambda1.sqrt(), 0.0);
    let coeffs = (0..x.shape.n()).map(|i| vectors[(i, 0)] * scale).collect();
    let gap = values[1].max(0.0) / lambda1;
    Ok((ComplexSequence::new(coeffs)?, gap))
}

/// Removes the global phase of a recovered stack and splits it into the
/// codeword estimate and the channel estimate.
///
/// The stack is rotated so its first entry is real positive (the codebook
/// convention for even `L`); the first `L` entries are the codeword and
/// the conjugate-time-reversal of the last `K` entries is the channel.
pub fn fix_global_phase(
    xhat: &ComplexSequence,
    cfg: &FrameConfig,
) -> Result<(ComplexSequence, ComplexSequence)> {
    if xhat.len() != cfg.lifted_dim() {
        return Err(Error::DimensionMismatch {
            context: "recovered stack length",
            expected: cfg.lifted_dim(),
            got: xhat.len(),
        });
    }
    let lead = xhat[0];
    if lead.norm() < 1e-12 {
        return Err(Error::PhaseUndefined);
    }
    let rotation = (lead / lead.norm()).conj();
    let rotated = xhat.scaled(rotation);
    let data = ComplexSequence::new(rotated.coeffs()[..cfg.l()].to_vec())?;
    let tail = ComplexSequence::new(rotated.coeffs()[cfg.l()..].to_vec())?;
    let channel = crate::seqcore::conj_reverse(&tail);
    Ok((data, channel))
}
