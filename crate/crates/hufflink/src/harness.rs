//! Monte Carlo harness: seeded end-to-end trials, rSNR sweeps, metric
//! aggregation, and the CSV/sequence file formats used by the CLI.
//!
//! Reproducibility contract: a trial is a pure function of its
//! [`TrialConfig`], and a sweep is a pure function of
//! `(master_seed, grid)`. Trial seeds are derived as
//! `splitmix64(splitmix64(master_seed) + trial_index)`, so the same trial
//! index reuses the same bits/channel/noise draws across rSNR points and
//! across the known/unknown-energy modes (paired comparisons, common
//! random numbers). Trials may run in parallel; aggregation walks results
//! in trial order, so the output bytes do not depend on scheduling.

use crate::channel::{self, FrameConfig};
use crate::huffman::{self, BitMessage};
use crate::lifted_sdp::{self, SolveOptions};
use crate::receiver;
use crate::seqcore::ComplexSequence;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Minimum edge-tap magnitude (relative to the peak tap) for random
/// channel draws.
pub const EDGE_FLOOR: f64 = 0.05;

/// Everything one trial depends on.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub frame: FrameConfig,
    pub energy: f64,
    /// Received SNR in dB; `None` runs the noiseless channel.
    pub rsnr_db: Option<f64>,
    pub seed: u64,
    /// When set, the receiver builds its template from the true energy
    /// instead of the estimate.
    pub known_energy: bool,
    pub solver: SolveOptions,
}

/// Pipeline stage at which a trial gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureStage {
    Estimation,
    Solver,
    Extraction,
    Phase,
}

/// Solver outcome fields carried into the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSummary {
    pub iterations: usize,
    pub relative_residual: f64,
    pub rank1_gap: f64,
    pub converged: bool,
}

/// Per-trial outcome. Failed trials keep `bit_errors == bits_total` and
/// leave the reconstruction metrics empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub bit_errors: usize,
    pub bits_total: usize,
    pub mse_data: Option<f64>,
    pub mse_channel: Option<f64>,
    pub energy_rel_err: Option<f64>,
    pub solve: Option<SolveSummary>,
    pub coprimality_margin: Option<f64>,
    pub failure: Option<FailureStage>,
}

/// Receive-side result of [`recover_frame`].
#[derive(Debug, Clone)]
pub struct Recovery {
    pub message: BitMessage,
    pub data: ComplexSequence,
    pub channel: ComplexSequence,
    pub energy_estimate: f64,
    pub energy_used: f64,
    pub solve: SolveSummary,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The documented seed-splitting rule for sweep trials.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    splitmix64(splitmix64(master_seed).wrapping_add(trial_index))
}

fn stage_seed(trial_seed: u64, tag: u64) -> u64 {
    splitmix64(trial_seed ^ tag)
}

const TAG_BITS: u64 = 0x4249_5453;
const TAG_CHANNEL: u64 = 0x4348_414E;
const TAG_NOISE: u64 = 0x4E4F_4953;

/// Mean squared error per dimension after removing the optimal global
/// phase: `min_theta ||e^{-i theta} est - truth||^2 / len`, with the
/// minimizer `theta* = arg <est, truth>`.
pub fn mse_phase_aligned(truth: &ComplexSequence, est: &ComplexSequence) -> Result<f64> {
    if truth.len() != est.len() {
        return Err(Error::DimensionMismatch {
            context: "phase-aligned MSE",
            expected: truth.len(),
            got: est.len(),
        });
    }
    let overlap: Complex64 = est
        .coeffs()
        .iter()
        .zip(truth.coeffs().iter())
        .map(|(&e, &t)| e * t.conj())
        .sum();
    let rotation = if overlap.norm() > 0.0 {
        (overlap / overlap.norm()).conj()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let sum: f64 = est
        .coeffs()
        .iter()
        .zip(truth.coeffs().iter())
        .map(|(&e, &t)| (e * rotation - t).norm_sqr())
        .sum();
    Ok(sum / truth.len() as f64)
}

/// Receive-side half of the pipeline: autocorrelation, segment windows,
/// channel/energy estimates, PSD least squares, rank-1 extraction, phase
/// fix, and bit decision.
///
/// Returns the solver summary even when the iterate did not converge; the
/// caller decides whether that counts as a failure.
pub fn recover_frame(
    r: &ComplexSequence,
    frame: &FrameConfig,
    known_energy: Option<f64>,
    solver: &SolveOptions,
) -> Result<Recovery> {
    let a_r = receiver::received_autocorr(r, frame)?;
    let bundle = receiver::extract_segments(&a_r, frame)?;
    let estimates = receiver::estimate(&bundle, frame, known_energy)?;
    let b = receiver::build_measurements(&estimates, r, frame)?;
    let (xmat, report) = lifted_sdp::solve_psd_least_squares(&b, solver)?;
    let (stacked, _) = lifted_sdp::extract_rank1(&xmat)?;
    let (data, chan) = lifted_sdp::fix_global_phase(&stacked, frame)?;
    let decode_params = huffman::make_params(frame.l(), estimates.e_used())?;
    let message = huffman::decode(&decode_params, &data);
    Ok(Recovery {
        message,
        data,
        channel: chan,
        energy_estimate: estimates.e_hat(),
        energy_used: estimates.e_used(),
        solve: SolveSummary {
            iterations: report.iterations,
            relative_residual: report.relative_residual,
            rank1_gap: report.rank1_gap,
            converged: report.converged,
        },
    })
}

/// One seeded end-to-end trial:
/// encode -> transmit -> AWGN -> recover -> decode -> metrics.
///
/// Only configuration-level problems surface as `Err`; failures inside
/// the pipeline are recorded in the result. A failed trial counts every
/// bit as wrong (conservative BER) and contributes no MSE.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialResult> {
    let l = cfg.frame.l();
    let bits_total = l - 1;
    let params = huffman::make_params(l, cfg.energy)?;

    let mut bits_rng = ChaCha8Rng::seed_from_u64(stage_seed(cfg.seed, TAG_BITS));
    let msg = BitMessage::random(bits_total, &mut bits_rng)?;
    let x = huffman::encode(&params, &msg)?;
    let h = channel::random_channel(cfg.frame.k(), stage_seed(cfg.seed, TAG_CHANNEL), EDGE_FLOOR)?;
    let y = channel::transmit(&x, &h);
    let r = channel::add_awgn(&y, cfg.rsnr_db, stage_seed(cfg.seed, TAG_NOISE));
    let margin = channel::coprimality_margin(&x, &h).ok();

    let known = cfg.known_energy.then_some(cfg.energy);
    let failed = |stage, solve: Option<SolveSummary>, energy: Option<f64>| TrialResult {
        bit_errors: bits_total,
        bits_total,
        mse_data: None,
        mse_channel: None,
        energy_rel_err: energy,
        solve,
        coprimality_margin: margin,
        failure: Some(stage),
    };

    let recovery = match recover_frame(&r, &cfg.frame, known, &cfg.solver) {
        Ok(rec) => rec,
        Err(Error::Estimation(_)) => return Ok(failed(FailureStage::Estimation, None, None)),
        Err(Error::EigenFailure) => return Ok(failed(FailureStage::Solver, None, None)),
        Err(Error::DegenerateSolution) => return Ok(failed(FailureStage::Extraction, None, None)),
        Err(Error::PhaseUndefined) => return Ok(failed(FailureStage::Phase, None, None)),
        Err(other) => return Err(other),
    };
    let energy_rel_err = (recovery.energy_estimate - cfg.energy).abs() / cfg.energy;
    if !recovery.solve.converged {
        return Ok(failed(
            FailureStage::Solver,
            Some(recovery.solve),
            Some(energy_rel_err),
        ));
    }

    Ok(TrialResult {
        bit_errors: msg.hamming_distance(&recovery.message),
        bits_total,
        mse_data: Some(mse_phase_aligned(&x, &recovery.data)?),
        mse_channel: Some(mse_phase_aligned(&h.to_sequence(), &recovery.channel)?),
        energy_rel_err: Some(energy_rel_err),
        solve: Some(recovery.solve),
        coprimality_margin: margin,
        failure: None,
    })
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub rsnr_db: Option<f64>,
    pub known_energy: bool,
}

/// A full sweep specification.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub frame: FrameConfig,
    pub energy: f64,
    pub points: Vec<SweepPoint>,
    pub trials_per_point: usize,
    pub master_seed: u64,
    pub solver: SolveOptions,
}

/// Aggregated metrics of one grid point. Means are taken over successful
/// trials; BER counts failed trials as all-bits-wrong.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rsnr_db: Option<f64>,
    pub known_energy: bool,
    pub trials: usize,
    pub fail_count: usize,
    pub mse_data: f64,
    pub mse_channel: f64,
    pub ber: f64,
    pub energy_rel_rmse: f64,
    pub mean_iters: f64,
    pub mean_rank1_gap: f64,
}

/// Runs every grid point for `trials_per_point` seeded trials; trials run
/// in parallel, aggregation is order-independent.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.points
        .iter()
        .map(|point| {
            let results: Vec<TrialResult> = (0..cfg.trials_per_point)
                .into_par_iter()
                .map(|trial| {
                    let trial_cfg = TrialConfig {
                        frame: cfg.frame,
                        energy: cfg.energy,
                        rsnr_db: point.rsnr_db,
                        seed: derive_trial_seed(cfg.master_seed, trial as u64),
                        known_energy: point.known_energy,
                        solver: cfg.solver.clone(),
                    };
                    run_trial(&trial_cfg)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(aggregate(point, &results))
        })
        .collect()
}

fn aggregate(point: &SweepPoint, results: &[TrialResult]) -> SweepRow {
    let trials = results.len();
    let fail_count = results.iter().filter(|r| r.failure.is_some()).count();
    let total_bits: usize = results.iter().map(|r| r.bits_total).sum();
    let total_errors: usize = results.iter().map(|r| r.bit_errors).sum();

    let mean = |select: &dyn Fn(&TrialResult) -> Option<f64>| {
        let values: Vec<f64> = results.iter().filter_map(select).collect();
        if values.is_empty() {
            f64::NAN
        } else {
            values.iter().sum::<f64>() / values.len() as f64
        }
    };
    let on_success = |r: &TrialResult| r.failure.is_none();
    let energy_ms = mean(&|r: &TrialResult| {
        if on_success(r) {
            r.energy_rel_err.map(|e| e * e)
        } else {
            None
        }
    });
    SweepRow {
        rsnr_db: point.rsnr_db,
        known_energy: point.known_energy,
        trials,
        fail_count,
        mse_data: mean(&|r: &TrialResult| r.mse_data),
        mse_channel: mean(&|r: &TrialResult| r.mse_channel),
        ber: total_errors as f64 / total_bits as f64,
        energy_rel_rmse: energy_ms.sqrt(),
        mean_iters: mean(&|r: &TrialResult| {
            if on_success(r) {
                r.solve.as_ref().map(|s| s.iterations as f64)
            } else {
                None
            }
        }),
        mean_rank1_gap: mean(&|r: &TrialResult| {
            if on_success(r) {
                r.solve.as_ref().map(|s| s.rank1_gap)
            } else {
                None
            }
        }),
    }
}

/// Metadata echoed into the CSV header comments.
#[derive(Debug, Clone)]
pub struct SweepMeta {
    pub master_seed: u64,
    pub frame: FrameConfig,
    pub energy: f64,
    pub trials_per_point: usize,
    pub known_energy: bool,
}

fn format_rsnr(rsnr_db: Option<f64>) -> String {
    match rsnr_db {
        Some(db) => format!("{db}"),
        None => "inf".to_string(),
    }
}

/// Renders the results table: '#' metadata lines recording the seed and
/// conventions, one mandatory header row, then one row per grid point.
/// Fully deterministic in `(rows, meta)`.
pub fn sweep_csv(rows: &[SweepRow], meta: &SweepMeta) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# hufflink {} simulate results\n",
        env!("CARGO_PKG_VERSION")
    ));
    out.push_str(&format!("# master_seed = {}\n", meta.master_seed));
    out.push_str(&format!(
        "# frame: L = {}, K = {}\n",
        meta.frame.l(),
        meta.frame.k()
    ));
    out.push_str(&format!("# energy = {}\n", meta.energy));
    out.push_str(&format!("# trials_per_point = {}\n", meta.trials_per_point));
    out.push_str(&format!("# known_energy = {}\n", meta.known_energy));
    out.push_str(
        "# rsnr: mean received power per complex sample over noise variance per sample, dB\n",
    );
    out.push_str("# mse: per-dimension squared error after optimal global phase alignment\n");
    out.push_str("# trial seeds: splitmix64(splitmix64(master_seed) + trial_index)\n");
    out.push_str(
        "rsnr_db,trials,fail_count,mse_data,mse_channel,ber,energy_rel_rmse,mean_iters,mean_rank1_gap\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n",
            format_rsnr(row.rsnr_db),
            row.trials,
            row.fail_count,
            row.mse_data,
            row.mse_channel,
            row.ber,
            row.energy_rel_rmse,
            row.mean_iters,
            row.mean_rank1_gap,
        ));
    }
    out
}

/// Serializes a sequence as one "re,im" pair per line.
pub fn sequence_to_csv(x: &ComplexSequence) -> String {
    let mut out = String::new();
    for c in x.coeffs() {
        out.push_str(&format!("{:.17e},{:.17e}\n", c.re, c.im));
    }
    out
}

/// Parses the "re,im"-per-line format; blank lines and '#' comments are
/// skipped.
pub fn sequence_from_csv(text: &str) -> Result<ComplexSequence> {
    let mut coeffs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let parse = |field: Option<&str>| -> Result<f64> {
            field
                .ok_or_else(|| Error::Parse(format!("line {}: missing field", lineno + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
        };
        let re = parse(parts.next())?;
        let im = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: expected exactly two fields",
                lineno + 1
            )));
        }
        coeffs.push(Complex64::new(re, im));
    }
    ComplexSequence::new(coeffs)
}

/// Parses an rSNR grid: either a single value ("29"), a "start:step:stop"
/// triplet ("5:5:40", inclusive), or "noiseless".
pub fn parse_snr_grid(spec: &str) -> Result<Vec<Option<f64>>> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("noiseless") || spec.eq_ignore_ascii_case("inf") {
        return Ok(vec![None]);
    }
    let fields: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad rSNR value {s:?}: {e}")))
    };
    match fields.as_slice() {
        [single] => Ok(vec![Some(parse(single)?)]),
        [start, step, stop] => {
            let (start, step, stop) = (parse(start)?, parse(step)?, parse(stop)?);
            if step <= 0.0 {
                return Err(Error::Parse("rSNR grid step must be positive".into()));
            }
            let mut grid = Vec::new();
            let mut v = start;
            while v <= stop + 1e-9 {
                grid.push(Some(v));
                v += step;
            }
            Ok(grid)
        }
        _ => Err(Error::Parse(format!(
            "expected VALUE or START:STEP:STOP, got {spec:?}"
        ))),
    }
}
