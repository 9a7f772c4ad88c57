//! Command-line front end: encode/decode codewords, inspect PAPR, recover
//! a received frame from a CSV capture, and run seeded rSNR sweeps.

use clap::{Parser, Subcommand};
use hufflink::harness::{
    self, parse_snr_grid, recover_frame, run_sweep, SweepConfig, SweepMeta, SweepPoint,
};
use hufflink::{huffman, FrameConfig, SolveOptions};
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "hufflink", version)]
#[command(about = "Blind one-shot communication over unknown FIR channels with Huffman sequences")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Encode a bit string into a Huffman codeword (CSV, one "re,im" per line)
    Encode {
        /// Codeword length L (even)
        #[arg(long)]
        len: usize,
        /// Codeword energy E (> 2)
        #[arg(long)]
        energy: f64,
        /// L-1 bits, slot 1 leftmost
        #[arg(long)]
        bits: String,
        /// Output file; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a codeword CSV back into bits
    Decode {
        #[arg(long)]
        len: usize,
        #[arg(long)]
        energy: f64,
        /// Input sequence CSV
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Print the PAPR of a codeword (worst case when --bits is omitted)
    Papr {
        #[arg(long)]
        len: usize,
        #[arg(long)]
        energy: f64,
        #[arg(long)]
        bits: Option<String>,
    },
    /// Recover bits and channel from a received frame CSV
    Recover {
        /// Codeword length L
        #[arg(long)]
        len: usize,
        /// Channel length K
        #[arg(long = "chan-len")]
        chan_len: usize,
        /// Received frame CSV (L+K-1 lines of "re,im")
        #[arg(long = "in")]
        input: PathBuf,
        /// Known codeword energy; estimated from the frame when omitted
        #[arg(long)]
        energy: Option<f64>,
    },
    /// Run a seeded Monte Carlo rSNR sweep and write the results CSV
    Simulate {
        #[arg(long)]
        len: usize,
        #[arg(long = "chan-len")]
        chan_len: usize,
        #[arg(long)]
        energy: f64,
        /// rSNR grid in dB: "29", "5:5:40", or "noiseless"
        #[arg(long)]
        snr: String,
        /// Trials per grid point
        #[arg(long)]
        trials: usize,
        /// Master seed
        #[arg(long)]
        seed: u64,
        /// Give the receiver the true energy instead of the estimate
        #[arg(long, default_value_t = false)]
        known_energy: bool,
        /// Results CSV path
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    if let Err(message) = run(Cli::parse()) {
        eprintln!("error: {message}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Commands::Encode {
            len,
            energy,
            bits,
            out,
        } => {
            let params = huffman::make_params(len, energy).map_err(|e| e.to_string())?;
            let msg = huffman::BitMessage::from_bit_str(&bits).map_err(|e| e.to_string())?;
            let x = huffman::encode(&params, &msg).map_err(|e| e.to_string())?;
            let text = harness::sequence_to_csv(&x);
            match out {
                Some(path) => fs::write(&path, text)
                    .map_err(|e| format!("writing {}: {e}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(())
        }
        Commands::Decode { len, energy, input } => {
            let params = huffman::make_params(len, energy).map_err(|e| e.to_string())?;
            let text = fs::read_to_string(&input)
                .map_err(|e| format!("reading {}: {e}", input.display()))?;
            let x = harness::sequence_from_csv(&text).map_err(|e| e.to_string())?;
            println!("{}", huffman::decode(&params, &x).to_bit_str());
            Ok(())
        }
        Commands::Papr { len, energy, bits } => {
            let params = huffman::make_params(len, energy).map_err(|e| e.to_string())?;
            let db = match bits {
                Some(bits) => {
                    let msg = huffman::BitMessage::from_bit_str(&bits).map_err(|e| e.to_string())?;
                    let x = huffman::encode(&params, &msg).map_err(|e| e.to_string())?;
                    hufflink::seqcore::papr_db(&x).map_err(|e| e.to_string())?
                }
                None => huffman::worst_case_papr(&params).map_err(|e| e.to_string())?,
            };
            println!("{db:.4} dB");
            Ok(())
        }
        Commands::Recover {
            len,
            chan_len,
            input,
            energy,
        } => {
            let frame = FrameConfig::new(len, chan_len).map_err(|e| e.to_string())?;
            let text = fs::read_to_string(&input)
                .map_err(|e| format!("reading {}: {e}", input.display()))?;
            let r = harness::sequence_from_csv(&text).map_err(|e| e.to_string())?;
            let recovery = recover_frame(&r, &frame, energy, &SolveOptions::default())
                .map_err(|e| e.to_string())?;
            println!("bits={}", recovery.message.to_bit_str());
            println!("energy_estimate={:.6}", recovery.energy_estimate);
            println!("energy_used={:.6}", recovery.energy_used);
            println!("residual={:.6e}", recovery.solve.relative_residual);
            println!("rank1_gap={:.6e}", recovery.solve.rank1_gap);
            println!("iterations={}", recovery.solve.iterations);
            println!("converged={}", recovery.solve.converged);
            Ok(())
        }
        Commands::Simulate {
            len,
            chan_len,
            energy,
            snr,
            trials,
            seed,
            known_energy,
            out,
        } => {
            let frame = FrameConfig::new(len, chan_len).map_err(|e| e.to_string())?;
            let grid = parse_snr_grid(&snr).map_err(|e| e.to_string())?;
            let points = grid
                .iter()
                .map(|&rsnr_db| SweepPoint {
                    rsnr_db,
                    known_energy,
                })
                .collect();
            let cfg = SweepConfig {
                frame,
                energy,
                points,
                trials_per_point: trials,
                master_seed: seed,
                solver: SolveOptions::default(),
            };
            let rows = run_sweep(&cfg).map_err(|e| e.to_string())?;
            let meta = SweepMeta {
                master_seed: seed,
                frame,
                energy,
                trials_per_point: trials,
                known_energy,
            };
            fs::write(&out, harness::sweep_csv(&rows, &meta))
                .map_err(|e| format!("writing {}: {e}", out.display()))?;
            for row in &rows {
                println!(
                    "rsnr={} ber={:.4e} mse_data={:.4e} fails={}/{}",
                    row.rsnr_db.map_or("inf".into(), |v| v.to_string()),
                    row.ber,
                    row.mse_data,
                    row.fail_count,
                    row.trials,
                );
            }
            Ok(())
        }
    }
}
