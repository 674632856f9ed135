//! `dmtrack`: simulate scenarios, run the decentralized tracker, and score
//! the results.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 internal error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dmtrack::Error;

#[derive(Parser)]
#[command(name = "dmtrack", version, about = "Decentralized multi-sensor pedestrian tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic world (detections + ground truth) or, with
    /// `--reid`, a labelled re-identification feature set.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Frames to simulate (world specs only).
        #[arg(long, default_value_t = 1000)]
        frames: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Treat the spec as a re-id feature spec and write `features.csv`.
        #[arg(long)]
        reid: bool,
    },
    /// Run every sensor's tracker with batch-wise gallery exchange.
    Track {
        /// `detections.csv`, or a directory holding one.
        #[arg(long)]
        detections: PathBuf,
        /// Run configuration (TOML). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Record wall time per batch in the reports.
        #[arg(long)]
        timing: bool,
    },
    /// Rank-1 re-identification accuracy under one gallery representation.
    ReidEval {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 1)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = Mode::OrientationBins)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.2)]
        query_fraction: f64,
    },
    /// CLEAR MOT and identity scores of tracker output against ground truth.
    Evaluate {
        /// `tracks.csv`, or a directory holding one.
        #[arg(long)]
        tracks: PathBuf,
        /// `groundtruth.csv`, or a directory holding one.
        #[arg(long)]
        gt: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
    },
    /// Summarize the communication log of a `track` run.
    Report {
        /// Output directory of `track`, or its `reports.jsonl`.
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Average,
    Random,
    OrientationBins,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 2,
        e if e.is_validation() => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate { spec, frames, seed, out, reid } => {
            commands::simulate(&spec, frames, seed, &out, reid)
        }
        Command::Track { detections, config, seed, out, timing } => {
            commands::track(&detections, config.as_deref(), seed, &out, timing)
        }
        Command::ReidEval { features, bins, mode, seed, query_fraction } => {
            commands::reid_eval(&features, bins, mode, seed, query_fraction)
        }
        Command::Evaluate { tracks, gt, iou } => commands::evaluate(&tracks, &gt, iou),
        Command::Report { run } => commands::report(&run),
    };
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
