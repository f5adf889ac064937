//! `ergolab`: command-line front end for the laboratory.
//!
//! Every run writes its primary output to `--out` (stdout when omitted) and
//! one JSON manifest to `--manifest` (default `<out>.manifest.json`, or
//! stderr when writing to stdout). Exit codes: 0 success, 1 domain error,
//! 2 usage error. `ERGOLAB_THREADS` caps the worker pool.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::manifest::Manifest;

#[derive(Debug, Parser, Serialize)]
#[command(name = "ergolab", version, about = "Finite models of measure-preserving dynamics")]
pub struct Cli {
    /// Primary output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Manifest file; defaults to `<out>.manifest.json`, or stderr without `--out`.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Rokhlin or Lehrer-Weiss tower on a single cycle (JSON).
    Tower(TowerArgs),
    /// Factor a single cycle into three involutions (JSON).
    Involutions(InvolutionArgs),
    /// Rank-one cutting and stacking.
    #[command(subcommand)]
    Rankone(RankOneCommand),
    /// Triple intersections on a random cycle.
    #[command(subcommand)]
    Recurrence(RecurrenceCommand),
    /// Harmonic GF(2) fields on a cylinder.
    #[command(subcommand)]
    Ledrappier(LedrappierCommand),
    /// Mosaics of k×k red and non-touching 1×1 blue squares.
    #[command(subcommand)]
    Mosaic(MosaicCommand),
    /// Cross-shaped Rokhlin families in the F2 Bernoulli shift.
    #[command(subcommand)]
    F2(F2Command),
}

#[derive(Debug, Args, Serialize)]
pub struct TowerArgs {
    /// Number of atoms.
    #[arg(long)]
    pub n: usize,
    /// Tower height.
    #[arg(long)]
    pub h: usize,
    /// Use a random cycle from this seed instead of the rotation.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated atoms the residual must lie in (Lehrer-Weiss tower).
    #[arg(long, value_delimiter = ',')]
    pub target: Option<Vec<usize>>,
}

#[derive(Debug, Args, Serialize)]
pub struct InvolutionArgs {
    #[arg(long)]
    pub n: usize,
    /// Use a random cycle from this seed instead of the rotation.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Height of the auxiliary tower.
    #[arg(long, default_value_t = ergolab_core::involutions::DEFAULT_TOWER_HEIGHT)]
    pub height: usize,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum RankOneCommand {
    /// Exact correlation series `n ↦ μ(TⁿA ∩ A)` (CSV).
    Correlate(CorrelateArgs),
    /// Spacers placing the heights inside the given intervals (JSON).
    Design(DesignArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SpecArgs {
    /// Initial height.
    #[arg(long)]
    pub h1: u64,
    /// `auto` (designed from `--intervals`) or comma-separated spacer counts.
    #[arg(long, default_value = "auto", value_parser = parse_spacers)]
    pub spacers: Spacers,
    /// Comma-separated `a:b` intervals for `--spacers auto`.
    #[arg(long, value_delimiter = ',', value_parser = parse_interval)]
    pub intervals: Vec<(u64, u64)>,
}

#[derive(Debug, Clone, Serialize)]
pub enum Spacers {
    Auto,
    Explicit(Vec<u64>),
}

fn parse_spacers(s: &str) -> Result<Spacers, String> {
    if s == "auto" {
        return Ok(Spacers::Auto);
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("bad spacer count {t:?}")))
        .collect::<Result<_, _>>()
        .map(Spacers::Explicit)
}

fn parse_interval(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a = a.parse().map_err(|_| format!("bad interval start {a:?}"))?;
    let b = b.parse().map_err(|_| format!("bad interval end {b:?}"))?;
    Ok((a, b))
}

/// Union of levels of one stage, `level:L1,L2,...[@stage]`.
#[derive(Debug, Clone, Serialize)]
pub struct LevelArg {
    pub levels: Vec<u64>,
    pub stage: Option<usize>,
}

fn parse_levels(s: &str) -> Result<LevelArg, String> {
    let body = s
        .strip_prefix("level:")
        .ok_or_else(|| format!("expected level:L1,L2,...[@stage], got {s:?}"))?;
    let (list, stage) = match body.split_once('@') {
        Some((list, stage)) => (list, Some(stage.parse().map_err(|_| format!("bad stage {stage:?}"))?)),
        None => (body, None),
    };
    let levels = list
        .split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| format!("bad level {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LevelArg { levels, stage })
}

#[derive(Debug, Args, Serialize)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
    /// `level:L1,L2,...[@stage]`; the stage defaults to the last one of the spec.
    #[arg(long = "A", value_parser = parse_levels)]
    pub set: LevelArg,
    #[arg(long)]
    pub n_max: u64,
    /// Spacer factor for stages appended until every `n ≤ n_max` resolves.
    #[arg(long, default_value_t = 1)]
    pub extend_factor: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct DesignArgs {
    #[command(flatten)]
    pub spec: SpecArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SystemArgs {
    /// Number of atoms of the random cycle.
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Density of the three random sets.
    #[arg(long, default_value_t = 0.5)]
    pub density: f64,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum RecurrenceCommand {
    /// `(1/N) Σ μ(A ∩ TⁱA₁ ∩ T²ⁱA₂)` (JSON).
    Average {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        horizon: u64,
    },
    /// Per-`i` terms of the average (CSV).
    Terms {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        horizon: u64,
    },
    /// Least `i` with `μ(A ∩ TⁱA ∩ T²ⁱA) > 0` (JSON).
    Roth {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        i_max: u64,
    },
}

#[derive(Debug, Subcommand, Serialize)]
pub enum LedrappierCommand {
    /// Sample a field and check its identities (JSON).
    Sample {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        seed: u64,
        /// Random thread starts for the thread statistics.
        #[arg(long, default_value_t = 16)]
        thread_samples: usize,
        /// Also write the field as a PGM image.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Symbol sequence of one thread (CSV).
    Thread {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        x: usize,
        #[arg(long)]
        y: usize,
        #[arg(long, value_enum, default_value_t = HeadingArg::Up)]
        heading: HeadingArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
pub enum HeadingArg {
    Up,
    Right,
    Down,
    Left,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum, Serialize)]
pub enum AdjacencyArg {
    /// Edge or corner contact.
    #[default]
    King,
    /// Edge contact only.
    Rook,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum MosaicCommand {
    /// Seeded random mosaic (JSON); exit 1 when none exists.
    Generate {
        #[arg(long)]
        w: usize,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        adjacency: AdjacencyArg,
        /// Also write the mosaic as a PPM image.
        #[arg(long)]
        ppm: Option<PathBuf>,
    },
    /// Exact number of mosaics (JSON, decimal string).
    Count {
        #[arg(long)]
        w: usize,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t)]
        adjacency: AdjacencyArg,
    },
    /// Per-site entropy `log₂(count)/(w·h)` (CSV).
    Entropy {
        /// Comma-separated widths.
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<usize>,
        /// Common height; each board is square when omitted.
        #[arg(long)]
        height: Option<usize>,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Subcommand, Serialize)]
pub enum F2Command {
    /// Local search for a large cross-shaped Rokhlin family (JSON).
    Search {
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long)]
        budget: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Certificate for the local peak on a ball (JSON).
    Baseline {
        #[arg(long, default_value_t = 2)]
        radius: usize,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("ERGOLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .map_err(|_| format!("ERGOLAB_THREADS must be a positive integer, got {raw:?}"))?;
    if threads == 0 {
        return Err("ERGOLAB_THREADS must be a positive integer, got 0".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let started = Instant::now();
    let result = commands::run(&cli);
    let mut manifest = Manifest::new(&cli, started.elapsed());
    let code = match &result {
        Ok(report) => {
            manifest.record(report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            manifest.fail(e);
            ExitCode::from(1)
        }
    };
    if let Err(e) = manifest.write(&cli) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(1);
    }
    code
}
