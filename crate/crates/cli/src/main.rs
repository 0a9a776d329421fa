//! `qwalk`: command-line driver for the quantum walk simulator.
//!
//! Every subcommand writes CSV or JSON files into `--out-dir` and a short
//! summary on stdout. Exit codes: 0 success, 2 bad configuration or protocol
//! source, 3 numerical or lattice-extent failure, 4 file I/O failure.
//! `QWALK_THREADS` caps the worker pool; outputs do not depend on it.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "qwalk",
    version,
    about = "Photonic quantum walks on a 2D lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-photon walk: position distribution after every step.
    Simulate {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Two-photon walk: pair distributions and violation maps per step.
    TwoPhoton {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Hong-Ou-Mandel bunching surface and delay scan.
    Hom {
        #[command(flatten)]
        hom: HomArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Violation report of the theory or of a counts record.
    Violation {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        counts: OptionalCountsArgs,
        #[command(flatten)]
        boot: BootArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Derived optical quantities of a bench layout.
    Geometry {
        #[command(flatten)]
        geometry: GeometryArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Corrects raw counts and compares them with theory.
    ProcessCounts {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        counts: CountsArgs,
        /// Theory pair distribution (m1,n1,m2,n2,p); defaults to the
        /// simulated walk.
        #[arg(long)]
        theory: Option<PathBuf>,
        #[command(flatten)]
        boot: BootArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Draws a synthetic counts record from the simulated walk.
    SynthesizeCounts {
        #[command(flatten)]
        walk: WalkArgs,
        #[command(flatten)]
        synth: SynthArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Args)]
pub struct WalkArgs {
    /// Protocol file (.qwp) or inline source; defaults to the balanced step.
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    /// Input photon as `m,n,POL` (POL one of L R H V D A) or
    /// `m,n,up_re,up_im,down_re,down_im`; repeat for the second photon.
    #[arg(long = "photon", allow_hyphen_values = true)]
    pub photons: Vec<String>,
    /// Indistinguishability of the two photons.
    #[arg(long, default_value_t = 0.95)]
    pub c0: f64,
}

#[derive(Args)]
pub struct BootArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = qwalk_core::analysis::DEFAULT_N_BOOT)]
    pub n_boot: usize,
}

#[derive(Args)]
pub struct OutArgs {
    #[arg(long, default_value = "qwalk-out")]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct CountsArgs {
    /// CSV with columns m1,n1,m2,n2,counts.
    #[arg(long)]
    pub coincidences: PathBuf,
    /// CSV with columns m,n,singles_hz,efficiency.
    #[arg(long)]
    pub modes: PathBuf,
    /// JSON with acquisition_time, window, fbs_transmissivity.
    #[arg(long)]
    pub metadata: PathBuf,
}

#[derive(Args)]
pub struct OptionalCountsArgs {
    #[arg(long, requires_all = ["modes", "metadata"])]
    pub coincidences: Option<PathBuf>,
    #[arg(long, requires = "coincidences")]
    pub modes: Option<PathBuf>,
    #[arg(long, requires = "coincidences")]
    pub metadata: Option<PathBuf>,
}

#[derive(Args)]
pub struct HomArgs {
    /// Points per axis of the surface over `[0, 2π]`.
    #[arg(long, default_value_t = 33)]
    pub grid: usize,
    /// Peak photon overlap.
    #[arg(long = "c0", default_value_t = 0.95)]
    pub c0_max: f64,
    /// Coherence width of the overlap, in delay units.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Half-width of the scan in units of sigma.
    #[arg(long, default_value_t = 4.0)]
    pub scan_range: f64,
    #[arg(long, default_value_t = 81)]
    pub scan_points: usize,
}

#[derive(Args)]
pub struct GeometryArgs {
    /// JSON with optional `layout`, `beam` and `loss` sections.
    #[arg(long)]
    pub layout: Option<PathBuf>,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Expected number of detected true coincidences.
    #[arg(long, default_value_t = 1e5)]
    pub events: f64,
    #[arg(long, default_value_t = 150.0)]
    pub singles_hz: f64,
    /// Comma-separated efficiencies, cycled over the sites.
    #[arg(long, default_value = "0.9,0.8,0.85,0.95")]
    pub efficiencies: String,
    #[arg(long, default_value_t = 100.0)]
    pub acquisition_time: f64,
    #[arg(long, default_value_t = 8e-9)]
    pub window: f64,
    #[arg(long, default_value_t = 0.5)]
    pub fbs_transmissivity: f64,
    #[arg(long)]
    pub selection_factor: Option<f64>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { walk, out } => commands::simulate(&walk, &out.out_dir),
        Command::TwoPhoton { walk, out } => commands::two_photon(&walk, &out.out_dir),
        Command::Hom { hom, out } => commands::hom(&hom, &out.out_dir),
        Command::Violation {
            walk,
            counts,
            boot,
            out,
        } => {
            let counts = match (counts.coincidences, counts.modes, counts.metadata) {
                (Some(coincidences), Some(modes), Some(metadata)) => Some(CountsArgs {
                    coincidences,
                    modes,
                    metadata,
                }),
                (None, None, None) => None,
                _ => {
                    return Err(CliError::Config(
                        "--coincidences, --modes and --metadata go together".into(),
                    ))
                }
            };
            commands::violation(&walk, counts.as_ref(), &boot, &out.out_dir)
        }
        Command::Geometry { geometry, out } => commands::geometry(&geometry, &out.out_dir),
        Command::ProcessCounts {
            walk,
            counts,
            theory,
            boot,
            out,
        } => commands::process_counts(&walk, &counts, theory.as_deref(), &boot, &out.out_dir),
        Command::SynthesizeCounts {
            walk,
            synth,
            seed,
            out,
        } => commands::synthesize(&walk, &synth, seed, &out.out_dir),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                error::EXIT_CONFIG as u8
            } else {
                0
            });
        }
    };
    let threads = std::env::var("QWALK_THREADS").ok();
    let result = config::init_threads(threads.as_deref()).and_then(|_| run(cli));
    match result {
        Ok(()) => ExitCode::from(error::EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
