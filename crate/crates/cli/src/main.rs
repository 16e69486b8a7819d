//! Command-line driver: scenario configs in, CSV tables and JSON summaries
//! out. Exit codes: 0 success, 2 configuration error, 3 numerical budget
//! exceeded, 4 invariant violation detected.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CommonOverrides, LemmaOptions, StateInfoOptions};

#[derive(Parser)]
#[command(
    name = "bosonic-avc",
    version,
    about = "Truncated Fock-space numerics for a jammed beam-splitter channel"
)]
struct Cli {
    /// Worker threads for the parallel scans (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Root seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Fock cutoff override.
    #[arg(long)]
    cutoff_override: Option<usize>,
    /// Tolerance override (violation threshold for scans, truncation
    /// tolerance for state construction).
    #[arg(long)]
    tolerance: Option<f64>,
}

impl CommonArgs {
    fn overrides(&self) -> CommonOverrides {
        CommonOverrides {
            seed: self.seed,
            cutoff_override: self.cutoff_override,
            tolerance: self.tolerance,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Scan entropy power inequalities over state-family pairs.
    EpiScan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Min-max capacity evaluation with closed-form comparison.
    Capacity {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Verify the supporting concentration and typicality bounds.
    LemmaCheck {
        /// One of: all, 1, 2, 3, 4, 5, gentle.
        #[arg(long, default_value = "all")]
        lemma: String,
        /// Blocklength budget (lemma-specific default when omitted).
        #[arg(long)]
        k: Option<usize>,
        /// Alphabet size budget.
        #[arg(long)]
        d: Option<usize>,
        /// Trial budget for the Monte Carlo checks.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Simulate a small-blocklength code against jammer strategies.
    CodeSim {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Dump the spectrum, energy, and entropy of one state.
    StateInfo {
        /// One of: vacuum, fock, coherent, thermal, phav, dphav.
        #[arg(long)]
        kind: String,
        /// Main parameter (level, amplitude real part, mean photons, radius).
        #[arg(long, default_value_t = 0.0)]
        param: f64,
        /// Imaginary part of the amplitude, where applicable.
        #[arg(long, default_value_t = 0.0)]
        param_im: f64,
        /// Secondary parameter (ring radius of a displaced ring).
        #[arg(long, default_value_t = 0.0)]
        param2: f64,
        #[arg(long)]
        cutoff: Option<usize>,
        /// Report the entropy in nats instead of bits.
        #[arg(long, default_value_t = false)]
        nats: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    if let Ok(dir) = std::env::var("BOSONIC_AVC_CACHE_DIR") {
        if !dir.is_empty() {
            bosonic_avc_core::beamsplitter::set_block_cache_dir(Some(PathBuf::from(dir)));
        }
    }
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .ok();
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads > 1 {
        eprintln!("note: sequential build, --threads ignored");
    }
    match &cli.command {
        Command::EpiScan {
            config,
            out_dir,
            common,
        } => commands::cmd_epi_scan(config, out_dir, &common.overrides()),
        Command::Capacity {
            config,
            out_dir,
            common,
        } => commands::cmd_capacity(config, out_dir, &common.overrides()),
        Command::LemmaCheck {
            lemma,
            k,
            d,
            trials,
            out_dir,
            common,
        } => commands::cmd_lemma_check(
            &LemmaOptions {
                selector: lemma.clone(),
                blocklength: *k,
                alphabet: *d,
                trials: *trials,
            },
            out_dir.as_deref(),
            &common.overrides(),
        ),
        Command::CodeSim {
            config,
            out_dir,
            common,
        } => commands::cmd_code_sim(config, out_dir, &common.overrides()),
        Command::StateInfo {
            kind,
            param,
            param_im,
            param2,
            cutoff,
            nats,
            out_dir,
            common,
        } => commands::cmd_state_info(
            &StateInfoOptions {
                kind: kind.clone(),
                param: *param,
                param_im: *param_im,
                param2: *param2,
                cutoff: *cutoff,
                nats: *nats,
            },
            out_dir.as_deref(),
            &common.overrides(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code_for(&err) as u8)
        }
    }
}
