//! `ddforge` command-line front end.

mod commands;
mod config;
mod error;
mod family;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ddforge::analysis::Functional;
use ddforge::bath::Preset;

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "ddforge", version, about = "Dynamical-decoupling sequence generator and suppression-order analysis")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Omit the metadata line (with timestamp) from CSV output.
    #[arg(long, global = true)]
    no_meta: bool,
    /// Worker threads for grid scans (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a pulse schedule and optionally write it as JSON.
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        /// Schedule file to write.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scan a family over an αt grid and fit the suppression order.
    Order {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// flip, dephase or total.
        #[arg(long)]
        functional: Option<Functional>,
        /// CSV file for the per-point values.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON file for the fit summary (always printed to stdout).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Pulse counts of CDD, CUDD and approximate UDD² at matched order.
    Counts {
        #[arg(long)]
        m_max: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smallest n with (n+1)³ ≤ 2ⁿ.
    Crossover {
        #[arg(long)]
        n_max: Option<u32>,
    },
    /// Leading-order concatenation prediction of A_z versus extraction.
    PredictMagnus {
        /// Number of concatenation levels.
        #[arg(long)]
        level: Option<u32>,
        /// Base block length in units of 1/α.
        #[arg(long)]
        tau0: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate several families at one αt.
    Compare {
        /// Family spec, e.g. `cudd:m=2,n=2` (repeatable). Defaults to CDD,
        /// CUDD and approximate UDD² at order --m.
        #[arg(long = "family", value_name = "SPEC")]
        families: Vec<String>,
        /// Matched order for the default family set.
        #[arg(long)]
        m: Option<usize>,
        /// Evaluation point α·t.
        #[arg(long)]
        at: Option<f64>,
        #[arg(long)]
        functional: Option<Functional>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct FamilyArgs {
    /// Family name: free|none, spin_echo, cpmg, pdd, icpmg, udd, cdd, cdd_xx, cudd, cpmg_udd, udd2.
    family: Option<String>,
    /// Total duration.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Cycles for icpmg / cpmg_udd.
    #[arg(long)]
    c: Option<usize>,
    /// Concatenation level for cdd / cdd_xx.
    #[arg(long)]
    level: Option<u32>,
    /// X, Y, Z or auto (X under pure dephasing, else Z).
    #[arg(long)]
    axis: Option<String>,
    /// Base family spec for cdd / cdd_xx, e.g. `udd:n=3`.
    #[arg(long)]
    base: Option<String>,
}

#[derive(Args, Debug, Default)]
struct ModelArgs {
    /// Bath dimension.
    #[arg(long)]
    d: Option<usize>,
    /// RNG seed (fallback: DDFORGE_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// generic, pure_dephasing, anisotropic or spin_bath(k).
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long = "norm-0")]
    norm_0: Option<f64>,
    #[arg(long)]
    norm_x: Option<f64>,
    #[arg(long)]
    norm_y: Option<f64>,
    #[arg(long)]
    norm_z: Option<f64>,
}

#[derive(Args, Debug, Default)]
struct GridArgs {
    /// Smallest α·t of the scan.
    #[arg(long)]
    at_min: Option<f64>,
    /// Largest α·t of the scan.
    #[arg(long)]
    at_max: Option<f64>,
    /// Number of log-spaced grid points.
    #[arg(long)]
    points: Option<usize>,
}

impl FamilyArgs {
    fn apply(self, c: &mut RunConfig) {
        c.family = self.family;
        c.t = self.t;
        c.n = self.n;
        c.m = self.m;
        c.c = self.c;
        c.level = self.level;
        c.axis = self.axis;
        c.base = self.base;
    }
}

impl ModelArgs {
    fn apply(self, c: &mut RunConfig) {
        c.d = self.d;
        c.seed = self.seed;
        c.preset = self.preset;
        c.norm_0 = self.norm_0;
        c.norm_x = self.norm_x;
        c.norm_y = self.norm_y;
        c.norm_z = self.norm_z;
    }
}

impl GridArgs {
    fn apply(self, c: &mut RunConfig) {
        c.at_min = self.at_min;
        c.at_max = self.at_max;
        c.points = self.points;
    }
}

fn run(cli: Cli) -> Result<(), error::CliError> {
    let mut flags = RunConfig {
        jobs: cli.jobs,
        no_meta: cli.no_meta.then_some(true),
        ..Default::default()
    };
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let action: fn(&RunConfig) -> Result<(), error::CliError> = match cli.command {
        Command::Gen { family, out } => {
            family.apply(&mut flags);
            flags.out = out;
            commands::gen
        }
        Command::Order { family, model, grid, functional, out, summary } => {
            family.apply(&mut flags);
            model.apply(&mut flags);
            grid.apply(&mut flags);
            flags.functional = functional;
            flags.out = out;
            flags.summary = summary;
            commands::order
        }
        Command::Counts { m_max, out } => {
            flags.m_max = m_max;
            flags.out = out;
            commands::counts
        }
        Command::Crossover { n_max } => {
            flags.n_max = n_max;
            commands::crossover
        }
        Command::PredictMagnus { level, tau0, model, out } => {
            flags.level = level;
            flags.tau0 = tau0;
            model.apply(&mut flags);
            flags.out = out;
            commands::predict_magnus
        }
        Command::Compare { families, m, at, functional, model, out } => {
            flags.families = (!families.is_empty()).then_some(families);
            flags.m = m;
            flags.at = at;
            flags.functional = functional;
            model.apply(&mut flags);
            flags.out = out;
            commands::compare
        }
    };
    let cfg = flags.over(file).with_env_seed()?;
    action(&cfg)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
