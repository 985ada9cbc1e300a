//! The `majorana` command-line tool. Every subcommand prints one JSON
//! document (or CSV for sweeps) that echoes the seed; the same flags and
//! seed always produce the same bytes.

mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

pub use commands::run_command;

#[derive(Debug, Parser)]
#[command(
    name = "majorana",
    version,
    about = "Braids and charge measurements on Majorana modes: games, GHZ checks, protocols and a Bell-test harness"
)]
pub struct Cli {
    /// Seed for every random choice; echoed in the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for enumerations and trials (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Simulator used by subcommands that run programs.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Stabilizer,
    Gaussian,
    Oracle,
}

impl BackendKind {
    pub fn name(&self) -> &'static str {
        match self {
            BackendKind::Stabilizer => "stabilizer",
            BackendKind::Gaussian => "gaussian",
            BackendKind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantum value of the magic-square game and the table self-check.
    MagicSquare {
        /// Exact values only; skip the sampled estimate.
        #[arg(long)]
        exact: bool,
        /// Sampled rounds for the estimate.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Exhaustive classical bound of the magic-square game.
    ClassicalBound,
    /// Four-pair distribution and its local hidden-variable model.
    FourPair,
    /// Parity properties on the stabilizer groups of random accessible states.
    GhzScan {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        min_pairs: usize,
        #[arg(long, default_value_t = 6)]
        max_pairs: usize,
    },
    /// GHZ obstruction for the canonical encoding and the exhaustive encoding scan.
    GhzEncoding {
        #[arg(long, default_value_t = 3)]
        parties: usize,
        /// Modes per party in the exhaustive scan (0 skips it).
        #[arg(long, default_value_t = 6)]
        block: usize,
    },
    /// Teleportation through three Majorana pairs.
    Teleport {
        #[arg(long, value_enum, default_value_t = ScenarioArg::Both)]
        scenario: ScenarioArg,
        /// Sampled runs for the two-sample test (0 skips it).
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Dense coding of two bits and the unassisted capacity check.
    DenseCode {
        #[arg(long, default_value_t = 2)]
        modes: usize,
        #[arg(long, default_value_t = 2)]
        ancilla: usize,
    },
    /// Game value under depolarizing noise.
    NoiseSweep {
        #[arg(long, default_value_t = 51)]
        points: usize,
        /// Monte-Carlo rounds per grid point (0 for exact values only).
        #[arg(long, default_value_t = 0)]
        rounds: u64,
    },
    /// Run one process of the referee / Alice / Bob harness.
    Serve(ServeArgs),
    /// Pre-sample the correlated outcome tapes for quantum-emulated parties.
    SourceGen {
        #[arg(long)]
        rounds: u64,
        #[arg(long)]
        alice_out: PathBuf,
        #[arg(long)]
        bob_out: PathBuf,
    },
    /// Agreement of the three backends on braid / measure programs.
    Crosscheck {
        /// Largest pair count of the exhaustive closure check.
        #[arg(long, default_value_t = 4)]
        pairs: usize,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Pair count of the literal program enumeration.
        #[arg(long, default_value_t = 2)]
        enumeration_pairs: usize,
        #[arg(long, default_value_t = 5)]
        random_pairs: usize,
        #[arg(long, default_value_t = 10_000)]
        random_programs: u64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::MagicSquare { .. } => "magic-square",
            Command::ClassicalBound => "classical-bound",
            Command::FourPair => "four-pair",
            Command::GhzScan { .. } => "ghz-scan",
            Command::GhzEncoding { .. } => "ghz-encoding",
            Command::Teleport { .. } => "teleport",
            Command::DenseCode { .. } => "dense-code",
            Command::NoiseSweep { .. } => "noise-sweep",
            Command::Serve(_) => "serve",
            Command::SourceGen { .. } => "source-gen",
            Command::Crosscheck { .. } => "crosscheck",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Braided,
    Plain,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RoleArg {
    Referee,
    Alice,
    Bob,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Quantum,
    Lhv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    /// Tables winning 8 of the 9 setting pairs.
    Table2,
    /// The best pair of identical tables.
    Identical,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(value_enum)]
    pub role: RoleArg,
    /// Referee: address to listen on.
    #[arg(long, default_value = "127.0.0.1:0")]
    pub bind: String,
    /// Parties: referee address.
    #[arg(long)]
    pub connect: Option<String>,
    /// Referee writes its bound address here; parties read it if `--connect` is absent.
    #[arg(long)]
    pub addr_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub rounds: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Quantum)]
    pub mode: ModeArg,
    /// Per-round timeout.
    #[arg(long, default_value_t = 5000)]
    pub timeout_ms: u64,
    /// Referee: record every message as JSON lines.
    #[arg(long)]
    pub capture: Option<PathBuf>,
    /// Parties in quantum mode: this party's tape.
    #[arg(long)]
    pub tape: Option<PathBuf>,
    /// Parties in LHV mode.
    #[arg(long, value_enum, default_value_t = StrategyArg::Table2)]
    pub strategy: StrategyArg,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or arguments: exit code 2.
    Usage(String),
    /// Anything that went wrong while running: exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<majorana_core::Error> for CliError {
    fn from(e: majorana_core::Error) -> Self {
        use majorana_core::Error as E;
        match e {
            E::Argument(_) | E::Resource(_) | E::Dimension(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<majorana_net::NetError> for CliError {
    fn from(e: majorana_net::NetError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// What a subcommand produced.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub json: Value,
    pub csv: Option<String>,
    /// `false` when the run finished but one of its checks failed.
    pub passed: bool,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match (format, &self.csv) {
            (Format::Csv, Some(csv)) => csv.clone(),
            _ => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
                s.push('\n');
                s
            }
        }
    }
}

/// Applies the global flags and runs the subcommand.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = run_command(cli)?;
    if cli.format == Format::Csv && out.csv.is_none() {
        return Err(CliError::Usage(format!("{} has no CSV output", cli.command.name())));
    }
    Ok(out)
}
