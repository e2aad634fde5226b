mod commands;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tubular_core::cover::{CoverConfig, CoverError, DEFAULT_EXACT_THRESHOLD};
use tubular_core::dilation::DilationError;
use tubular_core::equitable::{EquitableError, SearchParams};
use tubular_core::walls::WallError;

#[derive(Parser, Debug)]
#[command(
    name = "tubular",
    version,
    about = "Dimension of cube complexes dual to walls in tubular groups"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate the space and check balance and finite index of the equitable set.
    Check { input: PathBuf },
    /// Enumerate intersection points and build the immersed walls.
    Walls { input: PathBuf },
    /// Classify every wall as dilated or not, and the cube complex as finite or infinite dimensional.
    Classify { input: PathBuf },
    /// Expand a ball of the universal cover and measure crossing translates of one wall.
    Simulate(SimulateArgs),
    /// Search for equitable sets on the space of the input document.
    Search(SearchArgs),
    /// Build the spiral words and check that they are equal.
    Distort {
        /// Index of the words.
        n: u32,
    },
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub radius: u32,
    #[arg(long, default_value_t = 16)]
    pub window: i64,
    /// Attaching lines followed per edge end (|q| <= this).
    #[arg(long, default_value_t = 1)]
    pub attach_window: i64,
    #[arg(long, default_value_t = CoverConfig::DEFAULT_MAX_VERTICES)]
    pub max_vertices: usize,
    #[arg(long, default_value_t = DEFAULT_EXACT_THRESHOLD)]
    pub exact_threshold: usize,
    /// Wall to translate, as `W3` or `3`.
    #[arg(long, default_value = "W0")]
    pub seed_wall: String,
    /// Circle of the seed wall used at the root, as printed by `walls` (e.g. `v/1`).
    #[arg(long)]
    pub seed_circle: Option<String>,
    /// Write the REGULAR crossing graph as an adjacency list.
    #[arg(long)]
    pub export_adjacency: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    pub input: PathBuf,
    /// Largest absolute coordinate of a circle vector.
    #[arg(long, default_value_t = 2)]
    pub bound: u32,
    /// Most circles per vertex, counted with multiplicity.
    #[arg(long, default_value_t = 2)]
    pub max_circles: u32,
    #[arg(long)]
    pub require_finite_index: bool,
    #[arg(long, default_value_t = SearchParams::DEFAULT_MAX_SEARCH_SPACE)]
    pub max_search_space: u128,
}

/// A limit the user asked for (or defaulted to) was exceeded.
#[derive(Debug)]
pub struct GuardViolation(pub String);

impl fmt::Display for GuardViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GuardViolation {}

/// A command ran to completion but the input failed its checks; the report
/// has already been written.
#[derive(Debug)]
pub struct Rejected;

impl fmt::Display for Rejected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("input rejected")
    }
}

impl std::error::Error for Rejected {}

fn wall_guard(e: &WallError) -> bool {
    match e {
        WallError::TooManyPoints { .. } | WallError::TooManyMatchings { .. } => true,
        WallError::Equitable(e) => equitable_guard(e),
        _ => false,
    }
}

fn equitable_guard(e: &EquitableError) -> bool {
    matches!(e, EquitableError::SearchTooLarge { .. })
}

fn is_guard(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        if cause.is::<GuardViolation>() {
            return true;
        }
        if let Some(e) = cause.downcast_ref::<CoverError>() {
            return match e {
                CoverError::Guard { .. } | CoverError::TooLarge => true,
                CoverError::Walls(w) => wall_guard(w),
                _ => false,
            };
        }
        if let Some(e) = cause.downcast_ref::<DilationError>() {
            return matches!(e, DilationError::Walls(w) if wall_guard(w));
        }
        if let Some(e) = cause.downcast_ref::<WallError>() {
            return wall_guard(e);
        }
        cause
            .downcast_ref::<EquitableError>()
            .is_some_and(equitable_guard)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Check { input } => commands::check(&input, cli.format),
        Command::Walls { input } => commands::walls(&input, cli.format),
        Command::Classify { input } => commands::classify(&input, cli.format),
        Command::Simulate(args) => commands::simulate(&args, cli.format),
        Command::Search(args) => commands::search(&args, cli.format),
        Command::Distort { n } => commands::distort(n, cli.format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<Rejected>() => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_guard(&e) { 2 } else { 1 })
        }
    }
}
