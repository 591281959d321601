//! `tenun`: batch front end of the weaving workbench.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, EXIT_VALIDATION};

#[derive(Debug, Parser)]
#[command(name = "tenun", version, about = "Weaving automata: generate, measure, rasterize and draft patterns")]
struct Cli {
    /// Report failures as a JSON object on stderr.
    #[arg(long, global = true)]
    json_errors: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a rule into a pattern document.
    Generate(GenerateArgs),
    /// Measure all 256 elementary rules.
    Sweep(SweepArgs),
    /// Print the metrics of a pattern document.
    Metrics(MetricsArgs),
    /// Turn an image (PGM, PPM or PNG) into a pattern document.
    Rasterize(RasterizeArgs),
    /// Write the loom draft (WIF) and/or a cloth preview (PNG) of a document.
    Draft(DraftArgs),
    /// Run the HTTP design service.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitKind {
    /// One state-1 cell in the middle of an otherwise zero row.
    Center,
    /// Bernoulli cells drawn from `--seed` and `--density`.
    Random,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Elementary rule number 0..=255.
    #[arg(long, conflicts_with = "table", required_unless_present = "table")]
    rule: Option<u32>,
    /// Rule id as a hex string; needs `--states`, `--radius`, `--window`.
    #[arg(long)]
    table: Option<String>,
    #[arg(long, short = 'k', default_value_t = 2)]
    states: u8,
    #[arg(long, default_value_t = 1)]
    radius: usize,
    #[arg(long, default_value_t = 1)]
    window: usize,
    #[arg(long, default_value_t = 101)]
    width: usize,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = InitKind::Center)]
    init: InitKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// `wrap` or `fixedN` (cells beyond the edge hold state N).
    #[arg(long, default_value = "wrap")]
    boundary: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 101)]
    width: usize,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4.0)]
    h_max: f64,
    #[arg(long, default_value_t = 5)]
    max_float: usize,
    #[arg(long, default_value_t = 3)]
    block_len: usize,
    /// Defaults to the extension of `--out`, else CSV.
    #[arg(long, value_enum)]
    format: Option<TableFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    document: PathBuf,
    /// Print the metrics object as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodKind {
    FixedThreshold,
    Otsu,
    OrderedDither,
    ErrorDiffusion,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolarityArg {
    DarkWarpUp,
    LightWarpUp,
}

#[derive(Debug, Args)]
struct RasterizeArgs {
    image: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodKind::ErrorDiffusion)]
    method: MethodKind,
    /// Threshold for `fixed-threshold`.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Bayer matrix side for `ordered-dither`.
    #[arg(long, default_value_t = 4)]
    matrix: usize,
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[arg(long, value_enum, default_value_t = PolarityArg::DarkWarpUp)]
    polarity: PolarityArg,
    /// Number of states in the output grid.
    #[arg(long, default_value_t = 2)]
    levels: u8,
    /// Break over-long floats with stitch points.
    #[arg(long)]
    repair: bool,
    #[arg(long, default_value_t = 4.0)]
    h_max: f64,
    #[arg(long, default_value_t = 5)]
    max_float: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DraftArgs {
    document: PathBuf,
    #[arg(long)]
    wif: Option<PathBuf>,
    #[arg(long)]
    png: Option<PathBuf>,
    /// Cell size of the PNG preview in pixels.
    #[arg(long, default_value_t = 4)]
    cellpx: usize,
    /// Shafts available on the loom.
    #[arg(long, default_value_t = tenun_core::draft::DEFAULT_SHAFT_CAPACITY)]
    capacity: usize,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Directory for JSON session snapshots.
    #[arg(long)]
    state_dir: Option<PathBuf>,
    /// Browser origin allowed by CORS; any origin when omitted.
    #[arg(long)]
    cors_origin: Option<String>,
}

fn report(err: &CliError, json: bool) -> ExitCode {
    if json {
        eprintln!("{}", err.to_json());
    } else {
        eprintln!("tenun: {err}");
    }
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if std::env::args().any(|a| a == "--json-errors") {
                let rendered = e.to_string();
                let message = rendered.lines().next().unwrap_or_default().trim_start_matches("error: ");
                return report(&CliError::Usage(message.to_string()), true);
            }
            let _ = e.print();
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Metrics(args) => commands::metrics(args),
        Command::Rasterize(args) => commands::rasterize(args),
        Command::Draft(args) => commands::draft(args),
        Command::Serve(args) => commands::serve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e, cli.json_errors),
    }
}
