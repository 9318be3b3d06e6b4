use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hardy_sobolev_cli::{emit_plot_data, run, table_exit_code, CliError, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "hardy-sobolev", version, about = "Numerical experiments with discrete Hajlasz–Sobolev spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Canonical vs minimal gradient norms over the corpus
    Equivalence(Shared),
    /// Extension-norm ratios from a Whitney plan
    Extension(Shared),
    /// Hardy quotients, fatness probes and the divergence curve
    Hardy(Shared),
    /// Condenser capacities and their dilation scaling
    Capacity(Shared),
    /// Hausdorff content bounds of target sets
    Content(Shared),
    /// Forward-difference decomposition of mean-zero fields
    Decompose(Shared),
    /// The logarithmic counterexample to the Hardy inequality
    Counterexample(Shared),
}

#[derive(Args)]
struct Shared {
    /// JSON experiment config; defaults apply to missing fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the CSV and its manifest
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Single-threaded, so floating-point reductions happen in a fixed order
    #[arg(long)]
    deterministic: bool,
}

fn execute(experiment: Experiment, args: &Shared) -> Result<i32, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let threads = if args.deterministic { Some(1) } else { args.threads };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let table = run(experiment, &cfg)?;
    let manifest = emit_plot_data(&table, experiment.name(), &args.out)?;
    eprintln!(
        "{}: {} rows -> {} (manifest v{})",
        experiment.name(),
        manifest.rows,
        args.out.join(&manifest.csv).display(),
        manifest.version
    );
    Ok(table_exit_code(&table))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match &cli.command {
        Command::Equivalence(a) => (Experiment::Equivalence, a),
        Command::Extension(a) => (Experiment::Extension, a),
        Command::Hardy(a) => (Experiment::Hardy, a),
        Command::Capacity(a) => (Experiment::Capacity, a),
        Command::Content(a) => (Experiment::Content, a),
        Command::Decompose(a) => (Experiment::Decompose, a),
        Command::Counterexample(a) => (Experiment::Counterexample, a),
    };
    match execute(experiment, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
