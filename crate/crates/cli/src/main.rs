use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use qthermo_cli::config::{read_config_text, Experiment, OutputFormat, RunConfig};
use qthermo_cli::error::{CliError, EXIT_OK};
use qthermo_cli::run::run;
use qthermo_cli::{emit, Emit};

/// Steady states, forces and heat currents of thermophoresis models.
///
/// Exit status: 0 on success, 1 on I/O errors, 2 on invalid configuration,
/// 3 when a solver fails (non-unique steady state, accuracy loss).
#[derive(Debug, Parser)]
#[command(name = "qthermo", version)]
struct Cli {
    /// TOML configuration, or a CSV written by an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; a directory for `figure2`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress diagnostics on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Override a configuration key after the file is read, e.g. `--set g=1.3`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Record wall-clock time in the metadata (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Lambda three-level system: closed forms next to the numerical steady state.
    Lambda,
    /// V three-level system.
    Vee,
    /// Site populations of a chain whose ends sit at different temperatures.
    Chain,
    /// Finite-capacity baths warmed by clamped Lambda populations.
    Dufour,
    /// Chain populations over a grid of tunnelling strengths and end temperatures.
    Sweep,
    /// The four default chain panels, one table each.
    Figure2,
    /// Whatever `run.experiment` in the configuration names.
    Run,
}

impl Command {
    fn experiment(self) -> Option<Experiment> {
        Some(match self {
            Command::Lambda => Experiment::Lambda,
            Command::Vee => Experiment::Vee,
            Command::Chain => Experiment::Chain,
            Command::Dufour => Experiment::Dufour,
            Command::Sweep => Experiment::Sweep,
            Command::Figure2 => Experiment::Figure2,
            Command::Run => return None,
        })
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QTHERMO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "QTHERMO_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_threads()?;
    let file = cli.config.as_deref().map(read_config_text).transpose()?;
    let cfg = RunConfig::resolve(file, &cli.set, cli.command.experiment())?;
    if !cli.quiet {
        for key in &cfg.ignored {
            eprintln!(
                "note: `{key}` is not used by the {} experiment",
                cfg.experiment
            );
        }
    }
    let format = match cli.format {
        Some(Format::Csv) => OutputFormat::Csv,
        Some(Format::Text) => OutputFormat::Text,
        None => cfg.output_format()?,
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.text("output.path").map(PathBuf::from));

    let start = Instant::now();
    let output = run(&cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    if !cli.quiet {
        for note in &output.notes {
            eprintln!("warning: {note}");
        }
    }
    let written = emit(
        &cfg,
        output,
        &Emit {
            out,
            format,
            wall_clock: cli.timing.then_some(elapsed),
        },
    )?;
    if !cli.quiet {
        for path in written {
            eprintln!("wrote {}", path.display());
        }
        eprintln!("{} finished in {elapsed:.2} s", cfg.experiment);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
