use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use modboat::cli::{presets, run_batch, validate_all, RunOptions, ScenarioConfig};
use modboat::Error;

#[derive(Parser)]
#[command(
    name = "modboat",
    version,
    about = "Simulate a two-body rotating-flipper boat"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunFlags,
    },
    /// Parse and validate a scenario file without running it
    Validate { config: PathBuf },
    /// Built-in scenarios
    Presets {
        #[command(subcommand)]
        command: PresetCommand,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    /// List preset names
    List,
    /// Print a preset's configuration
    Show { name: String },
    /// Run a preset
    Run {
        name: String,
        #[command(flatten)]
        opts: RunFlags,
    },
}

#[derive(Args)]
struct RunFlags {
    /// Output directory (overrides output.dir)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Runs per sweep point (overrides batch.repeats)
    #[arg(long)]
    repeats: Option<usize>,
    /// Fail when any commanded turn never settles
    #[arg(long)]
    strict_settle: bool,
    /// Validate and expand the batch without simulating
    #[arg(long)]
    dry_run: bool,
}

impl From<RunFlags> for RunOptions {
    fn from(f: RunFlags) -> Self {
        RunOptions {
            out_dir: f.out_dir,
            repeats: f.repeats,
            strict_settle: f.strict_settle,
            dry_run: f.dry_run,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::NotSettled { .. } => 3,
        Error::Io(_) => 4,
        _ => 1,
    }
}

fn run(cfg: &ScenarioConfig, flags: RunFlags) -> Result<u8, Error> {
    let opts = RunOptions::from(flags);
    let dry = opts.dry_run;
    let batch = run_batch(cfg, &opts)?;
    if dry {
        let n = validate_all(cfg)?.len();
        println!("{}: {n} sweep point(s) valid, nothing run", cfg.name);
        return Ok(0);
    }
    let mut empty = false;
    for p in &batch.points {
        if !p.description.is_empty() {
            println!("[{}] {}", p.label, p.description);
        }
        print!("{}", p.report.to_text());
        empty |= p.report.is_empty();
    }
    println!("wrote {} file(s)", batch.files.len());
    Ok(if empty { 1 } else { 0 })
}

fn dispatch(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run { config, opts } => run(&ScenarioConfig::load(&config)?, opts),
        Command::Validate { config } => {
            let cfg = ScenarioConfig::load(&config)?;
            let n = validate_all(&cfg)?.len();
            println!("{}: ok ({n} sweep point(s))", cfg.name);
            Ok(0)
        }
        Command::Presets { command } => match command {
            PresetCommand::List => {
                for name in presets::names() {
                    println!("{name}");
                }
                Ok(0)
            }
            PresetCommand::Show { name } => {
                print!("{}", presets::source(&name)?);
                Ok(0)
            }
            PresetCommand::Run { name, opts } => run(&presets::load(&name)?, opts),
        },
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
