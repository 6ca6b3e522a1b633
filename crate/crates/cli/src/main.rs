use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use qgrad_cli::{
    cmd_bench, cmd_plan, cmd_run, cmd_verify, output_path, write_json, Command, CommandOptions,
    ExperimentConfig, ResultRecord, OUT_DIR_ENV,
};
use qgrad_core::analysis::DifferenceScheme;
use qgrad_core::oracle::GroupMode;
use qgrad_core::sparse::PhaseVariant;

#[derive(Parser)]
#[command(name = "qgrad")]
#[command(about = "Simulate and verify the two-oracle-call quantum gradient estimator")]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(Subcommand)]
enum Commands {
    /// Choose parameters for an accuracy target and check the five inequalities
    Plan(CommonArgs),
    /// Execute the estimator, record the outcome distribution and sample it
    Run(CommonArgs),
    /// Execute the estimator and check every bound of the success guarantee
    Verify(CommonArgs),
    /// Compare quantum and classical oracle calls over the config's sweep
    Bench {
        #[command(flatten)]
        common: CommonArgs,

        /// Use central differences (2p calls) for the classical column
        #[arg(long)]
        central: bool,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Path to an experiment config, or to a saved result record
    #[arg(long)]
    config: PathBuf,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    shots: Option<u64>,

    /// Range-register group: "modular" or "xor"
    #[arg(long, value_parser = parse_group_mode)]
    group_mode: Option<GroupMode>,

    /// Phase rotation: "direct" or "per-bit"
    #[arg(long, value_parser = parse_phase_variant)]
    phase_variant: Option<PhaseVariant>,

    /// Largest allowed p·n for the dense grid register
    #[arg(long)]
    max_grid_bits: Option<u32>,

    /// Output file for the structured result
    #[arg(long)]
    out: Option<PathBuf>,

    /// Drop outcomes at or below this probability from the distribution
    #[arg(long)]
    prob_floor: Option<f64>,

    /// Record wall-clock timings (records are then no longer reproducible)
    #[arg(long)]
    timings: bool,

    /// Default directory for result files
    #[arg(long, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
}

fn parse_group_mode(s: &str) -> Result<GroupMode, String> {
    s.parse().map_err(|e: qgrad_core::Error| e.to_string())
}

fn parse_phase_variant(s: &str) -> Result<PhaseVariant, String> {
    s.parse().map_err(|e: qgrad_core::Error| e.to_string())
}

impl CommonArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(shots) = self.shots {
            config.shots = shots;
        }
        if let Some(mode) = self.group_mode {
            config.group_mode = mode;
        }
        if let Some(variant) = self.phase_variant {
            config.phase_variant = variant;
        }
        if let Some(bits) = self.max_grid_bits {
            config.max_grid_bits = bits;
        }
        if let Some(floor) = self.prob_floor {
            config.prob_floor = floor;
        }
        config.validate()?;
        Ok(config)
    }

    fn destination(&self, command: Command, seed: u64) -> Option<PathBuf> {
        output_path(command, seed, self.out.as_deref(), self.out_dir.as_deref())
    }
}

/// Writes to stdout, treating a closed pipe (as with `| head`) as success.
fn to_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit(record: &ResultRecord, dest: Option<&Path>) -> Result<()> {
    match dest {
        Some(path) => {
            write_json(path, record)?;
            eprintln!(
                "{}: {} -> {}",
                record.command.name(),
                if record.passed() { "ok" } else { "FAILED" },
                path.display()
            );
        }
        None => to_stdout(&format!("{}\n", record.to_json()?))?,
    }
    for failure in &record.failures {
        eprintln!("failure: {failure}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Commands::Plan(args) => single(&args, Command::Plan),
        Commands::Run(args) => single(&args, Command::Run),
        Commands::Verify(args) => single(&args, Command::Verify),
        Commands::Bench { common, central } => {
            let config = common.load()?;
            let opts = CommandOptions {
                timings: common.timings,
                difference: if central {
                    DifferenceScheme::Central
                } else {
                    DifferenceScheme::Forward
                },
            };
            let output = cmd_bench(&config, &opts)?;
            to_stdout(&output.table)?;
            match common.destination(Command::Bench, config.seed) {
                Some(path) => {
                    write_json(&path, &output.records).context("writing bench records")?;
                    eprintln!(
                        "bench: {} records -> {}",
                        output.records.len(),
                        path.display()
                    );
                }
                None => eprintln!(
                    "bench: structured records not written (pass --out or set {OUT_DIR_ENV})"
                ),
            }
            for (i, record) in output.records.iter().enumerate() {
                for failure in &record.failures {
                    eprintln!("failure in entry {i}: {failure}");
                }
            }
            Ok(output.records.iter().all(ResultRecord::passed))
        }
    }
}

fn single(args: &CommonArgs, command: Command) -> Result<bool> {
    let config = args.load()?;
    let opts = CommandOptions {
        timings: args.timings,
        ..CommandOptions::default()
    };
    let record = match command {
        Command::Plan => cmd_plan(&config, &opts)?,
        Command::Run => cmd_run(&config, &opts)?,
        Command::Verify => cmd_verify(&config, &opts)?,
        Command::Bench => unreachable!("bench has its own path"),
    };
    emit(&record, args.destination(command, config.seed).as_deref())?;
    Ok(record.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
