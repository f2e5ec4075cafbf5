use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ppmrx_cli::{describe, run_experiment, write_rows, ExperimentConfig, Format, Overrides};

/// Error-probability curves for quantum PPM receivers.
#[derive(Parser)]
#[command(name = "ppmrx", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Noiseless receiver comparison, N from 0 to 2.
    Figure3(Common),
    /// Noisy comparison, N_d = 0.001 and eta = 0.9.
    Figure4a(Common),
    /// Noisy comparison, N_d = 0.1 and eta = 0.9.
    Figure4b(Common),
    /// Bayesian DD slicing against DD, n = 10.
    Figure5a(Common),
    /// Bayesian DD slicing against DD, n = 1000.
    Figure5b(Common),
    /// Describe a receiver.
    Describe { name: String },
    /// Print a preset or experiment file as TOML.
    DumpConfig {
        /// Preset name or path.
        source: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo runs.
    #[arg(long, env = "PPMRX_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Fixed slice count for sliced receivers.
    #[arg(long)]
    slices: Option<usize>,
    /// Largest observation count evaluated by exact enumeration.
    #[arg(long)]
    exact_cap: Option<usize>,
    /// Print the resolved experiment as TOML instead of running it.
    #[arg(long)]
    dump_config: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            trials: self.trials,
            seed: self.seed,
            slices: self.slices,
            exact_cap: self.exact_cap,
            out: self.out.clone(),
            format: self.format,
        }
    }
}

fn sink(path: Option<&PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn execute(config: ExperimentConfig, common: &Common) -> anyhow::Result<bool> {
    let config = common.overrides().apply(config)?;
    if common.dump_config {
        let mut out = sink(config.output.path.as_ref())?;
        out.write_all(config.to_toml()?.as_bytes())?;
        out.flush()?;
        return Ok(true);
    }
    let rows = run_experiment(&config, common.threads);
    let mut out = sink(config.output.path.as_ref())?;
    write_rows(&rows, config.output.format, &mut out)?;
    out.flush()?;
    let failed = rows.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        eprintln!("{failed} of {} rows failed", rows.len());
    }
    Ok(failed == 0)
}

fn main_inner() -> anyhow::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, common } => execute(ExperimentConfig::load(&config)?, &common),
        Command::Figure3(c) => execute(ppmrx_cli::preset("figure3")?, &c),
        Command::Figure4a(c) => execute(ppmrx_cli::preset("figure4a")?, &c),
        Command::Figure4b(c) => execute(ppmrx_cli::preset("figure4b")?, &c),
        Command::Figure5a(c) => execute(ppmrx_cli::preset("figure5a")?, &c),
        Command::Figure5b(c) => execute(ppmrx_cli::preset("figure5b")?, &c),
        Command::Describe { name } => {
            println!("{}", describe(&name)?);
            Ok(true)
        }
        Command::DumpConfig { source, out } => {
            let text = ExperimentConfig::resolve(&source)?.to_toml()?;
            let mut w = sink(out.as_ref())?;
            w.write_all(text.as_bytes())?;
            w.flush()?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
