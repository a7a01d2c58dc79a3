use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use byzfdr_cli::config::{resolve, Layer};
use byzfdr_cli::{output, presets, simulate, THREADS_ENV};
use byzfdr_core::bounds::BoundKind;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "byzfdr", version, about = "Distributed BH testing under Byzantine p-value attacks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or configured experiment and write results as CSV.
    Simulate {
        #[arg(long)]
        preset: Option<String>,
        /// Flat key-value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// none, oracle, bh-classifier, enhanced or shuffling.
        #[arg(long)]
        attack: Option<String>,
        /// none, resample or remove.
        #[arg(long)]
        defense: Option<String>,
        /// Results file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one CSV row per trial here.
        #[arg(long)]
        dump_trials: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// List the built-in presets.
    Presets,
    /// Evaluate bound estimators from a trial dump.
    Bound {
        /// Trial dump written by `simulate --dump-trials`.
        trials_csv: PathBuf,
        /// Bound kind; repeat for several.
        #[arg(long = "kind", required = true)]
        kinds: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().with_context(|| format!("{THREADS_ENV}={raw} is not a count"))?;
    if threads == 0 {
        bail!("{THREADS_ENV} must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Presets => {
            print!("{}", presets::listing());
        }
        Command::Simulate { preset, config, trials, seed, attack, defense, out, dump_trials, format: Format::Csv } => {
            let flags = Layer { preset, trials, seed, attack, defense, ..Default::default() };
            let file = config.as_deref().map(Layer::from_file).transpose()?.unwrap_or_default();
            let plan = resolve(&flags.over(file))?;
            configure_threads()?;
            let dump = dump_trials
                .map(|p| File::create(&p).map(BufWriter::new).with_context(|| format!("creating {}", p.display())))
                .transpose()?;
            simulate(&plan, output(out.as_ref())?, dump)?;
        }
        Command::Bound { trials_csv, kinds, out, format: Format::Csv } => {
            let kinds = kinds.iter().map(|k| k.parse::<BoundKind>()).collect::<Result<Vec<_>, _>>()?;
            let input = File::open(&trials_csv).with_context(|| format!("opening {}", trials_csv.display()))?;
            output::bounds_from_dump(input, &kinds, output(out.as_ref())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
