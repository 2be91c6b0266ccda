use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use probe_forge::pipeline::{cmd_generate, cmd_mock_bundle, cmd_probe};
use probe_forge::report::cmd_report;
use probe_forge::Error;

/// Probing datasets and linear probes for pretrained models of Java code.
#[derive(Parser)]
#[command(name = "probe-forge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the eight probing datasets from a corpus.
    Generate {
        /// Directory of .java files or a JSONL file of {"id","code"} records.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Keep at most this many snippets after preprocessing.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Fit probes on every layer of an embedding bundle.
    Probe {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        /// Results file (JSONL); a run manifest is written beside it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render markdown and CSV tables from one or more results files.
    Report {
        #[arg(required = true)]
        results: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a random-noise bundle for the variants of a dataset directory.
    MockBundle {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        layers: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Generate {
            corpus,
            out,
            seed,
            limit,
        } => {
            let m = cmd_generate(&corpus, &out, seed, limit)?;
            for (task, entry) in &m.tasks {
                println!("{task}: {} examples -> {}", entry.records, entry.file);
            }
            println!(
                "{} snippets, {} variants, {} skipped",
                m.snippets,
                m.variants.records,
                m.skipped.total()
            );
        }
        Command::Probe { data, bundle, out } => {
            let results = cmd_probe(&data, &bundle, &out)?;
            println!("{} result rows -> {}", results.len(), out.display());
        }
        Command::Report { results, out } => {
            let report = cmd_report(&results, &out)?;
            println!("{} tasks reported -> {}", report.best.len(), out.display());
        }
        Command::MockBundle {
            data,
            dim,
            layers,
            seed,
            out,
        } => {
            let bundle = cmd_mock_bundle(&data, dim, layers, seed, &out)?;
            println!(
                "{} records, digest {} -> {}",
                bundle.records().len(),
                bundle.digest(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
