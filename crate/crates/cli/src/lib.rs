//! Command-line front end for C2LSE experiments.

pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use commands::TruthSource;

#[derive(Debug, Parser)]
#[command(name = "c2lse", version, about = "Confidence-based continuous level set estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override a config key, e.g. `--set epsilon=0.05 --set search.n_restarts=4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every configured seed and write traces, summaries and charts.
    Run(ConfigArgs),
    /// Repeat the run for each ε.
    SweepEpsilon {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.05,0.1,0.2")]
        epsilons: Vec<f64>,
    },
    /// Grid-restricted LSE against continuous C2LSE.
    GridCompare {
        #[command(flatten)]
        args: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_value = "10x10,30x30,100x100")]
        grids: Vec<String>,
    },
    /// Write the ground-truth grid of a problem or dataset.
    GenTruth {
        #[arg(long, conflicts_with = "data")]
        problem: Option<String>,
        #[arg(long, requires_all = ["point_columns", "value_column", "threshold"])]
        data: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        point_columns: Vec<String>,
        #[arg(long)]
        value_column: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run a recorded trace and check the convergence inequalities.
    Diagnose {
        #[arg(long)]
        trace: PathBuf,
        /// Defaults to `resolved_config.toml` beside the trace.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(a) => commands::run(&a.config, &a.overrides, &a.out).map(drop),
        Command::SweepEpsilon { args, epsilons } => commands::sweep(&args.config, &args.overrides, &epsilons, &args.out),
        Command::GridCompare { args, grids } => {
            let shapes = grids.iter().map(|g| commands::parse_grid_shape(g)).collect::<Result<Vec<_>>>()?;
            commands::compare_grids(&args.config, &args.overrides, &shapes, &args.out)
        }
        Command::GenTruth {
            problem,
            data,
            point_columns,
            value_column,
            threshold,
            out,
        } => {
            let source = match (problem, data) {
                (Some(name), None) => TruthSource::Problem(name),
                (None, Some(path)) => TruthSource::Data {
                    path,
                    point_columns,
                    value_column: value_column.unwrap_or_default(),
                    threshold: threshold.unwrap_or_default(),
                },
                _ => bail!("gen-truth needs exactly one of --problem or --data"),
            };
            commands::gen_truth(&source, &out).map(drop)
        }
        Command::Diagnose { trace, config, out } => commands::diagnose(&trace, config.as_deref(), &out).map(drop),
    }
}

/// Single-line error report: `error kind=<tag> message="<text>"`.
pub fn error_line(err: &anyhow::Error) -> String {
    let kind = err
        .chain()
        .find_map(|e| e.downcast_ref::<c2lse::Error>())
        .map_or("cli", c2lse::Error::kind);
    format!("error kind={kind} message={:?}", format!("{err:#}"))
}
