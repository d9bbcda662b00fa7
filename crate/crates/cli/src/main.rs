//! `tradelab`: model evaluation, search simulation, synthetic customs data,
//! import-cost shocks, panel regressions and supplier-name cleaning.
//!
//! Exit codes: 0 on success, 2 on usage or configuration errors (nothing is
//! written), 1 when a run fails.

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "tradelab", version, about = "Quality, supplier search and import-cost shock toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags every subcommand accepts.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Config file of `key = value` lines with dotted keys
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one config key; repeatable, applied after the config file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Seed for every random draw of the run
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads, 0 for one per core
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub threads: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve every line on a grid of firms and supplier efficiencies
    ModelEval {
        #[command(flatten)]
        common: Common,
    },
    /// Export-scope and search-threshold maps over (z, xi)
    Heatmap {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a cohort of firms searching for suppliers
    SearchSim {
        #[command(flatten)]
        common: Common,
    },
    /// Generate a synthetic customs corpus
    Gen {
        #[command(flatten)]
        common: Common,
    },
    /// Build firm-year import-cost shocks and their summary statistics
    Shocks {
        #[command(flatten)]
        common: Common,
        /// Corpus directory holding imports.csv
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        /// Rest-of-world prices (product_hs6,source_country,year,price)
        #[arg(long, value_name = "FILE")]
        world_prices: Option<PathBuf>,
    },
    /// Run one panel regression described by a spec file
    Regress {
        #[command(flatten)]
        common: Common,
        /// Regression spec, `regress.*` keys
        #[arg(long, value_name = "FILE")]
        spec: PathBuf,
        /// Corpus directory
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        /// Precomputed shocks.csv; built from the corpus when absent
        #[arg(long, value_name = "FILE")]
        shocks: Option<PathBuf>,
        /// Country-year controls (country,year,<name>...)
        #[arg(long, value_name = "FILE")]
        covariates: Option<PathBuf>,
    },
    /// Cluster spelling variants of supplier names within each importer
    CleanNames {
        #[command(flatten)]
        common: Common,
        /// Names to clean (firm_id,supplier_raw,value_usd)
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Importer names (firm_id,firm_name)
        #[arg(long, value_name = "FILE")]
        importers: Option<PathBuf>,
        /// Alias list, one ALIAS=CANONICAL per line
        #[arg(long, value_name = "FILE")]
        aliases: Option<PathBuf>,
        /// Legal-suffix tokens, one per line
        #[arg(long, value_name = "FILE")]
        suffixes: Option<PathBuf>,
        /// Country-name tokens, one per line
        #[arg(long, value_name = "FILE")]
        countries: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(commands::Failure::Usage(m)) => {
            eprintln!("error: {m}");
            eprintln!("Try 'tradelab --help' for usage.");
            ExitCode::from(2)
        }
        Err(commands::Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
