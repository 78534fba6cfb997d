//! `heatagg`: synthesise or load a building stock, compress it into
//! representative buildings and geographical groups, optimise the heat supply
//! and map the selected configurations back onto the buildings.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heatagg_core::clustering::GroupingMethod;
use heatagg_core::geodata::Layout;
use heatagg_core::pipeline::RunConfig;
use heatagg_core::{Error, ErrorClass};

#[derive(Parser)]
#[command(
    name = "heatagg",
    version,
    about = "Building-stock aggregation for heat supply planning"
)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for data generation, clustering and search
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; also where later commands look for earlier artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set k_reps=7`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Restrict to these grouping methods (repeatable).
    #[arg(long = "method", global = true)]
    methods: Vec<GroupingMethod>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write a synthetic dataset and weather year.
    Synth {
        /// Number of buildings
        #[arg(short = 'n', long)]
        n_buildings: Option<usize>,
        /// `grid` or `two_districts`
        #[arg(long)]
        layout: Option<Layout>,
    },
    /// Solar weights, energy features and their histograms.
    Features,
    /// Building categories and geographical groups per method.
    Cluster,
    /// Variables and line lengths over the (k_reps, k_groups) grid.
    Scan,
    /// NSGA-II over the compressed model of every clustered method.
    Optimize,
    /// Filter archives, decompress and compare methods.
    Analyze,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth { .. } => "synth",
            Command::Features => "features",
            Command::Cluster => "cluster",
            Command::Scan => "scan",
            Command::Optimize => "optimize",
            Command::Analyze => "analyze",
        }
    }
}

fn load_config(cli: &Cli) -> heatagg_core::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("`--set {o}` is not KEY=VALUE")))?;
        config.set(k, v)?;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if !cli.methods.is_empty() {
        config.methods = cli.methods.clone();
    }
    if let Command::Synth { n_buildings, layout } = cli.command {
        if let Some(n) = n_buildings {
            config.n_buildings = n;
        }
        if let Some(l) = layout {
            config.layout = l;
        }
    }
    config.validate()?;
    Ok(config)
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Validation => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::EmptyResult => 4,
        ErrorClass::Io => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = load_config(&cli).and_then(|config| commands::run(cli.command.name(), &cli.command, &config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
