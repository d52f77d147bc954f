//! `pansharp` — command-line front end for the pansharpening laboratory.
//!
//! Five subcommands cover the full workflow: `simulate` renders a synthetic
//! scene, `fuse` sharpens a multispectral raster with a panchromatic band,
//! `assess` scores fusion results against a reference, `classify` runs the
//! two-step impervious-surface protocol, and `benchmark` chains everything
//! into one comparison run. Every command writes a JSON manifest next to its
//! outputs recording the inputs and parameters that produced them.

mod commands;
mod manifest;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "pansharp",
    version,
    about = "Pansharpening laboratory: synthetic scenes, image fusion, quality metrics, and impervious-surface classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic urban scene: reference, multispectral, panchromatic, labels, samples
    Simulate(commands::simulate::SimulateArgs),
    /// Fuse a multispectral raster with a panchromatic raster
    Fuse(commands::fuse::FuseArgs),
    /// Score fused rasters against a reference and print a comparison table
    Assess(commands::assess::AssessArgs),
    /// Train and evaluate the two-step impervious-surface classifier
    Classify(commands::classify::ClassifyArgs),
    /// Run the full comparison: five fusions, quality tables, classification
    Benchmark(commands::benchmark::BenchmarkArgs),
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate::run(&args),
        Command::Fuse(args) => commands::fuse::run(&args),
        Command::Assess(args) => commands::assess::run(&args),
        Command::Classify(args) => commands::classify::run(&args),
        Command::Benchmark(args) => commands::benchmark::run(&args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
