// SPDX-License-Identifier: Apache-2.0

//! `lightcone run <config.json>` and `lightcone describe <model.json>`.

mod config;
mod describe;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "lightcone", version, about = "Light-cone certificates for Lindblad dynamics on lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite of an experiment config.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for suite items.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Summarize a model file.
    Describe { model: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, seed, jobs } => config::load(&config)
            .and_then(|exp| run::run(&exp, &run::RunOptions { out, seed, jobs }))
            .map(run::Status::code),
        Command::Describe { model } => describe::describe_path(&model).map(|text| {
            print!("{text}");
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
