mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use commands::{EvaluateArgs, ExplainArgs, GenDatasetArgs, GenModelArgs, OracleArgs};
use manifest::{manifest_for, ManifestWriter};

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

/// Shapley-value node importance for graph neural network predictions.
#[derive(Debug, Parser)]
#[command(name = "graphext", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset.
    GenDataset(GenDatasetArgs),
    /// Create a seeded model from an architecture descriptor.
    GenModel(GenModelArgs),
    /// Explain one prediction.
    Explain(ExplainArgs),
    /// Sweep fidelity over sparsity levels for a dataset.
    Evaluate(EvaluateArgs),
    /// Check exact against expected sampler values on a small game.
    Oracle(OracleArgs),
}

fn exit_code(e: &graphext::Error) -> u8 {
    if e.is_capacity() {
        EXIT_CAPACITY
    } else if e.is_io() {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRAPHEXT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };

    let (name, params, inputs, manifest_path): (&str, _, Vec<PathBuf>, Option<PathBuf>) = match &cli.command {
        Command::GenDataset(a) => ("gen-dataset", commands::parameters(a), vec![], Some(a.out.join("manifest.json"))),
        Command::GenModel(a) => {
            ("gen-model", commands::parameters(a), a.arch.iter().cloned().collect(), Some(manifest_for(&a.out)))
        }
        Command::Explain(a) => {
            ("explain", commands::parameters(a), vec![a.model.clone(), a.graph.clone()], Some(manifest_for(&a.out)))
        }
        Command::Evaluate(a) => {
            ("evaluate", commands::parameters(a), vec![a.model.clone(), a.dataset.clone()], Some(manifest_for(&a.out)))
        }
        Command::Oracle(a) => {
            ("oracle", commands::parameters(a), a.fixture.iter().cloned().collect(), a.out.as_deref().map(manifest_for))
        }
    };
    let writer = ManifestWriter::start(name, params, inputs);

    let result = match &cli.command {
        Command::GenDataset(a) => commands::gen_dataset(a),
        Command::GenModel(a) => commands::gen_model(a),
        Command::Explain(a) => commands::explain(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Oracle(a) => commands::oracle(a),
    };

    let (outputs, failure) = match &result {
        Ok(outputs) => (outputs.clone(), None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    if let Some(path) = manifest_path {
        if let Err(e) = writer.finish(&path, outputs, failure) {
            error!("could not write manifest {}: {e}", path.display());
            if result.is_ok() {
                return ExitCode::from(EXIT_IO);
            }
        }
    }
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
