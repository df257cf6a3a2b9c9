//! `symrnn`: generate measurement data for the XY chain, train recurrent or
//! RBM reconstructions, evaluate them and explore their loss landscape.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 numerical
//! failure, 4 out-of-sector sample in u1 training, 5 missing input for a
//! requested metric, 6 degenerate landscape plane.

mod commands;
mod error;
mod manifest;
mod options;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use options::{EvalOptions, GenDataOptions, LandscapeOptions, SampleOptions, TrainOptions};

#[derive(Parser)]
#[command(name = "symrnn", version = manifest::VERSION, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the chain exactly and draw a measurement dataset from |ψ|².
    GenData(GenDataOptions),
    /// Train an RNN, U(1)-RNN or RBM on a dataset.
    Train(TrainOptions),
    /// Print one metrics row for a checkpoint.
    Eval(EvalOptions),
    /// Loss surface on a random plane through the final checkpoint, plus the
    /// projected training path.
    Landscape(LandscapeOptions),
    /// Draw samples from a checkpoint into a dataset file.
    Sample(SampleOptions),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenData(o) => commands::gen_data(o),
        Command::Train(o) => commands::train(o),
        Command::Eval(o) => commands::eval(o),
        Command::Landscape(o) => commands::landscape(o),
        Command::Sample(o) => commands::sample(o),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
