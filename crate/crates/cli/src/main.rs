//! `refined`: fit feature maps, render images, generate synthetic data and
//! evaluate predictions.

mod eval;
mod fit;
mod io;
mod synth;
mod transform;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use refined::{Error, ErrorCategory};

#[derive(Parser, Debug)]
#[command(name = "refined", version, about = "Map tabular features onto 2-D images")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log progress to standard error (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a feature-to-pixel map and write it as a REFINED-MAP file.
    Fit(fit::FitArgs),
    /// Render per-sample images from a table and a fitted map.
    Transform(transform::TransformArgs),
    /// Generate the correlated-feature synthetic benchmark.
    Synth(synth::SynthArgs),
    /// Score predictions against ground truth.
    Eval(eval::EvalArgs),
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::Usage => 2,
        ErrorCategory::Data => 3,
        ErrorCategory::Numeric => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }

    let result = match cli.command {
        Command::Fit(a) => fit::run(a),
        Command::Transform(a) => transform::run(a),
        Command::Synth(a) => synth::run(a),
        Command::Eval(a) => eval::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
