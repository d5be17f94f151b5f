use std::process::ExitCode;

use clap::Parser;
use diffint::experiment::cli::{Cli, Command, THREADS_ENV};
use diffint::experiment::{run, RunError};

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{THREADS_ENV} must be a positive integer, got '{raw}'"))?;
    if threads == 0 {
        return Err(format!("{THREADS_ENV} must be a positive integer, got '{raw}'"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let (kind, overrides) = cli.command.parts();
    let cfg = match overrides.resolve(kind) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if overrides.print_config {
        print!("{}", cfg.to_toml_string());
        return ExitCode::SUCCESS;
    }
    if let Command::Validate(_) = cli.command {
        return match cfg.validate() {
            Ok(()) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        };
    }
    match run(&cfg) {
        Ok(manifest) => {
            for o in &manifest.outputs {
                println!("{}", cfg.output.join(&o.file).display());
            }
            println!("{}", cfg.output.join("manifest.json").display());
            eprintln!("done in {:.2} s", manifest.wall_time_seconds);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &RunError) -> u8 {
    e.exit_code() as u8
}
