mod args;
mod commands;
mod svg;

use std::process::ExitCode;

use clap::Parser;

use args::{merge_config, Cli};

const THREADS_ENV: &str = "CUTOFFLAB_THREADS";

fn init_pool() -> Result<(), String> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = v.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let argv = match merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    // clap prints its own message and exits with 2 on usage errors.
    let cli = Cli::parse_from(argv);
    if let Err(msg) = init_pool() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match commands::run(&cli.cmd, &cli.common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
