mod args;
mod commands;
mod fitfile;
mod format;
mod table;

use std::process::ExitCode;

use clap::Parser;

fn configure_threads() {
    let Ok(raw) = std::env::var("CN_THREADS") else {
        return;
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
            {
                log::warn!("cannot set the thread count: {e}");
            }
        }
        _ => log::warn!("ignoring CN_THREADS={raw:?}; expected a positive integer"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = args::Cli::parse();
    configure_threads();
    match commands::run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
