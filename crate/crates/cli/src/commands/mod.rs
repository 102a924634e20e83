pub mod apply;
pub mod fit;
pub mod sensitivity;
pub mod simulate;

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};

use crate::args::{Cli, Command};
use apply::Direction;

/// Runs a subcommand. `Ok(false)` means some column or cell failed.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Fit(args) => fit::run(&args),
        Command::Transform(args) => apply::run(&args, Direction::Forward),
        Command::Inverse(args) => apply::run(&args, Direction::Inverse),
        Command::Simulate(args) => simulate::run(&args, output(args.output.as_deref())?),
        Command::Sensitivity(args) => sensitivity::run(&args, output(args.output.as_deref())?),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?)
        }
        None => Box::new(io::stdout().lock()),
    })
}
