use std::fs;

use anyhow::{Context, Result};

use crate::args::ApplyArgs;
use crate::fitfile::{self, StoredFit};
use crate::format::exact;
use crate::table::{CellError, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

pub fn run(args: &ApplyArgs, direction: Direction) -> Result<bool> {
    let text = fs::read_to_string(&args.fit)
        .with_context(|| format!("cannot read {}", args.fit.display()))?;
    let fits = fitfile::parse(&text).with_context(|| format!("in {}", args.fit.display()))?;
    let mut table = Table::read(&args.input)?;
    let errors = apply(&mut table, &fits, direction);
    for e in &errors {
        eprintln!("error: {e}");
    }
    match &args.output {
        Some(path) => table.write(fs::File::create(path)?)?,
        None => table.write(std::io::stdout().lock())?,
    }
    Ok(errors.is_empty())
}

/// Rewrites the fitted columns in place. Missing cells stay empty; cells that
/// fail are emptied and reported.
pub fn apply(table: &mut Table, fits: &[StoredFit], direction: Direction) -> Vec<String> {
    let mut errors = Vec::new();
    for fit in fits {
        let Some(col) = table.column_index(&fit.column) else {
            errors.push(format!(
                "column '{}' from the fit file is not in the input",
                fit.column
            ));
            continue;
        };
        let transform = fit.transform();
        for (i, row) in table.rows.iter_mut().enumerate() {
            let cell = row[col].trim();
            if cell.is_empty() {
                continue;
            }
            let result = match cell.parse::<f64>() {
                Ok(x) => match direction {
                    Direction::Forward => transform.apply(x),
                    Direction::Inverse => transform.apply_inverse(x),
                }
                .map_err(|e| e.to_string()),
                Err(_) => Err(format!("'{cell}' is not a number")),
            };
            match result {
                Ok(y) => row[col] = exact(y),
                Err(message) => {
                    errors.push(
                        CellError {
                            row: i + 1,
                            column: fit.column.clone(),
                            message,
                        }
                        .to_string(),
                    );
                    row[col].clear();
                }
            }
        }
    }
    errors
}
