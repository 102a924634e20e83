//! CSV input and output.

use std::fmt;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// A CSV file held as text, header first.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// A bad cell. `row` counts data rows from 1, so the header is row 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CellError {
    pub row: usize,
    pub column: String,
    pub message: String,
}

impl fmt::Display for CellError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "row {}, column '{}': {}",
            self.row, self.column, self.message
        )
    }
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .with_context(|| format!("cannot open {}", path.display()))?;
        let headers: Vec<String> = reader
            .headers()
            .with_context(|| format!("cannot read the header of {}", path.display()))?
            .iter()
            .map(str::to_owned)
            .collect();
        if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
            bail!("{} has no header row", path.display());
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.with_context(|| format!("cannot parse {}", path.display()))?;
            rows.push(record.iter().map(str::to_owned).collect());
        }
        Ok(Table { headers, rows })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    /// Parses column `col` as numbers; empty cells are missing.
    pub fn numeric(&self, col: usize) -> std::result::Result<Vec<Option<f64>>, CellError> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                parse_cell(&row[col]).map_err(|message| CellError {
                    row: i + 1,
                    column: self.headers[col].clone(),
                    message,
                })
            })
            .collect()
    }

    pub fn is_numeric(&self, col: usize) -> bool {
        self.numeric(col).is_ok()
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.headers)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn parse_cell(cell: &str) -> std::result::Result<Option<f64>, String> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(Some(x)),
        Ok(x) => Err(format!("non-finite value {x}")),
        Err(_) => Err(format!("'{cell}' is not a number")),
    }
}

/// A tab-separated writer.
pub fn tsv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().delimiter(b'\t').from_writer(out)
}
