use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use centnorm::robust_stats::normal_scores;
use centnorm::{fit, EstimatorSpec, FittedTransform, Prestandardization};
use rayon::prelude::*;

use crate::args::FitArgs;
use crate::fitfile::{self, StoredFit};
use crate::format::{exact, g12};
use crate::table::{tsv_writer, Table};

/// Everything reported about one successfully fitted column.
#[derive(Debug, Clone)]
pub struct ColumnReport {
    pub column: String,
    pub fitted: FittedTransform,
    pub missing: usize,
    /// Data rows (counted from 1) with weight 0.
    pub flagged_rows: Vec<usize>,
    /// `(Phi^-1(p_i), sorted standardized transformed value)`.
    pub qq: Vec<(f64, f64)>,
}

pub fn run(args: &FitArgs) -> Result<bool> {
    let table = Table::read(&args.input)?;
    let spec = args.tuning.spec(
        args.method,
        Prestandardization::default_for(args.tuning.family),
    );
    spec.validate()?;

    let selected: Vec<(String, Option<usize>)> = if args.columns.is_empty() {
        let numeric: Vec<_> = (0..table.headers.len())
            .filter(|&c| table.is_numeric(c))
            .map(|c| (table.headers[c].clone(), Some(c)))
            .collect();
        if numeric.is_empty() {
            bail!("{} has no numeric columns", args.input.display());
        }
        numeric
    } else {
        args.columns
            .iter()
            .map(|name| (name.clone(), table.column_index(name)))
            .collect()
    };

    let outcomes: Vec<Result<ColumnReport, String>> = selected
        .par_iter()
        .map(|(_, col)| match col {
            Some(c) => fit_column(&table, *c, &spec),
            None => Err("no such column".into()),
        })
        .collect();

    let mut reports = Vec::new();
    let mut ok = true;
    for ((name, _), outcome) in selected.iter().zip(outcomes) {
        match outcome {
            Ok(report) => {
                for w in &report.fitted.warnings {
                    log::warn!("column '{name}': {w}");
                }
                reports.push(report);
            }
            Err(e) => {
                eprintln!("error: column '{name}': {e}");
                ok = false;
            }
        }
    }
    write_outputs(&args.out_dir, &reports)?;
    Ok(ok)
}

pub fn fit_column(table: &Table, col: usize, spec: &EstimatorSpec) -> Result<ColumnReport, String> {
    let values = table.numeric(col).map_err(|e| e.to_string())?;
    let (rows, data): (Vec<usize>, Vec<f64>) = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i + 1, x)))
        .unzip();
    if data.is_empty() {
        return Err("every value is missing".into());
    }
    let fitted = fit(&data, spec).map_err(|e| e.to_string())?;
    let mut transformed = fitted.apply_all(&data).map_err(|e| e.to_string())?;
    transformed.sort_by(f64::total_cmp);
    let qq = normal_scores(transformed.len())
        .into_iter()
        .zip(transformed)
        .collect();
    let flagged_rows = fitted.flagged().into_iter().map(|i| rows[i]).collect();
    Ok(ColumnReport {
        column: table.headers[col].clone(),
        missing: values.len() - data.len(),
        fitted,
        flagged_rows,
        qq,
    })
}

fn file_stem(column: &str, used: &mut HashSet<String>) -> String {
    let base: String = column
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    let mut stem = base.clone();
    let mut k = 2;
    while !used.insert(stem.clone()) {
        stem = format!("{base}_{k}");
        k += 1;
    }
    stem
}

fn write_outputs(dir: &Path, reports: &[ColumnReport]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let stored: Vec<StoredFit> = reports
        .iter()
        .map(|r| StoredFit::from_fit(&r.column, &r.fitted))
        .collect();
    fs::write(dir.join("fit.txt"), fitfile::write(&stored)?)?;

    let mut used = HashSet::new();
    for r in reports {
        let path = dir.join(format!("qq_{}.tsv", file_stem(&r.column, &mut used)));
        let mut w = tsv_writer(fs::File::create(&path)?);
        w.write_record(["theoretical", "empirical"])?;
        for &(t, e) in &r.qq {
            w.write_record([g12(t), g12(e)])?;
        }
        w.flush()?;
    }

    let mut summary = Vec::new();
    write_summary(&mut summary, reports)?;
    fs::write(dir.join("summary.tsv"), &summary)?;
    std::io::stdout().write_all(&summary)?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, reports: &[ColumnReport]) -> Result<()> {
    let mut w = tsv_writer(out);
    w.write_record([
        "column",
        "family",
        "method",
        "n",
        "missing",
        "lambda",
        "location",
        "scale",
        "prestandardize",
        "pre_center",
        "pre_scale",
        "flagged",
        "flagged_rows",
    ])?;
    for r in reports {
        let f = &r.fitted;
        let rows: Vec<String> = r.flagged_rows.iter().map(usize::to_string).collect();
        w.write_record([
            r.column.clone(),
            f.spec.kind.short_name().into(),
            f.spec.method.name().into(),
            r.qq.len().to_string(),
            r.missing.to_string(),
            g12(f.lambda()),
            g12(f.location),
            g12(f.scale),
            f.prestandardization.mode.name().into(),
            exact(f.prestandardization.center),
            exact(f.prestandardization.scale),
            r.flagged_rows.len().to_string(),
            rows.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
