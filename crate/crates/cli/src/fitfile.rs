//! The fit file: one block of `key=value` lines per column.
//!
//! Each block starts with `column=<name>`. Blank lines and lines starting
//! with `#` are ignored. Floats are written in their shortest exact form, so
//! reading a file back reproduces every value bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use centnorm::{
    EstimatorSpec, FittedTransform, Method, Prestandardization, PrestandardizationRecord,
    SearchConfig, TransformFamily, TransformKind,
};

/// What the fit file keeps about one fitted column.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredFit {
    pub column: String,
    pub family: TransformFamily,
    pub location: f64,
    pub scale: f64,
    pub spec: EstimatorSpec,
    pub prestandardization: PrestandardizationRecord,
    pub initial_lambda: Option<f64>,
    /// Non-missing observations used in the fit.
    pub n: usize,
    pub flagged: usize,
}

const KEYS: [&str; 22] = [
    "column",
    "family",
    "method",
    "lambda",
    "lower_knot",
    "upper_knot",
    "location",
    "scale",
    "initial_lambda",
    "prestandardize",
    "pre_center",
    "pre_scale",
    "c",
    "cutoff",
    "trim",
    "reweight_steps",
    "lambda_min",
    "lambda_max",
    "tolerance",
    "grid_points",
    "n",
    "flagged",
];

impl StoredFit {
    pub fn from_fit(column: &str, fitted: &FittedTransform) -> Self {
        StoredFit {
            column: column.to_owned(),
            family: fitted.family,
            location: fitted.location,
            scale: fitted.scale,
            spec: fitted.spec,
            prestandardization: fitted.prestandardization,
            initial_lambda: fitted.initial_lambda,
            n: fitted.weights.len(),
            flagged: fitted.flagged().len(),
        }
    }

    /// A transform usable for `apply` and `apply_inverse`. Weights are not stored.
    pub fn transform(&self) -> FittedTransform {
        FittedTransform {
            family: self.family,
            location: self.location,
            scale: self.scale,
            weights: Vec::new(),
            spec: self.spec,
            prestandardization: self.prestandardization,
            initial_lambda: self.initial_lambda,
            trimmed_window: None,
            warnings: Vec::new(),
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:?}")).unwrap_or_else(|| "none".into())
}

pub fn write(fits: &[StoredFit]) -> Result<String> {
    let mut out = String::from("# centnorm fit file\n");
    for f in fits {
        if f.column.contains(['\n', '\r']) {
            bail!("column name {:?} contains a line break", f.column);
        }
        let s = &f.spec;
        let p = &f.prestandardization;
        out.push('\n');
        let _ = writeln!(out, "column={}", f.column);
        let _ = writeln!(out, "family={}", f.family.kind().short_name());
        let _ = writeln!(out, "method={}", s.method);
        let _ = writeln!(out, "lambda={:?}", f.family.lambda());
        let _ = writeln!(out, "lower_knot={}", opt(f.family.lower_knot()));
        let _ = writeln!(out, "upper_knot={}", opt(f.family.upper_knot()));
        let _ = writeln!(out, "location={:?}", f.location);
        let _ = writeln!(out, "scale={:?}", f.scale);
        let _ = writeln!(out, "initial_lambda={}", opt(f.initial_lambda));
        let _ = writeln!(out, "prestandardize={}", p.mode);
        let _ = writeln!(out, "pre_center={:?}", p.center);
        let _ = writeln!(out, "pre_scale={:?}", p.scale);
        let _ = writeln!(out, "c={:?}", s.c);
        let _ = writeln!(out, "cutoff={:?}", s.cutoff_quantile);
        let _ = writeln!(out, "trim={:?}", s.trim_fraction);
        let _ = writeln!(out, "reweight_steps={}", s.reweight_steps);
        let _ = writeln!(out, "lambda_min={:?}", s.search.lambda_min);
        let _ = writeln!(out, "lambda_max={:?}", s.search.lambda_max);
        let _ = writeln!(out, "tolerance={:?}", s.search.tolerance);
        let _ = writeln!(out, "grid_points={}", s.search.coarse_grid_points);
        let _ = writeln!(out, "n={}", f.n);
        let _ = writeln!(out, "flagged={}", f.flagged);
    }
    Ok(out)
}

pub fn parse(text: &str) -> Result<Vec<StoredFit>> {
    let mut blocks: Vec<(usize, HashMap<&str, &str>)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {lineno}: expected key=value"))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            bail!("line {lineno}: unknown key '{key}'");
        }
        if key == "column" {
            blocks.push((lineno, HashMap::new()));
        }
        let (_, block) = blocks
            .last_mut()
            .ok_or_else(|| anyhow!("line {lineno}: '{key}' before any column="))?;
        let value = if key == "column" { value } else { value.trim() };
        if block.insert(key, value).is_some() {
            bail!("line {lineno}: duplicate key '{key}'");
        }
    }
    blocks
        .into_iter()
        .map(|(lineno, block)| {
            parse_block(&block).with_context(|| format!("record starting at line {lineno}"))
        })
        .collect()
}

fn get<'a>(block: &HashMap<&str, &'a str>, key: &str) -> Result<&'a str> {
    block
        .get(key)
        .copied()
        .ok_or_else(|| anyhow!("missing key '{key}'"))
}

fn num<T: FromStr>(block: &HashMap<&str, &str>, key: &str) -> Result<T> {
    let raw = get(block, key)?;
    raw.parse()
        .map_err(|_| anyhow!("bad value '{raw}' for '{key}'"))
}

fn opt_num(block: &HashMap<&str, &str>, key: &str) -> Result<Option<f64>> {
    match get(block, key)? {
        "none" => Ok(None),
        _ => num(block, key).map(Some),
    }
}

fn parse_block(block: &HashMap<&str, &str>) -> Result<StoredFit> {
    let kind: TransformKind = get(block, "family")?.parse()?;
    let method: Method = get(block, "method")?.parse()?;
    let lambda: f64 = num(block, "lambda")?;
    let lower = opt_num(block, "lower_knot")?;
    let upper = opt_num(block, "upper_knot")?;
    let family = if lower.is_some() || upper.is_some() {
        TransformFamily::rectified(kind, lambda, lower, upper)?
    } else {
        TransformFamily::plain(kind, lambda)
    };
    let mode: Prestandardization = get(block, "prestandardize")?.parse()?;
    let spec = EstimatorSpec {
        method,
        kind,
        c: num(block, "c")?,
        cutoff_quantile: num(block, "cutoff")?,
        trim_fraction: num(block, "trim")?,
        reweight_steps: num(block, "reweight_steps")?,
        search: SearchConfig {
            lambda_min: num(block, "lambda_min")?,
            lambda_max: num(block, "lambda_max")?,
            tolerance: num(block, "tolerance")?,
            coarse_grid_points: num(block, "grid_points")?,
        },
        prestandardize: mode,
    };
    let scale: f64 = num(block, "scale")?;
    if !(scale > 0.0 && scale.is_finite()) {
        bail!("scale must be positive, got {scale}");
    }
    let pre_scale: f64 = num(block, "pre_scale")?;
    if !(pre_scale > 0.0 && pre_scale.is_finite()) {
        bail!("pre_scale must be positive, got {pre_scale}");
    }
    Ok(StoredFit {
        column: get(block, "column")?.to_owned(),
        family,
        location: num(block, "location")?,
        scale,
        spec,
        prestandardization: PrestandardizationRecord {
            mode,
            center: num(block, "pre_center")?,
            scale: pre_scale,
        },
        initial_lambda: opt_num(block, "initial_lambda")?,
        n: num(block, "n")?,
        flagged: num(block, "flagged")?,
    })
}
