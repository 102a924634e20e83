use std::path::PathBuf;

use centnorm::{EstimatorSpec, Method, Prestandardization, SearchConfig, TransformKind};
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "centnorm",
    version,
    about = "Robust Box-Cox and Yeo-Johnson transformations to central normality"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a transformation to each numeric column of a CSV file.
    Fit(FitArgs),
    /// Apply the transformations in a fit file to a CSV file.
    Transform(ApplyArgs),
    /// Undo the transformations in a fit file.
    Inverse(ApplyArgs),
    /// Monte Carlo bias and MSE of estimators under contamination.
    Simulate(SimulateArgs),
    /// Sensitivity curve of one estimator on a stylized sample.
    Sensitivity(SensitivityArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TuningArgs {
    #[arg(long, default_value = "yj")]
    pub family: TransformKind,

    /// MTL window size as a fraction of n.
    #[arg(long, default_value_t = 0.9)]
    pub trim: f64,

    /// Bisquare tuning constant.
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,

    /// Hard-rejection cutoff as a normal quantile level.
    #[arg(long, default_value_t = 0.995)]
    pub cutoff: f64,

    #[arg(long, value_name = "MIN:MAX", default_value = "-4:6", allow_hyphen_values = true, value_parser = parse_range)]
    pub lambda_range: (f64, f64),

    #[arg(long, default_value_t = 2)]
    pub reweight_steps: usize,

    /// {none,mad,logmad,median}
    #[arg(long)]
    pub prestandardize: Option<Prestandardization>,
}

impl TuningArgs {
    pub fn spec(&self, method: Method, default_pre: Prestandardization) -> EstimatorSpec {
        EstimatorSpec {
            method,
            kind: self.family,
            c: self.c,
            cutoff_quantile: self.cutoff,
            trim_fraction: self.trim,
            reweight_steps: self.reweight_steps,
            search: SearchConfig::with_range(self.lambda_range.0, self.lambda_range.1),
            prestandardize: self.prestandardize.unwrap_or(default_pre),
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub input: PathBuf,

    #[command(flatten)]
    pub tuning: TuningArgs,

    /// {ml,carroll,mtl,rawml,rewml,rewmlnr}
    #[arg(long, default_value = "rewml")]
    pub method: Method,

    /// Columns to fit; defaults to every numeric column.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,

    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    /// Fit file written by `centnorm fit`.
    #[arg(long)]
    pub fit: PathBuf,

    pub input: PathBuf,

    /// Output CSV; standard output if absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub tuning: TuningArgs,

    /// Estimators to compare.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "ml,carroll,mtl,rawml,rewml,rewmlnr"
    )]
    pub method: Vec<Method>,

    /// True transformation parameter.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,

    #[arg(long, default_value_t = 100)]
    pub n: usize,

    #[arg(long, default_value_t = 100)]
    pub replications: usize,

    /// Contamination fraction.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,

    /// Contamination position on the normal scale.
    #[arg(long, default_value_t = 0)]
    pub k: u32,

    /// Run k = 0, 1, ..., 10.
    #[arg(long, conflicts_with = "eps_sweep")]
    pub k_sweep: bool,

    /// Run eps = 0, 0.05, 0.10, 0.15.
    #[arg(long)]
    pub eps_sweep: bool,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub tuning: TuningArgs,

    #[arg(long, visible_alias = "estimator", default_value = "rewml")]
    pub method: Method,

    /// Size of the contaminated sample.
    #[arg(long, default_value_t = 100)]
    pub n: usize,

    /// Contamination grid `start:stop:step` or a comma list. Box-Cox
    /// grids are on the log scale.
    #[arg(long, value_name = "GRID", allow_hyphen_values = true, value_parser = parse_grid)]
    pub z: Grid,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected MIN:MAX, got '{s}'"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad number '{a}'"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad number '{b}'"))?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(format!("'{s}' is not an increasing range"));
    }
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let number = |t: &str| -> Result<f64, String> {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("bad number '{t}'"))
    };
    let points = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(format!("expected START:STOP:STEP, got '{s}'"));
        };
        let (a, b, step) = (number(a)?, number(b)?, number(step)?);
        if !(step > 0.0) {
            return Err("step must be positive".into());
        }
        let span = (b - a) / step;
        if span < -1e-9 {
            Vec::new()
        } else {
            let count = (span + 1e-9).floor() as usize + 1;
            (0..count).map(|i| a + i as f64 * step).collect()
        }
    } else if s.trim().is_empty() {
        Vec::new()
    } else {
        s.split(',').map(number).collect::<Result<_, _>>()?
    };
    if points.is_empty() {
        return Err(format!("the grid '{s}' is empty"));
    }
    Ok(Grid(points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("-4:6"), Ok((-4.0, 6.0)));
        assert!(parse_range("6:-4").is_err());
        assert!(parse_range("1").is_err());
    }

    #[test]
    fn grids() {
        let g = parse_grid("-10:10:0.25").unwrap().0;
        assert_eq!(g.len(), 81);
        assert_eq!((g[0], g[80]), (-10.0, 10.0));
        assert_eq!(parse_grid("0:1:0.1").unwrap().0.len(), 11);
        assert_eq!(parse_grid("1, 2.5,-3").unwrap().0, vec![1.0, 2.5, -3.0]);
        assert_eq!(parse_grid("2:2:1").unwrap().0, vec![2.0]);
        for bad in ["", "3:1:1", "0:1:0", "0:1", "a,b", "0:1:-1"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn defaults() {
        let cli = Cli::try_parse_from(["centnorm", "fit", "in.csv"]).unwrap();
        let Command::Fit(args) = cli.command else {
            panic!("expected fit")
        };
        assert_eq!(args.method, Method::RewMl);
        let spec = args.tuning.spec(args.method, Prestandardization::Mad);
        let want = EstimatorSpec::new(Method::RewMl, TransformKind::YeoJohnson)
            .with_prestandardize(Prestandardization::Mad);
        assert_eq!(spec, want);
    }
}
