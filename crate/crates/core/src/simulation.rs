//! Contaminated-data experiments: bias and MSE, sensitivity curves, the
//! tuning-constant check and false-positive calibration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimators::{fit, EstimatorSpec};
use crate::robust_stats::{median, normal_quantile};
use crate::transforms::{TransformFamily, TransformKind};

/// One cell of a simulation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationScenario {
    pub kind: TransformKind,
    pub true_lambda: f64,
    pub n: usize,
    /// Fraction of contaminated points, in [0, 0.15].
    pub epsilon: f64,
    /// Contamination position on the normal scale, at most 10.
    pub k: u32,
    pub replications: usize,
    pub seed: u64,
}

impl SimulationScenario {
    /// A clean scenario with n = 100 and m = 100.
    pub fn new(kind: TransformKind, true_lambda: f64) -> Self {
        SimulationScenario {
            kind,
            true_lambda,
            n: 100,
            epsilon: 0.0,
            k: 0,
            replications: 100,
            seed: 0,
        }
    }

    pub fn contaminated(mut self, epsilon: f64, k: u32) -> Self {
        self.epsilon = epsilon;
        self.k = k;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Empty);
        }
        if !self.true_lambda.is_finite() {
            return Err(Error::NonFinite(self.true_lambda));
        }
        if !(0.0..=0.15).contains(&self.epsilon) {
            return Err(Error::InvalidParameter(format!(
                "contamination fraction must lie in [0, 0.15], got {}",
                self.epsilon
            )));
        }
        if self.k > 10 {
            return Err(Error::InvalidParameter(format!(
                "contamination position k must be at most 10, got {}",
                self.k
            )));
        }
        Ok(())
    }

    /// Number of replaced points, `epsilon * n` rounded half up.
    pub fn contaminated_count(&self) -> usize {
        (self.epsilon * self.n as f64 + 0.5).floor() as usize
    }

    /// Box-Cox at lambda = 1 draws clean data from a truncated normal instead
    /// of inverting a normal sample, since that inverse would leave the domain.
    pub fn uses_truncated_design(&self) -> bool {
        self.kind == TransformKind::BoxCox && self.true_lambda == 1.0
    }
}

/// Replicate `j` reads ChaCha stream `j` of the key derived from `seed`.
fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64);
    rng
}

/// The data set of one replicate.
///
/// Draws a standard normal sample, replaces its first `contaminated_count`
/// entries by `k` (when `true_lambda <= 1`) or `-k`, and maps the result
/// through the inverse of the plain transform at `true_lambda`.
pub fn generate(scenario: &SimulationScenario, replicate: usize) -> Result<Vec<f64>> {
    scenario.validate()?;
    let mut rng = replicate_rng(scenario.seed, replicate);
    let n = scenario.n;
    let n_out = scenario.contaminated_count();
    let k = if scenario.true_lambda <= 1.0 {
        scenario.k as f64
    } else {
        -(scenario.k as f64)
    };
    let family = TransformFamily::plain(scenario.kind, scenario.true_lambda);

    if scenario.uses_truncated_design() {
        let clean = Normal::new(1.0, 1.0 / 3.0).expect("valid normal parameters");
        let mut data = Vec::with_capacity(n);
        for _ in 0..n_out {
            data.push(family.inverse(k)?);
        }
        while data.len() < n {
            let x: f64 = clean.sample(&mut rng);
            if (0.01..=1.99).contains(&x) {
                data.push(x);
            }
        }
        return Ok(data);
    }

    let mut y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    for v in y.iter_mut().take(n_out) {
        *v = k;
    }
    y.into_iter().map(|v| family.inverse(v)).collect()
}

/// Bias and MSE of one estimator over the replicates of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasMseResult {
    pub estimator: EstimatorSpec,
    pub bias: f64,
    pub mse: f64,
    /// One entry per replicate; `None` where the fit failed.
    pub estimates: Vec<Option<f64>>,
    pub failures: usize,
}

impl BiasMseResult {
    pub fn label(&self) -> String {
        self.estimator.label()
    }

    fn from_estimates(
        estimator: EstimatorSpec,
        true_lambda: f64,
        estimates: Vec<Option<f64>>,
    ) -> Self {
        let ok: Vec<f64> = estimates
            .iter()
            .flatten()
            .map(|l| l - true_lambda)
            .collect();
        let count = ok.len() as f64;
        let (bias, mse) = if ok.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (
                ok.iter().sum::<f64>() / count,
                ok.iter().map(|d| d * d).sum::<f64>() / count,
            )
        };
        BiasMseResult {
            estimator,
            bias,
            mse,
            failures: estimates.len() - ok.len(),
            estimates,
        }
    }
}

/// Fits every estimator to every replicate of `scenario`.
///
/// Replicates run in parallel and are reduced in replicate order, so the
/// result does not depend on the thread count. Failed fits are excluded
/// from bias and MSE and counted in `failures`.
pub fn run_bias_mse(
    scenario: &SimulationScenario,
    estimators: &[EstimatorSpec],
) -> Result<Vec<BiasMseResult>> {
    scenario.validate()?;
    for e in estimators {
        e.validate()?;
    }
    let per_replicate: Vec<Vec<Option<f64>>> = (0..scenario.replications)
        .into_par_iter()
        .map(|j| {
            let data = generate(scenario, j)?;
            Ok(estimators
                .iter()
                .map(|spec| match fit(&data, spec) {
                    Ok(f) => Some(f.lambda()),
                    Err(e) => {
                        log::debug!("replicate {j}, {}: {e}", spec.label());
                        None
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    Ok(estimators
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            let estimates = per_replicate.iter().map(|row| row[i]).collect();
            BiasMseResult::from_estimates(*spec, scenario.true_lambda, estimates)
        })
        .collect())
}

/// The clean distribution behind a stylized sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StylizedDistribution {
    StandardNormal,
    /// `exp` of a standard normal.
    LogNormal,
}

impl StylizedDistribution {
    /// Standard normal for Yeo-Johnson, lognormal for Box-Cox.
    pub fn default_for(kind: TransformKind) -> Self {
        match kind {
            TransformKind::YeoJohnson => StylizedDistribution::StandardNormal,
            TransformKind::BoxCox => StylizedDistribution::LogNormal,
        }
    }

    pub fn quantile(self, p: f64) -> Result<f64> {
        let z = normal_quantile(p)?;
        Ok(match self {
            StylizedDistribution::StandardNormal => z,
            StylizedDistribution::LogNormal => z.exp(),
        })
    }

    /// The `n - 1` points `F^-1(i / n)`, `i = 1..n`.
    pub fn stylized_sample(self, n: usize) -> Result<Vec<f64>> {
        (1..n).map(|i| self.quantile(i as f64 / n as f64)).collect()
    }
}

/// Stylized sensitivity curve of one estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCurve {
    pub estimator: EstimatorSpec,
    pub distribution: StylizedDistribution,
    pub n: usize,
    /// Contamination positions on the data scale.
    pub z: Vec<f64>,
    /// `n * (T(X_z) - T(X0))`; `None` where the fit with `z` failed.
    pub sc: Vec<Option<f64>>,
    /// `T(X0)`, the estimate on the stylized sample alone.
    pub baseline: f64,
}

/// `SC(z) = n * (T(X_z) - T(X0))` with `X0` the stylized sample of size
/// `n - 1` and `X_z` that sample plus `z`.
pub fn sensitivity_curve(
    estimator: &EstimatorSpec,
    distribution: StylizedDistribution,
    n: usize,
    z_grid: &[f64],
) -> Result<SensitivityCurve> {
    if z_grid.is_empty() {
        return Err(Error::InvalidParameter("the z grid is empty".into()));
    }
    if n < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: n as f64,
        });
    }
    let x0 = distribution.stylized_sample(n)?;
    let baseline = fit(&x0, estimator)?.lambda();
    let sc = z_grid
        .par_iter()
        .map(|&z| {
            let mut xz = x0.clone();
            xz.push(z);
            match fit(&xz, estimator) {
                Ok(f) => Some(n as f64 * (f.lambda() - baseline)),
                Err(e) => {
                    log::debug!("sensitivity at z = {z}: {e}");
                    None
                }
            }
        })
        .collect();
    Ok(SensitivityCurve {
        estimator: *estimator,
        distribution,
        n,
        z: z_grid.to_vec(),
        sc,
        baseline,
    })
}

/// Fraction of the `m = round((1 - epsilon) n)` indices `i` with
/// `|Phi^-1((i - 1/3)/(m + 1/3)) - Phi^-1((i - 1/3)/(n + 1/3))| <= threshold`.
///
/// This measures how far the QQ positions of a clean subsample move when the
/// remaining points are outliers beyond one end of the data.
pub fn tuning_delta_check(n: usize, epsilon: f64, threshold: f64) -> f64 {
    let m = ((1.0 - epsilon) * n as f64).round() as usize;
    if m == 0 {
        return f64::NAN;
    }
    let (mf, nf) = (m as f64 + 1.0 / 3.0, n as f64 + 1.0 / 3.0);
    let hits = (1..=m)
        .filter(|&i| {
            let a = i as f64 - 1.0 / 3.0;
            let d = normal_quantile(a / mf).unwrap() - normal_quantile(a / nf).unwrap();
            d.abs() <= threshold
        })
        .count();
    hits as f64 / m as f64
}

/// Flagged fractions on clean data for one sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct FalsePositiveResult {
    pub n: usize,
    /// Fraction of zero weights in each successful replicate, in replicate order.
    pub fractions: Vec<f64>,
    pub failures: usize,
}

impl FalsePositiveResult {
    pub fn median(&self) -> f64 {
        median(&self.fractions).unwrap_or(f64::NAN)
    }
}

/// Fits `estimator` to `m` clean samples of each size in `n_values` and
/// records the fraction of observations it flags.
///
/// Clean data come from the model at `true_lambda` (lognormal for Box-Cox
/// at 0).
pub fn false_positive_calibration(
    estimator: &EstimatorSpec,
    true_lambda: f64,
    n_values: &[usize],
    m: usize,
    seed: u64,
) -> Result<Vec<FalsePositiveResult>> {
    estimator.validate()?;
    n_values
        .iter()
        .map(|&n| {
            let scenario = SimulationScenario {
                n,
                replications: m,
                seed,
                ..SimulationScenario::new(estimator.kind, true_lambda)
            };
            let per_rep: Vec<Option<f64>> = (0..m)
                .into_par_iter()
                .map(|j| {
                    let data = generate(&scenario, j)?;
                    Ok(fit(&data, estimator)
                        .ok()
                        .map(|f| f.flagged().len() as f64 / n as f64))
                })
                .collect::<Result<_>>()?;
            let fractions: Vec<f64> = per_rep.iter().flatten().copied().collect();
            Ok(FalsePositiveResult {
                n,
                failures: m - fractions.len(),
                fractions,
            })
        })
        .collect()
}

/// Draws `n` standard normals from a seeded generator.
pub fn seeded_normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}
