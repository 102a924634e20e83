//! Estimators of the transformation parameter and the fitted-transform type.
//!
//! Every estimator returns a [`FittedTransform`]: the family at the estimated
//! `lambda`, the location and scale used to standardize the transformed data,
//! and 0/1 case weights. Only the reweighted estimators (`RewMl`, `RewMlNr`)
//! produce non-unit weights; for them an observation has weight 0 exactly
//! when its standardized transformed value exceeds the cutoff quantile.

mod likelihood;
mod prestandardize;
mod robust;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

pub use likelihood::{fit_carroll, fit_ml, fit_mtl, fit_wml};
pub use prestandardize::{prestandardize, Prestandardization, PrestandardizationRecord};
pub use robust::{
    fit_rawml, fit_rewml, hard_rejection_weights, rectification_knots, robust_criterion,
};

use crate::error::{Error, Result};
use crate::optimizer::SearchConfig;
use crate::transforms::{TransformFamily, TransformKind};

/// Minimum sample size for the robust criterion and the estimators built on it.
pub const MIN_ROBUST_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Classical maximum likelihood.
    Ml,
    /// Maximum likelihood with the Huber M-scale in place of the ML scale.
    Carroll,
    /// Maximum trimmed likelihood over windows of consecutive order statistics.
    Mtl,
    /// Minimizer of the robust QQ criterion on the rectified family, without reweighting.
    RawMl,
    /// Robust rectified initial fit followed by hard-rejection reweighted ML.
    RewMl,
    /// As `RewMl`, but the initial fit uses the plain family.
    RewMlNr,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Ml,
        Method::Carroll,
        Method::Mtl,
        Method::RawMl,
        Method::RewMl,
        Method::RewMlNr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ml => "ml",
            Method::Carroll => "carroll",
            Method::Mtl => "mtl",
            Method::RawMl => "rawml",
            Method::RewMl => "rewml",
            Method::RewMlNr => "rewmlnr",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// Which estimator to run, with its tuning constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSpec {
    pub method: Method,
    pub kind: TransformKind,
    /// Bisquare tuning constant of the robust criterion.
    pub c: f64,
    /// Hard-rejection cutoff as a normal quantile level.
    pub cutoff_quantile: f64,
    /// `h / n` for MTL.
    pub trim_fraction: f64,
    pub reweight_steps: usize,
    pub search: SearchConfig,
    pub prestandardize: Prestandardization,
}

impl EstimatorSpec {
    pub fn new(method: Method, kind: TransformKind) -> Self {
        EstimatorSpec {
            method,
            kind,
            c: 0.5,
            cutoff_quantile: 0.995,
            trim_fraction: 0.9,
            reweight_steps: 2,
            search: SearchConfig::default(),
            prestandardize: Prestandardization::None,
        }
    }

    /// An MTL spec keeping the fraction `h / n` of the data.
    pub fn mtl(kind: TransformKind, trim_fraction: f64) -> Self {
        EstimatorSpec {
            trim_fraction,
            ..EstimatorSpec::new(Method::Mtl, kind)
        }
    }

    pub fn with_prestandardize(mut self, mode: Prestandardization) -> Self {
        self.prestandardize = mode;
        self
    }

    /// Display name, e.g. `RewML` or `MTL90`.
    pub fn label(&self) -> String {
        match self.method {
            Method::Ml => "ML".into(),
            Method::Carroll => "Carroll".into(),
            Method::Mtl => format!("MTL{}", (self.trim_fraction * 100.0).round()),
            Method::RawMl => "RawML".into(),
            Method::RewMl => "RewML".into(),
            Method::RewMlNr => "RewMLnr".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "c must be positive, got {}",
                self.c
            )));
        }
        if !(self.cutoff_quantile > 0.5 && self.cutoff_quantile < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cutoff quantile must lie in (0.5, 1), got {}",
                self.cutoff_quantile
            )));
        }
        if self.method == Method::Mtl && !(self.trim_fraction > 0.5 && self.trim_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "trim fraction must lie in (0.5, 1), got {}",
                self.trim_fraction
            )));
        }
        if matches!(self.method, Method::RewMl | Method::RewMlNr) && self.reweight_steps == 0 {
            return Err(Error::InvalidParameter(
                "reweighted estimators need at least one reweighting step".into(),
            ));
        }
        self.prestandardize.check_kind(self.kind)?;
        self.search.validate()
    }

    /// The MTL window size for a sample of `n` observations.
    pub fn trimmed_size(&self, n: usize) -> usize {
        (self.trim_fraction * n as f64).round() as usize
    }
}

/// The result of fitting a transformation to one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedTransform {
    /// The fitted family. Plain for every method except `RawMl`, whose
    /// estimate refers to the rectified family.
    pub family: TransformFamily,
    pub location: f64,
    pub scale: f64,
    /// One 0/1 weight per input observation, in input order.
    pub weights: Vec<f64>,
    pub spec: EstimatorSpec,
    pub prestandardization: PrestandardizationRecord,
    /// The robust initial estimate, for the reweighted methods.
    pub initial_lambda: Option<f64>,
    /// For MTL: the selected window as a range of sorted-order indices.
    pub trimmed_window: Option<Range<usize>>,
    pub warnings: Vec<String>,
}

impl FittedTransform {
    pub fn lambda(&self) -> f64 {
        self.family.lambda()
    }

    /// Input indices with weight 0.
    pub fn flagged(&self) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w == 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Prestandardizes, transforms and standardizes one raw value.
    pub fn apply(&self, x: f64) -> Result<f64> {
        self.spec.kind.check_domain(x)?;
        let z = self.prestandardization.apply(x)?;
        Ok((self.family.evaluate(z)? - self.location) / self.scale)
    }

    pub fn apply_all(&self, data: &[f64]) -> Result<Vec<f64>> {
        data.iter().map(|&x| self.apply(x)).collect()
    }

    /// Exact inverse of [`apply`](Self::apply).
    pub fn apply_inverse(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::NonFinite(y));
        }
        let z = self.family.inverse(y * self.scale + self.location)?;
        self.prestandardization.invert(z)
    }

    pub fn apply_inverse_all(&self, data: &[f64]) -> Result<Vec<f64>> {
        data.iter().map(|&y| self.apply_inverse(y)).collect()
    }
}

/// Fits `spec` to raw data, prestandardizing first when the spec asks for it.
pub fn fit(data: &[f64], spec: &EstimatorSpec) -> Result<FittedTransform> {
    spec.validate()?;
    let (work, record) = prestandardize(data, spec.prestandardize)?;
    let mut fitted = match spec.method {
        Method::Ml => fit_ml(&work, spec.kind, &spec.search),
        Method::Carroll => fit_carroll(&work, spec.kind, &spec.search),
        Method::Mtl => fit_mtl(
            &work,
            spec.kind,
            spec.trimmed_size(work.len()),
            &spec.search,
        ),
        Method::RawMl => fit_rawml(&work, spec),
        Method::RewMl | Method::RewMlNr => fit_rewml(&work, spec),
    }?;
    fitted.spec = *spec;
    fitted.prestandardization = record;
    Ok(fitted)
}

/// Validates the sample for `kind` and returns a sorted copy.
pub(crate) fn checked_sorted(data: &[f64], kind: TransformKind, min_n: usize) -> Result<Vec<f64>> {
    if data.len() < min_n {
        return Err(Error::TooFewObservations {
            needed: min_n,
            got: data.len() as f64,
        });
    }
    for &x in data {
        kind.check_domain(x)?;
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// Warns when an estimate sits on the edge of the search interval.
pub(crate) fn boundary_warning(lambda: f64, search: &SearchConfig) -> Option<String> {
    let slack = 1e-3 * (search.lambda_max - search.lambda_min);
    if lambda - search.lambda_min < slack || search.lambda_max - lambda < slack {
        let msg = format!(
            "estimate {lambda} is at the edge of the search range [{}, {}]",
            search.lambda_min, search.lambda_max
        );
        log::warn!("{msg}");
        Some(msg)
    } else {
        None
    }
}
