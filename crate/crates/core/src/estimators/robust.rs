//! The robust QQ criterion and the estimators built on it.

use super::likelihood::WeightedLikelihood;
use super::{
    boundary_warning, checked_sorted, EstimatorSpec, FittedTransform, Method,
    PrestandardizationRecord, MIN_ROBUST_N,
};
use crate::error::{Error, Result};
use crate::optimizer::minimize_scalar;
use crate::robust_stats::{huber_m, normal_quantile, normal_scores, quantile_sorted, rho_bw};
use crate::transforms::{TransformFamily, TransformKind};

/// Reusable evaluator of the robust criterion for one sorted sample.
struct Criterion<'a> {
    sorted: &'a [f64],
    scores: Vec<f64>,
    c: f64,
    buf: Vec<f64>,
}

impl<'a> Criterion<'a> {
    fn new(sorted: &'a [f64], c: f64) -> Result<Self> {
        if sorted.len() < MIN_ROBUST_N {
            return Err(Error::TooFewObservations {
                needed: MIN_ROBUST_N,
                got: sorted.len() as f64,
            });
        }
        Ok(Criterion {
            sorted,
            scores: normal_scores(sorted.len()),
            c,
            buf: vec![0.0; sorted.len()],
        })
    }

    fn eval(&mut self, family: &TransformFamily) -> Result<f64> {
        for (y, &x) in self.buf.iter_mut().zip(self.sorted) {
            *y = family.eval_in_domain(x);
        }
        let h = huber_m(&self.buf)?;
        Ok(self
            .buf
            .iter()
            .zip(&self.scores)
            .map(|(&y, &q)| rho_bw((y - h.location) / h.scale - q, self.c))
            .sum())
    }
}

/// Bisquare-loss distance between the robustly standardized transformed
/// order statistics and the normal scores.
///
/// `sorted` must be sorted ascending and lie in the family's domain.
pub fn robust_criterion(sorted: &[f64], family: &TransformFamily, c: f64) -> Result<f64> {
    for &x in sorted {
        family.kind().check_domain(x)?;
    }
    Criterion::new(sorted, c)?.eval(family)
}

/// Rectification knots at the first and third sample quartiles.
///
/// A quartile that is not a valid knot for `kind` (for Box-Cox the lower knot
/// must lie in (0, 1) and the upper above 1; for Yeo-Johnson they must
/// straddle 0) is dropped with a warning, leaving that side unrectified.
pub fn rectification_knots(
    kind: TransformKind,
    sorted: &[f64],
) -> Result<(Option<f64>, Option<f64>, Vec<String>)> {
    let q1 = quantile_sorted(sorted, 0.25)?;
    let q3 = quantile_sorted(sorted, 0.75)?;
    let mut warnings = Vec::new();
    let mut keep = |knot: f64, lower: bool| {
        let probe = if lower {
            TransformFamily::rectified(kind, 1.0, Some(knot), None)
        } else {
            TransformFamily::rectified(kind, 1.0, None, Some(knot))
        };
        match probe {
            Ok(_) => Some(knot),
            Err(e) => {
                let msg = format!("{e}; that side is left unrectified");
                log::warn!("{msg}");
                warnings.push(msg);
                None
            }
        }
    };
    let lower = keep(q1, true);
    let upper = keep(q3, false);
    Ok((lower, upper, warnings))
}

/// 0/1 weights rejecting values more than the `cutoff_quantile` normal
/// quantile of Huber scales from the Huber location.
pub fn hard_rejection_weights(transformed: &[f64], cutoff_quantile: f64) -> Result<Vec<f64>> {
    let h = huber_m(transformed)?;
    let bound = normal_quantile(cutoff_quantile)? * h.scale;
    Ok(transformed
        .iter()
        .map(|&y| {
            if (y - h.location).abs() <= bound {
                1.0
            } else {
                0.0
            }
        })
        .collect())
}

struct InitialFit {
    family: TransformFamily,
    warnings: Vec<String>,
}

fn initial_fit(sorted: &[f64], spec: &EstimatorSpec, rectify: bool) -> Result<InitialFit> {
    let kind = spec.kind;
    let (lower, upper, mut warnings) = if rectify {
        rectification_knots(kind, sorted)?
    } else {
        (None, None, Vec::new())
    };
    let base = TransformFamily::rectified(kind, 1.0, lower, upper)?;
    let mut criterion = Criterion::new(sorted, spec.c)?;
    let best = minimize_scalar(
        |lambda| match base.with_lambda(lambda) {
            Ok(f) => criterion.eval(&f).unwrap_or(f64::NAN),
            Err(_) => f64::NAN,
        },
        &spec.search,
    )?;
    warnings.extend(boundary_warning(best.lambda, &spec.search));
    Ok(InitialFit {
        family: base.with_lambda(best.lambda)?,
        warnings,
    })
}

/// The unreweighted robust estimate: the minimizer of the robust criterion
/// over the rectified family.
///
/// The returned family keeps its knots; location and scale are the Huber
/// estimates of the rectified transformed data and all weights are 1.
pub fn fit_rawml(data: &[f64], spec: &EstimatorSpec) -> Result<FittedTransform> {
    let sorted = checked_sorted(data, spec.kind, MIN_ROBUST_N)?;
    let init = initial_fit(&sorted, spec, true)?;
    let transformed: Vec<f64> = sorted
        .iter()
        .map(|&x| init.family.eval_in_domain(x))
        .collect();
    let h = huber_m(&transformed)?;
    Ok(FittedTransform {
        family: init.family,
        location: h.location,
        scale: h.scale,
        weights: vec![1.0; data.len()],
        spec: EstimatorSpec {
            method: Method::RawMl,
            ..*spec
        },
        prestandardization: PrestandardizationRecord::identity(),
        initial_lambda: Some(init.family.lambda()),
        trimmed_window: None,
        warnings: init.warnings,
    })
}

/// The reweighted maximum likelihood estimate.
///
/// Starts from the robust criterion's minimizer (over the rectified family
/// for `RewMl`, the plain family for `RewMlNr`), then alternates
/// hard-rejection weighting of the plain transformed data and weighted ML
/// `reweight_steps` times. The reported weights flag the observations
/// outside the cutoff band around the final weighted location and scale.
pub fn fit_rewml(data: &[f64], spec: &EstimatorSpec) -> Result<FittedTransform> {
    let kind = spec.kind;
    let sorted = checked_sorted(data, kind, MIN_ROBUST_N)?;
    let init = initial_fit(&sorted, spec, spec.method != Method::RewMlNr)?;
    let mut warnings = init.warnings;

    // Rectification only steers the initial estimate; weights use the plain family.
    let mut family = init.family.to_plain();
    let mut transformed: Vec<f64> = data.iter().map(|&x| family.eval_in_domain(x)).collect();
    let mut lambda = family.lambda();
    let mut lik = None;
    for _ in 0..spec.reweight_steps {
        let weights = hard_rejection_weights(&transformed, spec.cutoff_quantile)?;
        let mut l = WeightedLikelihood::new(data, &weights, kind)?;
        lambda = l.minimize(&spec.search)?.lambda;
        family = TransformFamily::plain(kind, lambda);
        for (y, &x) in transformed.iter_mut().zip(data) {
            *y = family.eval_in_domain(x);
        }
        lik = Some(l);
    }
    let mut lik = lik.expect("validated specs have at least one reweighting step");
    let (location, var) = lik.moments(lambda);
    if !(var > 0.0) {
        return Err(Error::DegenerateScale);
    }
    let scale = var.sqrt();
    let bound = normal_quantile(spec.cutoff_quantile)? * scale;
    let weights = transformed
        .iter()
        .map(|&y| {
            if (y - location).abs() <= bound {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    warnings.extend(boundary_warning(lambda, &spec.search));
    warnings.dedup();

    Ok(FittedTransform {
        family,
        location,
        scale,
        weights,
        spec: *spec,
        prestandardization: PrestandardizationRecord::identity(),
        initial_lambda: Some(init.family.lambda()),
        trimmed_window: None,
        warnings,
    })
}
