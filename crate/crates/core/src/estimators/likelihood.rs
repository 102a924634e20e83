//! Likelihood-based estimators: ML, weighted ML, Carroll and maximum trimmed likelihood.

use super::{boundary_warning, checked_sorted, EstimatorSpec, FittedTransform, Method};
use crate::error::{Error, Result};
use crate::optimizer::{minimize_scalar, Minimum, SearchConfig};
use crate::robust_stats::huber_m;
use crate::transforms::{plain_eval, TransformFamily, TransformKind};

/// Negative weighted normal log-likelihood in `lambda`, constants dropped:
/// `sw/2 * log(var_w) - (lambda - 1) * sum(w * j(x))`.
///
/// Zero-weight observations are skipped entirely, so a fit on weights that
/// zero out some points is bit-identical to a fit on the retained subset.
pub(crate) struct WeightedLikelihood {
    kind: TransformKind,
    points: Vec<(f64, f64)>,
    weight_sum: f64,
    jacobian_sum: f64,
    buf: Vec<f64>,
}

impl WeightedLikelihood {
    pub(crate) fn new(data: &[f64], weights: &[f64], kind: TransformKind) -> Result<Self> {
        if data.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} observations",
                weights.len(),
                data.len()
            )));
        }
        if let Some(&w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidParameter(format!("invalid weight {w}")));
        }
        let points: Vec<(f64, f64)> = data
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&x, &w)| (x, w))
            .collect();
        let weight_sum: f64 = points.iter().map(|p| p.1).sum();
        if weight_sum < 3.0 {
            return Err(Error::TooFewObservations {
                needed: 3,
                got: weight_sum,
            });
        }
        let jacobian_sum = points.iter().map(|&(x, w)| w * kind.log_jacobian(x)).sum();
        Ok(WeightedLikelihood {
            kind,
            buf: Vec::with_capacity(points.len()),
            points,
            weight_sum,
            jacobian_sum,
        })
    }

    /// Weighted mean and (1/sw-normalized) variance of the transformed data.
    pub(crate) fn moments(&mut self, lambda: f64) -> (f64, f64) {
        self.buf.clear();
        self.buf.extend(
            self.points
                .iter()
                .map(|&(x, _)| plain_eval(self.kind, lambda, x)),
        );
        let mean = self
            .points
            .iter()
            .zip(&self.buf)
            .map(|(&(_, w), &y)| w * y)
            .sum::<f64>()
            / self.weight_sum;
        let var = self
            .points
            .iter()
            .zip(&self.buf)
            .map(|(&(_, w), &y)| w * (y - mean) * (y - mean))
            .sum::<f64>()
            / self.weight_sum;
        (mean, var)
    }

    pub(crate) fn objective(&mut self, lambda: f64) -> f64 {
        let (_, var) = self.moments(lambda);
        if !(var > 0.0) || !var.is_finite() {
            return f64::NAN;
        }
        0.5 * self.weight_sum * var.ln() - (lambda - 1.0) * self.jacobian_sum
    }

    pub(crate) fn minimize(&mut self, search: &SearchConfig) -> Result<Minimum> {
        minimize_scalar(|l| self.objective(l), search)
    }
}

fn moments_fit(
    data: &[f64],
    weights: Vec<f64>,
    kind: TransformKind,
    search: &SearchConfig,
    method: Method,
) -> Result<FittedTransform> {
    let mut lik = WeightedLikelihood::new(data, &weights, kind)?;
    let best = lik.minimize(search)?;
    let (location, var) = lik.moments(best.lambda);
    if !(var > 0.0) {
        return Err(Error::DegenerateScale);
    }
    Ok(FittedTransform {
        family: TransformFamily::plain(kind, best.lambda),
        location,
        scale: var.sqrt(),
        weights,
        spec: EstimatorSpec {
            search: *search,
            ..EstimatorSpec::new(method, kind)
        },
        prestandardization: super::PrestandardizationRecord::identity(),
        initial_lambda: None,
        trimmed_window: None,
        warnings: boundary_warning(best.lambda, search).into_iter().collect(),
    })
}

/// Classical maximum likelihood; location and scale are the ML moments of
/// the transformed data.
pub fn fit_ml(data: &[f64], kind: TransformKind, search: &SearchConfig) -> Result<FittedTransform> {
    checked_sorted(data, kind, 3)?;
    moments_fit(data, vec![1.0; data.len()], kind, search, Method::Ml)
}

/// Weighted maximum likelihood; location and scale are the weighted moments.
pub fn fit_wml(
    data: &[f64],
    kind: TransformKind,
    weights: &[f64],
    search: &SearchConfig,
) -> Result<FittedTransform> {
    for &x in data {
        kind.check_domain(x)?;
    }
    moments_fit(data, weights.to_vec(), kind, search, Method::Ml)
}

/// Carroll's estimator: the ML criterion with the Huber M-scale of the
/// transformed data in place of the ML scale.
pub fn fit_carroll(
    data: &[f64],
    kind: TransformKind,
    search: &SearchConfig,
) -> Result<FittedTransform> {
    checked_sorted(data, kind, 3)?;
    let n = data.len() as f64;
    let jacobian_sum: f64 = data.iter().map(|&x| kind.log_jacobian(x)).sum();
    let mut buf = vec![0.0; data.len()];
    let transform_into = |lambda: f64, buf: &mut Vec<f64>| {
        for (y, &x) in buf.iter_mut().zip(data) {
            *y = plain_eval(kind, lambda, x);
        }
    };
    let best = minimize_scalar(
        |lambda| {
            transform_into(lambda, &mut buf);
            match huber_m(&buf) {
                Ok(h) => n * h.scale.ln() - (lambda - 1.0) * jacobian_sum,
                Err(_) => f64::NAN,
            }
        },
        search,
    )?;
    transform_into(best.lambda, &mut buf);
    let h = huber_m(&buf)?;
    Ok(FittedTransform {
        family: TransformFamily::plain(kind, best.lambda),
        location: h.location,
        scale: h.scale,
        weights: vec![1.0; data.len()],
        spec: EstimatorSpec {
            search: *search,
            ..EstimatorSpec::new(Method::Carroll, kind)
        },
        prestandardization: super::PrestandardizationRecord::identity(),
        initial_lambda: None,
        trimmed_window: None,
        warnings: boundary_warning(best.lambda, search).into_iter().collect(),
    })
}

/// Maximum trimmed likelihood.
///
/// Fits ML to each window of `h` consecutive order statistics and keeps the
/// window whose fitted log-likelihood is largest (the first one on ties).
/// Location and scale are the ML moments over that window.
pub fn fit_mtl(
    data: &[f64],
    kind: TransformKind,
    h: usize,
    search: &SearchConfig,
) -> Result<FittedTransform> {
    let n = data.len();
    let sorted = checked_sorted(data, kind, 3)?;
    if !(h > n.div_ceil(2) && h < n) {
        return Err(Error::InvalidParameter(format!(
            "MTL window size {h} must satisfy ceil(n/2) < h < n for n = {n}"
        )));
    }
    let ones = vec![1.0; h];
    let mut best: Option<(usize, Minimum)> = None;
    for start in 0..=(n - h) {
        let window = &sorted[start..start + h];
        let Ok(mut lik) = WeightedLikelihood::new(window, &ones, kind) else {
            continue;
        };
        let Ok(m) = lik.minimize(search) else {
            continue;
        };
        if best.map_or(true, |(_, b)| m.value < b.value) {
            best = Some((start, m));
        }
    }
    let (start, m) = best.ok_or(Error::NoFiniteObjective)?;
    let window = &sorted[start..start + h];
    let mut lik = WeightedLikelihood::new(window, &ones, kind)?;
    let (location, var) = lik.moments(m.lambda);
    Ok(FittedTransform {
        family: TransformFamily::plain(kind, m.lambda),
        location,
        scale: var.sqrt(),
        weights: vec![1.0; n],
        spec: EstimatorSpec {
            search: *search,
            trim_fraction: h as f64 / n as f64,
            ..EstimatorSpec::new(Method::Mtl, kind)
        },
        prestandardization: super::PrestandardizationRecord::identity(),
        initial_lambda: None,
        trimmed_window: Some(start..start + h),
        warnings: boundary_warning(m.lambda, search).into_iter().collect(),
    })
}
