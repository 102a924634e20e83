//! Box-Cox and Yeo-Johnson power transforms and their rectified variants.
//!
//! A rectified transform follows the ordinary power transform up to a knot
//! and continues along its tangent line beyond it: on the right when
//! `lambda < 1` (upper knot) and on the left when `lambda > 1` (lower knot).
//! The switch is C¹, and the rectified side has unbounded range. At
//! `lambda == 1` both families are affine and rectification does nothing.

use std::fmt;

use crate::error::{Error, Result};

/// Below this magnitude a power parameter is treated as exactly zero and the
/// logarithmic branch is used.
pub const LOG_BRANCH_EPS: f64 = 1e-10;

/// Which power-transform family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    BoxCox,
    YeoJohnson,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::BoxCox => "Box-Cox",
            TransformKind::YeoJohnson => "Yeo-Johnson",
        }
    }

    /// Short identifier used on the command line and in fit files.
    pub fn short_name(self) -> &'static str {
        match self {
            TransformKind::BoxCox => "bc",
            TransformKind::YeoJohnson => "yj",
        }
    }

    /// Checks that `x` lies in the domain of the family.
    pub fn check_domain(self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        if self == TransformKind::BoxCox && x <= 0.0 {
            return Err(Error::Domain {
                family: self.name(),
                value: x,
            });
        }
        Ok(())
    }

    /// The `lambda`-free factor of the log-Jacobian: `d/dx g_λ(x) = exp((λ - 1) * j(x))`.
    ///
    /// `log(x)` for Box-Cox, `sign(x) * log(1 + |x|)` for Yeo-Johnson.
    pub fn log_jacobian(self, x: f64) -> f64 {
        match self {
            TransformKind::BoxCox => x.ln(),
            TransformKind::YeoJohnson => {
                if x >= 0.0 {
                    x.ln_1p()
                } else {
                    -(-x).ln_1p()
                }
            }
        }
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for TransformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bc" | "boxcox" | "box-cox" => Ok(TransformKind::BoxCox),
            "yj" | "yeojohnson" | "yeo-johnson" => Ok(TransformKind::YeoJohnson),
            _ => Err(Error::InvalidParameter(format!(
                "unknown transform family '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

/// Linear continuation of the transform beyond a knot.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Tail {
    side: Side,
    knot: f64,
    value: f64,
    slope: f64,
}

/// A power transform with fixed `lambda`, optionally rectified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformFamily {
    kind: TransformKind,
    lambda: f64,
    lower_knot: Option<f64>,
    upper_knot: Option<f64>,
    tail: Option<Tail>,
}

impl TransformFamily {
    /// The ordinary (unrectified) transform.
    pub fn plain(kind: TransformKind, lambda: f64) -> Self {
        TransformFamily {
            kind,
            lambda,
            lower_knot: None,
            upper_knot: None,
            tail: None,
        }
    }

    /// A rectified transform.
    ///
    /// The upper knot is used when `lambda < 1` and must exceed 1 (Box-Cox) or
    /// 0 (Yeo-Johnson); the lower knot is used when `lambda > 1` and must lie
    /// in (0, 1) (Box-Cox) or below 0 (Yeo-Johnson). A knot that is absent on
    /// the active side leaves that side unrectified.
    pub fn rectified(
        kind: TransformKind,
        lambda: f64,
        lower_knot: Option<f64>,
        upper_knot: Option<f64>,
    ) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::NonFinite(lambda));
        }
        if let Some(cl) = lower_knot {
            validate_lower_knot(kind, cl)?;
        }
        if let Some(cu) = upper_knot {
            validate_upper_knot(kind, cu)?;
        }
        let mut family = TransformFamily {
            kind,
            lambda,
            lower_knot,
            upper_knot,
            tail: None,
        };
        let active = if lambda < 1.0 {
            upper_knot.map(|k| (Side::Upper, k))
        } else if lambda > 1.0 {
            lower_knot.map(|k| (Side::Lower, k))
        } else {
            None
        };
        family.tail = active.map(|(side, knot)| Tail {
            side,
            knot,
            value: plain_eval(kind, lambda, knot),
            slope: plain_derivative(kind, lambda, knot),
        });
        Ok(family)
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn lower_knot(&self) -> Option<f64> {
        self.lower_knot
    }

    pub fn upper_knot(&self) -> Option<f64> {
        self.upper_knot
    }

    /// True if any knot is attached, regardless of whether it is active at this `lambda`.
    pub fn is_rectified(&self) -> bool {
        self.lower_knot.is_some() || self.upper_knot.is_some()
    }

    /// The same family without knots.
    pub fn to_plain(&self) -> Self {
        TransformFamily::plain(self.kind, self.lambda)
    }

    /// The same knots at a different `lambda`.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if self.is_rectified() {
            TransformFamily::rectified(self.kind, lambda, self.lower_knot, self.upper_knot)
        } else {
            Ok(TransformFamily::plain(self.kind, lambda))
        }
    }

    /// The transformed value of `x`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        self.kind.check_domain(x)?;
        Ok(self.eval_in_domain(x))
    }

    /// Evaluates without the domain check; callers guarantee `x` is valid.
    pub(crate) fn eval_in_domain(&self, x: f64) -> f64 {
        if let Some(t) = self.tail {
            if t.beyond(x) {
                return t.value + (x - t.knot) * t.slope;
            }
        }
        plain_eval(self.kind, self.lambda, x)
    }

    /// `d/dx` of [`evaluate`](Self::evaluate); strictly positive on the domain.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        self.kind.check_domain(x)?;
        if let Some(t) = self.tail {
            if t.beyond(x) {
                return Ok(t.slope);
            }
        }
        Ok(plain_derivative(self.kind, self.lambda, x))
    }

    /// The open interval of attainable outputs.
    pub fn range(&self) -> (f64, f64) {
        let (mut lo, mut hi) = plain_range(self.kind, self.lambda);
        match self.tail.map(|t| t.side) {
            Some(Side::Upper) => hi = f64::INFINITY,
            Some(Side::Lower) => {
                lo = match self.kind {
                    // The tangent line still has to stay on x > 0.
                    TransformKind::BoxCox => {
                        let t = self.tail.unwrap();
                        t.value - t.knot * t.slope
                    }
                    TransformKind::YeoJohnson => f64::NEG_INFINITY,
                }
            }
            None => {}
        }
        (lo, hi)
    }

    /// The `x` with `evaluate(x) == y`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(Error::NonFinite(y));
        }
        let range_err = || Error::Range {
            family: self.kind.name(),
            lambda: self.lambda,
            value: y,
        };
        let x = match self.tail {
            Some(t) if t.image_beyond(y) => t.knot + (y - t.value) / t.slope,
            _ => plain_inverse(self.kind, self.lambda, y).ok_or_else(range_err)?,
        };
        if !x.is_finite() || (self.kind == TransformKind::BoxCox && x <= 0.0) {
            return Err(range_err());
        }
        Ok(x)
    }
}

impl Tail {
    fn beyond(&self, x: f64) -> bool {
        match self.side {
            Side::Upper => x > self.knot,
            Side::Lower => x < self.knot,
        }
    }

    fn image_beyond(&self, y: f64) -> bool {
        match self.side {
            Side::Upper => y > self.value,
            Side::Lower => y < self.value,
        }
    }
}

fn validate_lower_knot(kind: TransformKind, cl: f64) -> Result<()> {
    let reason = match kind {
        TransformKind::BoxCox if !(cl > 0.0 && cl < 1.0) => "lower knot must lie in (0, 1)",
        TransformKind::YeoJohnson if !(cl < 0.0) => "lower knot must be negative",
        _ if !cl.is_finite() => "knot must be finite",
        _ => return Ok(()),
    };
    Err(Error::Knot {
        family: kind.name(),
        knot: cl,
        reason,
    })
}

fn validate_upper_knot(kind: TransformKind, cu: f64) -> Result<()> {
    let reason = match kind {
        _ if !cu.is_finite() => "knot must be finite",
        TransformKind::BoxCox if !(cu > 1.0) => "upper knot must exceed 1",
        TransformKind::YeoJohnson if !(cu > 0.0) => "upper knot must be positive",
        _ => return Ok(()),
    };
    Err(Error::Knot {
        family: kind.name(),
        knot: cu,
        reason,
    })
}

/// `(exp(p * l) - 1) / p`, i.e. `((1 + u)^p - 1) / p` with `l = log(1 + u)`,
/// taking the limit `l` at `p == 0`.
#[inline]
fn power_ratio(p: f64, l: f64) -> f64 {
    if p.abs() < LOG_BRANCH_EPS {
        l
    } else {
        (p * l).exp_m1() / p
    }
}

/// Inverse of [`power_ratio`] in `l`; `None` when `1 + p * y <= 0`.
#[inline]
fn power_ratio_inverse(p: f64, y: f64) -> Option<f64> {
    if p.abs() < LOG_BRANCH_EPS {
        Some(y)
    } else {
        let t = p * y;
        if t <= -1.0 {
            None
        } else {
            Some(t.ln_1p() / p)
        }
    }
}

pub(crate) fn plain_eval(kind: TransformKind, lambda: f64, x: f64) -> f64 {
    if lambda == 1.0 {
        return match kind {
            TransformKind::BoxCox => x - 1.0,
            TransformKind::YeoJohnson => x,
        };
    }
    match kind {
        TransformKind::BoxCox => power_ratio(lambda, x.ln()),
        TransformKind::YeoJohnson => {
            if x >= 0.0 {
                power_ratio(lambda, x.ln_1p())
            } else {
                -power_ratio(2.0 - lambda, (-x).ln_1p())
            }
        }
    }
}

fn plain_derivative(kind: TransformKind, lambda: f64, x: f64) -> f64 {
    ((lambda - 1.0) * kind.log_jacobian(x)).exp()
}

fn plain_inverse(kind: TransformKind, lambda: f64, y: f64) -> Option<f64> {
    if lambda == 1.0 {
        return match kind {
            TransformKind::BoxCox => Some(y + 1.0),
            TransformKind::YeoJohnson => Some(y),
        };
    }
    match kind {
        TransformKind::BoxCox => power_ratio_inverse(lambda, y).map(f64::exp),
        TransformKind::YeoJohnson => {
            if y >= 0.0 {
                power_ratio_inverse(lambda, y).map(f64::exp_m1)
            } else {
                power_ratio_inverse(2.0 - lambda, -y).map(|l| -l.exp_m1())
            }
        }
    }
}

fn plain_range(kind: TransformKind, lambda: f64) -> (f64, f64) {
    let inf = f64::INFINITY;
    match kind {
        TransformKind::BoxCox => {
            if lambda.abs() < LOG_BRANCH_EPS {
                (-inf, inf)
            } else if lambda > 0.0 {
                (-1.0 / lambda, inf)
            } else {
                (-inf, 1.0 / lambda.abs())
            }
        }
        TransformKind::YeoJohnson => {
            if lambda > 2.0 && (lambda - 2.0).abs() >= LOG_BRANCH_EPS {
                (-1.0 / (lambda - 2.0), inf)
            } else if lambda < 0.0 && lambda.abs() >= LOG_BRANCH_EPS {
                (-inf, 1.0 / lambda.abs())
            } else {
                (-inf, inf)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::E;
    use TransformKind::{BoxCox, YeoJohnson};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn identity_and_log_branches() {
        let yj1 = TransformFamily::plain(YeoJohnson, 1.0);
        assert_eq!(yj1.evaluate(3.7).unwrap(), 3.7);
        assert!(close(
            TransformFamily::plain(BoxCox, 0.0).evaluate(E).unwrap(),
            1.0,
            1e-15
        ));
        let yj2 = TransformFamily::plain(YeoJohnson, 2.0);
        assert!(close(yj2.evaluate(-(E - 1.0)).unwrap(), -1.0, 1e-15));
    }

    #[test]
    fn box_cox_minus_one_is_bounded_by_one() {
        let bc = TransformFamily::plain(BoxCox, -1.0);
        let v = bc.evaluate(1e6).unwrap();
        assert!(v < 1.0 && v > 1.0 - 1e-5);
        assert_eq!(bc.range(), (f64::NEG_INFINITY, 1.0));
    }

    #[test]
    fn rectified_tail_is_tangent_line() {
        let plain = TransformFamily::plain(YeoJohnson, 0.5);
        let rect = TransformFamily::rectified(YeoJohnson, 0.5, None, Some(1.0)).unwrap();
        assert_eq!(rect.evaluate(1.0).unwrap(), plain.evaluate(1.0).unwrap());
        let d = 0.3;
        let expected = plain.evaluate(1.0).unwrap() + d * plain.derivative(1.0).unwrap();
        assert!(close(rect.evaluate(1.0 + d).unwrap(), expected, 1e-15));
        assert!(rect.evaluate(1.0 + d).unwrap() > plain.evaluate(1.0 + d).unwrap());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(
            TransformFamily::plain(YeoJohnson, 1.0)
                .derivative(-4.2)
                .unwrap(),
            1.0
        );
        assert!(close(
            TransformFamily::plain(BoxCox, 2.0).derivative(3.0).unwrap(),
            3.0,
            1e-15
        ));
        let rect = TransformFamily::rectified(YeoJohnson, 0.5, None, Some(1.0)).unwrap();
        assert!(close(rect.derivative(5.0).unwrap(), 2f64.powf(-0.5), 1e-15));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            TransformFamily::plain(YeoJohnson, 1.0)
                .inverse(-2.5)
                .unwrap(),
            -2.5
        );
        assert!(close(
            TransformFamily::plain(BoxCox, 0.0).inverse(1.0).unwrap(),
            E,
            1e-15
        ));
    }

    #[test]
    fn yeo_johnson_half_round_trips_normal_grid() {
        let yj = TransformFamily::plain(YeoJohnson, 0.5);
        for i in 1..=99 {
            let y = crate::robust_stats::normal_quantile(i as f64 / 100.0).unwrap();
            let back = yj.evaluate(yj.inverse(y).unwrap()).unwrap();
            assert!(close(back, y, 1e-10), "{y} -> {back}");
        }
    }

    #[test]
    fn domain_and_range_errors() {
        let bc = TransformFamily::plain(BoxCox, 0.5);
        assert!(matches!(bc.evaluate(0.0), Err(Error::Domain { .. })));
        assert!(matches!(bc.evaluate(-1.0), Err(Error::Domain { .. })));
        assert!(matches!(bc.evaluate(f64::NAN), Err(Error::NonFinite(_))));
        assert!(matches!(bc.inverse(-2.0), Err(Error::Range { .. })));
        let yj = TransformFamily::plain(YeoJohnson, -1.0);
        assert!(matches!(yj.inverse(1.5), Err(Error::Range { .. })));
        let yj3 = TransformFamily::plain(YeoJohnson, 3.0);
        assert!(matches!(yj3.inverse(-1.5), Err(Error::Range { .. })));
        assert!(yj3.inverse(-0.5).is_ok());
    }

    #[test]
    fn knot_validation() {
        assert!(TransformFamily::rectified(BoxCox, 0.5, None, Some(0.9)).is_err());
        assert!(TransformFamily::rectified(BoxCox, 1.5, Some(1.2), None).is_err());
        assert!(TransformFamily::rectified(YeoJohnson, 0.5, None, Some(-0.1)).is_err());
        assert!(TransformFamily::rectified(YeoJohnson, 1.5, Some(0.1), None).is_err());
        assert!(TransformFamily::rectified(BoxCox, 0.5, Some(0.8), Some(1.2)).is_ok());
    }

    #[test]
    fn lambda_one_rectification_is_noop() {
        for kind in [BoxCox, YeoJohnson] {
            let (cl, cu) = match kind {
                BoxCox => (0.5, 2.0),
                YeoJohnson => (-1.0, 1.0),
            };
            let rect = TransformFamily::rectified(kind, 1.0, Some(cl), Some(cu)).unwrap();
            let plain = TransformFamily::plain(kind, 1.0);
            for x in [0.1, 0.7, 1.5, 3.0, 10.0] {
                assert_eq!(rect.evaluate(x).unwrap(), plain.evaluate(x).unwrap());
            }
        }
    }

    #[test]
    fn rectified_box_cox_inverse_respects_positive_domain() {
        let rect = TransformFamily::rectified(BoxCox, 2.0, Some(0.5), None).unwrap();
        let (lo, _) = rect.range();
        assert!(rect.inverse(lo - 0.1).is_err());
        let x = rect.inverse(lo + 1e-3).unwrap();
        assert!(x > 0.0);
    }

    #[test]
    fn lambda_continuity_across_log_branches() {
        for x in [0.01, 0.3, 1.0, 2.5, 40.0] {
            let log = TransformFamily::plain(BoxCox, 0.0).evaluate(x).unwrap();
            for l in [-1e-8, 1e-8] {
                assert!(
                    (TransformFamily::plain(BoxCox, l).evaluate(x).unwrap() - log).abs() < 1e-6
                );
            }
        }
        for x in [-40.0, -2.5, -0.3, 0.0, 0.3, 2.5] {
            let at0 = TransformFamily::plain(YeoJohnson, 0.0).evaluate(x).unwrap();
            let at2 = TransformFamily::plain(YeoJohnson, 2.0).evaluate(x).unwrap();
            for d in [-1e-8, 1e-8] {
                let near0 = TransformFamily::plain(YeoJohnson, d).evaluate(x).unwrap();
                let near2 = TransformFamily::plain(YeoJohnson, 2.0 + d)
                    .evaluate(x)
                    .unwrap();
                assert!(close(near0, at0, 1e-6), "x={x} d={d}: {near0} vs {at0}");
                assert!(close(near2, at2, 1e-6), "x={x} d={d}: {near2} vs {at2}");
            }
        }
    }

    #[test]
    fn plain_outputs_respect_range() {
        for &l in &[-2.0, -0.5, 0.5, 2.0] {
            let bc = TransformFamily::plain(BoxCox, l);
            let (lo, hi) = bc.range();
            for x in [1e-6, 0.2, 1.0, 7.0, 1e6] {
                let y = bc.evaluate(x).unwrap();
                assert!(y > lo && y < hi, "bc lambda={l} x={x} y={y}");
            }
        }
        for &l in &[-1.5, 0.5, 1.5, 3.5] {
            let yj = TransformFamily::plain(YeoJohnson, l);
            let (lo, hi) = yj.range();
            for x in [-1e6, -3.0, 0.0, 3.0, 1e6] {
                let y = yj.evaluate(x).unwrap();
                assert!(y > lo && y < hi, "yj lambda={l} x={x} y={y}");
            }
        }
    }

    fn family_strategy() -> impl Strategy<Value = TransformFamily> {
        (
            any::<bool>(),
            -4.0f64..6.0,
            any::<bool>(),
            0.05f64..0.95,
            1.05f64..4.0,
        )
            .prop_map(|(bc, lambda, rect, a, b)| {
                let kind = if bc { BoxCox } else { YeoJohnson };
                if !rect {
                    return TransformFamily::plain(kind, lambda);
                }
                let (cl, cu) = match kind {
                    BoxCox => (a, b),
                    YeoJohnson => (-b, a),
                };
                TransformFamily::rectified(kind, lambda, Some(cl), Some(cu)).unwrap()
            })
    }

    fn point_for(kind: TransformKind, u: f64) -> f64 {
        match kind {
            BoxCox => u.exp(),
            YeoJohnson => u,
        }
    }

    proptest! {
        #[test]
        fn monotone(f in family_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (x1, x2) = (point_for(f.kind(), lo), point_for(f.kind(), hi));
            prop_assert!(f.evaluate(x1).unwrap() < f.evaluate(x2).unwrap());
            prop_assert!(f.derivative(x1).unwrap() > 0.0);
        }

        #[test]
        fn round_trip_from_x(f in family_strategy(), u in -4.0f64..4.0) {
            let x = point_for(f.kind(), u);
            let y = f.evaluate(x).unwrap();
            let back = f.inverse(y).unwrap();
            prop_assert!(close(f.evaluate(back).unwrap(), y, 1e-10));
            // Where the transform is nearly flat, x is only determined up to
            // the rounding of y divided by the slope.
            let slack = 4.0 * f64::EPSILON * (1.0 + y.abs()) / f.derivative(x).unwrap();
            prop_assert!(
                (back - x).abs() <= 1e-10 * (1.0 + x.abs()) + slack,
                "{:?} x={} y={} back={}", f, x, y, back
            );
        }

        #[test]
        fn round_trip_from_y(f in family_strategy(), t in 0.001f64..0.999) {
            let (lo, hi) = f.range();
            let lo = if lo.is_finite() { lo } else { -20.0 };
            let hi = if hi.is_finite() { hi } else { 20.0 };
            let y = lo + t * (hi - lo);
            if let Ok(x) = f.inverse(y) {
                prop_assert!(close(f.evaluate(x).unwrap(), y, 1e-10));
            }
        }

        #[test]
        fn c1_at_knots(f in family_strategy()) {
            for knot in [f.lower_knot(), f.upper_knot()].into_iter().flatten() {
                let plain = f.to_plain();
                prop_assert_eq!(f.evaluate(knot).unwrap(), plain.evaluate(knot).unwrap());
                let h = 1e-7 * (1.0 + knot.abs());
                let left = (f.evaluate(knot).unwrap() - f.evaluate(knot - h).unwrap()) / h;
                let right = (f.evaluate(knot + h).unwrap() - f.evaluate(knot).unwrap()) / h;
                let d = plain.derivative(knot).unwrap();
                prop_assert!(close(left, d, 1e-5) && close(right, d, 1e-5));
            }
            // The analytic slope of the active tail equals the plain derivative at its knot.
            let active = if f.lambda() < 1.0 {
                f.upper_knot().map(|k| (k, k + 1.0))
            } else if f.lambda() > 1.0 {
                f.lower_knot().map(|k| (k, if f.kind() == BoxCox { k / 2.0 } else { k - 1.0 }))
            } else {
                None
            };
            if let Some((knot, beyond)) = active {
                let d = f.to_plain().derivative(knot).unwrap();
                prop_assert!(close(f.derivative(beyond).unwrap(), d, 1e-12));
            }
        }

        #[test]
        fn rectified_side_is_unbounded(f in family_strategy()) {
            prop_assume!(f.is_rectified() && f.lambda() != 1.0);
            let (lo, hi) = f.range();
            if f.lambda() < 1.0 {
                prop_assert!(hi == f64::INFINITY);
            } else if f.kind() == YeoJohnson {
                prop_assert!(lo == f64::NEG_INFINITY);
            }
        }
    }
}
