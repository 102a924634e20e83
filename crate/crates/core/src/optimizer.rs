//! Bounded one-dimensional minimization over the transformation parameter.

use crate::error::{Error, Result};

/// Search interval and resolution for `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Final bracket width on `lambda`.
    pub tolerance: f64,
    /// Number of equispaced points of the initial grid, endpoints included.
    pub coarse_grid_points: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            lambda_min: -4.0,
            lambda_max: 6.0,
            tolerance: 1e-4,
            coarse_grid_points: 21,
        }
    }
}

impl SearchConfig {
    pub fn with_range(lambda_min: f64, lambda_max: f64) -> Self {
        SearchConfig {
            lambda_min,
            lambda_max,
            ..SearchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_min.is_finite() && self.lambda_max.is_finite())
            || self.lambda_min >= self.lambda_max
        {
            return Err(Error::InvalidParameter(format!(
                "lambda range [{}, {}] is empty",
                self.lambda_min, self.lambda_max
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be positive".into()));
        }
        if self.coarse_grid_points < 3 {
            return Err(Error::InvalidParameter(
                "coarse grid needs at least 3 points".into(),
            ));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let k = self.coarse_grid_points;
        let step = (self.lambda_max - self.lambda_min) / (k - 1) as f64;
        (0..k)
            .map(|i| {
                if i == k - 1 {
                    self.lambda_max
                } else {
                    self.lambda_min + i as f64 * step
                }
            })
            .collect()
    }
}

/// Location and value of a minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub lambda: f64,
    pub value: f64,
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `objective` over `[lambda_min, lambda_max]`.
///
/// Evaluates a coarse equispaced grid, then refines with Brent's method
/// (golden section plus successive parabolic interpolation) in each of the
/// two grid cells adjacent to the grid minimum. Non-finite objective values
/// count as `+inf`. Among equal grid values the smallest `lambda` wins, and a
/// refinement only replaces the grid minimum if it is strictly better.
pub fn minimize_scalar<F>(mut objective: F, config: &SearchConfig) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    config.validate()?;
    let grid = config.grid();
    let values: Vec<f64> = grid.iter().map(|&l| sanitize(objective(l))).collect();

    let mut best_idx = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best_idx] {
            best_idx = i;
        }
    }
    if !values[best_idx].is_finite() {
        return Err(Error::NoFiniteObjective);
    }

    let mut best = Minimum {
        lambda: grid[best_idx],
        value: values[best_idx],
    };
    let cells = [
        best_idx.checked_sub(1).map(|i| (i, best_idx)),
        (best_idx + 1 < grid.len()).then_some((best_idx, best_idx + 1)),
    ];
    for (lo, hi) in cells.into_iter().flatten() {
        let candidate = brent(&mut objective, grid[lo], grid[hi], config.tolerance);
        if candidate.value < best.value {
            best = candidate;
        }
    }
    Ok(best)
}

/// Brent's derivative-free minimizer on `[a, b]` (Forsythe, Malcolm & Moler `fmin`).
fn brent<F>(objective: &mut F, a: f64, b: f64, tolerance: f64) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    const GOLDEN: f64 = 0.381_966_011_250_105_15;
    let sqrt_eps = f64::EPSILON.sqrt();
    // Terminates once the bracket is narrower than roughly 4 * tol.
    let tol = tolerance / 4.0;

    let (mut a, mut b) = (a, b);
    let mut x = a + GOLDEN * (b - a);
    let (mut v, mut w) = (x, x);
    let mut fx = sanitize(objective(x));
    let (mut fv, mut fw) = (fx, fx);
    let mut d: f64 = 0.0;
    let mut e: f64 = 0.0;

    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let tol1 = sqrt_eps * x.abs() + tol / 3.0;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }

        let mut golden = true;
        if e.abs() > tol1 {
            // Parabola through (v, fv), (w, fw), (x, fx).
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let r = e;
            e = d;
            if p.abs() < (0.5 * q * r).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = sanitize(objective(u));

        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Minimum {
        lambda: x,
        value: fx,
    }
}
