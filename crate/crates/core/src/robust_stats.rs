//! Univariate robust building blocks: median, MAD, Huber M-estimates,
//! Tukey's bisquare loss, and normal quantiles for QQ construction.

use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// `1 / Φ⁻¹(0.75)`: makes the MAD consistent for the normal standard deviation.
pub const MAD_CONSISTENCY: f64 = 1.482_602_218_505_602;

/// Clipping constant of the Huber ψ-function, for both location and scale.
pub const HUBER_TUNING: f64 = 1.5;

pub const HUBER_TOLERANCE: f64 = 1e-6;
pub const HUBER_MAX_ITER: usize = 50;

/// Huber M-estimates of location and scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberEstimates {
    pub location: f64,
    pub scale: f64,
    pub iterations: usize,
    /// False if the iteration cap was hit; the last iterate is still returned.
    pub converged: bool,
}

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().find(|x| !x.is_finite()) {
        Some(&x) => Err(Error::NonFinite(x)),
        None => Ok(()),
    }
}

/// Median of a slice that is already sorted ascending.
pub fn median_sorted(sorted: &[f64]) -> Result<f64> {
    let n = sorted.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Sample median; the mean of the two middle order statistics for even `n`.
pub fn median(data: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty);
    }
    check_finite(data)?;
    let mut buf = data.to_vec();
    Ok(median_in_place(&mut buf))
}

/// Median by selection; reorders `buf`. `buf` must be nonempty and NaN-free.
fn median_in_place(buf: &mut [f64]) -> f64 {
    let n = buf.len();
    let mid = n / 2;
    let (lower, &mut upper_mid, _) = buf.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper_mid
    } else {
        let lower_mid = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_mid + upper_mid)
    }
}

/// Normalized median absolute deviation from the median.
///
/// Returns 0 for data with more than half its values tied; callers that need
/// a positive scale must treat that as degenerate.
pub fn mad(data: &[f64]) -> Result<f64> {
    let center = median(data)?;
    Ok(mad_about(data, center))
}

fn mad_about(data: &[f64], center: f64) -> f64 {
    let mut dev: Vec<f64> = data.iter().map(|x| (x - center).abs()).collect();
    MAD_CONSISTENCY * median_in_place(&mut dev)
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::Empty);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Probability(p));
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// `E[min(Z², b²)]` for standard normal `Z`: the consistency factor of
/// Huber's Proposal-2 scale.
fn huber_scale_consistency(b: f64) -> f64 {
    let upper_tail = 0.5 * erfc(b / std::f64::consts::SQRT_2);
    let density = (-0.5 * b * b).exp() / (2.0 * std::f64::consts::PI).sqrt();
    (1.0 - 2.0 * upper_tail) - 2.0 * b * density + 2.0 * b * b * upper_tail
}

/// Joint Huber M-estimates of location and Proposal-2 scale.
///
/// Starts at (median, MAD) and iterates both estimating equations together
/// until the location and scale steps are below `HUBER_TOLERANCE` times the
/// current scale, or `HUBER_MAX_ITER` iterations.
pub fn huber_m(data: &[f64]) -> Result<HuberEstimates> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: n as f64,
        });
    }
    check_finite(data)?;
    let mut mu = median(data)?;
    let mut sigma = mad_about(data, mu);
    if !(sigma > 0.0) {
        return Err(Error::DegenerateScale);
    }
    let b = HUBER_TUNING;
    let beta = huber_scale_consistency(b);
    let nf = n as f64;

    let mut iterations = 0;
    let mut converged = false;
    while iterations < HUBER_MAX_ITER {
        iterations += 1;
        let (mut sum_psi, mut sum_psi2) = (0.0, 0.0);
        for &x in data {
            let psi = ((x - mu) / sigma).clamp(-b, b);
            sum_psi += psi;
            sum_psi2 += psi * psi;
        }
        let new_mu = mu + sigma * sum_psi / nf;
        let new_sigma = sigma * (sum_psi2 / (nf * beta)).sqrt();
        if !(new_sigma > 0.0) || !new_sigma.is_finite() {
            return Err(Error::DegenerateScale);
        }
        let done = (new_mu - mu).abs() < HUBER_TOLERANCE * sigma
            && (new_sigma - sigma).abs() < HUBER_TOLERANCE * sigma;
        mu = new_mu;
        sigma = new_sigma;
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        log::debug!("Huber M-estimate did not converge in {HUBER_MAX_ITER} iterations");
    }
    Ok(HuberEstimates {
        location: mu,
        scale: sigma,
        iterations,
        converged,
    })
}

/// Tukey's bisquare loss, normalized to saturate at 1 for `|t| >= c`.
#[inline]
pub fn rho_bw(t: f64, c: f64) -> f64 {
    let u = t / c;
    if u.abs() >= 1.0 {
        1.0
    } else {
        let v = 1.0 - u * u;
        1.0 - v * v * v
    }
}

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

// Wichura's AS 241 (PPND16) rational approximations, lowest degree first.
const CENTRAL_NUM: [f64; 8] = [
    3.387_132_872_796_366_6,
    1.331_416_678_917_843_8e2,
    1.971_590_950_306_551_4e3,
    1.373_169_376_550_946e4,
    4.592_195_393_154_987e4,
    6.726_577_092_700_87e4,
    3.343_057_558_358_813e4,
    2.509_080_928_730_122_7e3,
];
const CENTRAL_DEN: [f64; 8] = [
    1.0,
    4.231_333_070_160_091e1,
    6.871_870_074_920_579e2,
    5.394_196_021_424_751e3,
    2.121_379_430_158_659_7e4,
    3.930_789_580_009_271e4,
    2.872_908_573_572_194_3e4,
    5.226_495_278_852_854e3,
];
const NEAR_NUM: [f64; 8] = [
    1.423_437_110_749_683_5,
    4.630_337_846_156_545,
    5.769_497_221_460_691,
    3.647_848_324_763_204_5,
    1.270_458_252_452_368_4,
    2.417_807_251_774_506e-1,
    2.272_384_498_926_918_4e-2,
    7.745_450_142_783_414e-4,
];
const NEAR_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_759,
    1.676_384_830_183_803_8,
    6.897_673_349_851e-1,
    1.481_039_764_274_800_8e-1,
    1.519_866_656_361_645_7e-2,
    5.475_938_084_995_345e-4,
    1.050_750_071_644_416_8e-9,
];
const FAR_NUM: [f64; 8] = [
    6.657_904_643_501_103,
    5.463_784_911_164_114,
    1.784_826_539_917_291_3,
    2.965_605_718_285_048_7e-1,
    2.653_218_952_657_612_4e-2,
    1.242_660_947_388_078_4e-3,
    2.711_555_568_743_487_6e-5,
    2.010_334_399_292_288_1e-7,
];
const FAR_DEN: [f64; 8] = [
    1.0,
    5.998_322_065_558_879e-1,
    1.369_298_809_227_358e-1,
    1.487_536_129_085_061_5e-2,
    7.868_691_311_456_133e-4,
    1.846_318_317_510_054_8e-5,
    1.421_511_758_316_446e-7,
    2.044_263_103_389_939_7e-15,
];

/// Standard normal quantile function `Φ⁻¹(p)`.
///
/// AS 241 rational approximation followed by one Newton step on the lower
/// tail probability.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Probability(p));
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let z = q * poly(&CENTRAL_NUM, r) / poly(&CENTRAL_DEN, r);
        return Ok(polish(z, p));
    }
    // Work on the lower tail; 1 - p is exact for p >= 0.5.
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let r = (-tail.ln()).sqrt();
    let z = if r <= 5.0 {
        let r = r - 1.6;
        poly(&NEAR_NUM, r) / poly(&NEAR_DEN, r)
    } else {
        let r = r - 5.0;
        poly(&FAR_NUM, r) / poly(&FAR_DEN, r)
    };
    let z = polish(-z, tail);
    Ok(if q < 0.0 { z } else { -z })
}

fn polish(z: f64, p: f64) -> f64 {
    let d = normal_density(z);
    if d > 0.0 {
        z - (normal_cdf(z) - p) / d
    } else {
        z
    }
}

/// QQ plotting positions `(i - 1/3) / (n + 1/3)`, `i = 1..=n`.
pub fn plotting_positions(n: usize) -> Vec<f64> {
    let denom = n as f64 + 1.0 / 3.0;
    (1..=n).map(|i| (i as f64 - 1.0 / 3.0) / denom).collect()
}

/// Normal quantiles at the plotting positions.
pub fn normal_scores(n: usize) -> Vec<f64> {
    plotting_positions(n)
        .into_iter()
        .map(|p| normal_quantile(p).expect("plotting positions lie in (0, 1)"))
        .collect()
}
