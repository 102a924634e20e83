use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::robust_stats::{mad, median};
use crate::transforms::TransformKind;

/// How raw data is rescaled before a transformation is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Prestandardization {
    None,
    /// `(x - median) / mad`. Yeo-Johnson only.
    Mad,
    /// `exp((log x - median(log x)) / mad(log x))`. Box-Cox only.
    LogMad,
    /// `x / median`. Box-Cox only.
    Median,
}

impl Prestandardization {
    /// `Mad` for Yeo-Johnson, `LogMad` for Box-Cox.
    pub fn default_for(kind: TransformKind) -> Self {
        match kind {
            TransformKind::YeoJohnson => Prestandardization::Mad,
            TransformKind::BoxCox => Prestandardization::LogMad,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Prestandardization::None => "none",
            Prestandardization::Mad => "mad",
            Prestandardization::LogMad => "logmad",
            Prestandardization::Median => "median",
        }
    }

    pub(crate) fn check_kind(self, kind: TransformKind) -> Result<()> {
        let ok = match self {
            Prestandardization::None => true,
            Prestandardization::Mad => kind == TransformKind::YeoJohnson,
            Prestandardization::LogMad | Prestandardization::Median => {
                kind == TransformKind::BoxCox
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "prestandardization '{}' does not apply to the {} transform",
                self.name(),
                kind.name()
            )))
        }
    }
}

impl fmt::Display for Prestandardization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Prestandardization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Prestandardization::None),
            "mad" => Ok(Prestandardization::Mad),
            "logmad" => Ok(Prestandardization::LogMad),
            "median" => Ok(Prestandardization::Median),
            _ => Err(Error::InvalidParameter(format!(
                "unknown prestandardization '{s}'"
            ))),
        }
    }
}

/// The constants of a prestandardization, enough to apply and invert it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrestandardizationRecord {
    pub mode: Prestandardization,
    /// Median of the data (`Mad`) or of its logarithm (`LogMad`); 0 otherwise.
    pub center: f64,
    /// MAD (`Mad`, `LogMad`) or median (`Median`); 1 for `None`.
    pub scale: f64,
}

impl PrestandardizationRecord {
    pub fn identity() -> Self {
        PrestandardizationRecord {
            mode: Prestandardization::None,
            center: 0.0,
            scale: 1.0,
        }
    }

    pub fn apply(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        Ok(match self.mode {
            Prestandardization::None => x,
            Prestandardization::Mad => (x - self.center) / self.scale,
            Prestandardization::LogMad => {
                require_positive(x)?;
                ((x.ln() - self.center) / self.scale).exp()
            }
            Prestandardization::Median => {
                require_positive(x)?;
                x / self.scale
            }
        })
    }

    pub fn invert(&self, z: f64) -> Result<f64> {
        let x = match self.mode {
            Prestandardization::None => z,
            Prestandardization::Mad => z * self.scale + self.center,
            Prestandardization::LogMad => (z.ln() * self.scale + self.center).exp(),
            Prestandardization::Median => z * self.scale,
        };
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::NonFinite(x))
        }
    }
}

fn require_positive(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            family: TransformKind::BoxCox.name(),
            value: x,
        })
    }
}

/// Rescales `data` and returns the constants used.
pub fn prestandardize(
    data: &[f64],
    mode: Prestandardization,
) -> Result<(Vec<f64>, PrestandardizationRecord)> {
    if data.is_empty() {
        return Err(Error::Empty);
    }
    let record = match mode {
        Prestandardization::None => PrestandardizationRecord::identity(),
        Prestandardization::Mad => {
            let scale = mad(data)?;
            if !(scale > 0.0) {
                return Err(Error::DegenerateScale);
            }
            PrestandardizationRecord {
                mode,
                center: median(data)?,
                scale,
            }
        }
        Prestandardization::LogMad => {
            for &x in data {
                require_positive(x)?;
            }
            let logs: Vec<f64> = data.iter().map(|x| x.ln()).collect();
            let scale = mad(&logs)?;
            if !(scale > 0.0) {
                return Err(Error::DegenerateScale);
            }
            PrestandardizationRecord {
                mode,
                center: median(&logs)?,
                scale,
            }
        }
        Prestandardization::Median => {
            for &x in data {
                require_positive(x)?;
            }
            PrestandardizationRecord {
                mode,
                center: 0.0,
                scale: median(data)?,
            }
        }
    };
    let out = data
        .iter()
        .map(|&x| record.apply(x))
        .collect::<Result<Vec<_>>>()?;
    Ok((out, record))
}
