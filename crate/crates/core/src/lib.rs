//! Robust estimation of Box-Cox and Yeo-Johnson transformations that make the
//! central part of a variable approximately standard normal while leaving
//! outliers free to stand out.
//!
//! ```
//! use centnorm::{fit, EstimatorSpec, Method, TransformKind};
//!
//! let data: Vec<f64> = (1..=50).map(|i| (i as f64 / 10.0).exp()).collect();
//! let fitted = fit(&data, &EstimatorSpec::new(Method::RewMl, TransformKind::BoxCox)).unwrap();
//! assert!(fitted.lambda().abs() < 1.0);
//! ```

pub mod error;
pub mod estimators;
pub mod optimizer;
pub mod robust_stats;
pub mod simulation;
pub mod transforms;

pub use error::{Error, Result};
pub use estimators::{
    fit, EstimatorSpec, FittedTransform, Method, Prestandardization, PrestandardizationRecord,
};
pub use optimizer::SearchConfig;
pub use simulation::{
    BiasMseResult, FalsePositiveResult, SensitivityCurve, SimulationScenario, StylizedDistribution,
};
pub use transforms::{TransformFamily, TransformKind};
