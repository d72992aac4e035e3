//! Scripted numerical studies. Every study takes a serializable config,
//! returns a serializable report that embeds the config and its hash, and
//! can render itself as a flat CSV table.

mod continuity;
mod convergence;
mod divergence;
mod singularity;
mod stability;
mod validation;

pub use continuity::{continuity_study, ContinuityConfig, ContinuityMember, ContinuityReport};
pub use convergence::{convergence_study, ConvergenceConfig, ConvergenceLevel, ConvergenceReport};
pub use divergence::{divergence_study, DivergenceConfig, DivergenceEntry, DivergenceReport};
pub use singularity::{inward_bisector, singularity_fit, SingularityConfig, SingularityReport};
pub use stability::{stability_sweep, PerturbationMode, StabilityConfig, StabilityPoint, StabilityReport};
pub use validation::{half_disk_domain, half_disk_exact, half_disk_validation, HalfDiskConfig, HalfDiskLevel, HalfDiskReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hausdorff_distance, ArcSet, Metric};
use crate::provenance::content_hash;

/// Version and settings hash stamped on every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyStamp {
    pub study: String,
    pub version: String,
    pub settings_hash: String,
}

impl StudyStamp {
    pub fn new<C: Serialize>(study: &str, config: &C) -> Self {
        StudyStamp { study: study.into(), version: env!("CARGO_PKG_VERSION").into(), settings_hash: content_hash(config) }
    }
}

/// Common output behavior of study reports.
pub trait StudyReport: Serialize {
    /// One row per configuration.
    fn csv(&self) -> String;

    fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    fn hash(&self) -> String {
        content_hash(self)
    }
}

/// Least-squares line through `(log x, log y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    /// `y ≈ constant · x^exponent`.
    pub constant: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Fits `y = c x^p` by linear least squares in log-log coordinates. All
/// values must be positive and at least two abscissae must differ.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLawFit> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("{} abscissae for {} values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Study("power-law fit needs at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Study("power-law fit needs finite positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Study("power-law fit needs distinct abscissae".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let p = sxy / sxx;
    let b = my - p * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(a, c)| (c - b - p * a).powi(2)).sum();
    Ok(PowerLawFit { exponent: p, constant: b.exp(), residual: (ss / n).sqrt(), points: x.len() })
}

/// Distances between two Steklov configurations: measure of the symmetric
/// difference and both Hausdorff distances between the Dirichlet parts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetDistances {
    pub symmetric_difference: f64,
    pub hausdorff_euclidean: f64,
    pub hausdorff_arclength: f64,
    /// `sqrt(symmetric_difference) + sqrt(hausdorff_euclidean)`.
    pub modulus: f64,
}

impl SetDistances {
    pub fn between(a: &ArcSet, b: &ArcSet) -> Result<Self> {
        let sd = a.symmetric_difference_measure(b)?;
        let (da, db) = (a.complement(), b.complement());
        let he = hausdorff_distance(&da, &db, Metric::Euclidean)?;
        let ha = hausdorff_distance(&da, &db, Metric::Arclength)?;
        Ok(SetDistances {
            symmetric_difference: sd,
            hausdorff_euclidean: he,
            hausdorff_arclength: ha,
            modulus: sd.sqrt() + he.sqrt(),
        })
    }
}

pub(crate) fn csv_row(values: &[String]) -> String {
    let mut s = values.join(",");
    s.push('\n');
    s
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
