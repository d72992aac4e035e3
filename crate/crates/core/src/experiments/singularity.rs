//! Growth exponent of the first eigenfunction at a Steklov-Dirichlet interface.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{csv_row, fit_power_law, PowerLawFit, StudyReport, StudyStamp};
use crate::eigensolve::solve_on_mesh;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{ArcSet, BoundaryCurve, Point};
use crate::meshing::{mesh_domain, ENDPOINT_TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityConfig {
    pub arcs: ArcSet,
    /// Arclength parameter of the interface point; must be an arc endpoint.
    pub interface: f64,
    pub h: f64,
    /// Sampling window `[r_min, r_max]`; `r_min >= 2h`.
    pub window: [f64; 2],
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub stamp: StudyStamp,
    pub config: SingularityConfig,
    pub origin: Point,
    pub direction: Point,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: PowerLawFit,
}

/// Unit bisector of the two inward normals at `t` (counter-clockwise curves).
pub fn inward_bisector(curve: &BoundaryCurve, t: f64) -> Point {
    let (a, b) = curve.one_sided_tangents(t);
    let d = [-(a[1] + b[1]), a[0] + b[0]];
    let n = d[0].hypot(d[1]);
    [d[0] / n, d[1] / n]
}

/// Samples `|u_1|` on log-spaced radii along the inward bisector and fits
/// the exponent of `|u_1| ~ r^p`.
pub fn singularity_fit(config: &SingularityConfig, exec: Execution) -> Result<SingularityReport> {
    let [r_min, r_max] = config.window;
    if !(r_min >= 2.0 * config.h && r_max > r_min) {
        return Err(Error::Config(format!(
            "window [{r_min}, {r_max}] must satisfy 2h = {} <= r_min < r_max",
            2.0 * config.h
        )));
    }
    if config.samples < 2 {
        return Err(Error::Config("need at least two samples".into()));
    }
    let curve = config.arcs.curve().clone();
    if !config.arcs.endpoints().iter().any(|&e| curve.cyclic_distance(e, config.interface) <= ENDPOINT_TOL * curve.total_length()) {
        return Err(Error::Config(format!("interface {} is not an endpoint of the arcs", config.interface)));
    }
    let mesh = Arc::new(mesh_domain(&curve, &config.arcs, config.h)?);
    let r = solve_on_mesh(mesh.clone(), 1, exec)?;
    let u = &r.eigenvectors[0];

    let origin = curve.point(config.interface);
    let direction = inward_bisector(&curve, config.interface);
    let ratio = (r_max / r_min).ln() / (config.samples - 1) as f64;
    let radii: Vec<f64> = (0..config.samples).map(|i| r_min * (ratio * i as f64).exp()).collect();
    let values = radii
        .iter()
        .map(|&rad| {
            let p = [origin[0] + rad * direction[0], origin[1] + rad * direction[1]];
            mesh.interpolate(u, p).map(f64::abs)
        })
        .collect::<Result<Vec<f64>>>()?;
    let fit = fit_power_law(&radii, &values)?;
    Ok(SingularityReport { stamp: StudyStamp::new("singularity", config), config: config.clone(), origin, direction, radii, values, fit })
}

impl StudyReport for SingularityReport {
    fn csv(&self) -> String {
        let mut s = String::from("r,abs_u1\n");
        for (r, v) in self.radii.iter().zip(&self.values) {
            s += &csv_row(&[r.to_string(), v.to_string()]);
        }
        s
    }
}
