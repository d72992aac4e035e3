//! Mixed boundary value problem on the half-disk with the exact singular
//! solution `u = r^{1/2} sin(θ/2)`.
//!
//! The half-disk is bounded by the segment `[-R, R] × {0}` and a polygonal
//! approximation of the upper semicircle. Since `u` is harmonic in the whole
//! upper half-plane, prescribing it on the polygonal arc keeps it the exact
//! solution. The flux vanishes on the left half of the diameter, which
//! carries the Neumann condition; the right half and the arc are Dirichlet.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{csv_row, opt, StudyReport, StudyStamp};
use crate::assembly::{discrete_problem, solve_mixed_bvp};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{ArcSet, BoundaryCurve, CurveSpec, Point};
use crate::meshing::{mesh_domain, Mesh};
use crate::quadrature::triangle_rule_7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfDiskConfig {
    pub radius: f64,
    /// Number of polygon edges approximating the semicircle.
    pub segments: usize,
    pub h0: f64,
    pub levels: usize,
}

impl Default for HalfDiskConfig {
    fn default() -> Self {
        HalfDiskConfig { radius: 1.0, segments: 32, h0: 0.1, levels: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfDiskLevel {
    pub level: usize,
    pub h: f64,
    pub vertices: usize,
    pub l2_error: f64,
    /// Observed order against the previous level.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfDiskReport {
    pub stamp: StudyStamp,
    pub config: HalfDiskConfig,
    pub levels: Vec<HalfDiskLevel>,
    pub monotone: bool,
}

/// `r^{1/2} sin(θ/2)` with `θ ∈ [0, π]`.
pub fn half_disk_exact(p: Point) -> f64 {
    let r = p[0].hypot(p[1]);
    let theta = p[1].max(0.0).atan2(p[0]).clamp(0.0, PI);
    r.sqrt() * (0.5 * theta).sin()
}

/// Polygonal half-disk starting at the origin, and its Neumann part (the
/// last edge, from `(-R, 0)` back to the origin).
pub fn half_disk_domain(radius: f64, segments: usize) -> Result<ArcSet> {
    if segments < 2 || !(radius > 0.0) {
        return Err(Error::Config("half-disk needs a positive radius and at least 2 arc segments".into()));
    }
    let mut vertices = vec![[0.0, 0.0]];
    for j in 0..=segments {
        let a = PI * j as f64 / segments as f64;
        vertices.push([radius * a.cos(), radius * a.sin()]);
    }
    vertices[segments + 1] = [-radius, 0.0];
    let curve = BoundaryCurve::new(CurveSpec::Polygon { vertices })?.shared();
    let l = curve.total_length();
    ArcSet::new(curve, [(l - radius, l)])
}

fn l2_error(mesh: &Mesh, u: &[f64]) -> f64 {
    let rule = triangle_rule_7();
    let mut sum = 0.0;
    for (i, t) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(i);
        let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1])).abs();
        let mut acc = 0.0;
        for (b, w) in &rule {
            let x = [b[0] * p[0][0] + b[1] * p[1][0] + b[2] * p[2][0], b[0] * p[0][1] + b[1] * p[1][1] + b[2] * p[2][1]];
            let uh = b[0] * u[t[0]] + b[1] * u[t[1]] + b[2] * u[t[2]];
            acc += w * (uh - half_disk_exact(x)).powi(2);
        }
        sum += area * acc;
    }
    sum.sqrt()
}

pub fn half_disk_validation(config: &HalfDiskConfig, exec: Execution) -> Result<HalfDiskReport> {
    if config.levels < 2 {
        return Err(Error::Config("need at least two levels".into()));
    }
    let arcs = half_disk_domain(config.radius, config.segments)?;
    let mut mesh = mesh_domain(arcs.curve(), &arcs, config.h0)?;
    let mut levels: Vec<HalfDiskLevel> = Vec::with_capacity(config.levels);
    for level in 0..config.levels {
        if level > 0 {
            mesh = mesh.refine()?;
        }
        let shared = Arc::new(mesh.clone());
        let p = discrete_problem(shared, exec)?;
        let neumann = vec![0.0; p.steklov_vertices().len()];
        let dirichlet: Vec<f64> = p.dirichlet_vertices().iter().map(|&v| half_disk_exact(mesh.vertices()[v])).collect();
        let u = solve_mixed_bvp(&p, &neumann, &dirichlet)?;
        let err = l2_error(&mesh, &u);
        let order = levels.last().map(|prev| (prev.l2_error / err).log2());
        levels.push(HalfDiskLevel { level, h: mesh.h(), vertices: mesh.num_vertices(), l2_error: err, order });
    }
    let monotone = levels.windows(2).all(|w| w[1].l2_error < w[0].l2_error);
    Ok(HalfDiskReport { stamp: StudyStamp::new("half-disk", config), config: config.clone(), levels, monotone })
}

impl StudyReport for HalfDiskReport {
    fn csv(&self) -> String {
        let mut s = String::from("level,h,vertices,l2_error,order\n");
        for l in &self.levels {
            s += &csv_row(&[l.level.to_string(), l.h.to_string(), l.vertices.to_string(), l.l2_error.to_string(), opt(l.order)]);
        }
        s
    }
}
