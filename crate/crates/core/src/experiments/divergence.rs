//! First eigenvalue on the disk for equally spaced arcs of fixed total
//! measure and growing count.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{csv_row, StudyReport, StudyStamp};
use crate::eigensolve::solve_on_mesh;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{ArcSet, BoundaryCurve};
use crate::meshing::mesh_domain;

/// Every field is optional in JSON; missing ones take the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DivergenceConfig {
    /// Arc counts; increasing powers of two.
    pub n_grid: Vec<usize>,
    /// Steklov measure fraction.
    pub m: f64,
    pub radius: f64,
    /// Coarse mesh size as a fraction of one arc's length, capped at `h_max`.
    /// The second resolution is one red refinement of the first.
    pub h_relative: f64,
    pub h_max: f64,
    /// Largest accepted relative deviation between the two resolutions.
    pub max_deviation: f64,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        DivergenceConfig { n_grid: vec![2, 4, 8, 16], m: 0.5, radius: 1.0, h_relative: 0.03, h_max: 0.05, max_deviation: 0.02 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceEntry {
    pub n: usize,
    pub h: f64,
    pub vertices: [usize; 2],
    /// `λ_1` on the coarse and refined meshes.
    pub lambda: [f64; 2],
    /// Refined `λ_1 / n`.
    pub ratio: f64,
    pub deviation: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceReport {
    pub stamp: StudyStamp,
    pub config: DivergenceConfig,
    pub entries: Vec<DivergenceEntry>,
    /// Strict growth in `n` at the coarse and at the refined resolution.
    pub strictly_increasing: [bool; 2],
    pub min_ratio: f64,
}

pub fn divergence_study(config: &DivergenceConfig, exec: Execution) -> Result<DivergenceReport> {
    let g = &config.n_grid;
    if g.is_empty() || g.iter().any(|n| !n.is_power_of_two()) || g.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("n_grid must be increasing powers of two, got {g:?}")));
    }
    if !(config.h_relative > 0.0 && config.h_max > 0.0 && config.max_deviation > 0.0) {
        return Err(Error::Config("mesh sizes and deviation must be positive".into()));
    }
    let curve = BoundaryCurve::circle(config.radius)?.shared();
    let entries = exec.try_map(g, |&n| -> Result<DivergenceEntry> {
        let arcs = ArcSet::lgl_sequence(curve.clone(), config.m, n)?;
        let len = arcs.intervals()[0].len();
        let h = (config.h_relative * len).min(config.h_max);
        let coarse = mesh_domain(&curve, &arcs, h)?;
        let fine = coarse.refine()?;
        let vertices = [coarse.num_vertices(), fine.num_vertices()];
        let lc = solve_on_mesh(Arc::new(coarse), 1, Execution::Sequential)?.lambda[0];
        let lf = solve_on_mesh(Arc::new(fine), 1, Execution::Sequential)?.lambda[0];
        let deviation = (lc - lf).abs() / lf;
        Ok(DivergenceEntry {
            n,
            h,
            vertices,
            lambda: [lc, lf],
            ratio: lf / n as f64,
            deviation,
            converged: deviation <= config.max_deviation,
        })
    })?;
    let inc = |r: usize| entries.windows(2).all(|w| w[1].lambda[r] > w[0].lambda[r]);
    Ok(DivergenceReport {
        stamp: StudyStamp::new("diverge", config),
        config: config.clone(),
        strictly_increasing: [inc(0), inc(1)],
        min_ratio: entries.iter().map(|e| e.ratio).fold(f64::INFINITY, f64::min),
        entries,
    })
}

impl StudyReport for DivergenceReport {
    fn csv(&self) -> String {
        let mut s = String::from("n,h,vertices_coarse,vertices_fine,lambda_coarse,lambda_fine,ratio,deviation,converged\n");
        for e in &self.entries {
            s += &csv_row(&[
                e.n.to_string(),
                e.h.to_string(),
                e.vertices[0].to_string(),
                e.vertices[1].to_string(),
                e.lambda[0].to_string(),
                e.lambda[1].to_string(),
                e.ratio.to_string(),
                e.deviation.to_string(),
                e.converged.to_string(),
            ]);
        }
        s
    }
}
