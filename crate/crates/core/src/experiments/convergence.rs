//! Uniform-refinement convergence tables with Richardson extrapolation.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{csv_row, opt, StudyReport, StudyStamp};
use crate::eigensolve::solve_on_mesh;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::ArcSet;
use crate::meshing::mesh_domain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub arcs: ArcSet,
    pub k: usize,
    /// Target size of the coarsest mesh; each level halves it by red refinement.
    pub h0: f64,
    pub levels: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub level: usize,
    pub h: f64,
    pub vertices: usize,
    pub lambda: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub stamp: StudyStamp,
    pub config: ConvergenceConfig,
    pub levels: Vec<ConvergenceLevel>,
    /// Per eigenvalue: whether successive differences keep one sign and shrink.
    pub monotone: Vec<bool>,
    /// `orders[j][i]` is the order observed on levels `i, i+1, i+2`;
    /// withheld for non-monotone sequences.
    pub orders: Vec<Option<Vec<f64>>>,
    pub extrapolated: Vec<Option<f64>>,
    /// `|λ(finest) - λ*|`.
    pub error_bar: Vec<Option<f64>>,
}

/// Solves on `h0, h0/2, ...` and extrapolates each eigenvalue from the three
/// finest levels.
pub fn convergence_study(config: &ConvergenceConfig, exec: Execution) -> Result<ConvergenceReport> {
    if config.levels < 3 {
        return Err(Error::Config(format!("convergence study needs at least 3 levels, got {}", config.levels)));
    }
    if config.k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    let curve = config.arcs.curve().clone();
    let mut mesh = mesh_domain(&curve, &config.arcs, config.h0)?;
    let mut levels = Vec::with_capacity(config.levels);
    for level in 0..config.levels {
        if level > 0 {
            mesh = mesh.refine()?;
        }
        let shared = Arc::new(mesh.clone());
        let r = solve_on_mesh(shared, config.k, exec)?;
        levels.push(ConvergenceLevel { level, h: mesh.h(), vertices: mesh.num_vertices(), lambda: r.lambda });
    }

    let mut monotone = Vec::new();
    let mut orders = Vec::new();
    let mut extrapolated = Vec::new();
    let mut error_bar = Vec::new();
    for j in 0..config.k {
        let seq: Vec<f64> = levels.iter().map(|l| l.lambda[j]).collect();
        let d: Vec<f64> = seq.windows(2).map(|w| w[1] - w[0]).collect();
        let ok = d.iter().all(|x| x.signum() == d[0].signum() && *x != 0.0)
            && d.windows(2).all(|w| w[1].abs() < w[0].abs());
        monotone.push(ok);
        if !ok {
            orders.push(None);
            extrapolated.push(None);
            error_bar.push(None);
            continue;
        }
        let p: Vec<f64> = d.windows(2).map(|w| (w[0] / w[1]).abs().log2()).collect();
        let (pf, df) = (p[p.len() - 1], d[d.len() - 1]);
        let finest = seq[seq.len() - 1];
        let star = finest + df / (2f64.powf(pf) - 1.0);
        orders.push(Some(p));
        extrapolated.push(Some(star));
        error_bar.push(Some((finest - star).abs()));
    }
    Ok(ConvergenceReport {
        stamp: StudyStamp::new("converge", config),
        config: config.clone(),
        levels,
        monotone,
        orders,
        extrapolated,
        error_bar,
    })
}

impl StudyReport for ConvergenceReport {
    fn csv(&self) -> String {
        let mut s = String::from("level,h,vertices,k,lambda,order,extrapolated\n");
        for l in &self.levels {
            for (j, lam) in l.lambda.iter().enumerate() {
                let order = self.orders[j].as_ref().and_then(|p| l.level.checked_sub(2).and_then(|i| p.get(i).copied()));
                s += &csv_row(&[
                    l.level.to_string(),
                    l.h.to_string(),
                    l.vertices.to_string(),
                    (j + 1).to_string(),
                    lam.to_string(),
                    opt(order),
                    opt(self.extrapolated[j]),
                ]);
            }
        }
        s
    }
}
