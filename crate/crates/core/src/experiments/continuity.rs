//! Eigenvalue trajectories along sequences of Steklov sets converging to a
//! target with a fixed number of components.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{csv_row, SetDistances, StudyReport, StudyStamp};
use crate::eigensolve::solve_on_mesh;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::ArcSet;
use crate::meshing::mesh_domain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityConfig {
    pub target: ArcSet,
    /// Endpoint shifts `[start_0, end_0, ...]` of the first member; member
    /// `j` uses them scaled by `2^-j` for `j = 0..=halvings`.
    #[serde(default)]
    pub offsets: Vec<f64>,
    #[serde(default = "default_halvings")]
    pub halvings: usize,
    /// Explicit sequence; replaces `offsets` when nonempty.
    #[serde(default)]
    pub members: Vec<ArcSet>,
    pub k: usize,
    pub h: f64,
    /// Constant of the stability envelope `C · modulus`; taken from the
    /// first member when absent.
    #[serde(default)]
    pub envelope_constant: Option<f64>,
}

fn default_halvings() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityMember {
    pub arcs: Vec<[f64; 2]>,
    pub distances: SetDistances,
    pub lambda: Vec<f64>,
    /// `|λ_1 - λ_1(target)|`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub stamp: StudyStamp,
    pub config: ContinuityConfig,
    pub lambda_target: Vec<f64>,
    pub members: Vec<ContinuityMember>,
    /// Gaps never increase along the sequence.
    pub monotone: bool,
    pub envelope_constant: f64,
    /// Final gap is at most `envelope_constant · modulus` of the final member.
    pub final_within_envelope: bool,
}

pub fn continuity_study(config: &ContinuityConfig, exec: Execution) -> Result<ContinuityReport> {
    if config.k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    let target = &config.target;
    let members: Vec<ArcSet> = if !config.members.is_empty() {
        config.members.clone()
    } else {
        if config.offsets.len() != 2 * target.component_count() {
            return Err(Error::Config(format!(
                "expected {} endpoint offsets, got {}",
                2 * target.component_count(),
                config.offsets.len()
            )));
        }
        (0..=config.halvings)
            .map(|j| {
                let s = 0.5f64.powi(j as i32);
                let d: Vec<f64> = config.offsets.iter().map(|o| o * s).collect();
                target.perturb_endpoints(&d)
            })
            .collect::<Result<_>>()?
    };
    for (i, m) in members.iter().enumerate() {
        if m.component_count() != target.component_count() {
            return Err(Error::Study(format!(
                "component count drift: member {i} has {} arcs, target has {}",
                m.component_count(),
                target.component_count()
            )));
        }
    }

    let curve = target.curve().clone();
    let mesh = mesh_domain(&curve, target, config.h)?;
    let lambda_target = solve_on_mesh(Arc::new(mesh.clone()), config.k, exec)?.lambda;
    let solved = exec.try_map(&members, |m| -> Result<Vec<f64>> {
        Ok(solve_on_mesh(Arc::new(mesh.morph_to(m)?), config.k, Execution::Sequential)?.lambda)
    })?;
    let mut out = Vec::with_capacity(members.len());
    for (m, lambda) in members.iter().zip(solved) {
        let gap = (lambda[0] - lambda_target[0]).abs();
        out.push(ContinuityMember { arcs: m.pairs(), distances: SetDistances::between(target, m)?, lambda, gap });
    }

    let monotone = out.windows(2).all(|w| w[1].gap <= w[0].gap);
    let envelope_constant = match config.envelope_constant {
        Some(c) => c,
        None => {
            let first = &out[0];
            if first.distances.modulus > 0.0 {
                first.gap / first.distances.modulus
            } else {
                0.0
            }
        }
    };
    let last = &out[out.len() - 1];
    let final_within_envelope = last.gap <= envelope_constant * last.distances.modulus * (1.0 + 1e-12);
    Ok(ContinuityReport {
        stamp: StudyStamp::new("continuity", config),
        config: config.clone(),
        lambda_target,
        members: out,
        monotone,
        envelope_constant,
        final_within_envelope,
    })
}

impl StudyReport for ContinuityReport {
    fn csv(&self) -> String {
        let mut s = String::from("member,symmetric_difference,hausdorff_euclidean,hausdorff_arclength,modulus,lambda_1,gap\n");
        for (i, m) in self.members.iter().enumerate() {
            s += &csv_row(&[
                i.to_string(),
                m.distances.symmetric_difference.to_string(),
                m.distances.hausdorff_euclidean.to_string(),
                m.distances.hausdorff_arclength.to_string(),
                m.distances.modulus.to_string(),
                m.lambda[0].to_string(),
                m.gap.to_string(),
            ]);
        }
        s
    }
}
