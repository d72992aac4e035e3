//! Eigenvalue response to small perturbations of the Steklov arcs.
//!
//! Both configurations of a pair are solved on the same mesh, morphed onto
//! the perturbed endpoints, so the discretization error largely cancels in
//! the difference. Repeating the sweep on the once-refined mesh gives a
//! noise floor: the disagreement of the two resolutions.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{csv_row, fit_power_law, opt, PowerLawFit, SetDistances, StudyReport, StudyStamp};
use crate::eigensolve::solve_on_mesh;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::ArcSet;
use crate::meshing::{mesh_domain, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    /// Moves the end of the first arc by `+ε`.
    EndpointShift,
    /// Moves every endpoint by `+ε`.
    ArcTranslate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub arcs: ArcSet,
    pub k: usize,
    pub h: f64,
    /// Strictly decreasing, nonnegative.
    pub epsilons: Vec<f64>,
    pub mode: PerturbationMode,
    /// A point is signal-dominated when `|Δλ_1| >= signal_ratio · noise`.
    #[serde(default = "default_signal_ratio")]
    pub signal_ratio: f64,
}

fn default_signal_ratio() -> f64 {
    10.0
}

impl StabilityConfig {
    /// `ε = 0.1 · 2^-j` for `j = 0..count`.
    pub fn geometric_grid(count: usize) -> Vec<f64> {
        (0..count).map(|j| 0.1 * 0.5f64.powi(j as i32)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityPoint {
    pub epsilon: f64,
    pub perturbed: Vec<[f64; 2]>,
    pub distances: SetDistances,
    /// `|λ_k(ε) - λ_k(0)|` on the finer mesh, one entry per tracked `k`.
    pub gaps: Vec<f64>,
    /// Same on the coarser mesh.
    pub gaps_coarse: Vec<f64>,
    /// `|Δλ_1(h) - Δλ_1(h/2)|`.
    pub noise: f64,
    pub signal_dominated: bool,
    /// `gaps[0] / modulus`.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stamp: StudyStamp,
    pub config: StabilityConfig,
    pub lambda_base: Vec<f64>,
    pub vertices: [usize; 2],
    pub points: Vec<StabilityPoint>,
    /// Log-log fit of `|Δλ_1|` against `ε` over signal-dominated points.
    pub fit: Option<PowerLawFit>,
    /// Largest `|Δλ_1| / modulus` over the signal-dominated points of the
    /// coarsest decade of `ε`.
    pub constant: Option<f64>,
    /// Whether every signal-dominated point satisfies `|Δλ_1| <= C · modulus`.
    pub envelope_holds: bool,
}

fn perturb(arcs: &ArcSet, mode: PerturbationMode, eps: f64) -> Result<ArcSet> {
    let n = arcs.component_count();
    let mut deltas = vec![0.0; 2 * n];
    match mode {
        PerturbationMode::EndpointShift => deltas[1] = eps,
        PerturbationMode::ArcTranslate => deltas.iter_mut().for_each(|d| *d = eps),
    }
    arcs.perturb_endpoints(&deltas)
}

fn lambdas(mesh: &Mesh, target: &ArcSet, k: usize) -> Result<Vec<f64>> {
    let m = mesh.morph_to(target)?;
    Ok(solve_on_mesh(Arc::new(m), k, Execution::Sequential)?.lambda)
}

pub fn stability_sweep(config: &StabilityConfig, exec: Execution) -> Result<StabilityReport> {
    let eps = &config.epsilons;
    if eps.is_empty() || eps.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(Error::Config("epsilons must be finite and nonnegative".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("epsilons must be strictly decreasing".into()));
    }
    if config.k == 0 {
        return Err(Error::Config("k must be positive".into()));
    }
    let targets: Vec<ArcSet> = eps.iter().map(|&e| perturb(&config.arcs, config.mode, e)).collect::<Result<_>>()?;

    let curve = config.arcs.curve().clone();
    let coarse = mesh_domain(&curve, &config.arcs, config.h)?;
    let fine = coarse.refine()?;
    let base_c = solve_on_mesh(Arc::new(coarse.clone()), config.k, exec)?.lambda;
    let base_f = solve_on_mesh(Arc::new(fine.clone()), config.k, exec)?.lambda;

    let solved = exec.try_map(&targets, |t| -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((lambdas(&coarse, t, config.k)?, lambdas(&fine, t, config.k)?))
    })?;

    let mut points = Vec::with_capacity(eps.len());
    for ((&e, target), (lc, lf)) in eps.iter().zip(&targets).zip(&solved) {
        let distances = SetDistances::between(&config.arcs, target)?;
        let gaps: Vec<f64> = lf.iter().zip(&base_f).map(|(a, b)| (a - b).abs()).collect();
        let gaps_coarse: Vec<f64> = lc.iter().zip(&base_c).map(|(a, b)| (a - b).abs()).collect();
        let noise = ((lc[0] - base_c[0]) - (lf[0] - base_f[0])).abs();
        let signal_dominated = e > 0.0 && gaps[0] > 0.0 && gaps[0] >= config.signal_ratio * noise;
        let ratio = (distances.modulus > 0.0).then(|| gaps[0] / distances.modulus);
        points.push(StabilityPoint {
            epsilon: e,
            perturbed: target.pairs(),
            distances,
            gaps,
            gaps_coarse,
            noise,
            signal_dominated,
            ratio,
        });
    }

    let used: Vec<&StabilityPoint> = points.iter().filter(|p| p.signal_dominated).collect();
    let fit = if used.len() >= 2 {
        let x: Vec<f64> = used.iter().map(|p| p.epsilon).collect();
        let y: Vec<f64> = used.iter().map(|p| p.gaps[0]).collect();
        Some(fit_power_law(&x, &y)?)
    } else {
        None
    };
    let constant = used
        .first()
        .map(|p| p.epsilon)
        .and_then(|top| {
            used.iter()
                .filter(|p| p.epsilon >= 0.1 * top)
                .filter_map(|p| p.ratio)
                .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))))
        });
    let envelope_holds = match constant {
        Some(c) => used.iter().all(|p| p.gaps[0] <= c * p.distances.modulus * (1.0 + 1e-12)),
        None => false,
    };

    Ok(StabilityReport {
        stamp: StudyStamp::new("stability", config),
        config: config.clone(),
        lambda_base: base_f,
        vertices: [coarse.num_vertices(), fine.num_vertices()],
        points,
        fit,
        constant,
        envelope_holds,
    })
}

impl StudyReport for StabilityReport {
    fn csv(&self) -> String {
        let mut s = String::from(
            "epsilon,symmetric_difference,hausdorff_euclidean,hausdorff_arclength,modulus,gap_1,noise,signal_dominated,ratio\n",
        );
        for p in &self.points {
            s += &csv_row(&[
                p.epsilon.to_string(),
                p.distances.symmetric_difference.to_string(),
                p.distances.hausdorff_euclidean.to_string(),
                p.distances.hausdorff_arclength.to_string(),
                p.distances.modulus.to_string(),
                p.gaps[0].to_string(),
                p.noise.to_string(),
                p.signal_dominated.to_string(),
                opt(p.ratio),
            ]);
        }
        s
    }
}
