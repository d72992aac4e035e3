//! Derivative-free search for extremal `λ_k` over Steklov sets with a fixed
//! measure fraction and a fixed number of arcs.
//!
//! A configuration of `N` arcs is described by its arc lengths, its gap
//! lengths and the start of the first arc. Arc lengths live on the capped
//! simplex `{a_i >= floor, Σ a_i = m L}` and gaps on the analogous simplex
//! with total `(1 - m) L`, so the search coordinates are the first `N - 1`
//! entries of each plus the phase: `2N - 1` numbers. On the disk the phase
//! is fixed because rotations do not change the spectrum. Every candidate is
//! projected onto the feasible set before it is evaluated, so the measure
//! constraint holds exactly along the whole search.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eigensolve::solve_on_mesh;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{ArcSet, BoundaryCurve, CurveSpec};
use crate::meshing::{mesh_domain, Mesh};
use crate::provenance::content_hash;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimConfig {
    pub objective: Objective,
    pub k: usize,
    pub m: f64,
    pub components: usize,
    pub h_target: f64,
    /// Objective evaluations allowed per restart.
    pub budget: usize,
    /// Spread of simplex values (in `λ`) below which a restart stops.
    pub tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
    /// Search over the phase too. Defaults to false on circles and true
    /// otherwise.
    #[serde(default)]
    pub optimize_phase: Option<bool>,
    /// Evaluate candidates on a morph of one reference mesh (built for
    /// equally spaced arcs) instead of remeshing each one. Removes remeshing
    /// noise from the objective; candidates the morph cannot reach are
    /// remeshed. Defaults to true on circles.
    #[serde(default)]
    pub morph: Option<bool>,
}

impl OptimConfig {
    /// Smallest admissible arc or gap length.
    pub fn floor(&self) -> f64 {
        2.0 * self.h_target
    }

    pub fn validate(&self, curve: &BoundaryCurve) -> Result<()> {
        if self.k == 0 || self.components == 0 || self.budget == 0 || self.restarts == 0 {
            return Err(Error::Config("k, components, budget and restarts must be positive".into()));
        }
        if !(self.m > 0.0 && self.m < 1.0) {
            return Err(Error::Config(format!("measure fraction must lie in (0, 1), got {}", self.m)));
        }
        if !(self.h_target > 0.0 && self.tolerance >= 0.0) {
            return Err(Error::Config("h_target must be positive and tolerance nonnegative".into()));
        }
        let l = curve.total_length();
        let n = self.components as f64;
        let thinnest = (self.m * l / n).min((1.0 - self.m) * l / n);
        if thinnest <= self.floor() {
            return Err(Error::Config(format!(
                "{} arcs of total fraction {} leave features of length {thinnest:.4} at or below the mesh floor {:.4}",
                self.components,
                self.m,
                self.floor()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub arcs: Vec<[f64; 2]>,
    pub lambda: f64,
    pub restart: usize,
    pub iteration: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub config: OptimConfig,
    pub curve: CurveSpec,
    pub best: ArcSet,
    pub best_lambda: f64,
    pub best_restart: usize,
    pub termination: String,
    /// Termination reason of every restart.
    pub restart_terminations: Vec<String>,
    pub log: Vec<Evaluation>,
    pub settings_hash: String,
    pub version: String,
}

impl OptimResult {
    /// Best-so-far objective after each logged evaluation.
    pub fn incumbent_trace(&self) -> Vec<f64> {
        let better = |a: f64, b: f64| match self.config.objective {
            Objective::Minimize => a < b,
            Objective::Maximize => a > b,
        };
        let mut out = Vec::with_capacity(self.log.len());
        let mut cur = f64::NAN;
        for e in &self.log {
            if cur.is_nan() || better(e.lambda, cur) {
                cur = e.lambda;
            }
            out.push(cur);
        }
        out
    }

    pub fn incumbent_csv(&self) -> String {
        let mut s = String::from("evaluation,restart,iteration,lambda,incumbent\n");
        for (i, (e, b)) in self.log.iter().zip(self.incumbent_trace()).enumerate() {
            s += &format!("{i},{},{},{},{b}\n", e.restart, e.iteration, e.lambda);
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Memoized `λ_k` keyed by the bit patterns of the canonical arc endpoints.
pub struct Evaluator {
    curve: Arc<BoundaryCurve>,
    k: usize,
    h_target: f64,
    reference: Option<Mesh>,
    cache: Mutex<HashMap<Vec<u64>, f64>>,
    solves: Mutex<usize>,
}

impl Evaluator {
    /// Remeshes every candidate.
    pub fn new(curve: Arc<BoundaryCurve>, k: usize, h_target: f64) -> Self {
        Evaluator { curve, k, h_target, reference: None, cache: Mutex::new(HashMap::new()), solves: Mutex::new(0) }
    }

    /// Morphs `reference` onto each candidate with the same number of arcs,
    /// falling back to remeshing when the morph fails.
    pub fn with_reference(reference: Mesh, k: usize, h_target: f64) -> Self {
        Evaluator {
            curve: reference.curve().clone(),
            k,
            h_target,
            reference: Some(reference),
            cache: Mutex::new(HashMap::new()),
            solves: Mutex::new(0),
        }
    }

    fn mesh_for(&self, arcs: &ArcSet) -> Result<Mesh> {
        if let Some(r) = &self.reference {
            if r.arcs().component_count() == arcs.component_count() {
                if let Ok(m) = r.morph_to(arcs) {
                    return Ok(m);
                }
            }
        }
        mesh_domain(&self.curve, arcs, self.h_target)
    }

    pub fn key(arcs: &ArcSet) -> Vec<u64> {
        arcs.pairs().iter().flat_map(|p| [p[0].to_bits(), p[1].to_bits()]).collect()
    }

    pub fn evaluate(&self, arcs: &ArcSet) -> Result<f64> {
        let key = Self::key(arcs);
        if let Some(&v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let mesh = self.mesh_for(arcs)?;
        let v = solve_on_mesh(Arc::new(mesh), self.k, Execution::Sequential)?.lambda[self.k - 1];
        *self.solves.lock().expect("counter lock") += 1;
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }

    /// Number of actual solves (cache misses) so far.
    pub fn solves(&self) -> usize {
        *self.solves.lock().expect("counter lock")
    }
}

/// Euclidean projection onto `{x : x_i >= floor, Σ x_i = total}`.
pub fn project_capped_simplex(y: &[f64], total: f64, floor: f64) -> Vec<f64> {
    let n = y.len();
    let s = total - n as f64 * floor;
    let z: Vec<f64> = y.iter().map(|v| v - floor).collect();
    let mut u = z.clone();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - s) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    // feasible points (up to rounding in the sum) are fixed points
    if z.iter().all(|&v| v >= 0.0) && theta.abs() <= 4.0 * f64::EPSILON * total.abs().max(1.0) {
        return y.to_vec();
    }
    z.iter().map(|v| (v - theta).max(0.0) + floor).collect()
}

struct Layout {
    n: usize,
    arc_total: f64,
    gap_total: f64,
    floor: f64,
    phase: bool,
    length: f64,
}

impl Layout {
    fn dim(&self) -> usize {
        2 * (self.n - 1) + usize::from(self.phase)
    }

    /// Arc lengths, gap lengths and phase for coordinates `x`.
    fn decode(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let m = self.n - 1;
        let full = |part: &[f64], total: f64| {
            let mut v = part.to_vec();
            v.push(total - part.iter().sum::<f64>());
            project_capped_simplex(&v, total, self.floor)
        };
        let arcs = full(&x[..m], self.arc_total);
        let gaps = full(&x[m..2 * m], self.gap_total);
        let phase = if self.phase { x[2 * m].rem_euclid(self.length) } else { 0.0 };
        (arcs, gaps, phase)
    }

    fn encode(&self, arcs: &[f64], gaps: &[f64], phase: f64) -> Vec<f64> {
        let m = self.n - 1;
        let mut x: Vec<f64> = arcs[..m].iter().chain(&gaps[..m]).copied().collect();
        if self.phase {
            x.push(phase);
        }
        x
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        let (a, g, p) = self.decode(x);
        self.encode(&a, &g, p)
    }

    fn arc_set(&self, curve: &Arc<BoundaryCurve>, x: &[f64]) -> Result<ArcSet> {
        let (a, g, phase) = self.decode(x);
        let mut s = phase;
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            out.push((s, s + a[i]));
            s += a[i] + g[i];
        }
        ArcSet::new(curve.clone(), out)
    }

    fn at_floor(&self, x: &[f64]) -> bool {
        let (a, g, _) = self.decode(x);
        a.iter().chain(&g).any(|v| *v <= self.floor * (1.0 + 1e-9))
    }
}

struct RestartOutcome {
    log: Vec<Evaluation>,
    termination: String,
}

fn nelder_mead(
    layout: &Layout,
    curve: &Arc<BoundaryCurve>,
    eval: &Evaluator,
    config: &OptimConfig,
    restart: usize,
) -> Result<RestartOutcome> {
    let sign = match config.objective {
        Objective::Minimize => 1.0,
        Objective::Maximize => -1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(restart as u64);
    let n = layout.n;
    let arcs0: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let gaps0: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let scale = |v: Vec<f64>, total: f64| {
        let s: f64 = v.iter().sum();
        project_capped_simplex(&v.iter().map(|x| x * total / s).collect::<Vec<_>>(), total, layout.floor)
    };
    let phase0 = rng.random_range(0.0..layout.length);
    let x0 = layout.encode(&scale(arcs0, layout.arc_total), &scale(gaps0, layout.gap_total), phase0);

    let mut log = Vec::new();
    let mut iteration = 0usize;
    let f = |x: &[f64], iteration: usize, log: &mut Vec<Evaluation>| -> Result<f64> {
        let set = layout.arc_set(curve, x)?;
        let v = eval.evaluate(&set)?;
        log.push(Evaluation { arcs: set.pairs(), lambda: v, restart, iteration });
        Ok(sign * v)
    };

    let d = layout.dim();
    if d == 0 {
        f(&x0, 0, &mut log)?;
        return Ok(RestartOutcome { log, termination: "converged: no free coordinates".into() });
    }
    let steps: Vec<f64> = (0..d)
        .map(|i| {
            let m = n - 1;
            if i < m {
                0.25 * layout.arc_total / n as f64
            } else if i < 2 * m {
                0.25 * layout.gap_total / n as f64
            } else {
                0.25 * layout.length / n as f64
            }
        })
        .collect();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let v0 = f(&x0, 0, &mut log)?;
    simplex.push((x0.clone(), v0));
    for i in 0..d {
        let mut x = x0.clone();
        x[i] += steps[i];
        let x = layout.project(&x);
        let v = f(&x, 0, &mut log)?;
        simplex.push((x, v));
    }

    let termination = loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[d].1 - simplex[0].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= config.tolerance && diameter <= 0.1 * config.h_target {
            break "converged";
        }
        if log.len() >= config.budget {
            break "budget exhausted";
        }
        iteration += 1;
        let centroid: Vec<f64> = (0..d).map(|j| simplex[..d].iter().map(|p| p.0[j]).sum::<f64>() / d as f64).collect();
        let toward = |t: f64| -> Vec<f64> {
            let x: Vec<f64> = (0..d).map(|j| centroid[j] + t * (simplex[d].0[j] - centroid[j])).collect();
            layout.project(&x)
        };
        let xr = toward(-1.0);
        let fr = f(&xr, iteration, &mut log)?;
        if fr < simplex[0].1 {
            let xe = toward(-2.0);
            let fe = f(&xe, iteration, &mut log)?;
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[d].1 {
                let x = toward(-0.5);
                let v = f(&x, iteration, &mut log)?;
                (x, v)
            } else {
                let x = toward(0.5);
                let v = f(&x, iteration, &mut log)?;
                (x, v)
            };
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&p.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let x = layout.project(&x);
                    let v = f(&x, iteration, &mut log)?;
                    *p = (x, v);
                }
            }
        }
    };
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut termination = termination.to_string();
    if layout.at_floor(&simplex[0].0) {
        termination.push_str("; an arc or gap is clamped to the mesh floor");
    }
    Ok(RestartOutcome { log, termination })
}

/// Multi-start Nelder-Mead over feasible configurations. Restarts run
/// through `exec` and share one memo cache.
pub fn optimize_arcs(curve: &Arc<BoundaryCurve>, config: &OptimConfig, exec: Execution) -> Result<OptimResult> {
    config.validate(curve)?;
    let l = curve.total_length();
    let circle = matches!(curve.spec(), CurveSpec::Circle { .. });
    let layout = Layout {
        n: config.components,
        arc_total: config.m * l,
        gap_total: (1.0 - config.m) * l,
        floor: config.floor(),
        phase: config.optimize_phase.unwrap_or(!circle),
        length: l,
    };
    let eval = if config.morph.unwrap_or(circle) {
        let reference = ArcSet::lgl_sequence(curve.clone(), config.m, config.components)?;
        Evaluator::with_reference(mesh_domain(curve, &reference, config.h_target)?, config.k, config.h_target)
    } else {
        Evaluator::new(curve.clone(), config.k, config.h_target)
    };
    let outcomes = exec.try_map_range(config.restarts, |r| nelder_mead(&layout, curve, &eval, config, r))?;

    let mut log = Vec::new();
    let mut restart_terminations = Vec::new();
    for o in outcomes {
        log.extend(o.log);
        restart_terminations.push(o.termination);
    }
    let better = |a: f64, b: f64| match config.objective {
        Objective::Minimize => a < b,
        Objective::Maximize => a > b,
    };
    let extreme = log.iter().map(|e| e.lambda).fold(f64::NAN, |m, v| if m.is_nan() || better(v, m) { v } else { m });
    let tie = 1e-12 * extreme.abs();
    let winner = log
        .iter()
        .filter(|e| (e.lambda - extreme).abs() <= tie)
        .min_by(|a, b| {
            let ka: Vec<f64> = a.arcs.iter().flatten().copied().collect();
            let kb: Vec<f64> = b.arcs.iter().flatten().copied().collect();
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        })
        .ok_or_else(|| Error::Study("optimizer produced no evaluations".into()))?;
    let best = ArcSet::new(curve.clone(), winner.arcs.iter().map(|p| (p[0], p[1])))?;
    Ok(OptimResult {
        config: config.clone(),
        curve: curve.spec().clone(),
        best,
        best_lambda: winner.lambda,
        best_restart: winner.restart,
        termination: restart_terminations[winner.restart].clone(),
        restart_terminations,
        log,
        settings_hash: content_hash(config),
        version: env!("CARGO_PKG_VERSION").into(),
    })
}
