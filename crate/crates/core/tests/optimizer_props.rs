use std::f64::consts::PI;

use steklov_lab::geometry::{ArcSet, BoundaryCurve};
use steklov_lab::meshing::mesh_domain;
use steklov_lab::optimizer::{optimize_arcs, Evaluator, Objective, OptimConfig};
use steklov_lab::Execution;

fn config(objective: Objective, m: f64, components: usize, h: f64) -> OptimConfig {
    OptimConfig {
        objective,
        k: 1,
        m,
        components,
        h_target: h,
        budget: 40,
        tolerance: 1e-9,
        restarts: 2,
        seed: 11,
        optimize_phase: None,
        morph: None,
    }
}

#[test]
fn single_arc_on_the_disk_is_phase_invariant() {
    let c = BoundaryCurve::circle(1.0).unwrap().shared();
    let base = ArcSet::new(c.clone(), [(0.0, PI)]).unwrap();
    let eval = Evaluator::with_reference(mesh_domain(&c, &base, 0.08).unwrap(), 1, 0.08);
    let l0 = eval.evaluate(&base).unwrap();
    for phase in [0.3, 1.7, 4.0] {
        let rotated = ArcSet::new(c.clone(), [(phase, phase + PI)]).unwrap();
        assert_ne!(Evaluator::key(&rotated), Evaluator::key(&base));
        let l = eval.evaluate(&rotated).unwrap();
        assert!((l - l0).abs() <= 1e-6 * l0, "phase {phase}: {l} vs {l0}");
    }

    let r = optimize_arcs(&c, &config(Objective::Minimize, 0.5, 1, 0.08), Execution::default()).unwrap();
    assert!((r.best_lambda - l0).abs() <= 1e-6 * l0);
}

#[test]
fn rotated_sets_agree_after_remeshing_within_discretization_error() {
    let c = BoundaryCurve::circle(1.0).unwrap().shared();
    let eval = Evaluator::new(c.clone(), 1, 0.05);
    let a = ArcSet::new(c.clone(), [(0.0, 2.0)]).unwrap();
    let b = ArcSet::new(c.clone(), [(1.1, 3.1)]).unwrap();
    assert_ne!(Evaluator::key(&a), Evaluator::key(&b));
    let (la, lb) = (eval.evaluate(&a).unwrap(), eval.evaluate(&b).unwrap());
    assert!((la - lb).abs() <= 5e-3 * la, "{la} vs {lb}");
}

#[test]
fn memo_cache_hits_on_equal_canonical_sets() {
    let c = BoundaryCurve::unit_square().shared();
    let eval = Evaluator::new(c.clone(), 2, 0.1);
    let a = ArcSet::new(c.clone(), [(0.5, 1.5), (2.5, 3.0)]).unwrap();
    let b = ArcSet::new(c.clone(), [(2.5, 3.0), (0.5, 1.5)]).unwrap();
    assert_eq!(Evaluator::key(&a), Evaluator::key(&b));
    let la = eval.evaluate(&a).unwrap();
    assert_eq!(eval.solves(), 1);
    assert_eq!(eval.evaluate(&b).unwrap(), la);
    assert_eq!(eval.evaluate(&a).unwrap(), la);
    assert_eq!(eval.solves(), 1);
}

#[test]
fn search_log_is_feasible_and_incumbent_is_monotone() {
    let c = BoundaryCurve::unit_square().shared();
    for objective in [Objective::Minimize, Objective::Maximize] {
        let cfg = OptimConfig { budget: 30, ..config(objective, 0.3, 2, 0.05) };
        let r = optimize_arcs(&c, &cfg, Execution::default()).unwrap();
        assert!(!r.log.is_empty());
        let target = 0.3 * c.total_length();
        for e in &r.log {
            let set = ArcSet::new(c.clone(), e.arcs.iter().map(|p| (p[0], p[1]))).unwrap();
            assert_eq!(set.component_count(), 2);
            assert!((set.measure() - target).abs() <= 1e-12 * c.total_length(), "{}", set.measure());
        }
        let trace = r.incumbent_trace();
        let ok = trace.windows(2).all(|w| match objective {
            Objective::Minimize => w[1] <= w[0],
            Objective::Maximize => w[1] >= w[0],
        });
        assert!(ok);
        assert_eq!(*trace.last().unwrap(), r.best_lambda);
        assert_eq!(r.restart_terminations.len(), cfg.restarts);
        assert_eq!(r.incumbent_csv().lines().count(), r.log.len() + 1);
    }
}

#[test]
fn same_seed_gives_identical_results() {
    let c = BoundaryCurve::unit_square().shared();
    let cfg = OptimConfig { budget: 20, ..config(Objective::Minimize, 0.25, 1, 0.05) };
    let a = optimize_arcs(&c, &cfg, Execution::Parallel).unwrap().to_json().unwrap();
    let b = optimize_arcs(&c, &cfg, Execution::Sequential).unwrap().to_json().unwrap();
    assert_eq!(a, b);
    let other = OptimConfig { seed: 12, ..cfg };
    assert_ne!(a, optimize_arcs(&c, &other, Execution::Sequential).unwrap().to_json().unwrap());
}

#[test]
fn doubling_the_component_count_raises_the_maximum() {
    let c = BoundaryCurve::circle(1.0).unwrap().shared();
    let mut best = Vec::new();
    for n in [1, 2, 4, 8] {
        let cfg = OptimConfig { budget: 20, restarts: 1, ..config(Objective::Maximize, 0.5, n, 0.04) };
        best.push(optimize_arcs(&c, &cfg, Execution::default()).unwrap().best_lambda);
    }
    assert!(best.windows(2).all(|w| w[1] > w[0]), "{best:?}");
}

#[test]
fn infeasible_component_count_is_rejected_before_search() {
    let c = BoundaryCurve::circle(1.0).unwrap().shared();
    let cfg = config(Objective::Maximize, 0.5, 40, 0.05);
    assert!(matches!(optimize_arcs(&c, &cfg, Execution::default()), Err(steklov_lab::Error::Config(_))));
}
