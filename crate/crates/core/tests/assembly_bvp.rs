use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steklov_lab::assembly::{
    assemble_boundary_mass, assemble_stiffness, discrete_problem, full_pencil_eigenvalues, schur_reduce,
    solve_mixed_bvp,
};
use steklov_lab::eigensolve::solve_problem;
use steklov_lab::experiments::{half_disk_domain, half_disk_exact};
use steklov_lab::geometry::{ArcSet, BoundaryCurve, Point};
use steklov_lab::meshing::{mesh_domain, EdgeTag, Mesh};
use steklov_lab::Execution;

fn problem(arcs: &ArcSet, h: f64) -> steklov_lab::assembly::DiscreteProblem {
    let mesh = Arc::new(mesh_domain(arcs.curve(), arcs, h).unwrap());
    discrete_problem(mesh, Execution::Sequential).unwrap()
}

fn square_top(h: f64) -> steklov_lab::assembly::DiscreteProblem {
    let c = BoundaryCurve::unit_square().shared();
    problem(&ArcSet::new(c, [(2.0, 3.0)]).unwrap(), h)
}

fn data(p: &steklov_lab::assembly::DiscreteProblem, g: impl Fn(Point) -> f64, d: impl Fn(Point) -> f64) -> (Vec<f64>, Vec<f64>) {
    let x = p.mesh().vertices();
    (p.steklov_vertices().iter().map(|&v| g(x[v])).collect(), p.dirichlet_vertices().iter().map(|&v| d(x[v])).collect())
}

fn energy(mesh: &Mesh, u: &[f64]) -> f64 {
    assemble_stiffness(mesh).unwrap().quadratic_form(u).unwrap()
}

#[test]
fn zero_data_gives_zero_solution() {
    let p = square_top(0.1);
    let (g, d) = data(&p, |_| 0.0, |_| 0.0);
    assert!(solve_mixed_bvp(&p, &g, &d).unwrap().iter().all(|&u| u == 0.0));
}

#[test]
fn linear_solutions_are_reproduced() {
    let p = square_top(0.1);
    // u = x + 2y has outward normal derivative 2 on the top edge
    let exact = |q: Point| q[0] + 2.0 * q[1];
    let (g, d) = data(&p, |_| 2.0, exact);
    let u = solve_mixed_bvp(&p, &g, &d).unwrap();
    for (v, q) in p.mesh().vertices().iter().enumerate() {
        assert!((u[v] - exact(*q)).abs() <= 1e-10, "vertex {v}: {} vs {}", u[v], exact(*q));
    }
}

#[test]
fn discrete_maximum_principle() {
    let c = BoundaryCurve::circle(1.0).unwrap().shared();
    let p = problem(&ArcSet::new(c, [(0.5, 2.5)]).unwrap(), 0.08);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (g, _) = data(&p, |_| 0.0, |_| 0.0);
    let d: Vec<f64> = p.dirichlet_vertices().iter().map(|_| rng.random_range(0.0..1.0)).collect();
    let u = solve_mixed_bvp(&p, &g, &d).unwrap();
    assert!(u.iter().all(|&x| (-1e-10..=1.0 + 1e-10).contains(&x)));
}

#[test]
fn galerkin_energy_is_below_interpolant_energy() {
    let arcs = half_disk_domain(1.0, 32).unwrap();
    for h in [0.1, 0.05] {
        let p = problem(&arcs, h);
        let (g, d) = data(&p, |_| 0.0, half_disk_exact);
        let u = solve_mixed_bvp(&p, &g, &d).unwrap();
        let interp: Vec<f64> = p.mesh().vertices().iter().map(|&q| half_disk_exact(q)).collect();
        let (eu, ei) = (energy(p.mesh(), &u), energy(p.mesh(), &interp));
        assert!(eu <= ei * (1.0 + 1e-12), "h={h}: {eu} > {ei}");
    }
}

#[test]
fn stiffness_rows_sum_to_zero_and_mass_matches_tagged_length() {
    let circle = BoundaryCurve::circle(1.0).unwrap().shared();
    let square = BoundaryCurve::unit_square().shared();
    for arcs in [
        ArcSet::new(circle.clone(), [(0.0, 3.0)]).unwrap(),
        ArcSet::lgl_sequence(circle, 0.5, 4).unwrap(),
        ArcSet::new(square, [(2.0, 3.0)]).unwrap(),
    ] {
        let mesh = mesh_domain(arcs.curve(), &arcs, 0.1).unwrap();
        let ones = vec![1.0; mesh.num_vertices()];
        let a = assemble_stiffness(&mesh).unwrap();
        assert!(a.mul_vec(&ones).unwrap().iter().all(|r| r.abs() <= 1e-12));
        let m = assemble_boundary_mass(&mesh);
        assert!((m.quadratic_form(&ones).unwrap() - mesh.steklov_length()).abs() <= 1e-12);
        let mut trace_free = ones.clone();
        for e in mesh.boundary_edges().iter().filter(|e| e.tag == EdgeTag::Steklov) {
            trace_free[e.v[0]] = 0.0;
            trace_free[e.v[1]] = 0.0;
        }
        assert_eq!(m.quadratic_form(&trace_free).unwrap(), 0.0);
    }
}

#[test]
fn semicircle_mass_converges_at_second_order() {
    let c = BoundaryCurve::circle(1.0).unwrap().shared();
    let arcs = ArcSet::new(c.clone(), [(0.0, std::f64::consts::PI)]).unwrap();
    let mut mesh = mesh_domain(&c, &arcs, 0.3).unwrap();
    let mut errors = Vec::new();
    for _ in 0..4 {
        let ones = vec![1.0; mesh.num_vertices()];
        errors.push((assemble_boundary_mass(&mesh).quadratic_form(&ones).unwrap() - std::f64::consts::PI).abs());
        mesh = mesh.refine().unwrap();
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "order {order} from {errors:?}");
    }
}

#[test]
fn dirichlet_elimination_on_the_square() {
    let p = square_top(0.125);
    let mesh = p.mesh();
    let x = mesh.vertices();
    let mut expected: Vec<usize> = mesh
        .boundary_vertices()
        .iter()
        .copied()
        .filter(|&v| x[v][1] < 1.0 - 1e-12 || x[v][0] < 1e-12 || x[v][0] > 1.0 - 1e-12)
        .collect();
    expected.sort_unstable();
    let mut got = p.dirichlet_vertices().to_vec();
    got.sort_unstable();
    assert_eq!(got, expected);
    assert_eq!(p.num_free(), mesh.num_vertices() - got.len());
    assert!(got.iter().any(|&v| x[v] == [0.0, 1.0]) && got.iter().any(|&v| x[v] == [1.0, 1.0]));
}

#[test]
fn schur_and_full_pencil_agree_on_every_fixture() {
    let circle = BoundaryCurve::circle(1.0).unwrap().shared();
    let square = BoundaryCurve::unit_square().shared();
    let star = BoundaryCurve::star([0.0, 0.0], vec![1.0, 0.0, 0.2], vec![0.1]).unwrap().shared();
    let sl = star.total_length();
    let fixtures = [
        (ArcSet::new(square, [(2.0, 3.0)]).unwrap(), 0.1),
        (ArcSet::new(circle.clone(), [(0.0, std::f64::consts::PI)]).unwrap(), 0.1),
        (ArcSet::lgl_sequence(circle, 0.5, 4).unwrap(), 0.08),
        (ArcSet::new(star, [(0.1 * sl, 0.4 * sl), (0.6 * sl, 0.7 * sl)]).unwrap(), 0.08),
        (half_disk_domain(1.0, 24).unwrap(), 0.1),
    ];
    for (arcs, h) in fixtures {
        let p = schur_reduce(problem(&arcs, h)).unwrap();
        let pair = p.schur().unwrap();
        assert_eq!(pair.s.nrows(), p.steklov_dofs().len());
        let sym = (&pair.s - pair.s.transpose()).amax() / pair.s.amax();
        assert!(sym <= 1e-12);
        let reduced = solve_problem(&p, 3, Execution::Sequential).unwrap();
        let full = full_pencil_eigenvalues(&p, 3).unwrap();
        for (a, b) in reduced.lambda.iter().zip(&full) {
            assert!((a - b).abs() <= 1e-9 * b, "{a} vs {b}");
        }
    }
}
