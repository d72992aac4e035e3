//! Mesh generation: boundary sampling, a hexagonal interior lattice and
//! constrained Delaunay refinement.

use std::collections::HashSet;
use std::sync::Arc;

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::{signed_area, Mesh, ENDPOINT_TOL};
use crate::error::{Error, Result};
use crate::geometry::{ArcSet, BoundaryCurve, Point};

/// Quality floor every produced mesh satisfies.
pub const MIN_ANGLE_DEG: f64 = 15.0;
/// Angle requested from the refiner; the margin absorbs boundary projection.
const REFINE_ANGLE_DEG: f64 = 25.0;
/// Interior lattice points closer than this (in units of `h_target`) to the
/// boundary polyline are dropped.
const CLEARANCE: f64 = 0.6;

/// Meshes the domain bounded by `curve` with boundary vertices at every
/// endpoint of `arcs`.
pub fn mesh_domain(curve: &Arc<BoundaryCurve>, arcs: &ArcSet, h_target: f64) -> Result<Mesh> {
    mesh_domain_with_breakpoints(curve, arcs, &[], h_target)
}

/// Like [`mesh_domain`], with additional forced boundary vertices. Meshes
/// built with the endpoints of several arc sets can be retagged for each of
/// them (see [`Mesh::retag`]).
pub fn mesh_domain_with_breakpoints(
    curve: &Arc<BoundaryCurve>,
    arcs: &ArcSet,
    extra: &[f64],
    h_target: f64,
) -> Result<Mesh> {
    mesh_domain_graded(curve, arcs, extra, h_target, h_target)
}

/// Mesh with boundary spacing `h_boundary` grading to interior size
/// `h_interior >= h_boundary`. Useful when the solution varies on the scale
/// of the boundary features while the interior is smooth.
pub fn mesh_domain_graded(
    curve: &Arc<BoundaryCurve>,
    arcs: &ArcSet,
    extra: &[f64],
    h_boundary: f64,
    h_interior: f64,
) -> Result<Mesh> {
    arcs.check_same_curve(curve)?;
    if !(h_boundary > 0.0 && h_boundary.is_finite() && h_interior >= h_boundary && h_interior.is_finite()) {
        return Err(Error::Meshing(format!("invalid mesh sizes: boundary {h_boundary}, interior {h_interior}")));
    }
    check_admissible(arcs, h_boundary)?;
    let h_target = h_interior;

    let params = boundary_params(curve, arcs, extra, h_boundary);
    let boundary: Vec<Point> = params.iter().map(|&t| curve.point(t)).collect();
    let interior = lattice_points(&boundary, h_target);
    let nb = boundary.len();

    let mut input: Vec<Point2<f64>> = boundary.iter().map(|p| Point2::new(p[0], p[1])).collect();
    input.extend(interior.iter().map(|p| Point2::new(p[0], p[1])));
    let n_input = input.len();
    let edges: Vec<[usize; 2]> = (0..nb).map(|k| [k, (k + 1) % nb]).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(input, edges)
        .map_err(|e| Error::Meshing(format!("triangulation failed: {e:?}")))?;
    if cdt.num_vertices() != n_input {
        return Err(Error::Meshing("duplicate input points".into()));
    }
    let result = cdt.refine(
        RefinementParameters::<f64>::new()
            .with_angle_limit(AngleLimit::from_deg(REFINE_ANGLE_DEG))
            .with_max_allowed_area(0.6 * h_target * h_target)
            .with_max_additional_vertices(20 * n_input + 10_000)
            .exclude_outer_faces(true),
    );
    if !result.refinement_complete {
        return Err(Error::Meshing("Delaunay refinement did not converge".into()));
    }
    let excluded: HashSet<usize> = result.excluded_faces.iter().map(|f| f.index()).collect();

    let mut positions: Vec<Point> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); positions.len()];
    for e in cdt.undirected_edges() {
        if e.is_constraint_edge() {
            let [a, b] = e.vertices();
            let (a, b) = (a.fix().index(), b.fix().index());
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }

    // Walk the constraint cycle from vertex 0 towards original vertex 1.
    let seg = |p: Point, a: Point, b: Point| crate::geometry::distance::point_segment_distance(p, a, b);
    let start = *neighbors[0]
        .iter()
        .min_by(|&&x, &&y| seg(positions[x], boundary[0], boundary[1 % nb]).total_cmp(&seg(positions[y], boundary[0], boundary[1 % nb])))
        .ok_or_else(|| Error::Meshing("boundary vertex 0 lost its constraint edges".into()))?;
    let mut cycle = vec![0usize];
    let (mut prev, mut cur) = (0usize, start);
    while cur != 0 {
        if cycle.len() > positions.len() {
            return Err(Error::Meshing("boundary constraint edges do not form a cycle".into()));
        }
        cycle.push(cur);
        let next = neighbors[cur]
            .iter()
            .copied()
            .find(|&w| w != prev)
            .ok_or_else(|| Error::Meshing("open boundary chain".into()))?;
        prev = cur;
        cur = next;
    }

    // Parameters for split boundary edges by chord fraction, then project.
    let l = curve.total_length();
    let mut cycle_params = Vec::with_capacity(cycle.len());
    let mut k = 0;
    while k < cycle.len() {
        let a = cycle[k];
        if a >= nb {
            return Err(Error::Meshing("boundary cycle is out of order".into()));
        }
        cycle_params.push(params[a]);
        let mut j = k + 1;
        while j < cycle.len() && cycle[j] >= nb {
            j += 1;
        }
        let b = if j < cycle.len() { cycle[j] } else { 0 };
        if b != (a + 1) % nb {
            return Err(Error::Meshing("boundary cycle skips an input vertex".into()));
        }
        let (ta, mut tb) = (params[a], params[b]);
        if tb <= ta {
            tb += l;
        }
        let chord = dist(boundary[a], boundary[b]);
        for &v in &cycle[k + 1..j] {
            let s = dist(boundary[a], positions[v]) / chord;
            let t = curve.wrap(ta + s * (tb - ta));
            cycle_params.push(t);
            positions[v] = curve.point(t);
        }
        k = j;
    }

    // Inner faces, counterclockwise, and compaction of unused vertices.
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for f in cdt.inner_faces() {
        if excluded.contains(&f.fix().index()) {
            continue;
        }
        let [a, b, c] = f.vertices().map(|v| v.fix().index());
        let t = if signed_area([positions[a], positions[b], positions[c]]) >= 0.0 { [a, b, c] } else { [a, c, b] };
        triangles.push(t);
    }
    let mut remap = vec![usize::MAX; positions.len()];
    let mut used: Vec<bool> = vec![false; positions.len()];
    for t in &triangles {
        for &v in t {
            used[v] = true;
        }
    }
    let mut vertices = Vec::new();
    for (v, p) in positions.iter().enumerate() {
        if used[v] {
            remap[v] = vertices.len();
            vertices.push(*p);
        }
    }
    for t in &mut triangles {
        for v in t.iter_mut() {
            *v = remap[*v];
        }
    }
    let boundary_vertices: Vec<usize> = cycle.iter().map(|&v| remap[v]).collect();
    if boundary_vertices.contains(&usize::MAX) {
        return Err(Error::Meshing("boundary vertex without triangles".into()));
    }
    let mesh = Mesh::from_parts(arcs, vertices, triangles, boundary_vertices, cycle_params)?;
    if mesh.h() > 2.0 * h_target {
        return Err(Error::Meshing(format!("mesh size {} exceeds twice the target {h_target}", mesh.h())));
    }
    Ok(mesh)
}

fn check_admissible(arcs: &ArcSet, h_target: f64) -> Result<()> {
    if arcs.is_empty() {
        return Ok(());
    }
    let gaps = arcs.complement();
    let features = arcs
        .intervals()
        .iter()
        .enumerate()
        .map(|(i, iv)| ("arc", i, iv.len()))
        .chain(gaps.intervals().iter().enumerate().map(|(i, iv)| ("gap", i, iv.len())));
    for (feature, index, length) in features {
        if h_target > 0.5 * length * (1.0 + 1e-9) {
            return Err(Error::MeshTooCoarse { h_target, feature, index, length, max_admissible: 0.5 * length });
        }
    }
    Ok(())
}

/// Boundary parameters: forced breakpoints (arc endpoints first, then
/// corners and extras) with equal subdivisions of spacing at most `h`.
fn boundary_params(curve: &BoundaryCurve, arcs: &ArcSet, extra: &[f64], h: f64) -> Vec<f64> {
    let l = curve.total_length();
    let mut bps: Vec<f64> = arcs.endpoints();
    for t in curve.corner_params().into_iter().chain(extra.iter().map(|&t| curve.wrap(t))) {
        if !bps.iter().any(|&b| curve.cyclic_distance(b, t) <= ENDPOINT_TOL) {
            bps.push(t);
        }
    }
    if bps.is_empty() {
        bps.push(0.0);
    }
    bps.sort_by(f64::total_cmp);
    bps.dedup_by(|a, b| curve.cyclic_distance(*a, *b) <= ENDPOINT_TOL);
    let mut out = Vec::new();
    for (i, &a) in bps.iter().enumerate() {
        let b = if i + 1 < bps.len() { bps[i + 1] } else { bps[0] + l };
        let n = (((b - a) / h) - 1e-9).ceil().max(1.0) as usize;
        out.push(a);
        for j in 1..n {
            out.push(curve.wrap(a + (b - a) * j as f64 / n as f64));
        }
    }
    out
}

/// Hexagonal lattice of spacing `h` inside the polygon, away from its edges.
fn lattice_points(boundary: &[Point], h: f64) -> Vec<Point> {
    let nb = boundary.len();
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in boundary {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let grid = SegmentGrid::new(boundary, h, [xmin, ymin], [xmax, ymax]);
    let dy = h * 3f64.sqrt() / 2.0;
    let rows = ((ymax - ymin) / dy).floor() as usize + 1;
    let mut out = Vec::new();
    for j in 0..rows {
        let y = ymin + (j as f64 + 0.5) * dy;
        let mut xs: Vec<f64> = Vec::new();
        for k in 0..nb {
            let (a, b) = (boundary[k], boundary[(k + 1) % nb]);
            if (a[1] <= y) != (b[1] <= y) {
                xs.push(a[0] + (y - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
            }
        }
        xs.sort_by(f64::total_cmp);
        let offset = if j % 2 == 0 { 0.0 } else { 0.5 * h };
        for pair in xs.chunks_exact(2) {
            let first = ((pair[0] - xmin - offset) / h).ceil() as i64;
            let mut i = first.max(0);
            loop {
                let x = xmin + offset + i as f64 * h;
                if x > pair[1] {
                    break;
                }
                if grid.clear([x, y], CLEARANCE * h) {
                    out.push([x, y]);
                }
                i += 1;
            }
        }
    }
    out
}

/// Uniform bucket grid over boundary segments for clearance queries.
struct SegmentGrid<'a> {
    pts: &'a [Point],
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> SegmentGrid<'a> {
    fn new(pts: &'a [Point], cell: f64, lo: Point, hi: Point) -> Self {
        let nx = ((hi[0] - lo[0]) / cell).ceil() as usize + 1;
        let ny = ((hi[1] - lo[1]) / cell).ceil() as usize + 1;
        let mut g = Self { pts, origin: lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        let n = pts.len();
        for k in 0..n {
            let (a, b) = (pts[k], pts[(k + 1) % n]);
            let (i0, j0) = g.cell_of([a[0].min(b[0]), a[1].min(b[1])]);
            let (i1, j1) = g.cell_of([a[0].max(b[0]), a[1].max(b[1])]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    g.buckets[i + nx * j].push(k);
                }
            }
        }
        g
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let i = ((p[0] - self.origin[0]) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p[1] - self.origin[1]) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }

    /// True when no segment is within `r` of `p` (requires `r <= cell`).
    fn clear(&self, p: Point, r: f64) -> bool {
        let (ci, cj) = self.cell_of(p);
        let n = self.pts.len();
        for j in cj.saturating_sub(1)..=(cj + 1).min(self.ny - 1) {
            for i in ci.saturating_sub(1)..=(ci + 1).min(self.nx - 1) {
                for &k in &self.buckets[i + self.nx * j] {
                    let d = crate::geometry::distance::point_segment_distance(p, self.pts[k], self.pts[(k + 1) % n]);
                    if d < r {
                        return false;
                    }
                }
            }
        }
        true
    }
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshing::{EdgeTag, VertexKind};
    use std::f64::consts::PI;

    #[test]
    fn circle_half_arc() {
        let c = BoundaryCurve::circle(1.0).unwrap().shared();
        let arcs = ArcSet::new(c.clone(), [(0.0, PI)]).unwrap();
        let m = mesh_domain(&c, &arcs, 0.2).unwrap();
        assert!(m.boundary_edges().len() >= 32);
        assert!(m.boundary_params().contains(&0.0));
        assert!(m.boundary_params().contains(&PI));
        assert!(m.h() <= 0.4);
        assert!(m.quality().min_angle_deg >= MIN_ANGLE_DEG);
        let v0 = m.boundary_vertex_at(0.0).unwrap();
        assert_eq!(m.vertex_kinds()[v0], VertexKind::Dirichlet);
        assert!((m.steklov_length() - PI).abs() < 0.02);
    }

    #[test]
    fn square_top_edge() {
        let c = BoundaryCurve::unit_square().shared();
        let arcs = ArcSet::new(c.clone(), [(2.0, 3.0)]).unwrap();
        let m = mesh_domain(&c, &arcs, 0.125).unwrap();
        for corner in [0.0, 1.0, 2.0, 3.0] {
            assert!(m.boundary_params().contains(&corner));
        }
        for e in m.boundary_edges() {
            let [a, b] = e.v;
            let top = m.vertices()[a][1] == 1.0 && m.vertices()[b][1] == 1.0;
            assert_eq!(top, e.tag == EdgeTag::Steklov);
        }
        assert_eq!(m.quality().steklov_vertices, 7);
    }

    #[test]
    fn too_coarse_names_interval_and_bound() {
        let c = BoundaryCurve::circle(1.0).unwrap().shared();
        let arcs = ArcSet::new(c.clone(), [(1.0, 1.01)]).unwrap();
        match mesh_domain(&c, &arcs, 0.2) {
            Err(Error::MeshTooCoarse { feature, index, max_admissible, .. }) => {
                assert_eq!((feature, index), ("arc", 0));
                assert!((max_admissible - 0.005).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let c = BoundaryCurve::star([0.0, 0.0], vec![1.0, 0.0, 0.15], vec![0.1]).unwrap().shared();
        let arcs = ArcSet::new(c.clone(), [(0.5, 2.5), (4.0, 5.0)]).unwrap();
        let a = mesh_domain(&c, &arcs, 0.1).unwrap();
        let b = mesh_domain(&c, &arcs, 0.1).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    }
}
