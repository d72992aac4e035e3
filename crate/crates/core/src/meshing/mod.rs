//! Conforming triangulations with Steklov/Dirichlet boundary tags.

mod generate;
mod morph;
mod refine;

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArcSet, BoundaryCurve, Point};

pub use generate::{mesh_domain, mesh_domain_graded, mesh_domain_with_breakpoints, MIN_ANGLE_DEG};

/// Tolerance (arclength) for matching arc endpoints to boundary vertices.
pub const ENDPOINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeTag {
    #[serde(rename = "S")]
    Steklov,
    #[serde(rename = "D")]
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub tag: EdgeTag,
    /// Index of the Steklov arc, or of the Dirichlet component, containing the edge.
    pub interval: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Interior,
    Steklov,
    Dirichlet,
}

#[derive(Clone, Debug)]
pub struct Mesh {
    curve: Arc<BoundaryCurve>,
    arcs: ArcSet,
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    /// Boundary vertices in counterclockwise cycle order.
    boundary_vertices: Vec<usize>,
    /// Curve parameter of each entry of `boundary_vertices`, in `[0, L)`.
    boundary_params: Vec<f64>,
    /// Edge `k` joins `boundary_vertices[k]` and `boundary_vertices[k + 1]`.
    boundary_edges: Vec<BoundaryEdge>,
    kinds: Vec<VertexKind>,
    h: f64,
}

/// Summary used by diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshQuality {
    pub min_angle_deg: f64,
    /// Circumradius over twice the inradius; 1 for an equilateral triangle.
    pub max_aspect_ratio: f64,
    pub h: f64,
    pub min_edge: f64,
    pub vertices: usize,
    pub triangles: usize,
    pub boundary_edges: usize,
    pub steklov_edges: usize,
    pub steklov_vertices: usize,
    pub dirichlet_vertices: usize,
}

#[derive(Serialize, Deserialize)]
struct MeshExport {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    /// Assembles a mesh from raw parts, tags the boundary against `arcs` and
    /// checks every invariant.
    pub(crate) fn from_parts(
        arcs: &ArcSet,
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary_vertices: Vec<usize>,
        boundary_params: Vec<f64>,
    ) -> Result<Self> {
        let curve = arcs.curve().clone();
        let n = boundary_vertices.len();
        let mut mesh = Mesh {
            curve,
            arcs: arcs.clone(),
            vertices,
            triangles,
            boundary_vertices,
            boundary_params,
            boundary_edges: Vec::with_capacity(n),
            kinds: Vec::new(),
            h: 0.0,
        };
        mesh.apply_tags(arcs)?;
        mesh.h = mesh.edge_lengths().fold(0.0, f64::max);
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn curve(&self) -> &Arc<BoundaryCurve> {
        &self.curve
    }

    /// The Steklov set the tags were computed from.
    pub fn arcs(&self) -> &ArcSet {
        &self.arcs
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn boundary_params(&self) -> &[f64] {
        &self.boundary_params
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn vertex_kinds(&self) -> &[VertexKind] {
        &self.kinds
    }

    /// Maximum edge length.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Same triangulation with tags recomputed for another Steklov set. Every
    /// endpoint of `arcs` must already be a boundary vertex.
    pub fn retag(&self, arcs: &ArcSet) -> Result<Mesh> {
        arcs.check_same_curve(&self.curve)?;
        let mut mesh = self.clone();
        mesh.arcs = arcs.clone();
        mesh.apply_tags(arcs)?;
        Ok(mesh)
    }

    fn apply_tags(&mut self, arcs: &ArcSet) -> Result<()> {
        let l = self.curve.total_length();
        for e in arcs.endpoints() {
            let hit = self.boundary_params.iter().any(|&t| self.curve.cyclic_distance(t, e) <= ENDPOINT_TOL);
            if !hit {
                return Err(Error::Meshing(format!("arc endpoint {e} is not a boundary vertex of the mesh")));
            }
        }
        let gaps = arcs.complement();
        let n = self.boundary_vertices.len();
        self.boundary_edges.clear();
        for k in 0..n {
            let (a, mut b) = (self.boundary_params[k], self.boundary_params[(k + 1) % n]);
            if b <= a {
                b += l;
            }
            let mid = 0.5 * (a + b);
            let edge = [self.boundary_vertices[k], self.boundary_vertices[(k + 1) % n]];
            let e = match arcs.arc_containing(mid) {
                Some(i) => BoundaryEdge { v: edge, tag: EdgeTag::Steklov, interval: i },
                None => {
                    let m = self.curve.wrap(mid);
                    let i = gaps
                        .intervals()
                        .iter()
                        .position(|g| (m >= g.start && m <= g.end) || (m + l >= g.start && m + l <= g.end))
                        .unwrap_or(0);
                    BoundaryEdge { v: edge, tag: EdgeTag::Dirichlet, interval: i }
                }
            };
            self.boundary_edges.push(e);
        }
        self.kinds = vec![VertexKind::Interior; self.vertices.len()];
        for (k, &v) in self.boundary_vertices.iter().enumerate() {
            let t = self.boundary_params[k];
            let near_endpoint = arcs.endpoints().iter().any(|&e| self.curve.cyclic_distance(t, e) <= ENDPOINT_TOL);
            self.kinds[v] =
                if !near_endpoint && arcs.contains_open(t) { VertexKind::Steklov } else { VertexKind::Dirichlet };
        }
        Ok(())
    }

    fn edge_lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.triangles.iter().flat_map(move |t| {
            (0..3).map(move |j| dist(self.vertices[t[j]], self.vertices[t[(j + 1) % 3]]))
        })
    }

    /// Checks the structural and quality invariants.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (i, t) in self.triangles.iter().enumerate() {
            if t.iter().any(|&v| v >= nv) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(Error::Meshing(format!("triangle {i} has invalid vertices {t:?}")));
            }
            if signed_area(self.tri(i)) <= 0.0 {
                return Err(Error::DegenerateTriangle(i));
            }
            let a = min_angle_deg(self.tri(i));
            if a < MIN_ANGLE_DEG {
                return Err(Error::Meshing(format!("triangle {i} has minimum angle {a:.2} degrees")));
            }
        }
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for j in 0..3 {
                let (a, b) = (t[j], t[(j + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut boundary_count = 0;
        for (&(a, b), &c) in &edges {
            match c {
                1 => boundary_count += 1,
                2 => {}
                _ => return Err(Error::Meshing(format!("edge ({a}, {b}) is shared by {c} triangles"))),
            }
        }
        let n = self.boundary_vertices.len();
        if boundary_count != n || self.boundary_edges.len() != n {
            return Err(Error::Meshing(format!("{boundary_count} boundary edges but a boundary cycle of {n}")));
        }
        for e in &self.boundary_edges {
            let (a, b) = (e.v[0], e.v[1]);
            if edges.get(&(a.min(b), a.max(b))) != Some(&1) {
                return Err(Error::Meshing(format!("boundary edge ({a}, {b}) is not a mesh boundary edge")));
            }
        }
        let used = {
            let mut u = vec![false; nv];
            for t in &self.triangles {
                for &v in t {
                    u[v] = true;
                }
            }
            u
        };
        if let Some(v) = used.iter().position(|&u| !u) {
            return Err(Error::Meshing(format!("vertex {v} is not used by any triangle")));
        }
        // V - E + T = 1 for a triangulated disk
        let euler = nv as i64 - edges.len() as i64 + self.triangles.len() as i64;
        if euler != 1 {
            return Err(Error::Meshing(format!("Euler characteristic {euler}, expected 1")));
        }
        Ok(())
    }

    fn tri(&self, i: usize) -> [Point; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn triangle_points(&self, i: usize) -> [Point; 3] {
        self.tri(i)
    }

    /// Total length of Steklov-tagged boundary edges.
    pub fn steklov_length(&self) -> f64 {
        self.boundary_edges
            .iter()
            .filter(|e| e.tag == EdgeTag::Steklov)
            .map(|e| dist(self.vertices[e.v[0]], self.vertices[e.v[1]]))
            .sum()
    }

    /// Boundary vertex whose parameter is closest to `t` (cyclically).
    pub fn boundary_vertex_at(&self, t: f64) -> Option<usize> {
        let k = (0..self.boundary_params.len()).min_by(|&a, &b| {
            self.curve
                .cyclic_distance(self.boundary_params[a], t)
                .total_cmp(&self.curve.cyclic_distance(self.boundary_params[b], t))
        })?;
        Some(self.boundary_vertices[k])
    }

    /// Triangle containing `p` and the barycentric coordinates of `p` in it.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for i in 0..self.triangles.len() {
            let b = barycentric(self.tri(i), p);
            let worst = b.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= 0.0 {
                return Some((i, b));
            }
            if best.as_ref().is_none_or(|x| worst > x.2) {
                best = Some((i, b, worst));
            }
        }
        // tolerate points a rounding error outside a boundary edge
        best.filter(|x| x.2 > -1e-10).map(|x| (x.0, x.1))
    }

    /// P1 interpolation of nodal values at `p`.
    pub fn interpolate(&self, values: &[f64], p: Point) -> Result<f64> {
        let (t, b) = self.locate(p).ok_or(Error::OutsideMesh(p[0], p[1]))?;
        let tri = self.triangles[t];
        Ok((0..3).map(|j| b[j] * values[tri[j]]).sum())
    }

    pub fn quality(&self) -> MeshQuality {
        let mut min_angle = f64::INFINITY;
        let mut max_aspect: f64 = 0.0;
        for i in 0..self.triangles.len() {
            let t = self.tri(i);
            min_angle = min_angle.min(min_angle_deg(t));
            max_aspect = max_aspect.max(aspect_ratio(t));
        }
        let count = |k: VertexKind| self.kinds.iter().filter(|&&x| x == k).count();
        MeshQuality {
            min_angle_deg: min_angle,
            max_aspect_ratio: max_aspect,
            h: self.h,
            min_edge: self.edge_lengths().fold(f64::INFINITY, f64::min),
            vertices: self.vertices.len(),
            triangles: self.triangles.len(),
            boundary_edges: self.boundary_edges.len(),
            steklov_edges: self.boundary_edges.iter().filter(|e| e.tag == EdgeTag::Steklov).count(),
            steklov_vertices: count(VertexKind::Steklov),
            dirichlet_vertices: count(VertexKind::Dirichlet),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let e = MeshExport {
            vertices: self.vertices.clone(),
            triangles: self.triangles.clone(),
            boundary_edges: self.boundary_edges.clone(),
        };
        Ok(serde_json::to_string(&e)?)
    }

    /// One row per triangle with its corner coordinates, for plotting tools.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("triangle,v0,v1,v2,x0,y0,x1,y1,x2,y2\n");
        for (i, t) in self.triangles.iter().enumerate() {
            let p = self.tri(i);
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{},{},{},{},{}",
                t[0], t[1], t[2], p[0][0], p[0][1], p[1][0], p[1][1], p[2][0], p[2][1]
            );
        }
        s
    }
}

/// Minimum-angle of the equilateral fixture etc., exposed for the quality report.
pub fn min_angle_deg(t: [Point; 3]) -> f64 {
    let mut m = f64::INFINITY;
    for j in 0..3 {
        let (a, b, c) = (t[j], t[(j + 1) % 3], t[(j + 2) % 3]);
        let u = [b[0] - a[0], b[1] - a[1]];
        let v = [c[0] - a[0], c[1] - a[1]];
        let ang = (u[0] * v[1] - u[1] * v[0]).abs().atan2(u[0] * v[0] + u[1] * v[1]);
        m = m.min(ang.to_degrees());
    }
    m
}

pub(crate) fn signed_area(t: [Point; 3]) -> f64 {
    0.5 * ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]))
}

fn aspect_ratio(t: [Point; 3]) -> f64 {
    let a = dist(t[1], t[2]);
    let b = dist(t[0], t[2]);
    let c = dist(t[0], t[1]);
    let area = signed_area(t).abs();
    let s = 0.5 * (a + b + c);
    let r_in = area / s;
    let r_circ = a * b * c / (4.0 * area);
    r_circ / (2.0 * r_in)
}

pub(crate) fn barycentric(t: [Point; 3], p: Point) -> [f64; 3] {
    let area = signed_area(t);
    let b0 = signed_area([p, t[1], t[2]]) / area;
    let b1 = signed_area([t[0], p, t[2]]) / area;
    [b0, b1, 1.0 - b0 - b1]
}

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
