//! Moving a mesh onto a nearby arc configuration without changing its
//! connectivity, so that eigenvalue differences between the two
//! configurations are not polluted by remeshing noise.

use super::Mesh;
use crate::assembly::assemble_stiffness;
use crate::error::{Error, Result};
use crate::geometry::{ArcSet, CurveSpec};
use crate::linalg::{nested_dissection, SparseCholesky};
use crate::meshing::VertexKind;

impl Mesh {
    /// Slides boundary vertices along the curve so that every endpoint of the
    /// current arcs lands on the matching endpoint of `target` (piecewise
    /// linear in the curve parameter, polygon corners fixed), then moves
    /// interior vertices by the discrete harmonic extension of the boundary
    /// displacement. `target` must have the same number of arcs.
    pub fn morph_to(&self, target: &ArcSet) -> Result<Mesh> {
        target.check_same_curve(&self.curve)?;
        let l = self.curve.total_length();
        let old = self.arcs.intervals();
        let new = target.intervals();
        if old.len() != new.len() {
            return Err(Error::Meshing(format!("cannot morph {} arcs onto {}", old.len(), new.len())));
        }
        let signed = |from: f64, to: f64| {
            let d = (to - from).rem_euclid(l);
            if d > 0.5 * l {
                d - l
            } else {
                d
            }
        };
        // canonical order may rotate when an arc start crosses zero
        let n = old.len();
        let shift = (0..n.max(1))
            .min_by(|&a, &b| {
                let cost = |r: usize| -> f64 { (0..n).map(|i| signed(old[i].start, new[(i + r) % n].start).abs()).sum() };
                cost(a).total_cmp(&cost(b))
            })
            .unwrap_or(0);
        if let CurveSpec::Circle { radius, center } = self.curve.spec() {
            let deltas: Vec<f64> = (0..n)
                .flat_map(|i| {
                    let t = new[(i + shift) % n];
                    [signed(old[i].start, t.start), signed(old[i].end, t.end)]
                })
                .collect();
            if n > 0 && deltas.iter().all(|d| (d - deltas[0]).abs() <= 1e-13) {
                return self.rotate_on_circle(target, deltas[0], *radius, *center);
            }
        }
        let mut anchors: Vec<(f64, f64)> = Vec::new();
        for i in 0..n {
            let (o, t) = (old[i], new[(i + shift) % n]);
            let os = self.curve.wrap(o.start);
            let oe = self.curve.wrap(o.end);
            anchors.push((os, os + signed(o.start, t.start)));
            anchors.push((oe, oe + signed(o.end, t.end)));
        }
        for c in self.curve.corner_params() {
            if !anchors.iter().any(|a| self.curve.cyclic_distance(a.0, c) <= 1e-12) {
                anchors.push((c, c));
            }
        }
        anchors.sort_by(|a, b| a.0.total_cmp(&b.0));
        let m = anchors.len();
        for i in 0..m {
            let (a, b) = (anchors[i], anchors[(i + 1) % m]);
            let (o_gap, n_gap) = if i + 1 < m { (b.0 - a.0, b.1 - a.1) } else { (b.0 + l - a.0, b.1 + l - a.1) };
            if m > 1 && !(n_gap > 0.0 && o_gap > 0.0) {
                return Err(Error::Meshing("morph would fold the boundary parametrization".into()));
            }
        }
        let map = |t: f64| -> f64 {
            if m == 0 {
                return t;
            }
            if m == 1 {
                return t + (anchors[0].1 - anchors[0].0);
            }
            // anchor interval containing t, cyclically
            let i = match anchors.iter().rposition(|a| a.0 <= t) {
                Some(i) => i,
                None => m - 1,
            };
            let a = anchors[i];
            let (b0, b1) = if i + 1 < m { anchors[i + 1] } else { (anchors[0].0 + l, anchors[0].1 + l) };
            let tt = if t < a.0 { t + l } else { t };
            a.1 + (tt - a.0) * (b1 - a.1) / (b0 - a.0)
        };

        let mut vertices = self.vertices.clone();
        let mut params = Vec::with_capacity(self.boundary_params.len());
        let nv = vertices.len();
        let mut disp = vec![[0.0f64; 2]; nv];
        for (k, &v) in self.boundary_vertices.iter().enumerate() {
            let t = self.curve.wrap(map(self.boundary_params[k]));
            params.push(t);
            let p = self.curve.point(t);
            disp[v] = [p[0] - vertices[v][0], p[1] - vertices[v][1]];
            vertices[v] = p;
        }

        let interior: Vec<usize> = (0..nv).filter(|&v| self.kinds[v] == VertexKind::Interior).collect();
        if !interior.is_empty() {
            let a = assemble_stiffness(self)?;
            let aii = a.principal_submatrix(&interior);
            let perm = nested_dissection(&aii.adjacency());
            let f = SparseCholesky::factor(&aii, &perm, "mesh morph")?;
            for c in 0..2 {
                let d: Vec<f64> = disp.iter().map(|x| x[c]).collect();
                let ad = a.mul_vec(&d)?;
                let rhs: Vec<f64> = interior.iter().map(|&v| -ad[v]).collect();
                let x = f.solve(&rhs)?;
                for (k, &v) in interior.iter().enumerate() {
                    vertices[v][c] += x[k];
                }
            }
        }
        Mesh::from_parts(target, vertices, self.triangles.clone(), self.boundary_vertices.clone(), params)
    }
}

impl Mesh {
    /// Rigid rotation by arclength `delta`: the rotated mesh is congruent,
    /// so its spectrum matches up to rounding.
    fn rotate_on_circle(&self, target: &ArcSet, delta: f64, radius: f64, center: [f64; 2]) -> Result<Mesh> {
        let (s, c) = (delta / radius).sin_cos();
        let vertices = self
            .vertices
            .iter()
            .map(|p| {
                let (x, y) = (p[0] - center[0], p[1] - center[1]);
                [center[0] + c * x - s * y, center[1] + s * x + c * y]
            })
            .collect();
        let params = self.boundary_params.iter().map(|&t| self.curve.wrap(t + delta)).collect();
        Mesh::from_parts(target, vertices, self.triangles.clone(), self.boundary_vertices.clone(), params)
    }
}
