use std::collections::HashMap;

use super::Mesh;
use crate::error::Result;

impl Mesh {
    /// Uniform red refinement: every triangle splits into four through its
    /// edge midpoints. Boundary midpoints are placed on the exact curve at
    /// the parameter midpoint.
    pub fn refine(&self) -> Result<Mesh> {
        let l = self.curve.total_length();
        let mut vertices = self.vertices.clone();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::with_capacity(3 * self.triangles.len() / 2 + 1);
        let n = self.boundary_vertices.len();
        let mut boundary_vertices = Vec::with_capacity(2 * n);
        let mut boundary_params = Vec::with_capacity(2 * n);
        for k in 0..n {
            let (a, b) = (self.boundary_vertices[k], self.boundary_vertices[(k + 1) % n]);
            let (ta, mut tb) = (self.boundary_params[k], self.boundary_params[(k + 1) % n]);
            if tb <= ta {
                tb += l;
            }
            let t = self.curve.wrap(0.5 * (ta + tb));
            let v = vertices.len();
            vertices.push(self.curve.point(t));
            mid.insert((a.min(b), a.max(b)), v);
            boundary_vertices.extend([a, v]);
            boundary_params.extend([self.boundary_params[k], t]);
        }
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for t in &self.triangles {
            let mut m = [0usize; 3];
            for j in 0..3 {
                let (a, b) = (t[j], t[(j + 1) % 3]);
                m[j] = *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let (p, q) = (vertices[a], vertices[b]);
                    vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                    vertices.len() - 1
                });
            }
            // m[0] on (t0,t1), m[1] on (t1,t2), m[2] on (t2,t0)
            triangles.push([t[0], m[0], m[2]]);
            triangles.push([m[0], t[1], m[1]]);
            triangles.push([m[2], m[1], t[2]]);
            triangles.push([m[0], m[1], m[2]]);
        }
        Mesh::from_parts(&self.arcs, vertices, triangles, boundary_vertices, boundary_params)
    }
}

#[cfg(test)]
mod tests {
    use crate::geometry::{ArcSet, BoundaryCurve};
    use crate::meshing::mesh_domain;
    use std::f64::consts::PI;

    #[test]
    fn refinement_quadruples_and_stays_on_the_circle() {
        let c = BoundaryCurve::circle(1.0).unwrap().shared();
        let arcs = ArcSet::new(c.clone(), [(0.0, PI)]).unwrap();
        let m0 = mesh_domain(&c, &arcs, 0.2).unwrap();
        let m1 = m0.refine().unwrap();
        let m2 = m1.refine().unwrap();
        assert_eq!(m1.triangles().len(), 4 * m0.triangles().len());
        assert_eq!(m2.triangles().len(), 16 * m0.triangles().len());
        for &v in m2.boundary_vertices() {
            let p = m2.vertices()[v];
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-12);
        }
        let r = m1.h() / m0.h();
        assert!((0.45..=0.55).contains(&r), "{r}");
        assert_eq!(m1.quality().steklov_edges, 2 * m0.quality().steklov_edges);
    }

    #[test]
    fn tagged_length_converges_quadratically() {
        let c = BoundaryCurve::circle(1.0).unwrap().shared();
        let arcs = ArcSet::new(c.clone(), [(0.0, PI)]).unwrap();
        let mut m = mesh_domain(&c, &arcs, 0.25).unwrap();
        let mut errs = Vec::new();
        for _ in 0..4 {
            errs.push((PI - m.steklov_length()).abs());
            m = m.refine().unwrap();
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "{order}");
        }
    }
}
