//! P1 finite-element matrices, Dirichlet elimination and the Schur
//! (discrete Dirichlet-to-Neumann) reduction onto Steklov dofs.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::Point;
use crate::linalg::{nested_dissection_with_trailing, SparseCholesky, SymmetricCsc, TripletBuilder};
use crate::meshing::{EdgeTag, Mesh, VertexKind};

/// Residual tolerance for direct solves.
pub const SOLVE_TOL: f64 = 1e-10;

/// Element stiffness by the cotangent formula: off-diagonal `(i, j)` is
/// `-cot(theta_k) / 2` for the angle opposite that edge.
pub fn element_stiffness(t: [Point; 3]) -> Option<[[f64; 3]; 3]> {
    let area2 = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1]);
    if !(area2 > 0.0) {
        return None;
    }
    let mut k = [[0.0; 3]; 3];
    for c in 0..3 {
        let (i, j) = ((c + 1) % 3, (c + 2) % 3);
        let u = [t[i][0] - t[c][0], t[i][1] - t[c][1]];
        let v = [t[j][0] - t[c][0], t[j][1] - t[c][1]];
        // cot = (u . v) / |u x v|, and |u x v| = 2 * area
        let w = -0.5 * (u[0] * v[0] + u[1] * v[1]) / area2;
        k[i][j] = w;
        k[j][i] = w;
    }
    for i in 0..3 {
        k[i][i] = -(k[i][(i + 1) % 3] + k[i][(i + 2) % 3]);
    }
    Some(k)
}

/// Stiffness over all vertices.
pub fn assemble_stiffness(mesh: &Mesh) -> Result<SymmetricCsc> {
    assemble_stiffness_with(mesh, Execution::default())
}

/// Stiffness with an explicit execution policy. Element matrices may be
/// computed concurrently; accumulation always follows triangle order.
pub fn assemble_stiffness_with(mesh: &Mesh, exec: Execution) -> Result<SymmetricCsc> {
    let elements = exec.map_range(mesh.triangles().len(), |i| element_stiffness(mesh.triangle_points(i)));
    let mut t = TripletBuilder::with_capacity(mesh.num_vertices(), 6 * elements.len());
    for (i, (tri, k)) in mesh.triangles().iter().zip(elements).enumerate() {
        let k = k.ok_or(Error::DegenerateTriangle(i))?;
        for a in 0..3 {
            for b in 0..=a {
                t.add(tri[a], tri[b], k[a][b]);
            }
        }
    }
    Ok(t.build())
}

/// P1 mass on Steklov-tagged boundary edges over all vertices.
pub fn assemble_boundary_mass(mesh: &Mesh) -> SymmetricCsc {
    let mut t = TripletBuilder::new(mesh.num_vertices());
    for e in mesh.boundary_edges().iter().filter(|e| e.tag == EdgeTag::Steklov) {
        let [a, b] = e.v;
        let (p, q) = (mesh.vertices()[a], mesh.vertices()[b]);
        let l = (p[0] - q[0]).hypot(p[1] - q[1]);
        t.add(a, a, l / 3.0);
        t.add(b, b, l / 3.0);
        t.add(a, b, l / 6.0);
    }
    t.build()
}

/// Dense Schur pair on Steklov dofs.
#[derive(Clone, Debug)]
pub struct SchurPair {
    pub s: DMatrix<f64>,
    pub m_s: DMatrix<f64>,
}

/// Matrices of the free-dof pencil together with the factorization that
/// both the Schur reduction and harmonic extension reuse.
#[derive(Clone, Debug)]
pub struct DiscreteProblem {
    mesh: Arc<Mesh>,
    a_full: SymmetricCsc,
    free_vertices: Vec<usize>,
    dof_of: Vec<Option<usize>>,
    dirichlet_vertices: Vec<usize>,
    a: SymmetricCsc,
    m: SymmetricCsc,
    /// Free dofs on Steklov vertices, in boundary cycle order.
    steklov_dofs: Vec<usize>,
    /// Remaining free dofs in elimination order.
    interior_dofs: Vec<usize>,
    factor: Arc<SparseCholesky>,
    schur: Option<SchurPair>,
}

/// Removes Dirichlet vertices (arc endpoints included) and factors the
/// remaining stiffness with interior dofs ordered before Steklov dofs.
pub fn apply_dirichlet(a_full: &SymmetricCsc, m_full: &SymmetricCsc, mesh: Arc<Mesh>) -> Result<DiscreteProblem> {
    let nv = mesh.num_vertices();
    if a_full.dim() != nv || m_full.dim() != nv {
        return Err(Error::Dimension(format!("matrices of size {} and {} for {nv} vertices", a_full.dim(), m_full.dim())));
    }
    let kinds = mesh.vertex_kinds();
    let dirichlet_vertices: Vec<usize> = (0..nv).filter(|&v| kinds[v] == VertexKind::Dirichlet).collect();
    if dirichlet_vertices.is_empty() {
        return Err(Error::NoDirichlet);
    }
    let free_vertices: Vec<usize> = (0..nv).filter(|&v| kinds[v] != VertexKind::Dirichlet).collect();
    let mut dof_of = vec![None; nv];
    for (d, &v) in free_vertices.iter().enumerate() {
        dof_of[v] = Some(d);
    }
    let steklov_dofs: Vec<usize> = mesh
        .boundary_vertices()
        .iter()
        .filter(|&&v| kinds[v] == VertexKind::Steklov)
        .map(|&v| dof_of[v].expect("steklov vertices are free"))
        .collect();
    let interior: Vec<usize> = free_vertices
        .iter()
        .enumerate()
        .filter(|(_, &v)| kinds[v] == VertexKind::Interior)
        .map(|(d, _)| d)
        .collect();
    let a = a_full.principal_submatrix(&free_vertices);
    let m = m_full.principal_submatrix(&free_vertices);
    let perm = nested_dissection_with_trailing(&a.adjacency(), &interior, &steklov_dofs);
    let factor = SparseCholesky::factor(&a, &perm, "stiffness on free dofs")?;
    let interior_dofs = perm[..interior.len()].to_vec();
    Ok(DiscreteProblem {
        mesh,
        a_full: a_full.clone(),
        free_vertices,
        dof_of,
        dirichlet_vertices,
        a,
        m,
        steklov_dofs,
        interior_dofs,
        factor: Arc::new(factor),
        schur: None,
    })
}

/// Assembles and eliminates in one step.
pub fn discrete_problem(mesh: Arc<Mesh>, exec: Execution) -> Result<DiscreteProblem> {
    let a = assemble_stiffness_with(&mesh, exec)?;
    let m = assemble_boundary_mass(&mesh);
    apply_dirichlet(&a, &m, mesh)
}

/// Populates the Schur pair `S = A_bb - A_bi A_ii^-1 A_ib`, `M_s = M_bb`.
/// `S` is read off the trailing block of the Cholesky factor.
pub fn schur_reduce(mut p: DiscreteProblem) -> Result<DiscreteProblem> {
    let ni = p.interior_dofs.len();
    let l = p.factor.trailing_block(ni);
    let s = &l * l.transpose();
    let s = 0.5 * (&s + s.transpose());
    let nb = p.steklov_dofs.len();
    let mut m_s = DMatrix::zeros(nb, nb);
    for (i, &di) in p.steklov_dofs.iter().enumerate() {
        for (j, &dj) in p.steklov_dofs.iter().enumerate() {
            m_s[(i, j)] = p.m.get(di, dj);
        }
    }
    p.schur = Some(SchurPair { s, m_s });
    Ok(p)
}

impl DiscreteProblem {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    /// Stiffness on free dofs.
    pub fn stiffness(&self) -> &SymmetricCsc {
        &self.a
    }

    /// Boundary mass on free dofs.
    pub fn boundary_mass(&self) -> &SymmetricCsc {
        &self.m
    }

    pub fn free_vertices(&self) -> &[usize] {
        &self.free_vertices
    }

    pub fn dirichlet_vertices(&self) -> &[usize] {
        &self.dirichlet_vertices
    }

    pub fn steklov_dofs(&self) -> &[usize] {
        &self.steklov_dofs
    }

    /// Vertices carrying the Steklov dofs, in the same order.
    pub fn steklov_vertices(&self) -> Vec<usize> {
        self.steklov_dofs.iter().map(|&d| self.free_vertices[d]).collect()
    }

    pub fn num_free(&self) -> usize {
        self.free_vertices.len()
    }

    pub fn schur(&self) -> Option<&SchurPair> {
        self.schur.as_ref()
    }

    pub fn factor(&self) -> &SparseCholesky {
        &self.factor
    }

    /// Free-dof vector whose Steklov part is `y` and whose interior part is
    /// the discrete harmonic extension `-A_ii^-1 A_ib y`.
    pub fn harmonic_extension(&self, y: &[f64]) -> Result<Vec<f64>> {
        let nb = self.steklov_dofs.len();
        if y.len() != nb {
            return Err(Error::Dimension(format!("{} Steklov values for {nb} Steklov dofs", y.len())));
        }
        let mut u = vec![0.0; self.num_free()];
        for (k, &d) in self.steklov_dofs.iter().enumerate() {
            u[d] = y[k];
        }
        let ni = self.interior_dofs.len();
        if ni == 0 {
            return Ok(u);
        }
        let au = self.a.mul_vec(&u)?;
        let mut rhs: Vec<f64> = self.interior_dofs.iter().map(|&d| -au[d]).collect();
        self.factor.solve_leading(ni, &mut rhs);
        for (k, &d) in self.interior_dofs.iter().enumerate() {
            u[d] = rhs[k];
        }
        Ok(u)
    }

    /// Nodal values on all vertices from a free-dof vector; Dirichlet vertices are zero.
    pub fn to_nodal(&self, free: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.mesh.num_vertices()];
        for (d, &v) in self.free_vertices.iter().enumerate() {
            out[v] = free[d];
        }
        out
    }

    /// Restriction of nodal values to free dofs.
    pub fn to_free(&self, nodal: &[f64]) -> Vec<f64> {
        self.free_vertices.iter().map(|&v| nodal[v]).collect()
    }

    pub fn dof_of(&self, vertex: usize) -> Option<usize> {
        self.dof_of[vertex]
    }
}

/// Solves the mixed problem `-Δu = 0`, `∂_ν u = g` on the Steklov part and
/// `u = d` on the Dirichlet part. `neumann` is indexed like
/// [`DiscreteProblem::steklov_vertices`] and `dirichlet` like
/// [`DiscreteProblem::dirichlet_vertices`]. On edges touching an interface
/// vertex the flux is taken constant from the Steklov end.
pub fn solve_mixed_bvp(p: &DiscreteProblem, neumann: &[f64], dirichlet: &[f64]) -> Result<Vec<f64>> {
    let sv = p.steklov_vertices();
    if neumann.len() != sv.len() || dirichlet.len() != p.dirichlet_vertices.len() {
        return Err(Error::Dimension(format!(
            "expected {} Neumann and {} Dirichlet values, got {} and {}",
            sv.len(),
            p.dirichlet_vertices.len(),
            neumann.len(),
            dirichlet.len()
        )));
    }
    let nv = p.mesh.num_vertices();
    let mut g = vec![f64::NAN; nv];
    for (k, &v) in sv.iter().enumerate() {
        g[v] = neumann[k];
    }
    let mut load = vec![0.0; nv];
    for e in p.mesh.boundary_edges().iter().filter(|e| e.tag == EdgeTag::Steklov) {
        let [a, b] = e.v;
        let ga = if g[a].is_nan() { g[b] } else { g[a] };
        let gb = if g[b].is_nan() { ga } else { g[b] };
        let (pa, pb) = (p.mesh.vertices()[a], p.mesh.vertices()[b]);
        let l = (pa[0] - pb[0]).hypot(pa[1] - pb[1]);
        load[a] += l / 6.0 * (2.0 * ga + gb);
        load[b] += l / 6.0 * (ga + 2.0 * gb);
    }
    let mut lift = vec![0.0; nv];
    for (k, &v) in p.dirichlet_vertices.iter().enumerate() {
        lift[v] = dirichlet[k];
    }
    let a_lift = p.a_full.mul_vec(&lift)?;
    let b: Vec<f64> = p.free_vertices.iter().map(|&v| load[v] - a_lift[v]).collect();
    let x = p.factor.solve(&b)?;
    let r = p.a.mul_vec(&x)?;
    let bn = norm(&b);
    let rn = norm(&r.iter().zip(&b).map(|(u, v)| u - v).collect::<Vec<_>>());
    if bn > 0.0 && rn > SOLVE_TOL * bn {
        return Err(Error::Residual { context: "mixed boundary value solve", relative: rn / bn, tolerance: SOLVE_TOL });
    }
    let mut u = lift;
    for (d, &v) in p.free_vertices.iter().enumerate() {
        u[v] = x[d];
    }
    Ok(u)
}

/// Eigenvalues of the unreduced pencil `(A, M_Γ)` on free dofs, by dense
/// Cholesky `A = L L^T` and the standard problem for `L^-1 M L^-T`, whose
/// nonzero eigenvalues are `1 / λ`. Intended for small meshes.
pub fn full_pencil_eigenvalues(p: &DiscreteProblem, k: usize) -> Result<Vec<f64>> {
    let nb = p.steklov_dofs.len();
    if k == 0 || k > nb {
        return Err(Error::TooManyEigenpairs { k, dim: nb });
    }
    let a = p.a.to_dense();
    let m = p.m.to_dense();
    let chol = a.cholesky().ok_or(Error::NotPositiveDefinite { pivot: 0, context: "dense stiffness" })?;
    let l = chol.l();
    let y = l.solve_lower_triangular(&m).ok_or(Error::Dimension("singular factor".into()))?;
    let c = l.solve_lower_triangular(&y.transpose()).ok_or(Error::Dimension("singular factor".into()))?;
    let c = 0.5 * (&c + c.transpose());
    let mut mu: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    Ok(mu[..k].iter().map(|m| 1.0 / m).collect())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ArcSet, BoundaryCurve};

    #[test]
    fn unit_right_triangle_element() {
        let k = element_stiffness([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expect[i][j]).abs() < 1e-15);
            }
        }
        assert!(element_stiffness([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).is_none());
    }

    fn square() -> Arc<BoundaryCurve> {
        BoundaryCurve::unit_square().shared()
    }

    /// Unit square split along the diagonal, Steklov on the top edge.
    fn two_triangles() -> Mesh {
        let c = square();
        let top = ArcSet::new(c, [(2.0, 3.0)]).unwrap();
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        Mesh::from_parts(&top, v, vec![[0, 1, 2], [0, 2, 3]], vec![0, 1, 2, 3], vec![0.0, 1.0, 2.0, 3.0]).unwrap()
    }

    /// Pentagon fan with no interior vertex and one Steklov vertex at (0.5, 1).
    fn no_interior() -> Mesh {
        let top = ArcSet::new(square(), [(2.0, 3.0)]).unwrap();
        let v = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.5, 1.0], [0.0, 1.0]];
        let t = vec![[0, 1, 3], [1, 2, 3], [0, 3, 4]];
        Mesh::from_parts(&top, v, t, vec![0, 1, 2, 3, 4], vec![0.0, 1.0, 2.0, 2.5, 3.0]).unwrap()
    }

    #[test]
    fn two_triangle_square_energy_and_kernel() {
        let m = two_triangles();
        let a = assemble_stiffness(&m).unwrap();
        let x: Vec<f64> = m.vertices().iter().map(|p| p[0]).collect();
        assert!((a.quadratic_form(&x).unwrap() - 1.0).abs() < 1e-14);
        let ones = vec![1.0; 4];
        assert!(a.mul_vec(&ones).unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn boundary_mass_fixtures() {
        let m = two_triangles();
        let mm = assemble_boundary_mass(&m);
        // the top edge runs from vertex 2 to vertex 3 and has length 1
        let mut v = vec![0.0; 4];
        v[2] = 1.0;
        v[3] = 1.0;
        assert!((mm.quadratic_form(&v).unwrap() - 1.0).abs() < 1e-15);
        let w = vec![1.0, 1.0, 0.0, 0.0];
        assert_eq!(mm.quadratic_form(&w).unwrap(), 0.0);
    }

    #[test]
    fn zero_interior_dofs_gives_s_equal_a_bb() {
        let m = Arc::new(no_interior());
        let p = schur_reduce(discrete_problem(m, Execution::Sequential).unwrap()).unwrap();
        assert_eq!(p.steklov_dofs().len(), 1);
        let pair = p.schur().unwrap();
        let d = p.steklov_dofs()[0];
        assert_eq!(pair.s.shape(), (1, 1));
        assert!((pair.s[(0, 0)] - p.stiffness().get(d, d)).abs() < 1e-14);
        assert!((pair.m_s[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
    }
}
