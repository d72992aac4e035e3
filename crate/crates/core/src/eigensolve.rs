//! Generalized symmetric eigensolver and the end-to-end spectral pipeline.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::assembly::{discrete_problem, schur_reduce, DiscreteProblem};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{ArcSet, BoundaryCurve};
use crate::meshing::{mesh_domain, Mesh};
use crate::provenance::Provenance;

/// Relative pencil residual every returned pair satisfies.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Relative agreement of the Rayleigh quotient with each eigenvalue.
pub const RAYLEIGH_TOL: f64 = 1e-9;
/// Eigenvalues closer than this (relative) are reported as one cluster.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Smallest `k` eigenpairs of `S y = λ M y` with `M = L L^T`, solved as the
/// standard problem for `L^-1 S L^-T`. Columns of the returned matrix are
/// `M`-orthonormal with their largest-magnitude entry positive.
pub fn generalized_symmetric_eig(s: &DMatrix<f64>, m: &DMatrix<f64>, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = s.nrows();
    if s.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!("pencil of shapes {:?} and {:?}", s.shape(), m.shape())));
    }
    if k == 0 || k > n {
        return Err(Error::TooManyEigenpairs { k, dim: n });
    }
    let chol = m.clone().cholesky().ok_or(Error::NotPositiveDefinite { pivot: 0, context: "Steklov boundary mass" })?;
    let l = chol.l();
    let x = l.solve_lower_triangular(s).ok_or_else(|| Error::Dimension("singular mass factor".into()))?;
    let c = l.solve_lower_triangular(&x.transpose()).ok_or_else(|| Error::Dimension("singular mass factor".into()))?;
    let c = 0.5 * (&c + c.transpose());
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut z = DMatrix::zeros(n, k);
    for (j, &i) in order[..k].iter().enumerate() {
        z.set_column(j, &eig.eigenvectors.column(i));
    }
    let mut y = l.transpose().solve_upper_triangular(&z).ok_or_else(|| Error::Dimension("singular mass factor".into()))?;
    for j in 0..k {
        let mut col = y.column_mut(j);
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    Ok((values, y))
}

/// Eigenvalues with diagnostics and provenance. Nodal eigenvectors and the
/// mesh are carried along in memory but not serialized.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda: Vec<f64>,
    pub residuals: Vec<f64>,
    pub h: f64,
    pub k: usize,
    pub provenance: Provenance,
    /// Index groups of numerically coincident eigenvalues.
    #[serde(default)]
    pub clusters: Vec<Vec<usize>>,
    #[serde(skip)]
    pub eigenvectors: Vec<Vec<f64>>,
    #[serde(skip)]
    pub mesh: Option<Arc<Mesh>>,
}

impl SpectralResult {
    /// Vertex table with one column per eigenvector.
    pub fn eigenvector_csv(&self) -> String {
        use std::fmt::Write;
        let mut s = String::from("vertex,x,y");
        for j in 1..=self.eigenvectors.len() {
            let _ = write!(s, ",u{j}");
        }
        s.push('\n');
        if let Some(mesh) = &self.mesh {
            for (v, p) in mesh.vertices().iter().enumerate() {
                let _ = write!(s, "{v},{},{}", p[0], p[1]);
                for u in &self.eigenvectors {
                    let _ = write!(s, ",{}", u[v]);
                }
                s.push('\n');
            }
        }
        s
    }
}

/// Meshes, assembles and solves for the first `k` eigenpairs.
pub fn steklov_dirichlet_eigenvalues(
    curve: &Arc<BoundaryCurve>,
    arcs: &ArcSet,
    h_target: f64,
    k: usize,
) -> Result<SpectralResult> {
    let mesh = Arc::new(mesh_domain(curve, arcs, h_target)?);
    let mut r = solve_on_mesh(mesh, k, Execution::default())?;
    r.provenance = Provenance::new(arcs, Some(h_target), 0, r.provenance.vertices, r.provenance.triangles);
    Ok(r)
}

/// Full solve on an existing mesh (shared, refined or morphed).
pub fn solve_on_mesh(mesh: Arc<Mesh>, k: usize, exec: Execution) -> Result<SpectralResult> {
    let p = schur_reduce(discrete_problem(mesh.clone(), exec)?)?;
    solve_problem(&p, k, exec)
}

/// Eigenpairs of an assembled problem; verifies residual, Rayleigh identity
/// and orthonormality before returning.
pub fn solve_problem(p: &DiscreteProblem, k: usize, exec: Execution) -> Result<SpectralResult> {
    let pair = match p.schur() {
        Some(pair) => pair,
        None => return Err(Error::Study("problem has not been Schur-reduced".into())),
    };
    let (lambda, y) = generalized_symmetric_eig(&pair.s, &pair.m_s, k)?;
    let cols: Vec<Vec<f64>> = (0..k).map(|j| y.column(j).iter().copied().collect()).collect();
    let free: Vec<Vec<f64>> = exec.try_map(&cols, |c| p.harmonic_extension(c))?;

    let mut residuals = Vec::with_capacity(k);
    for (j, u) in free.iter().enumerate() {
        let au = p.stiffness().mul_vec(u)?;
        let mu = p.boundary_mass().mul_vec(u)?;
        let r: f64 = au.iter().zip(&mu).map(|(a, m)| (a - lambda[j] * m).powi(2)).sum::<f64>().sqrt();
        let an = au.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rel = r / an;
        if !(rel <= RESIDUAL_TOL) {
            return Err(Error::Residual { context: "eigenpair residual", relative: rel, tolerance: RESIDUAL_TOL });
        }
        residuals.push(rel);
        let num: f64 = u.iter().zip(&au).map(|(a, b)| a * b).sum();
        let den: f64 = u.iter().zip(&mu).map(|(a, b)| a * b).sum();
        let rq = (num / den - lambda[j]).abs() / lambda[j];
        if !(rq <= RAYLEIGH_TOL) {
            return Err(Error::Residual { context: "Rayleigh identity", relative: rq, tolerance: RAYLEIGH_TOL });
        }
        for w in &free[..j] {
            let dot: f64 = w.iter().zip(&mu).map(|(a, b)| a * b).sum();
            if dot.abs() > 1e-9 {
                return Err(Error::Residual { context: "boundary-mass orthogonality", relative: dot.abs(), tolerance: 1e-9 });
            }
        }
        if (den - 1.0).abs() > 1e-9 {
            return Err(Error::Residual { context: "boundary-mass normalization", relative: (den - 1.0).abs(), tolerance: 1e-9 });
        }
    }
    if !(lambda[0] > 0.0) {
        return Err(Error::NotPositiveDefinite { pivot: 0, context: "first eigenvalue is not positive" });
    }

    let mesh = p.mesh().clone();
    let provenance = Provenance::new(mesh.arcs(), None, 0, mesh.num_vertices(), mesh.triangles().len());
    Ok(SpectralResult {
        clusters: clusters(&lambda),
        eigenvectors: free.iter().map(|u| p.to_nodal(u)).collect(),
        h: mesh.h(),
        k,
        lambda,
        residuals,
        provenance,
        mesh: Some(mesh),
    })
}

fn clusters(lambda: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut cur = vec![0];
    for i in 1..lambda.len() {
        if (lambda[i] - lambda[i - 1]).abs() <= CLUSTER_TOL * lambda[i].abs() {
            cur.push(i);
        } else {
            if cur.len() > 1 {
                out.push(cur);
            }
            cur = vec![i];
        }
    }
    if cur.len() > 1 {
        out.push(cur);
    }
    out
}

/// `v^T A v / v^T M v` for a nodal vector (Dirichlet entries are ignored).
pub fn rayleigh_quotient(p: &DiscreteProblem, nodal: &[f64]) -> Result<f64> {
    if nodal.len() != p.mesh().num_vertices() {
        return Err(Error::Dimension(format!("{} values for {} vertices", nodal.len(), p.mesh().num_vertices())));
    }
    let v = p.to_free(nodal);
    let num = p.stiffness().quadratic_form(&v)?;
    let den = p.boundary_mass().quadratic_form(&v)?;
    let scale = v.iter().map(|x| x * x).sum::<f64>();
    if !(den > 1e-14 * scale) {
        return Err(Error::ZeroTrace);
    }
    Ok(num / den)
}
