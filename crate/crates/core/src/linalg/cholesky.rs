//! Up-looking sparse Cholesky factorization.
//!
//! The factor is computed row by row: the nonzero pattern of row `k` is the
//! reach of the column pattern of `A[0..k, k]` in the elimination tree, and
//! its values come from a sparse triangular solve. Columns of `L` store the
//! diagonal first and then rows in increasing order.

use nalgebra::DMatrix;

use super::sparse::SymmetricCsc;
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct SparseCholesky {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Upper-triangle columns of `P A P^T`: for each column `k`, rows `i <= k`.
struct Upper {
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

fn permuted_upper(a: &SymmetricCsc, perm: &[usize]) -> Upper {
    let n = a.dim();
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut counts = vec![0usize; n + 1];
    for j in 0..n {
        for (i, _) in a.column(j) {
            let (pi, pj) = (inv[i], inv[j]);
            counts[pi.max(pj) + 1] += 1;
        }
    }
    for k in 0..n {
        counts[k + 1] += counts[k];
    }
    let col_ptr = counts.clone();
    let mut next = counts;
    let nnz = col_ptr[n];
    let mut row_idx = vec![0usize; nnz];
    let mut values = vec![0.0; nnz];
    for j in 0..n {
        for (i, v) in a.column(j) {
            let (pi, pj) = (inv[i], inv[j]);
            let (r, c) = (pi.min(pj), pi.max(pj));
            row_idx[next[c]] = r;
            values[next[c]] = v;
            next[c] += 1;
        }
    }
    Upper { col_ptr, row_idx, values }
}

fn elimination_tree(u: &Upper, n: usize) -> Vec<usize> {
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for p in u.col_ptr[k]..u.col_ptr[k + 1] {
            let mut i = u.row_idx[p];
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Pattern of row `k` of `L` (excluding the diagonal) into `stack[top..]`.
fn ereach(u: &Upper, k: usize, parent: &[usize], stack: &mut [usize], mark: &mut [usize]) -> usize {
    let n = stack.len();
    let mut top = n;
    mark[k] = k;
    for p in u.col_ptr[k]..u.col_ptr[k + 1] {
        let mut i = u.row_idx[p];
        if i > k {
            continue;
        }
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            i = parent[i];
        }
        while len > 0 {
            top -= 1;
            len -= 1;
            stack[top] = stack[len];
        }
    }
    top
}

impl SparseCholesky {
    /// Factors `P A P^T = L L^T` for the ordering `perm[new] = old`.
    pub fn factor(a: &SymmetricCsc, perm: &[usize], context: &'static str) -> Result<Self> {
        let n = a.dim();
        if perm.len() != n {
            return Err(Error::Dimension(format!("ordering of length {} for dimension {n}", perm.len())));
        }
        let u = permuted_upper(a, perm);
        let parent = elimination_tree(&u, n);
        let mut stack = vec![0usize; n];
        // `mark` uses the row index as a stamp; start above any valid row
        let mut mark = vec![NONE; n];

        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(&u, k, &parent, &mut stack, &mut mark);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + counts[k];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut next: Vec<usize> = col_ptr[..n].to_vec();
        let mut x = vec![0.0; n];
        mark.fill(NONE);

        for k in 0..n {
            let top = ereach(&u, k, &parent, &mut stack, &mut mark);
            for p in u.col_ptr[k]..u.col_ptr[k + 1] {
                x[u.row_idx[p]] += u.values[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..] {
                let lki = x[i] / values[col_ptr[i]];
                x[i] = 0.0;
                for p in col_ptr[i] + 1..next[i] {
                    x[row_idx[p]] -= values[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                row_idx[p] = k;
                values[p] = lki;
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: perm[k], context });
            }
            let p = next[k];
            next[k] += 1;
            row_idx[p] = k;
            values[p] = d.sqrt();
        }
        Ok(Self { n, perm: perm.to_vec(), col_ptr, row_idx, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L`.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// In place `L y = b` on the leading `m` unknowns (permuted numbering).
    fn forward(&self, y: &mut [f64], m: usize) {
        for j in 0..m {
            let p0 = self.col_ptr[j];
            y[j] /= self.values[p0];
            let yj = y[j];
            for p in p0 + 1..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                if i >= m {
                    break;
                }
                y[i] -= self.values[p] * yj;
            }
        }
    }

    /// In place `L^T x = y` on the leading `m` unknowns.
    fn backward(&self, x: &mut [f64], m: usize) {
        for j in (0..m).rev() {
            let p0 = self.col_ptr[j];
            let mut s = x[j];
            for p in p0 + 1..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                if i >= m {
                    break;
                }
                s -= self.values[p] * x[i];
            }
            x[j] = s / self.values[p0];
        }
    }

    /// Solves `A x = b` in the original numbering.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::Dimension(format!("right-hand side of length {} for dimension {}", b.len(), self.n)));
        }
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        self.forward(&mut y, self.n);
        self.backward(&mut y, self.n);
        let mut x = vec![0.0; self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        Ok(x)
    }

    /// Solves with the leading `m x m` block of `P A P^T`, whose factor is the
    /// leading block of `L`. Input and output are in permuted numbering.
    pub fn solve_leading(&self, m: usize, b: &mut [f64]) {
        debug_assert!(m <= self.n && b.len() >= m);
        self.forward(b, m);
        self.backward(b, m);
    }

    /// Dense copy of the trailing block `L[m.., m..]`.
    pub fn trailing_block(&self, m: usize) -> DMatrix<f64> {
        let nb = self.n - m;
        let mut l = DMatrix::zeros(nb, nb);
        for j in m..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                l[(self.row_idx[p] - m, j - m)] = self.values[p];
            }
        }
        l
    }

    /// `sum log L_jj`, i.e. half the log-determinant.
    pub fn half_log_det(&self) -> f64 {
        (0..self.n).map(|j| self.values[self.col_ptr[j]].ln()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ordering::nested_dissection;
    use crate::linalg::sparse::TripletBuilder;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian(nx: usize, ny: usize, shift: f64) -> SymmetricCsc {
        let id = |i: usize, j: usize| i + nx * j;
        let mut t = TripletBuilder::new(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                t.add(id(i, j), id(i, j), 4.0 + shift);
                if i + 1 < nx {
                    t.add(id(i + 1, j), id(i, j), -1.0);
                }
                if j + 1 < ny {
                    t.add(id(i, j + 1), id(i, j), -1.0);
                }
            }
        }
        t.build()
    }

    #[test]
    fn solve_matches_dense_lu() {
        let a = laplacian(13, 9, 0.0);
        let perm = nested_dissection(&a.adjacency());
        let f = SparseCholesky::factor(&a, &perm, "test").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b: Vec<f64> = (0..a.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x = f.solve(&b).unwrap();
        let dense = a.to_dense().lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
        for (u, v) in x.iter().zip(dense.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn trailing_block_gives_schur_complement() {
        let a = laplacian(7, 6, 0.1);
        let n = a.dim();
        let m = 30;
        let perm: Vec<usize> = (0..n).collect();
        let f = SparseCholesky::factor(&a, &perm, "test").unwrap();
        let l = f.trailing_block(m);
        let s = &l * l.transpose();
        let d = a.to_dense();
        let aii = d.view((0, 0), (m, m)).into_owned();
        let aib = d.view((0, m), (m, n - m)).into_owned();
        let abb = d.view((m, m), (n - m, n - m)).into_owned();
        let oracle = abb - aib.transpose() * aii.lu().solve(&aib).unwrap();
        assert!((s - oracle).amax() < 1e-12);

        let mut rhs: Vec<f64> = (0..m).map(|i| (i as f64).sin()).collect();
        let expect = d.view((0, 0), (m, m)).into_owned().lu().solve(&nalgebra::DVector::from_vec(rhs.clone())).unwrap();
        f.solve_leading(m, &mut rhs);
        for (u, v) in rhs.iter().zip(expect.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let a = laplacian(4, 4, -3.9);
        let perm: Vec<usize> = (0..16).collect();
        assert!(matches!(SparseCholesky::factor(&a, &perm, "test"), Err(Error::NotPositiveDefinite { .. })));
    }
}
