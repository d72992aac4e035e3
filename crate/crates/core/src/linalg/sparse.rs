//! Symmetric sparse matrices stored as the lower triangle in compressed
//! columns, with a deterministic layout (rows sorted within each column).

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Accumulates `(row, col, value)` contributions; duplicates are summed.
#[derive(Clone, Debug)]
pub struct TripletBuilder {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self { n, entries: Vec::with_capacity(cap) }
    }

    /// Adds `v` at `(i, j)` of a symmetric matrix; only one of the two
    /// mirror positions needs to be supplied.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.entries.push((r, c, v));
    }

    pub fn extend(&mut self, other: TripletBuilder) {
        self.entries.extend(other.entries);
    }

    /// Compresses into column form. Summation follows insertion order within
    /// each `(row, col)` slot, so the result does not depend on sort stability.
    pub fn build(mut self) -> SymmetricCsc {
        self.entries.sort_by_key(|e| (e.1, e.0));
        let mut col_ptr = vec![0usize; self.n + 1];
        let mut row_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_idx.push(r);
                values.push(v);
                col_ptr[c + 1] += 1;
                last = Some((r, c));
            }
        }
        for c in 0..self.n {
            col_ptr[c + 1] += col_ptr[c];
        }
        SymmetricCsc { n: self.n, col_ptr, row_idx, values }
    }
}

/// Lower triangle (diagonal included) of a symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricCsc {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricCsc {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the lower triangle.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(row, value)` pairs of column `j` with `row >= j`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let range = self.col_ptr[c]..self.col_ptr[c + 1];
        match self.row_idx[range.clone()].binary_search(&r) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.get(j, j)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!("vector of length {} for a {}x{} matrix", x.len(), self.n, self.n)));
        }
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            for (i, v) in self.column(j) {
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
        Ok(y)
    }

    /// `x^T A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        let y = self.mul_vec(x)?;
        Ok(x.iter().zip(&y).map(|(a, b)| a * b).sum())
    }

    /// Principal submatrix on `keep` (in the given order).
    pub fn principal_submatrix(&self, keep: &[usize]) -> SymmetricCsc {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut t = TripletBuilder::with_capacity(keep.len(), self.nnz());
        for j in 0..self.n {
            if map[j] == usize::MAX {
                continue;
            }
            for (i, v) in self.column(j) {
                if map[i] != usize::MAX {
                    t.add(map[i], map[j], v);
                }
            }
        }
        t.build()
    }

    /// Off-diagonal block `A[rows, cols]` as a list of `(local row, local col, value)`,
    /// for index sets that do not overlap.
    pub fn coupling(&self, rows: &[usize], cols: &[usize]) -> Vec<(usize, usize, f64)> {
        let mut rmap = vec![usize::MAX; self.n];
        let mut cmap = vec![usize::MAX; self.n];
        for (k, &i) in rows.iter().enumerate() {
            rmap[i] = k;
        }
        for (k, &j) in cols.iter().enumerate() {
            cmap[j] = k;
        }
        let mut out = Vec::new();
        for j in 0..self.n {
            for (i, v) in self.column(j) {
                if rmap[i] != usize::MAX && cmap[j] != usize::MAX {
                    out.push((rmap[i], cmap[j], v));
                } else if rmap[j] != usize::MAX && cmap[i] != usize::MAX {
                    out.push((rmap[j], cmap[i], v));
                }
            }
        }
        out.sort_by_key(|e| (e.0, e.1));
        out
    }

    /// Adjacency lists of the off-diagonal pattern.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for j in 0..self.n {
            for (i, _) in self.column(j) {
                if i != j {
                    adj[i].push(j);
                    adj[j].push(i);
                }
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Symmetric permutation `P A P^T` where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> SymmetricCsc {
        self.principal_submatrix(perm)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            for (i, v) in self.column(j) {
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Coordinate text dump: a header line `n nnz` then one `i j value`
    /// line per stored lower-triangle entry, zero-based.
    pub fn to_coordinate_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n, self.nnz());
        for j in 0..self.n {
            for (i, v) in self.column(j) {
                let _ = writeln!(s, "{i} {j} {v:.17e}");
            }
        }
        s
    }

    /// Checks the stored structure: sorted unique rows on or below the diagonal.
    pub fn validate(&self) -> Result<()> {
        for j in 0..self.n {
            let rows = &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]];
            if rows.windows(2).any(|w| w[0] >= w[1]) || rows.iter().any(|&i| i < j || i >= self.n) {
                return Err(Error::Dimension(format!("column {j} is malformed")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SymmetricCsc {
        let mut t = TripletBuilder::new(3);
        t.add(0, 0, 2.0);
        t.add(1, 1, 2.0);
        t.add(2, 2, 2.0);
        t.add(0, 1, -0.5);
        t.add(1, 0, -0.5);
        t.add(2, 1, -1.0);
        t.build()
    }

    #[test]
    fn duplicates_are_summed_and_mirrored() {
        let a = sample();
        a.validate().unwrap();
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(0, 2), 0.0);
        assert_eq!(a.nnz(), 5);
        let y = a.mul_vec(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn submatrix_and_coupling() {
        let a = sample();
        let s = a.principal_submatrix(&[2, 1]);
        assert_eq!(s.get(0, 1), -1.0);
        assert_eq!(s.get(0, 0), 2.0);
        let c = a.coupling(&[0, 2], &[1]);
        assert_eq!(c, vec![(0, 0, -1.0), (1, 0, -1.0)]);
        assert_eq!(a.to_dense(), a.permuted(&[0, 1, 2]).to_dense());
    }

    #[test]
    fn coordinate_text_has_header_and_entries() {
        let text = sample().to_coordinate_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "3 5");
        assert_eq!(lines.len(), 6);
        assert!(lines[1].starts_with("0 0 2.0"));
    }
}
