use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

/// Coordinate-list accumulator. Duplicates are summed in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Triplets { n, entries: Vec::new() }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn into_csr(mut self) -> Csr {
        // stable sort keeps the accumulation order of duplicates fixed
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { n: self.n, row_ptr, cols, vals }
    }
}

/// Square compressed-row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    pub fn zeros(n: usize) -> Self {
        Csr { n, row_ptr: vec![0; n + 1], cols: vec![], vals: vec![] }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Triplets::new(n);
        for i in 0..n {
            t.push(i, i, 1.0);
        }
        t.into_csr()
    }

    pub fn from_dense(a: &DMatrix<f64>) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        let mut t = Triplets::new(a.nrows());
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                if a[(i, j)] != 0.0 {
                    t.push(i, j, a[(i, j)]);
                }
            }
        }
        t.into_csr()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(p) => self.vals[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn mul_dvec(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(self.mul_vec(x.as_slice()))
    }

    /// xᵀ A y
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    /// Dense product A·X for a dense block X.
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.n);
        let mut out = DMatrix::zeros(self.n, x.ncols());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                for c in 0..x.ncols() {
                    out[(i, c)] += v * x[(j, c)];
                }
            }
        }
        out
    }

    /// a·self + b·other
    pub fn lin_comb(&self, a: f64, other: &Csr, b: f64) -> Csr {
        assert_eq!(self.n, other.n);
        let mut t = Triplets::new(self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.push(i, j, a * v);
            }
            for (j, v) in other.row(i) {
                t.push(i, j, b * v);
            }
        }
        t.into_csr()
    }

    pub fn scale(&self, a: f64) -> Csr {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Principal or rectangular block extraction, returned dense.
    pub fn block_dense(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        let mut pos = vec![usize::MAX; self.n];
        for (c, &j) in cols.iter().enumerate() {
            pos[j] = c;
        }
        let mut out = DMatrix::zeros(rows.len(), cols.len());
        for (r, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos[j] != usize::MAX {
                    out[(r, pos[j])] += v;
                }
            }
        }
        out
    }

    /// Principal submatrix on `idx`, kept sparse.
    pub fn principal(&self, idx: &[usize]) -> Csr {
        let mut pos = vec![usize::MAX; self.n];
        for (c, &j) in idx.iter().enumerate() {
            pos[j] = c;
        }
        let mut t = Triplets::new(idx.len());
        for (r, &i) in idx.iter().enumerate() {
            for (j, v) in self.row(i) {
                if pos[j] != usize::MAX {
                    t.push(r, pos[j], v);
                }
            }
        }
        t.into_csr()
    }

    /// B = Pᵀ A P with new index k holding old index perm[k].
    pub fn permuted(&self, perm: &[usize]) -> Csr {
        self.principal(perm)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[(i, j)] += v;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.vals.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(1.0);
        (0..self.n).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol * scale))
    }

    fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).filter(move |&(j, v)| j != i && v != 0.0).map(|(j, _)| j)
    }
}

/// Reverse Cuthill–McKee ordering of the symmetric sparsity graph.
/// Entry k of the result is the old index placed at position k.
pub fn rcm_order(a: &Csr) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n).map(|i| a.neighbours(i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while let Some(seed) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)) {
        let start = pseudo_peripheral(a, seed, &degree);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.neighbours(v).filter(|&j| !visited[j]).collect();
            nb.sort_by_key(|&j| (degree[j], j));
            for j in nb {
                if !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &Csr, start: usize) -> Vec<Option<usize>> {
    let mut level = vec![None; a.dim()];
    let mut queue = VecDeque::new();
    level[start] = Some(0);
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        let lv = level[v].unwrap();
        for j in a.neighbours(v) {
            if level[j].is_none() {
                level[j] = Some(lv + 1);
                queue.push_back(j);
            }
        }
    }
    level
}

fn pseudo_peripheral(a: &Csr, mut start: usize, degree: &[usize]) -> usize {
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(a, start);
        let far = level.iter().filter_map(|l| *l).max().unwrap_or(0);
        if far <= ecc {
            break;
        }
        ecc = far;
        start = (0..a.dim()).filter(|&i| level[i] == Some(far)).min_by_key(|&i| (degree[i], i)).unwrap();
    }
    start
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Csr {
        let mut t = Triplets::new(n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        t.into_csr()
    }

    #[test]
    fn duplicates_sum() {
        let mut t = Triplets::new(2);
        t.push(0, 1, 1.0);
        t.push(0, 1, 2.5);
        t.push(1, 1, 1.0);
        let a = t.into_csr();
        assert_eq!(a.get(0, 1), 3.5);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = path(5);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let d = a.to_dense() * DVector::from_column_slice(&x);
        assert_eq!(a.mul_vec(&x), d.as_slice());
    }

    #[test]
    fn rcm_is_permutation_and_keeps_path_banded() {
        // scramble a path graph, RCM should recover bandwidth 1
        let n = 40;
        let scramble: Vec<usize> = (0..n).map(|i| (i * 17) % n).collect();
        let a = path(n).permuted(&scramble);
        let p = rcm_order(&a);
        let mut seen = p.clone();
        seen.sort();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        let b = a.permuted(&p);
        for i in 0..n {
            for (j, _) in b.row(i) {
                assert!(i.abs_diff(j) <= 1);
            }
        }
    }
}
