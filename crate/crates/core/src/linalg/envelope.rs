//! Envelope (profile) LDLᵀ factorization under a reverse Cuthill–McKee ordering.
//!
//! No pivoting is done. For SPD input this is a Cholesky factorization in
//! LDLᵀ form; for indefinite input it is used only through Sylvester's law
//! to count pivot signs.

use super::sparse::{rcm_order, Csr};
use crate::error::{Error, Result};

/// Relative pivot floor below which a matrix is not certified positive definite.
pub const PIVOT_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    offs: Vec<usize>,
    l: Vec<f64>,
    d: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl Ldlt {
    fn build(a: &Csr, shift: f64, nudge: f64) -> (Ldlt, Vec<f64>) {
        let n = a.dim();
        let perm = rcm_order(a);
        let b = a.permuted(&perm);
        let mut first: Vec<usize> = (0..n).collect();
        for i in 0..n {
            for (j, _) in b.row(i) {
                if j < first[i] {
                    first[i] = j;
                }
            }
        }
        let mut offs = vec![0usize; n + 1];
        for i in 0..n {
            offs[i + 1] = offs[i] + (i - first[i]);
        }
        let diag: Vec<f64> = (0..n).map(|i| b.get(i, i) - shift).collect();
        let len = offs[n];
        let mut f = Ldlt { n, perm, first, offs, l: vec![0.0; len], d: vec![0.0; n] };
        let mut w = vec![0.0; n];
        for i in 0..n {
            let fi = f.first[i];
            for (j, v) in b.row(i) {
                if j < i {
                    f.l[f.offs[i] + j - fi] = v;
                }
            }
            for j in fi..i {
                let fj = f.first[j];
                let k0 = fi.max(fj);
                let mut s = f.l[f.offs[i] + j - fi];
                let rj = &f.l[f.offs[j]..f.offs[j + 1]];
                for k in k0..j {
                    s -= w[k] * rj[k - fj];
                }
                w[j] = s;
                f.l[f.offs[i] + j - fi] = s / f.d[j];
            }
            let mut di = diag[i];
            for j in fi..i {
                di -= w[j] * f.l[f.offs[i] + j - fi];
            }
            if nudge > 0.0 && di.abs() < nudge {
                di = nudge;
            }
            f.d[i] = di;
        }
        (f, diag)
    }

    /// Factor an SPD matrix; fails when a pivot drops below the relative floor.
    pub fn cholesky(a: &Csr) -> Result<Ldlt> {
        let (f, diag) = Ldlt::build(a, 0.0, 0.0);
        for i in 0..f.n {
            if !(f.d[i] > PIVOT_REL_TOL * diag[i].abs()) || !f.d[i].is_finite() {
                return Err(Error::NotPositiveDefinite { row: f.perm[i], pivot: f.d[i] });
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.l[self.offs[i]..self.offs[i + 1]];
            let mut s = y[i];
            for (k, lv) in row.iter().enumerate() {
                s -= lv * y[fi + k];
            }
            y[i] = s;
        }
        for i in 0..self.n {
            y[i] /= self.d[i];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let yi = y[i];
            let row = &self.l[self.offs[i]..self.offs[i + 1]];
            for (k, lv) in row.iter().enumerate() {
                y[fi + k] -= lv * yi;
            }
        }
        let mut x = vec![0.0; self.n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }
}

/// Inertia of A − shift·I by pivot signs of an unpivoted envelope LDLᵀ.
///
/// Exact zero pivots are nudged to a tiny positive value, as in Sturm-count
/// bisection, so the count is well defined for every shift.
pub fn inertia(a: &Csr, shift: f64) -> Inertia {
    let scale = a.norm_inf().max(shift.abs()).max(f64::MIN_POSITIVE);
    let (f, _) = Ldlt::build(a, shift, f64::EPSILON * scale);
    let negative = f.d.iter().filter(|&&d| d < 0.0).count();
    Inertia { negative, zero: 0, positive: f.n - negative }
}
