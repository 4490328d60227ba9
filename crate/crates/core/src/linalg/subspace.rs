use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{generalized_eigen, Eigen};
use super::envelope::Ldlt;
use super::sparse::Csr;
use crate::error::{Error, Result};

/// Below this size the pencil is solved densely.
const DENSE_CUTOFF: usize = 500;

/// Lowest `count` eigenpairs of K x = λ M x with K, M sparse SPD.
///
/// Block inverse iteration with Rayleigh–Ritz; K is factored once.
pub fn lowest_pencil_eigen(k: &Csr, m: &Csr, count: usize, tol: f64) -> Result<Eigen> {
    let n = k.dim();
    let count = count.min(n);
    if n <= DENSE_CUTOFF {
        let e = generalized_eigen(&k.to_dense(), &m.to_dense())?;
        return Ok(truncate(e, count));
    }
    let kf = Ldlt::cholesky(k)?;
    let p = (2 * count).max(count + 8).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut x = DMatrix::from_fn(n, p, |_, _| rng.random_range(-1.0..1.0));
    let mut prev = vec![f64::INFINITY; count];
    for _ in 0..1000 {
        let mx = m.mul_dense(&x);
        let mut y = DMatrix::zeros(n, p);
        for c in 0..p {
            let col = kf.solve(mx.column(c).as_slice());
            y.set_column(c, &nalgebra::DVector::from_vec(col));
        }
        let kr = y.transpose() * k.mul_dense(&y);
        let mr = y.transpose() * m.mul_dense(&y);
        let e = generalized_eigen(&kr, &mr)?;
        x = &y * &e.vectors;
        let change =
            (0..count).map(|i| ((e.values[i] - prev[i]) / e.values[i].abs().max(1e-300)).abs()).fold(0.0, f64::max);
        prev.copy_from_slice(&e.values[..count]);
        if change < tol {
            return Ok(truncate(Eigen { values: e.values, vectors: x }, count));
        }
    }
    Err(Error::SolverFailure("subspace iteration did not converge".into()))
}

fn truncate(e: Eigen, count: usize) -> Eigen {
    Eigen { values: e.values[..count].to_vec(), vectors: e.vectors.columns(0, count).into_owned() }
}

#[cfg(test)]
mod tests {
    use super::super::sparse::Triplets;
    use super::*;

    #[test]
    fn path_laplacian_iterative_matches_exact() {
        // 1D Dirichlet Laplacian on 800 interior nodes, lumped identity mass
        let n = 800;
        let mut t = Triplets::new(n);
        for i in 0..n {
            t.push(i, i, 2.0);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        let k = t.into_csr();
        let m = Csr::identity(n);
        let e = lowest_pencil_eigen(&k, &m, 4, 1e-13).unwrap();
        for j in 0..4 {
            let theta = (j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = 2.0 - 2.0 * theta.cos();
            assert!((e.values[j] - exact).abs() < 1e-10 * exact.max(1e-6), "{} vs {}", e.values[j], exact);
        }
    }
}
