use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Ascending eigenvalues with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Symmetric eigendecomposition sorted ascending.
///
/// Ties are ordered by the first nonzero entry of the eigenvector so that
/// repeated runs give identical output.
pub fn sym_eigen(mut a: DMatrix<f64>) -> Eigen {
    symmetrize(&mut a);
    let se = SymmetricEigen::new(a);
    let n = se.eigenvalues.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]).then(i.cmp(&j)));
    let values = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in idx.iter().enumerate() {
        let mut col = se.eigenvectors.column(i).into_owned();
        // fix the sign: largest-magnitude entry positive
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(c, &col);
    }
    Eigen { values, vectors }
}

/// Solve A x = λ B x for symmetric A and SPD B by Cholesky reduction.
/// Eigenvectors are B-orthonormal.
pub fn generalized_eigen(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Eigen> {
    let mut bs = b.clone();
    symmetrize(&mut bs);
    let chol = bs
        .cholesky()
        .ok_or_else(|| Error::SolverFailure("right-hand matrix of pencil is not positive definite".into()))?;
    let l = chol.l();
    let linv_a = l.solve_lower_triangular(a).expect("triangular solve");
    let c = l.solve_lower_triangular(&linv_a.transpose()).expect("triangular solve");
    let e = sym_eigen(c);
    let lt = l.transpose();
    let mut vectors = lt.solve_upper_triangular(&e.vectors).expect("triangular solve");
    for j in 0..vectors.ncols() {
        let mut col = vectors.column(j).into_owned();
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
            vectors.set_column(j, &col);
        }
    }
    Ok(Eigen { values: e.values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_orthonormal() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0]);
        let e = sym_eigen(a.clone());
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let q = &e.vectors;
        let id = q.transpose() * q;
        assert!((id - DMatrix::identity(3, 3)).norm() < 1e-12);
        let recon = q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(e.values.clone())) * q.transpose();
        assert!((recon - a).norm() < 1e-12);
    }

    #[test]
    fn generalized_diagonal_pencil() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 9.0, 4.0]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 3.0, 4.0]));
        let e = generalized_eigen(&a, &b).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 2.0).abs() < 1e-14);
        assert!((e.values[2] - 3.0).abs() < 1e-14);
        let vbv = e.vectors.transpose() * &b * &e.vectors;
        assert!((vbv - DMatrix::identity(3, 3)).norm() < 1e-12);
    }
}
