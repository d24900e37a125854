//! Sparse symmetric positive definite solves backed by an `LDLᵀ`
//! factorization with a fill-reducing ordering.

use sprs::{CsMat, FillInReduction, SymmetryCheck, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};

use crate::error::{Error, Result};

/// Cached factorization of an SPD matrix. The numeric factor can be
/// refreshed in place for a new matrix with the same sparsity pattern.
pub struct SparseCholesky {
    n: usize,
    factor: Factor,
}

// the backing LDLᵀ does not handle dimensions below 2
enum Factor {
    Empty,
    Scalar(f64),
    Ldl(LdlNumeric<f64, usize>),
}

impl std::fmt::Debug for SparseCholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseCholesky").field("n", &self.n).finish()
    }
}

impl SparseCholesky {
    pub fn factor(mat: &CsMat<f64>) -> Result<Self> {
        let (r, c) = mat.shape();
        if r != c {
            return Err(Error::shape("SparseCholesky::factor", (r, r), (r, c)));
        }
        let factor = match r {
            0 => Factor::Empty,
            1 => Factor::Scalar(scalar_pivot(mat)?),
            _ => {
                let ldl = Ldl::new()
                    .check_symmetry(SymmetryCheck::DontCheckSymmetry)
                    .fill_in_reduction(FillInReduction::ReverseCuthillMcKee)
                    .numeric(mat.view())
                    .map_err(|e| Error::Factorization(format!("{e:?}")))?;
                check_pivots(&ldl)?;
                Factor::Ldl(ldl)
            }
        };
        Ok(SparseCholesky { n: r, factor })
    }

    /// Numeric refactorization; `mat` must share the original pattern.
    pub fn refactor(&mut self, mat: &CsMat<f64>) -> Result<()> {
        if mat.rows() != self.n || mat.cols() != self.n {
            return Err(Error::shape("SparseCholesky::refactor", (self.n, self.n), mat.shape()));
        }
        match &mut self.factor {
            Factor::Empty => {}
            Factor::Scalar(p) => *p = scalar_pivot(mat)?,
            Factor::Ldl(ldl) => {
                ldl.update(mat.view())
                    .map_err(|e| Error::Factorization(format!("{e:?}")))?;
                check_pivots(ldl)?;
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(rhs.len(), self.n);
        match &self.factor {
            Factor::Empty => Vec::new(),
            Factor::Scalar(p) => vec![rhs[0] / p],
            Factor::Ldl(ldl) => ldl.solve(rhs),
        }
    }
}

fn scalar_pivot(mat: &CsMat<f64>) -> Result<f64> {
    let p = mat.get(0, 0).copied().unwrap_or(0.0);
    if p > 0.0 && p.is_finite() {
        Ok(p)
    } else {
        Err(Error::Factorization(format!("matrix is not positive definite (pivot 0 = {p})")))
    }
}

fn check_pivots(ldl: &LdlNumeric<f64, usize>) -> Result<()> {
    match ldl.d().iter().position(|&p| !(p > 0.0 && p.is_finite())) {
        Some(k) => Err(Error::Factorization(format!(
            "matrix is not positive definite (pivot {k} = {})",
            ldl.d()[k]
        ))),
        None => Ok(()),
    }
}

/// `diag(D) + σ Σ_e (e_a − e_b)(e_a − e_b)ᵀ` over the given node pairs, the
/// ADMM system matrix of a difference constraint. Pairs with `a == b`
/// contribute nothing. The pattern depends only on `pairs`, not on `σ`.
pub fn diag_plus_laplacian(diag: &[f64], pairs: &[(usize, usize)], sigma: f64) -> CsMat<f64> {
    let n = diag.len();
    let mut tri = TriMat::with_capacity((n, n), n + 4 * pairs.len());
    for (i, &v) in diag.iter().enumerate() {
        tri.add_triplet(i, i, v);
    }
    for &(a, b) in pairs {
        if a == b {
            continue;
        }
        tri.add_triplet(a, a, sigma);
        tri.add_triplet(b, b, sigma);
        tri.add_triplet(a, b, -sigma);
        tri.add_triplet(b, a, -sigma);
    }
    tri.to_csc()
}

/// Gram matrix `MᵀM` of a sparse `rows × ncols` matrix given row by row,
/// each row holding at most a handful of `(column, value)` entries.
pub fn gram_of_rows<'a, R>(ncols: usize, rows: R) -> CsMat<f64>
where
    R: IntoIterator<Item = &'a [(usize, f64)]>,
{
    let mut tri = TriMat::new((ncols, ncols));
    for row in rows {
        for &(p, vp) in row {
            for &(q, vq) in row {
                tri.add_triplet(p, q, vp * vq);
            }
        }
    }
    tri.to_csc()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_path_laplacian_system() {
        // diag(1, 2, 3) + path Laplacian on 0-1-2
        let m = diag_plus_laplacian(&[1.0, 2.0, 3.0], &[(0, 1), (1, 2), (2, 2)], 1.0);
        let dense = m.to_dense();
        assert_eq!(dense[[1, 1]], 4.0);
        assert_eq!(dense[[0, 2]], 0.0);
        let chol = SparseCholesky::factor(&m).unwrap();
        let x = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| dense[[i, j]] * x[j]).sum())
            .collect();
        let sol = chol.solve(&b);
        for (s, t) in sol.iter().zip(&x) {
            assert!((s - t).abs() < 1e-13);
        }
    }

    #[test]
    fn refactor_tracks_sigma() {
        let pairs = [(0, 1), (0, 2)];
        let mut chol = SparseCholesky::factor(&diag_plus_laplacian(&[1.0; 3], &pairs, 1.0)).unwrap();
        let m4 = diag_plus_laplacian(&[1.0; 3], &pairs, 4.0);
        chol.refactor(&m4).unwrap();
        let sol = chol.solve(&[1.0, 0.0, 0.0]);
        let d = m4.to_dense();
        let back: Vec<f64> = (0..3).map(|i| (0..3).map(|j| d[[i, j]] * sol[j]).sum()).collect();
        assert!((back[0] - 1.0).abs() < 1e-13 && back[1].abs() < 1e-13);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let lap = diag_plus_laplacian(&[0.0, 0.0], &[(0, 1)], 1.0);
        assert!(matches!(SparseCholesky::factor(&lap), Err(Error::Factorization(_))));
        let empty = SparseCholesky::factor(&CsMat::zero((0, 0))).unwrap();
        assert!(empty.solve(&[]).is_empty());
        let one = SparseCholesky::factor(&diag_plus_laplacian(&[4.0], &[(0, 0)], 1.0)).unwrap();
        assert_eq!(one.solve(&[2.0]), vec![0.5]);
        assert!(SparseCholesky::factor(&CsMat::zero((1, 1))).is_err());
    }

    #[test]
    fn gram_matches_dense_product() {
        let rows: Vec<Vec<(usize, f64)>> = vec![vec![(0, 1.0)], vec![(0, 1.0), (1, -1.0)]];
        let g = gram_of_rows(2, rows.iter().map(|r| r.as_slice())).to_dense();
        assert_eq!(g, ndarray::array![[2.0, -1.0], [-1.0, 1.0]]);
    }
}
