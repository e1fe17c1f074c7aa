//! Symmetric-definite generalized eigenvalue solver for the baselines.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matkernels::{cholesky, sym_eig, JitterPolicy, SymMatrix};
use crate::saa::ProjectionPair;

/// Pencil `lhs x = rhs x lambda` over the stacked view coordinates.
#[derive(Debug, Clone)]
pub struct GepProblem {
    pub lhs: SymMatrix,
    pub rhs: SymMatrix,
    pub k: usize,
    pub d1: usize,
    pub d2: usize,
}

impl GepProblem {
    pub fn new(lhs: SymMatrix, rhs: SymMatrix, k: usize, d1: usize, d2: usize) -> Result<Self> {
        let n = d1 + d2;
        if lhs.dim() != n || rhs.dim() != n {
            return Err(Error::DimensionMismatch(format!(
                "pencil is {}x{} vs views {d1} + {d2}",
                lhs.dim(),
                rhs.dim()
            )));
        }
        if k == 0 || k > d1.min(d2) {
            return Err(Error::InvalidK {
                k,
                max: d1.min(d2),
            });
        }
        Ok(GepProblem { lhs, rhs, k, d1, d2 })
    }
}

/// Top-k eigenpairs of the pencil via Cholesky reduction to a standard
/// symmetric problem. The stacked eigenvector matrix is `rhs`-orthonormal
/// and split by rows into the per-view projections.
pub fn solve_gep(gp: &GepProblem) -> Result<ProjectionPair> {
    let chol = cholesky(&gp.rhs, &JitterPolicy::default())?;
    // M = L^-1 lhs L^-T
    let lm = chol.solve_lower(gp.lhs.as_matrix());
    let m = chol.solve_lower(&lm.transpose()).transpose();
    let (vals, vecs) = sym_eig(&SymMatrix::from_dense(&m)?)?;

    let top = vecs.columns(0, gp.k).into_owned();
    let p = chol.solve_lower_transpose(&top);
    let p1 = p.rows(0, gp.d1).into_owned();
    let p2 = p.rows(gp.d1, gp.d2).into_owned();
    let eigenvalues: Vec<f64> = vals.iter().take(gp.k).copied().collect();
    let objective = eigenvalues.iter().sum();
    Ok(ProjectionPair {
        p1,
        p2,
        objective,
        per_column_values: eigenvalues,
    })
}

/// `|lhs P - rhs P diag(lambda)|_F`, the pencil residual of a solution.
pub fn gep_residual(gp: &GepProblem, pair: &ProjectionPair) -> f64 {
    let mut p = DMatrix::zeros(gp.d1 + gp.d2, pair.k());
    p.view_mut((0, 0), (gp.d1, pair.k())).copy_from(&pair.p1);
    p.view_mut((gp.d1, 0), (gp.d2, pair.k())).copy_from(&pair.p2);
    let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(
        pair.per_column_values.clone(),
    ));
    (gp.lhs.as_matrix() * &p - gp.rhs.as_matrix() * &p * lambda).norm()
}
