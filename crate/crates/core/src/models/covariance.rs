//! Paired and total covariance matrices.

use nalgebra::DMatrix;

use super::{TwoViewData, ViewId};
use crate::error::{Error, Result};
use crate::matkernels::SymMatrix;

/// Centers columns around their mean.
fn centered(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = x.column_mean();
    let mut c = x.clone();
    for mut col in c.column_iter_mut() {
        col -= &mean;
    }
    c
}

/// Paired (cross-)covariance `C_{s,t} = (1/n) X_s H_n X_t'` over the first
/// `n` (paired) columns.
pub fn cross_covariance(data: &TwoViewData, s: ViewId, t: ViewId) -> Result<DMatrix<f64>> {
    let n = data.paired_count();
    if n < 2 {
        return Err(Error::TooFewPaired(n));
    }
    let xs = centered(&data.paired_block(s));
    let xt = centered(&data.paired_block(t));
    Ok((xs * xt.transpose()).scale(1.0 / n as f64))
}

/// Paired covariance of a single view as an exactly symmetric matrix.
pub fn paired_covariance_sym(data: &TwoViewData, s: ViewId) -> Result<SymMatrix> {
    SymMatrix::from_dense(&cross_covariance(data, s, s)?)
}

/// Total covariance `(1/n_s) X~_s H X~_s'` over all columns of view `s`,
/// paired and unpaired.
pub fn total_covariance(data: &TwoViewData, s: ViewId) -> Result<SymMatrix> {
    let n = data.sample_count(s);
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let x = centered(data.view(s));
    SymMatrix::from_dense(&(x.clone() * x.transpose()).scale(1.0 / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernels::sym_eig;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn data_from(
        view1: DMatrix<f64>,
        view2: DMatrix<f64>,
        paired: usize,
    ) -> TwoViewData {
        TwoViewData::unlabeled(view1, view2, paired).unwrap()
    }

    #[test]
    fn self_pairing_is_symmetric_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = DMatrix::from_fn(3, 6, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let data = data_from(x.clone(), x.clone(), 6);
        let c12 = cross_covariance(&data, ViewId::View1, ViewId::View2).unwrap();
        assert!((&c12 - c12.transpose()).norm() < 1e-12);
        let (vals, _) = sym_eig(&SymMatrix::from_dense(&c12).unwrap()).unwrap();
        assert!(vals[vals.len() - 1] >= -1e-12 * vals[0].abs().max(1.0));
    }

    #[test]
    fn constant_view_centers_to_zero() {
        let col = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let x = DMatrix::from_columns(&[col.column(0), col.column(0), col.column(0), col.column(0)]);
        let y = DMatrix::from_fn(2, 4, |i, j| (i + j) as f64);
        let data = data_from(x, y, 4);
        let c = cross_covariance(&data, ViewId::View1, ViewId::View2).unwrap();
        assert!(c.norm() == 0.0);
    }

    #[test]
    fn matches_outer_product_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x1 = DMatrix::from_fn(3, 5, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        let x2 = DMatrix::from_fn(2, 5, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        let data = data_from(x1.clone(), x2.clone(), 5);
        let c = cross_covariance(&data, ViewId::View1, ViewId::View2).unwrap();

        // oracle: (1/n) sum_i (x_i - xbar)(y_i - ybar)'
        let xbar = x1.column_mean();
        let ybar = x2.column_mean();
        let mut oracle = DMatrix::zeros(3, 2);
        for i in 0..5 {
            let dx = x1.column(i) - &xbar;
            let dy = x2.column(i) - &ybar;
            oracle += dx * dy.transpose();
        }
        oracle /= 5.0;
        assert_abs_diff_eq!(c, oracle, epsilon = 1e-12);
    }

    #[test]
    fn too_few_paired_errors() {
        let x = DMatrix::zeros(2, 3);
        let data = data_from(x.clone(), x, 1);
        assert!(matches!(
            cross_covariance(&data, ViewId::View1, ViewId::View2),
            Err(Error::TooFewPaired(1))
        ));
    }

    #[test]
    fn total_covariance_without_unpaired_equals_paired() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x1 = DMatrix::from_fn(4, 7, |_, _| rng.random::<f64>());
        let x2 = DMatrix::from_fn(3, 7, |_, _| rng.random::<f64>());
        let data = data_from(x1, x2, 7);
        let total = total_covariance(&data, ViewId::View1).unwrap();
        let paired = cross_covariance(&data, ViewId::View1, ViewId::View1).unwrap();
        assert_abs_diff_eq!(total.as_matrix(), &paired, epsilon = 1e-12);
    }

    #[test]
    fn two_point_covariance_has_rank_one() {
        let mut x = DMatrix::zeros(3, 4);
        for j in 0..3 {
            x.set_column(j, &DVector::from_vec(vec![1.0, 2.0, 3.0]).column(0));
        }
        x.set_column(3, &DVector::from_vec(vec![2.0, 2.0, 3.0]).column(0));
        let data = data_from(x.clone(), x, 2);
        let total = total_covariance(&data, ViewId::View1).unwrap();
        let (vals, _) = sym_eig(&total).unwrap();
        assert!(vals[0] > 0.0);
        assert!(vals[1].abs() < 1e-12);
    }

    #[test]
    fn total_covariance_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x1 = DMatrix::from_fn(5, 9, |_, _| rng.random::<f64>() * 10.0);
        let x2 = DMatrix::from_fn(2, 6, |_, _| rng.random::<f64>());
        let data = data_from(x1, x2, 4);
        let total = total_covariance(&data, ViewId::View1).unwrap();
        let (vals, _) = sym_eig(&total).unwrap();
        assert!(vals[vals.len() - 1] >= -1e-10 * total.frobenius_norm());
    }
}
