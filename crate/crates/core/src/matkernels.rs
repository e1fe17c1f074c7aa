//! Dense symmetric linear-algebra primitives.
//!
//! Everything downstream (whitening, trust-region subproblems, deflation)
//! is built on the kernels here. Each operation states a numeric contract
//! that the tests enforce; the factorizations behind [`sym_eig`] and
//! [`thin_svd`] delegate to nalgebra's dense routines.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Dense real matrix, columns-as-samples where it holds data.
pub type DenseMatrix = DMatrix<f64>;

/// Dense real symmetric matrix. Storage is exactly symmetric: construction
/// mirrors the lower triangle into the upper one, so `m[(i, j)] == m[(j, i)]`
/// bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Symmetrizes `m` as `(m + m') / 2` and mirrors the result exactly.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut data = m.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (data[(i, j)] + data[(j, i)]);
                data[(i, j)] = avg;
                data[(j, i)] = avg;
            }
        }
        Ok(SymMatrix { data })
    }

    /// Wraps a matrix that is already exactly symmetric.
    pub fn from_exact(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::DimensionMismatch(format!(
                        "entry ({i},{j}) = {} differs from ({j},{i}) = {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(SymMatrix { data: m })
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            data: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix {
            data: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(d: &DVector<f64>) -> Self {
        SymMatrix {
            data: DMatrix::from_diagonal(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// `self + shift * I`, still exactly symmetric.
    pub fn shifted(&self, shift: f64) -> SymMatrix {
        let mut data = self.data.clone();
        for i in 0..data.nrows() {
            data[(i, i)] += shift;
        }
        SymMatrix { data }
    }

    /// Symmetric matrix-vector product.
    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.data * v
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }
}

impl std::ops::Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.data[idx]
    }
}

/// Escalation ladder of diagonal shifts tried by [`cholesky`].
///
/// Shifts are multiples of `trace(m)/dim` by default so the ladder adapts to
/// the scale of the input; `absolute` ladders apply the raw values.
#[derive(Debug, Clone)]
pub struct JitterPolicy {
    shifts: Vec<f64>,
    relative: bool,
}

impl JitterPolicy {
    pub fn relative(shifts: Vec<f64>) -> Self {
        JitterPolicy {
            shifts,
            relative: true,
        }
    }

    pub fn absolute(shifts: Vec<f64>) -> Self {
        JitterPolicy {
            shifts,
            relative: false,
        }
    }

    /// No jitter at all: factorization either succeeds exactly or fails.
    pub fn none() -> Self {
        JitterPolicy::absolute(vec![0.0])
    }

    fn resolved(&self, m: &SymMatrix) -> Vec<f64> {
        let scale = if self.relative {
            let s = m.trace() / m.dim().max(1) as f64;
            if s > 0.0 {
                s
            } else {
                1.0
            }
        } else {
            1.0
        };
        self.shifts.iter().map(|c| c * scale).collect()
    }
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy::relative(vec![0.0, 1e-12, 1e-10, 1e-8, 1e-6])
    }
}

/// Lower-triangular Cholesky factor together with the diagonal shift that
/// made the factorization succeed (`0` for a positive definite input).
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    pub lower: DMatrix<f64>,
    pub jitter_used: f64,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// Solves `L x = b` for each column of `b`.
    pub fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lower
            .solve_lower_triangular(b)
            .expect("triangular solve on a successful Cholesky factor")
    }

    /// Solves `L' x = b` for each column of `b`.
    pub fn solve_lower_transpose(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.lower
            .tr_solve_lower_triangular(b)
            .expect("triangular solve on a successful Cholesky factor")
    }
}

/// Cholesky factorization `m + jitter*I = L L'` with an escalating shift
/// ladder for inputs that are only semi-definite.
pub fn cholesky(m: &SymMatrix, policy: &JitterPolicy) -> Result<CholeskyFactor> {
    let shifts = policy.resolved(m);
    let mut last = 0.0;
    for shift in shifts {
        last = shift;
        let candidate = if shift == 0.0 {
            m.clone()
        } else {
            m.shifted(shift)
        };
        if let Some(chol) = nalgebra::linalg::Cholesky::new(candidate.into_matrix()) {
            let lower = chol.unpack();
            if lower.iter().all(|x| x.is_finite()) {
                return Ok(CholeskyFactor {
                    lower,
                    jitter_used: shift,
                });
            }
        }
    }
    Err(Error::NotPositiveDefinite { last_shift: last })
}

/// Symmetric eigendecomposition with eigenvalues sorted descending and
/// matching orthonormal eigenvector columns.
pub fn sym_eig(m: &SymMatrix) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = m.dim();
    if n == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let eig = nalgebra::linalg::SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure("symmetric eigendecomposition"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Thin SVD `m = U diag(sigma) V'` with singular values sorted descending.
pub fn thin_svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let r = m.nrows().min(m.ncols());
    if r == 0 {
        return Ok((
            DMatrix::zeros(m.nrows(), 0),
            DVector::zeros(0),
            DMatrix::zeros(m.ncols(), 0),
        ));
    }
    let svd = nalgebra::linalg::SVD::try_new(m.clone(), true, true, f64::EPSILON, 0)
        .ok_or(Error::ConvergenceFailure("singular value decomposition"))?;
    let u_raw = svd.u.expect("u requested");
    let vt_raw = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma = DVector::from_iterator(r, order.iter().map(|&i| svd.singular_values[i]));
    let mut u = DMatrix::zeros(m.nrows(), r);
    let mut v = DMatrix::zeros(m.ncols(), r);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        v.set_column(dst, &vt_raw.row(src).transpose());
    }
    Ok((u, sigma, v))
}

/// Householder reflector `H = I - 2 u u'` stored by its unit vector.
///
/// The `identity` flag marks the degenerate reflector with `H = I`; it keeps
/// the deflation bookkeeping composable when a step needs no rotation.
#[derive(Debug, Clone)]
pub struct Reflector {
    u: DVector<f64>,
    alpha: f64,
    identity: bool,
}

impl Reflector {
    /// The reflector that leaves everything unchanged.
    pub fn identity(dim: usize) -> Self {
        assert!(dim > 0, "reflector dimension must be positive");
        let mut u = DVector::zeros(dim);
        u[0] = 1.0;
        Reflector {
            u,
            alpha: 1.0,
            identity: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn unit_vector(&self) -> &DVector<f64> {
        &self.u
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    /// `H v`.
    pub fn apply_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        if self.identity {
            return v.clone();
        }
        let coef = 2.0 * self.u.dot(v);
        v - &self.u * coef
    }

    /// In-place `H v` on a slice of a longer vector.
    pub fn apply_vec_mut(&self, v: &mut [f64]) {
        if self.identity {
            return;
        }
        debug_assert_eq!(v.len(), self.u.len());
        let mut dot = 0.0;
        for (ui, vi) in self.u.iter().zip(v.iter()) {
            dot += ui * vi;
        }
        let coef = 2.0 * dot;
        for (ui, vi) in self.u.iter().zip(v.iter_mut()) {
            *vi -= coef * ui;
        }
    }

    /// `H m` as a rank-1 update; never forms `H`.
    pub fn apply_left(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        if self.identity {
            return m.clone();
        }
        let ut_m = self.u.transpose() * m;
        m - (&self.u * ut_m).scale(2.0)
    }

    /// `m H` as a rank-1 update.
    pub fn apply_right(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        if self.identity {
            return m.clone();
        }
        let m_u = m * &self.u;
        m - (m_u * self.u.transpose()).scale(2.0)
    }

    /// Dense `H` for oracles and small checks.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        if self.identity {
            return DMatrix::identity(d, d);
        }
        DMatrix::identity(d, d) - (&self.u * self.u.transpose()).scale(2.0)
    }
}

/// Builds the reflector mapping `y` onto `alpha * e1` with
/// `alpha = -sign(y_1) * |y|` (sign(0) taken as +1).
pub fn reflector_from(y: &DVector<f64>) -> Result<Reflector> {
    let norm = y.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let sign = if y[0] >= 0.0 { 1.0 } else { -1.0 };
    let alpha = -sign * norm;
    let mut w = y.clone();
    w[0] -= alpha;
    let wn = w.norm();
    if wn <= f64::EPSILON * norm {
        // y is (numerically) alpha * e1 already; u = e1 flips the first
        // coordinate and the contract H y = alpha e1 still holds.
        let mut u = DVector::zeros(y.len());
        u[0] = 1.0;
        return Ok(Reflector {
            u,
            alpha,
            identity: false,
        });
    }
    Ok(Reflector {
        u: w / wn,
        alpha,
        identity: false,
    })
}

/// Computes `[H_left * block * H_right]` restricted to its trailing
/// submatrix (rows and columns 2..end), via two rank-1 updates.
pub fn two_sided_reflector_update(
    block: &DMatrix<f64>,
    left: &Reflector,
    right: &Reflector,
) -> Result<DMatrix<f64>> {
    if block.nrows() != left.dim() || block.ncols() != right.dim() {
        return Err(Error::DimensionMismatch(format!(
            "block is {}x{}, reflectors are {} and {}",
            block.nrows(),
            block.ncols(),
            left.dim(),
            right.dim()
        )));
    }
    let full = right.apply_right(&left.apply_left(block));
    let (r, c) = (block.nrows(), block.ncols());
    Ok(full.view((1, 1), (r - 1, c - 1)).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        let m = random_matrix(rng, n, n);
        let spd = &m * m.transpose() + DMatrix::identity(n, n) * 0.5;
        SymMatrix::from_dense(&spd).unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
        let v = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let norm = v.norm();
        v / norm
    }

    #[test]
    fn cholesky_identity_needs_no_jitter() {
        let f = cholesky(&SymMatrix::identity(3), &JitterPolicy::default()).unwrap();
        assert_eq!(f.jitter_used, 0.0);
        assert_abs_diff_eq!(f.lower, DMatrix::identity(3, 3), epsilon = 1e-14);
    }

    #[test]
    fn cholesky_hand_checked_2x2() {
        let m = SymMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]))
            .unwrap();
        let f = cholesky(&m, &JitterPolicy::default()).unwrap();
        assert_eq!(f.jitter_used, 0.0);
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2.0]);
        assert_abs_diff_eq!(f.lower, expected, epsilon = 1e-12);
    }

    #[test]
    fn cholesky_rank_one_takes_first_working_shift() {
        let v = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let m = SymMatrix::from_dense(&(&v * v.transpose())).unwrap();
        let ladder = JitterPolicy::absolute(vec![1e-10, 1e-8, 1e-6]);
        let f = cholesky(&m, &ladder).unwrap();
        // min eigenvalue of vv' is 0, so the first positive shift works
        assert_eq!(f.jitter_used, 1e-10);
        let rebuilt = &f.lower * f.lower.transpose();
        let target = m.shifted(f.jitter_used);
        let rel = (&rebuilt - target.as_matrix()).norm() / target.as_matrix().norm();
        assert!(rel < 1e-10, "reconstruction error {rel}");
        // independent check against the eigendecomposition of the shifted target
        let (vals, _) = sym_eig(&target).unwrap();
        assert!(vals[vals.len() - 1] > 0.0);
    }

    #[test]
    fn cholesky_exhausted_ladder_errors() {
        let m = SymMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -1.0]))
            .unwrap();
        let err = cholesky(&m, &JitterPolicy::none()).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn sym_eig_diagonal_sorted() {
        let m = SymMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0, 2.0]));
        let (vals, _) = sym_eig(&m).unwrap();
        assert_abs_diff_eq!(vals, DVector::from_vec(vec![3.0, 2.0, 1.0]), epsilon = 1e-12);
    }

    #[test]
    fn sym_eig_exchange_matrix() {
        let m = SymMatrix::from_dense(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
            .unwrap();
        let (vals, vecs) = sym_eig(&m).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], -1.0, epsilon = 1e-12);
        let s = 1.0 / 2.0f64.sqrt();
        for (col, expect) in [(0, [s, s]), (1, [s, -s])] {
            let v = vecs.column(col);
            let same = (v[0] - expect[0]).abs() + (v[1] - expect[1]).abs();
            let flipped = (v[0] + expect[0]).abs() + (v[1] + expect[1]).abs();
            assert!(same.min(flipped) < 1e-10);
        }
    }

    #[test]
    fn sym_eig_reconstructs_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = SymMatrix::from_dense(&random_matrix(&mut rng, 8, 8)).unwrap();
        let (vals, vecs) = sym_eig(&m).unwrap();
        let rebuilt = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        let rel = (&rebuilt - m.as_matrix()).norm() / m.as_matrix().norm();
        assert!(rel < 1e-9, "reconstruction error {rel}");
        let gram = vecs.transpose() * &vecs;
        assert!((gram - DMatrix::identity(8, 8)).norm() < 1e-10);
    }

    #[test]
    fn thin_svd_diagonal_and_zero() {
        let (_, sigma, _) = thin_svd(&DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0])))
            .unwrap();
        assert_abs_diff_eq!(sigma, DVector::from_vec(vec![2.0, 1.0]), epsilon = 1e-12);
        let (_, sigma, _) = thin_svd(&DMatrix::zeros(3, 2)).unwrap();
        assert!(sigma.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn thin_svd_reconstructs_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(&mut rng, 6, 4);
        let (u, sigma, v) = thin_svd(&m).unwrap();
        let rebuilt = &u * DMatrix::from_diagonal(&sigma) * v.transpose();
        let rel = (&rebuilt - &m).norm() / m.norm();
        assert!(rel < 1e-9);
        assert!((u.transpose() * &u - DMatrix::identity(4, 4)).norm() < 1e-10);
        assert!((v.transpose() * &v - DMatrix::identity(4, 4)).norm() < 1e-10);
        assert!(sigma.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn reflector_sign_convention() {
        let h = reflector_from(&DVector::from_vec(vec![3.0, 4.0])).unwrap();
        assert_abs_diff_eq!(h.alpha(), -5.0, epsilon = 1e-12);
        let hy = h.apply_vec(&DVector::from_vec(vec![3.0, 4.0]));
        assert_abs_diff_eq!(hy, DVector::from_vec(vec![-5.0, 0.0]), epsilon = 1e-10);

        let h = reflector_from(&DVector::from_vec(vec![0.0, 1.0])).unwrap();
        assert_abs_diff_eq!(h.alpha(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn reflector_on_random_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let y = DVector::from_fn(7, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        let h = reflector_from(&y).unwrap();
        let mut expect = DVector::zeros(7);
        expect[0] = h.alpha();
        assert!((h.apply_vec(&y) - expect).norm() <= 1e-10 * y.norm());
    }

    #[test]
    fn reflector_degenerate_directions() {
        // positive multiple of e1 flips onto the negative axis
        let h = reflector_from(&DVector::from_vec(vec![2.0, 0.0, 0.0])).unwrap();
        let hy = h.apply_vec(&DVector::from_vec(vec![2.0, 0.0, 0.0]));
        assert_abs_diff_eq!(hy, DVector::from_vec(vec![-2.0, 0.0, 0.0]), epsilon = 1e-12);
        // negative multiple flips onto the positive axis
        let h = reflector_from(&DVector::from_vec(vec![-2.0, 0.0])).unwrap();
        let hy = h.apply_vec(&DVector::from_vec(vec![-2.0, 0.0]));
        assert_abs_diff_eq!(hy, DVector::from_vec(vec![2.0, 0.0]), epsilon = 1e-12);
        assert!(matches!(
            reflector_from(&DVector::zeros(3)).unwrap_err(),
            Error::ZeroVector
        ));
    }

    #[test]
    fn two_sided_identity_reflectors_slice() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let block = random_matrix(&mut rng, 4, 3);
        let out = two_sided_reflector_update(
            &block,
            &Reflector::identity(4),
            &Reflector::identity(3),
        )
        .unwrap();
        assert_abs_diff_eq!(out, block.view((1, 1), (3, 2)).into_owned(), epsilon = 0.0);
    }

    #[test]
    fn two_sided_matches_explicit_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let block = random_matrix(&mut rng, 3, 3);
        let left = reflector_from(&random_unit(&mut rng, 3)).unwrap();
        let right = reflector_from(&random_unit(&mut rng, 3)).unwrap();
        let explicit = left.to_dense() * &block * right.to_dense();
        let out = two_sided_reflector_update(&block, &left, &right).unwrap();
        assert_abs_diff_eq!(out, explicit.view((1, 1), (2, 2)).into_owned(), epsilon = 1e-12);
    }

    #[test]
    fn two_sided_preserves_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let block = random_spd(&mut rng, 5);
        let h = reflector_from(&random_unit(&mut rng, 5)).unwrap();
        let out = two_sided_reflector_update(block.as_matrix(), &h, &h).unwrap();
        assert!((&out - out.transpose()).norm() < 1e-12);
    }

    #[test]
    fn two_sided_dimension_mismatch() {
        let block = DMatrix::zeros(3, 4);
        let err = two_sided_reflector_update(
            &block,
            &Reflector::identity(3),
            &Reflector::identity(3),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn prop_cholesky_reconstructs_spd(seed in 0u64..1000, n in 1usize..=50) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_spd(&mut rng, n);
            let f = cholesky(&m, &JitterPolicy::default()).unwrap();
            let target = m.shifted(f.jitter_used);
            let rebuilt = &f.lower * f.lower.transpose();
            let rel = (&rebuilt - target.as_matrix()).norm() / target.as_matrix().norm();
            prop_assert!(rel < 1e-10);
        }

        #[test]
        fn prop_reflector_is_orthogonal(seed in 0u64..1000, n in 1usize..=16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            prop_assume!(y.norm() > 1e-6);
            let h = reflector_from(&y).unwrap();
            let x = DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let hx = h.apply_vec(&x);
            prop_assert!((hx.norm() - x.norm()).abs() <= 1e-12 * (1.0 + x.norm()));
            // involution: H(Hx) = x
            prop_assert!((h.apply_vec(&hx) - &x).norm() <= 1e-12 * (1.0 + x.norm()));
        }

        #[test]
        fn prop_two_sided_matches_dense(seed in 0u64..1000, r in 2usize..=20, c in 2usize..=20) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let block = random_matrix(&mut rng, r, c);
            let left = reflector_from(&random_unit(&mut rng, r)).unwrap();
            let right = reflector_from(&random_unit(&mut rng, c)).unwrap();
            let explicit = left.to_dense() * &block * right.to_dense();
            let out = two_sided_reflector_update(&block, &left, &right).unwrap();
            let diff = (&out - explicit.view((1, 1), (r - 1, c - 1)).into_owned()).norm();
            prop_assert!(diff < 1e-12 * (1.0 + block.norm()));
        }
    }
}
