//! Sphere-constrained quadratic maximization `max_{|x|=1} x'Ax + 2b'x`.
//!
//! This is the equality-constrained maximization variant of the trust-region
//! subproblem. The global maximizer satisfies `(lambda I - A) x = b` with
//! `lambda >= lambda_max(A)`; for `lambda > lambda_max` the multiplier is the
//! root of the secular equation `|x(lambda)| = 1`, solved here in the
//! reciprocal form `phi(lambda) = 1 - 1/|x(lambda)|` by a bracketed Newton
//! iteration. When `b` is (numerically) orthogonal to the top eigenspace and
//! the sphere is unreachable, the hard case adds a top-eigenvector component.
//!
//! Two paths are provided: a dense solver working on the full
//! eigendecomposition, and a Krylov-subspace solver for large operators that
//! solves the projected subproblem on a growing Lanczos basis.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matkernels::{sym_eig, SymMatrix};

/// Coupling threshold, relative to `|b|`, below which a component of `b` on
/// the top eigenspace is treated as zero for hard-case detection.
const HARD_CASE_TOL: f64 = 1e-10;

/// One sphere-constrained quadratic maximization instance.
#[derive(Debug, Clone)]
pub struct TrsProblem {
    a: SymMatrix,
    b: DVector<f64>,
}

impl TrsProblem {
    pub fn new(a: SymMatrix, b: DVector<f64>) -> Result<Self> {
        if a.dim() != b.len() {
            return Err(Error::DimensionMismatch(format!(
                "quadratic term is {}x{}, linear term has length {}",
                a.dim(),
                a.dim(),
                b.len()
            )));
        }
        Ok(TrsProblem { a, b })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn quadratic(&self) -> &SymMatrix {
        &self.a
    }

    pub fn linear(&self) -> &DVector<f64> {
        &self.b
    }
}

/// Certified solution of a [`TrsProblem`].
#[derive(Debug, Clone)]
pub struct TrsSolution {
    /// Unit-norm maximizer.
    pub x: DVector<f64>,
    /// Objective value `x'Ax + 2b'x`.
    pub value: f64,
    /// Lagrange multiplier; `>= lambda_max(A)` up to roundoff.
    pub multiplier: f64,
    /// Whether the hard case (multiplier pinned at `lambda_max`) was taken.
    pub hard_case: bool,
}

/// Options controlling the dispatching solver.
#[derive(Debug, Clone)]
pub struct TrsOptions {
    /// Problems of this dimension or less go to the dense path.
    pub dense_threshold: usize,
    /// Secular-equation tolerance on the dense path.
    pub dense_tol: f64,
    /// Relative KKT-residual tolerance on the Lanczos path.
    pub lanczos_tol: f64,
    /// Krylov subspace cap (clamped to the problem dimension).
    pub max_lanczos_dim: usize,
    /// Iteration cap for the secular Newton.
    pub max_secular_iters: usize,
}

impl Default for TrsOptions {
    fn default() -> Self {
        TrsOptions {
            dense_threshold: 500,
            dense_tol: 1e-10,
            lanczos_tol: 1e-8,
            max_lanczos_dim: 300,
            max_secular_iters: 200,
        }
    }
}

/// Symmetric linear operator, the only access the Lanczos path needs.
pub trait SymOp {
    fn dim(&self) -> usize;
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
}

impl SymOp for SymMatrix {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.mul_vec(v)
    }
}

/// Dense solver with the eigendecomposition factored once, so repeated solves
/// against the same quadratic term (as in the alternating sweeps) cost only
/// `O(d^2)` each.
#[derive(Debug, Clone)]
pub struct DenseTrsSolver {
    eigvals: DVector<f64>,
    eigvecs: DMatrix<f64>,
    tol: f64,
    max_iters: usize,
}

impl DenseTrsSolver {
    pub fn new(a: &SymMatrix) -> Result<Self> {
        Self::with_tolerance(a, 1e-10, 200)
    }

    pub fn with_tolerance(a: &SymMatrix, tol: f64, max_iters: usize) -> Result<Self> {
        let (eigvals, eigvecs) = sym_eig(a)?;
        Ok(DenseTrsSolver {
            eigvals,
            eigvecs,
            tol,
            max_iters,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigvals[0]
    }

    /// Solves `max_{|x|=1} x'Ax + 2b'x` for the pre-factored `A`.
    pub fn solve(&self, b: &DVector<f64>) -> Result<TrsSolution> {
        let d = self.dim();
        if b.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "linear term has length {}, problem dimension is {d}",
                b.len()
            )));
        }
        let bnorm = b.norm();
        let lam1 = self.eigvals[0];
        if bnorm == 0.0 {
            let x = self.eigvecs.column(0).into_owned();
            return Ok(TrsSolution {
                x,
                value: lam1,
                multiplier: lam1,
                hard_case: true,
            });
        }

        let bt = self.eigvecs.transpose() * b;
        let gap_tol = 1e-10 * (1.0 + lam1.abs());
        let top: Vec<usize> = (0..d)
            .filter(|&i| lam1 - self.eigvals[i] <= gap_tol)
            .collect();
        let hard_tol = HARD_CASE_TOL * bnorm;
        let coupled = top.iter().any(|&i| bt[i].abs() > hard_tol);

        // Coefficients used by the secular equation; decoupled top components
        // are zeroed to keep the pole structure clean.
        let mut coef = bt.clone();
        if !coupled {
            for &i in &top {
                coef[i] = 0.0;
            }
            let mut xt = DVector::zeros(d);
            for i in 0..d {
                if coef[i] != 0.0 {
                    xt[i] = coef[i] / (lam1 - self.eigvals[i]);
                }
            }
            let s2: f64 = xt.norm_squared();
            if s2 < 1.0 {
                // Hard case: fill the remaining norm with a top eigenvector,
                // sign chosen to maximize the objective.
                let tau = (1.0 - s2).sqrt();
                let lead = top[0];
                let mut best: Option<(f64, DVector<f64>)> = None;
                for sign in [1.0, -1.0] {
                    let mut cand = xt.clone();
                    cand[lead] += sign * tau;
                    let value = self.eig_value(&cand, &bt);
                    if best.as_ref().is_none_or(|(v, _)| value > *v) {
                        best = Some((value, cand));
                    }
                }
                let (value, xt) = best.expect("two candidates evaluated");
                let x = self.lift(&xt);
                return Ok(TrsSolution {
                    x,
                    value,
                    multiplier: lam1,
                    hard_case: true,
                });
            }
        }

        let lambda = self.secular_root(&coef, lam1, bnorm)?;
        let mut xt = DVector::zeros(d);
        for i in 0..d {
            if coef[i] != 0.0 {
                xt[i] = coef[i] / (lambda - self.eigvals[i]);
            }
        }
        let norm = xt.norm();
        if norm > 0.0 {
            xt /= norm;
        }
        let value = self.eig_value(&xt, &bt);
        let x = self.lift(&xt);
        Ok(TrsSolution {
            x,
            value,
            multiplier: lambda,
            hard_case: false,
        })
    }

    /// Objective in eigenvector coordinates.
    fn eig_value(&self, xt: &DVector<f64>, bt: &DVector<f64>) -> f64 {
        let mut v = 0.0;
        for i in 0..xt.len() {
            v += self.eigvals[i] * xt[i] * xt[i] + 2.0 * bt[i] * xt[i];
        }
        v
    }

    fn lift(&self, xt: &DVector<f64>) -> DVector<f64> {
        let mut x = &self.eigvecs * xt;
        let n = x.norm();
        if n > 0.0 {
            x /= n;
        }
        x
    }

    /// Root of `phi(lambda) = 1 - 1/|x(lambda)|` on `(lam1, lam1 + |b|]`,
    /// bracketed Newton with bisection fallback.
    fn secular_root(&self, coef: &DVector<f64>, lam1: f64, bnorm: f64) -> Result<f64> {
        let phi = |lambda: f64| -> (f64, f64) {
            // returns (phi, dphi/dlambda)
            let mut n2 = 0.0;
            let mut n3 = 0.0;
            for i in 0..coef.len() {
                if coef[i] == 0.0 {
                    continue;
                }
                let gap = lambda - self.eigvals[i];
                let t = coef[i] / gap;
                n2 += t * t;
                n3 += t * t / gap;
            }
            if !n2.is_finite() || n2 == 0.0 {
                // at or beyond the pole; report phi = 1 with a steep slope
                return (1.0, -f64::INFINITY);
            }
            let norm = n2.sqrt();
            (1.0 - 1.0 / norm, -n3 / (n2 * norm))
        };

        let mut lo = lam1;
        let mut hi = lam1 + bnorm;
        let (phi_lo, _) = phi(lo);
        if phi_lo <= 0.0 {
            // |x(lam1)| <= 1 already: the boundary multiplier solves it
            return Ok(lam1);
        }
        let mut lambda = 0.5 * (lo + hi);
        for _ in 0..self.max_iters {
            let (f, df) = phi(lambda);
            if f.abs() <= self.tol {
                return Ok(lambda);
            }
            if f > 0.0 {
                lo = lambda;
            } else {
                hi = lambda;
            }
            let newton = lambda - f / df;
            lambda = if df.is_finite() && df != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * (1.0 + lambda.abs()) {
                return Ok(lambda);
            }
        }
        Err(Error::ConvergenceFailure("secular equation Newton"))
    }
}

/// One-shot dense solve; factors the quadratic term internally.
pub fn solve_trs_dense(p: &TrsProblem) -> Result<TrsSolution> {
    DenseTrsSolver::new(p.quadratic())?.solve(p.linear())
}

struct LanczosBasis {
    v: Vec<DVector<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl LanczosBasis {
    fn tridiagonal(&self, j: usize) -> SymMatrix {
        let mut t = DMatrix::zeros(j, j);
        for i in 0..j {
            t[(i, i)] = self.alpha[i];
            if i + 1 < j {
                t[(i, i + 1)] = self.beta[i];
                t[(i + 1, i)] = self.beta[i];
            }
        }
        SymMatrix::from_exact(t).expect("tridiagonal is symmetric by construction")
    }

    fn lift(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut x = DVector::zeros(self.v[0].len());
        for (col, &yi) in self.v.iter().zip(y.iter()) {
            x.axpy(yi, col, 1.0);
        }
        x
    }
}

/// Krylov-subspace solver for large problems.
///
/// Builds the Lanczos basis of `K_j(A, b)` with full reorthogonalization,
/// solves the projected subproblem on the basis, and accepts once the exact
/// KKT residual of the lifted solution falls below `tol * (|T|_F + |b|)`.
/// An invariant subspace hit before convergence triggers a restart from a
/// perturbed start vector; persistent breakdown is reported as such.
pub fn solve_trs_lanczos<O: SymOp>(
    op: &O,
    b: &DVector<f64>,
    tol: f64,
    max_lanczos_dim: usize,
) -> Result<TrsSolution> {
    let d = op.dim();
    if b.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "linear term has length {}, operator dimension is {d}",
            b.len()
        )));
    }
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return lanczos_top_eigenpair(op, tol, max_lanczos_dim);
    }
    let m = max_lanczos_dim.min(d).max(1);

    let mut rng = ChaCha8Rng::seed_from_u64(0x7254_5253);
    for attempt in 0..3 {
        let start = if attempt == 0 {
            b.clone()
        } else {
            // restart: a small perturbation of b reopens the subspace
            let noise = DVector::from_fn(d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            b + noise * (1e-4 * bnorm / (d as f64).sqrt())
        };
        match lanczos_attempt(op, b, &start, tol, m) {
            Ok(solution) => return Ok(solution),
            Err(Error::Breakdown) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Breakdown)
}

fn lanczos_attempt<O: SymOp>(
    op: &O,
    b: &DVector<f64>,
    start: &DVector<f64>,
    tol: f64,
    m: usize,
) -> Result<TrsSolution> {
    let bnorm = b.norm();
    let mut basis = LanczosBasis {
        v: vec![start / start.norm()],
        alpha: Vec::new(),
        beta: Vec::new(),
    };
    // projections of b on the basis, maintained incrementally
    let mut proj = vec![basis.v[0].dot(b)];
    let mut scale = 0.0f64;

    let try_accept = |basis: &LanczosBasis, proj: &[f64], j: usize| -> Result<Option<TrsSolution>> {
        let t = basis.tridiagonal(j);
        let c = DVector::from_column_slice(&proj[..j]);
        let t_scale = t.frobenius_norm();
        let projected = DenseTrsSolver::new(&t)?.solve(&c)?;
        let mut x = basis.lift(&projected.x);
        let xn = x.norm();
        if xn > 0.0 {
            x /= xn;
        }
        let ax = op.apply(&x);
        let residual = (&x * projected.multiplier - &ax - b).norm();
        if residual <= tol * (t_scale + bnorm) {
            let value = x.dot(&ax) + 2.0 * b.dot(&x);
            return Ok(Some(TrsSolution {
                x,
                value,
                multiplier: projected.multiplier,
                hard_case: projected.hard_case,
            }));
        }
        Ok(None)
    };

    for j in 1..=m {
        let vj = basis.v[j - 1].clone();
        let mut w = op.apply(&vj);
        let aj = vj.dot(&w);
        basis.alpha.push(aj);
        w.axpy(-aj, &vj, 1.0);
        if j >= 2 {
            let beta_prev = basis.beta[j - 2];
            w.axpy(-beta_prev, &basis.v[j - 2], 1.0);
        }
        // full reorthogonalization, two passes
        for _ in 0..2 {
            for v in &basis.v {
                let h = v.dot(&w);
                w.axpy(-h, v, 1.0);
            }
        }
        let bj = w.norm();
        scale = scale.max(aj.abs()).max(bj);

        let check_now = j <= 32 || j % 4 == 0 || j == m;
        let breakdown = bj <= 1e-13 * scale.max(1.0);

        if check_now || breakdown {
            if let Some(solution) = try_accept(&basis, &proj, j)? {
                return Ok(solution);
            }
        }
        if breakdown {
            return Err(Error::Breakdown);
        }
        if j < m {
            basis.beta.push(bj);
            let vnext = w / bj;
            proj.push(vnext.dot(b));
            basis.v.push(vnext);
        }
    }
    Err(Error::ConvergenceFailure("Lanczos trust-region iteration"))
}

/// `b = 0` case of the large-scale path: top Ritz pair from a deterministic
/// pseudo-random start.
fn lanczos_top_eigenpair<O: SymOp>(op: &O, tol: f64, max_dim: usize) -> Result<TrsSolution> {
    let d = op.dim();
    let m = max_dim.min(d).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(d as u64 ^ 0x5eed);
    let start = DVector::from_fn(d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let mut basis = LanczosBasis {
        v: vec![start.clone() / start.norm()],
        alpha: Vec::new(),
        beta: Vec::new(),
    };
    for j in 1..=m {
        let vj = basis.v[j - 1].clone();
        let mut w = op.apply(&vj);
        let aj = vj.dot(&w);
        basis.alpha.push(aj);
        w.axpy(-aj, &vj, 1.0);
        if j >= 2 {
            w.axpy(-basis.beta[j - 2], &basis.v[j - 2], 1.0);
        }
        for _ in 0..2 {
            for v in &basis.v {
                let h = v.dot(&w);
                w.axpy(-h, v, 1.0);
            }
        }
        let bj = w.norm();

        let (vals, vecs) = sym_eig(&basis.tridiagonal(j))?;
        let theta = vals[0];
        let u = vecs.column(0);
        let ritz_residual = bj * u[j - 1].abs();
        if ritz_residual <= tol * theta.abs().max(1.0) || bj <= 1e-14 || j == m {
            let mut x = basis.lift(&u.into_owned());
            let xn = x.norm();
            if xn > 0.0 {
                x /= xn;
            }
            let value = x.dot(&op.apply(&x));
            return Ok(TrsSolution {
                x,
                value,
                multiplier: theta,
                hard_case: true,
            });
        }
        basis.beta.push(bj);
        basis.v.push(w / bj);
    }
    Err(Error::ConvergenceFailure("Lanczos eigenpair iteration"))
}

/// Dispatching solver: dense up to `opts.dense_threshold`, Lanczos beyond.
pub fn solve_trs(p: &TrsProblem, opts: &TrsOptions) -> Result<TrsSolution> {
    if p.dim() <= opts.dense_threshold {
        DenseTrsSolver::with_tolerance(p.quadratic(), opts.dense_tol, opts.max_secular_iters)?
            .solve(p.linear())
    } else {
        solve_trs_lanczos(
            p.quadratic(),
            p.linear(),
            opts.lanczos_tol,
            opts.max_lanczos_dim,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
        let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        SymMatrix::from_dense(&m).unwrap()
    }

    /// Brute-force maximization over the unit circle for d = 2.
    fn grid_oracle_2d(a: &SymMatrix, b: &DVector<f64>, angles: usize) -> f64 {
        let (a00, a01, a11) = (a[(0, 0)], a[(0, 1)], a[(1, 1)]);
        let mut best = f64::NEG_INFINITY;
        for i in 0..angles {
            let t = 2.0 * std::f64::consts::PI * i as f64 / angles as f64;
            let (c, s) = (t.cos(), t.sin());
            let v = a00 * c * c + 2.0 * a01 * c * s + a11 * s * s + 2.0 * (b[0] * c + b[1] * s);
            if v > best {
                best = v;
            }
        }
        best
    }

    fn kkt_residual(a: &SymMatrix, b: &DVector<f64>, s: &TrsSolution) -> f64 {
        (&s.x * s.multiplier - a.mul_vec(&s.x) - b).norm()
    }

    #[test]
    fn pure_eigenvector_problem() {
        let a = SymMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let p = TrsProblem::new(a, DVector::zeros(2)).unwrap();
        let s = solve_trs_dense(&p).unwrap();
        assert!(s.hard_case);
        assert_abs_diff_eq!(s.value, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[0].abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.x[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn linear_term_only() {
        let p = TrsProblem::new(SymMatrix::zeros(2), DVector::from_vec(vec![3.0, 4.0])).unwrap();
        let s = solve_trs_dense(&p).unwrap();
        assert_abs_diff_eq!(s.x[0], 0.6, epsilon = 1e-10);
        assert_abs_diff_eq!(s.x[1], 0.8, epsilon = 1e-10);
        assert_abs_diff_eq!(s.value, 10.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.multiplier, 5.0, epsilon = 1e-8);
    }

    #[test]
    fn constructed_hard_case() {
        let a = SymMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        let p = TrsProblem::new(a.clone(), DVector::from_vec(vec![0.0, 0.5])).unwrap();
        let s = solve_trs_dense(&p).unwrap();
        assert!(s.hard_case);
        assert_abs_diff_eq!(s.multiplier, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.value, 1.25, epsilon = 1e-10);
        assert_abs_diff_eq!(s.x[0].abs(), 0.75f64.sqrt(), epsilon = 1e-10);
        assert_abs_diff_eq!(s.x[1], 0.5, epsilon = 1e-10);
        // agrees with the grid oracle
        let oracle = grid_oracle_2d(&a, p.linear(), 1_000_000);
        assert!((s.value - oracle).abs() < 1e-8);
    }

    #[test]
    fn one_dimensional_problem() {
        let a = SymMatrix::from_diagonal(&DVector::from_vec(vec![-3.0]));
        let p = TrsProblem::new(a, DVector::from_vec(vec![-0.5])).unwrap();
        let s = solve_trs_dense(&p).unwrap();
        assert_abs_diff_eq!(s.x[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.value, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn random_2d_matches_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..25 {
            let a = random_sym(&mut rng, 2);
            let b = DVector::from_fn(2, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let p = TrsProblem::new(a.clone(), b.clone()).unwrap();
            let s = solve_trs_dense(&p).unwrap();
            let oracle = grid_oracle_2d(&a, &b, 200_000);
            assert!(
                (s.value - oracle).abs() < 1e-7,
                "solver {} vs oracle {}",
                s.value,
                oracle
            );
            assert!((s.x.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn global_optimality_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for &d in &[2usize, 3] {
            for _ in 0..5 {
                let a = random_sym(&mut rng, d);
                let b = DVector::from_fn(d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
                let p = TrsProblem::new(a.clone(), b.clone()).unwrap();
                let s = solve_trs_dense(&p).unwrap();
                // random unit directions never beat the solver
                for _ in 0..20_000 {
                    let v = DVector::from_fn(d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
                    let v = &v / v.norm();
                    let val = v.dot(&a.mul_vec(&v)) + 2.0 * b.dot(&v);
                    assert!(val <= s.value + 1e-9);
                }
                // eigenvector directions never beat it either
                let (_, vecs) = sym_eig(&a).unwrap();
                for c in 0..d {
                    for sign in [1.0, -1.0] {
                        let v = vecs.column(c).into_owned() * sign;
                        let val = v.dot(&a.mul_vec(&v)) + 2.0 * b.dot(&v);
                        assert!(val <= s.value + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn kkt_residual_always_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for d in [1usize, 2, 3, 5, 8, 20] {
            for _ in 0..6 {
                let a = random_sym(&mut rng, d);
                let b = DVector::from_fn(d, |_, _| rng.random::<f64>() * 4.0 - 2.0);
                let p = TrsProblem::new(a.clone(), b.clone()).unwrap();
                let s = solve_trs_dense(&p).unwrap();
                let scale = a.frobenius_norm() + b.norm();
                assert!(kkt_residual(&a, &b, &s) <= 1e-8 * scale);
                assert!((s.x.norm() - 1.0).abs() <= 1e-10);
                let lam_max = sym_eig(&a).unwrap().0[0];
                assert!(s.multiplier >= lam_max - 1e-8);
            }
        }
    }

    #[test]
    fn value_monotone_in_linear_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        for _ in 0..10 {
            let a = random_sym(&mut rng, 4);
            let b = DVector::from_fn(4, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let mut prev = f64::NEG_INFINITY;
            for t in [0.0, 0.5, 1.0, 2.0] {
                let p = TrsProblem::new(a.clone(), &b * t).unwrap();
                let s = solve_trs_dense(&p).unwrap();
                assert!(s.value >= prev - 1e-10);
                prev = s.value;
            }
        }
    }

    #[test]
    fn dispatch_small_goes_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let a = random_sym(&mut rng, 10);
        let b = DVector::from_fn(10, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let p = TrsProblem::new(a, b).unwrap();
        let s1 = solve_trs(&p, &TrsOptions::default()).unwrap();
        let s2 = solve_trs_dense(&p).unwrap();
        assert_abs_diff_eq!(s1.value, s2.value, epsilon = 1e-12);
    }

    #[test]
    fn dispatch_threshold_override_agrees_with_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        let a = random_sym(&mut rng, 10);
        let b = DVector::from_fn(10, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let p = TrsProblem::new(a, b).unwrap();
        let opts = TrsOptions {
            dense_threshold: 5,
            ..TrsOptions::default()
        };
        let s_lanczos = solve_trs(&p, &opts).unwrap();
        let s_dense = solve_trs_dense(&p).unwrap();
        assert!((s_lanczos.value - s_dense.value).abs() <= 1e-6 * (1.0 + s_dense.value.abs()));
    }

    #[test]
    fn lanczos_invariant_subspace_from_e1() {
        // A = diag(2, 1, 0, ..., 0), b = e1: the Krylov space from b is {e1}
        // and the essential problem is tiny.
        let d = 600;
        let mut diag = DVector::zeros(d);
        diag[0] = 2.0;
        diag[1] = 1.0;
        let a = SymMatrix::from_diagonal(&diag);
        let mut b = DVector::zeros(d);
        b[0] = 1.0;
        let s = solve_trs_lanczos(&a, &b, 1e-8, 300).unwrap();

        let ess = SymMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 0.0]));
        let pe = TrsProblem::new(ess, DVector::from_vec(vec![1.0, 0.0, 0.0])).unwrap();
        let se = solve_trs_dense(&pe).unwrap();
        assert!((s.value - se.value).abs() < 1e-6);
    }

    #[test]
    fn lanczos_b_aligned_with_top_eigenvector() {
        let d = 40;
        let diag = DVector::from_fn(d, |i, _| (d - i) as f64);
        let a = SymMatrix::from_diagonal(&diag);
        let mut b = DVector::zeros(d);
        b[0] = 2.0;
        let s = solve_trs_lanczos(&a, &b, 1e-10, 10).unwrap();
        let p = TrsProblem::new(a, b).unwrap();
        let sd = solve_trs_dense(&p).unwrap();
        assert!((s.value - sd.value).abs() < 1e-8);
    }

    #[test]
    fn lanczos_matches_dense_on_banded_problem() {
        let d = 120;
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            m[(i, i)] = 2.0 + rng.random::<f64>();
            if i + 1 < d {
                let off = rng.random::<f64>() - 0.5;
                m[(i, i + 1)] = off;
                m[(i + 1, i)] = off;
            }
        }
        let a = SymMatrix::from_dense(&m).unwrap();
        let b = DVector::from_fn(d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let s = solve_trs_lanczos(&a, &b, 1e-9, 120).unwrap();
        let p = TrsProblem::new(a, b).unwrap();
        let sd = solve_trs_dense(&p).unwrap();
        assert!(
            (s.value - sd.value).abs() <= 1e-6 * (1.0 + sd.value.abs()),
            "lanczos {} vs dense {}",
            s.value,
            sd.value
        );
    }

    #[test]
    fn lanczos_zero_b_returns_top_eigenvector() {
        let d = 50;
        let diag = DVector::from_fn(d, |i, _| -(i as f64));
        let a = SymMatrix::from_diagonal(&diag);
        let s = solve_trs_lanczos(&a, &DVector::zeros(d), 1e-10, 50).unwrap();
        assert!(s.hard_case);
        assert!((s.value - 0.0).abs() < 1e-8);
        assert!((s.x[0].abs() - 1.0).abs() < 1e-6);
    }
}
