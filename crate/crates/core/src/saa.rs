//! Successive alternating approximation for the block trace maximization
//! `max f(P1, P2) = tr(P1' C P2) + 1/2 sum_s tr(Ps' As Ps)` subject to
//! `Ps' Bs Ps = I_k`.
//!
//! The constraints are first whitened away with Cholesky factors of `Bs`.
//! Columns of the whitened solution are then computed greedily: each round
//! maximizes the quadratic form over a pair of unit vectors by alternating
//! sphere-constrained TRS solves, after which the problem is deflated onto
//! the orthogonal complement of the computed columns via implicit Householder
//! products (the complement basis is never formed). Recovered columns are
//! un-whitened with triangular solves, and a final SVD alignment rotates `P2`
//! so the cross term is maximized over the orthogonal freedom left in the
//! constraints.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matkernels::{
    cholesky, reflector_from, thin_svd, two_sided_reflector_update, CholeskyFactor, JitterPolicy,
    Reflector, SymMatrix,
};
use crate::trs::{solve_trs_lanczos, DenseTrsSolver, TrsOptions, TrsSolution};

/// One instance of the constrained trace maximization.
#[derive(Debug, Clone)]
pub struct JointProblem {
    pub a1: SymMatrix,
    pub a2: SymMatrix,
    pub c: DMatrix<f64>,
    pub b1: SymMatrix,
    pub b2: SymMatrix,
}

impl JointProblem {
    pub fn new(
        a1: SymMatrix,
        a2: SymMatrix,
        c: DMatrix<f64>,
        b1: SymMatrix,
        b2: SymMatrix,
    ) -> Result<Self> {
        let (d1, d2) = (a1.dim(), a2.dim());
        if c.nrows() != d1 || c.ncols() != d2 || b1.dim() != d1 || b2.dim() != d2 {
            return Err(Error::DimensionMismatch(format!(
                "blocks disagree: a1 {d1}, a2 {d2}, c {}x{}, b1 {}, b2 {}",
                c.nrows(),
                c.ncols(),
                b1.dim(),
                b2.dim()
            )));
        }
        Ok(JointProblem { a1, a2, c, b1, b2 })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a1.dim(), self.a2.dim())
    }

    /// `f(P1, P2) = tr(P1' C P2) + 1/2 sum_s tr(Ps' As Ps)`.
    pub fn objective(&self, p1: &DMatrix<f64>, p2: &DMatrix<f64>) -> f64 {
        let cross = (p1.transpose() * &self.c * p2).trace();
        let q1 = (p1.transpose() * self.a1.as_matrix() * p1).trace();
        let q2 = (p2.transpose() * self.a2.as_matrix() * p2).trace();
        cross + 0.5 * (q1 + q2)
    }
}

/// Blocks of the whitened quadratic form, together with the Cholesky factors
/// needed to map solutions back.
#[derive(Debug, Clone)]
pub struct WhitenedBlocks {
    pub a11: SymMatrix,
    pub a22: SymMatrix,
    pub a12: DMatrix<f64>,
    pub chol1: CholeskyFactor,
    pub chol2: CholeskyFactor,
}

impl WhitenedBlocks {
    pub fn dims(&self) -> (usize, usize) {
        (self.a11.dim(), self.a22.dim())
    }

    /// Quadratic form value `q' Abar q` for a stacked unit pair.
    pub fn quad_value(&self, q1: &DVector<f64>, q2: &DVector<f64>) -> f64 {
        q1.dot(&self.a11.mul_vec(q1))
            + 2.0 * q1.dot(&(&self.a12 * q2))
            + q2.dot(&self.a22.mul_vec(q2))
    }
}

/// Whitening transform: with `Bs = Ls Ls'`, returns the partitioned
/// `diag(L1^-1, L2^-1) * [[A1, C], [C', A2]] * diag(L1^-T, L2^-T)`.
pub fn whiten(jp: &JointProblem) -> Result<WhitenedBlocks> {
    whiten_with(jp, &JitterPolicy::default())
}

pub fn whiten_with(jp: &JointProblem, policy: &JitterPolicy) -> Result<WhitenedBlocks> {
    let chol1 = cholesky(&jp.b1, policy)?;
    let chol2 = cholesky(&jp.b2, policy)?;
    let a11 = half_congruence(&chol1, jp.a1.as_matrix(), &chol1);
    let a22 = half_congruence(&chol2, jp.a2.as_matrix(), &chol2);
    let a12 = half_congruence(&chol1, &jp.c, &chol2);
    Ok(WhitenedBlocks {
        a11: SymMatrix::from_dense(&a11)?,
        a22: SymMatrix::from_dense(&a22)?,
        a12,
        chol1,
        chol2,
    })
}

/// `L_left^-1 * m * L_right^-T` via two triangular solves.
fn half_congruence(
    left: &CholeskyFactor,
    m: &DMatrix<f64>,
    right: &CholeskyFactor,
) -> DMatrix<f64> {
    let lm = left.solve_lower(m);
    right.solve_lower(&lm.transpose()).transpose()
}

/// Initial guess for the second-side vector of one alternating run.
#[derive(Debug, Clone)]
pub enum Init {
    /// Explicit vector (normalized here).
    Vector(DVector<f64>),
    /// Seeded random unit vector.
    Seed(u64),
}

/// Per-round initialization policy of [`saa_solve`].
#[derive(Debug, Clone)]
pub enum InitStrategy {
    /// Top right-singular vector of the current whitened cross block; exact
    /// warm start whenever the diagonal blocks vanish.
    SvdWarmStart,
    /// `restarts` seeded random starts, keeping the best outcome.
    Random { restarts: usize, seed: u64 },
}

impl InitStrategy {
    /// Seeded random initialization with the default three restarts.
    pub fn random(seed: u64) -> Self {
        InitStrategy::Random { restarts: 3, seed }
    }
}

impl Default for InitStrategy {
    fn default() -> Self {
        InitStrategy::SvdWarmStart
    }
}

/// Options for [`saa_solve`].
#[derive(Debug, Clone)]
pub struct SaaOptions {
    /// Relative objective-increase stop rule for a full alternating sweep.
    pub tol: f64,
    pub max_sweeps: usize,
    pub init: InitStrategy,
    pub trs: TrsOptions,
    /// Jitter ladder for the constraint factorizations.
    pub jitter: JitterPolicy,
}

impl Default for SaaOptions {
    fn default() -> Self {
        SaaOptions {
            tol: 1e-10,
            max_sweeps: 100,
            init: InitStrategy::default(),
            trs: TrsOptions::default(),
            jitter: JitterPolicy::default(),
        }
    }
}

/// Result of one alternating maximization over a pair of unit vectors.
#[derive(Debug, Clone)]
pub struct AlternatingOutcome {
    pub q1: DVector<f64>,
    pub q2: DVector<f64>,
    pub value: f64,
    pub sweeps: usize,
    /// Objective after every half-sweep; nondecreasing by construction.
    pub trajectory: Vec<f64>,
}

/// TRS solver for one side of the alternating scheme. The quadratic term is
/// fixed across sweeps, so the dense path factors it exactly once.
enum SideSolver {
    Dense(DenseTrsSolver),
    Lanczos {
        a: SymMatrix,
        tol: f64,
        max_dim: usize,
    },
}

impl SideSolver {
    fn new(a: &SymMatrix, opts: &TrsOptions) -> Result<Self> {
        if a.dim() <= opts.dense_threshold {
            Ok(SideSolver::Dense(DenseTrsSolver::with_tolerance(
                a,
                opts.dense_tol,
                opts.max_secular_iters,
            )?))
        } else {
            Ok(SideSolver::Lanczos {
                a: a.clone(),
                tol: opts.lanczos_tol,
                max_dim: opts.max_lanczos_dim,
            })
        }
    }

    fn solve(&self, b: &DVector<f64>) -> Result<TrsSolution> {
        match self {
            SideSolver::Dense(solver) => solver.solve(b),
            SideSolver::Lanczos { a, tol, max_dim } => solve_trs_lanczos(a, b, *tol, *max_dim),
        }
    }
}

/// Alternating maximization of `q' Abar q` over `|q1| = |q2| = 1`. Stops when
/// the objective gain over a full sweep drops below `tol * (1 + |value|)` or
/// after `max_sweeps`.
pub fn alternating_pair(
    blocks: &WhitenedBlocks,
    init: Init,
    tol: f64,
    max_sweeps: usize,
    trs: &TrsOptions,
) -> Result<AlternatingOutcome> {
    let (d1, d2) = blocks.dims();
    if d1 == 0 || d2 == 0 {
        return Err(Error::DimensionMismatch("empty blocks".into()));
    }
    let mut q2 = match init {
        Init::Vector(v) => {
            if v.len() != d2 {
                return Err(Error::DimensionMismatch(format!(
                    "init vector has length {}, block dimension is {d2}",
                    v.len()
                )));
            }
            let n = v.norm();
            if n == 0.0 {
                return Err(Error::ZeroVector);
            }
            v / n
        }
        Init::Seed(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = DVector::from_fn(d2, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let n = v.norm();
            if n == 0.0 {
                return Err(Error::ZeroVector);
            }
            v / n
        }
    };

    let side1 = SideSolver::new(&blocks.a11, trs)?;
    let side2 = SideSolver::new(&blocks.a22, trs)?;
    let mut q1 = DVector::zeros(d1);
    let mut trajectory = Vec::new();
    let mut value = f64::NEG_INFINITY;
    let mut sweeps = 0;

    for sweep in 1..=max_sweeps {
        sweeps = sweep;
        let b1 = &blocks.a12 * &q2;
        q1 = side1.solve(&b1)?.x;
        push_monotone(&mut trajectory, blocks.quad_value(&q1, &q2))?;

        let b2 = blocks.a12.transpose() * &q1;
        q2 = side2.solve(&b2)?.x;
        let v2 = blocks.quad_value(&q1, &q2);
        push_monotone(&mut trajectory, v2)?;

        if value.is_finite() && v2 - value <= tol * (1.0 + v2.abs()) {
            value = v2;
            break;
        }
        value = v2;
    }

    Ok(AlternatingOutcome {
        q1,
        q2,
        value,
        sweeps,
        trajectory,
    })
}

fn push_monotone(trajectory: &mut Vec<f64>, v: f64) -> Result<()> {
    if let Some(&prev) = trajectory.last() {
        if v < prev - 1e-8 * (1.0 + prev.abs()) {
            return Err(Error::ConvergenceFailure(
                "alternating objective decreased across a half-sweep",
            ));
        }
    }
    trajectory.push(v);
    Ok(())
}

/// Bookkeeping for the implicit-Householder deflation across rounds.
#[derive(Debug, Clone)]
pub struct DeflationState {
    reflectors1: Vec<Reflector>,
    reflectors2: Vec<Reflector>,
    blocks: WhitenedBlocks,
    full_dims: (usize, usize),
}

impl DeflationState {
    pub fn new(blocks: WhitenedBlocks) -> Self {
        let full_dims = blocks.dims();
        DeflationState {
            reflectors1: Vec::new(),
            reflectors2: Vec::new(),
            blocks,
            full_dims,
        }
    }

    /// Columns already deflated away.
    pub fn completed(&self) -> usize {
        self.reflectors1.len()
    }

    /// Current trailing blocks.
    pub fn blocks(&self) -> &WhitenedBlocks {
        &self.blocks
    }

    pub fn reflectors(&self) -> (&[Reflector], &[Reflector]) {
        (&self.reflectors1, &self.reflectors2)
    }
}

/// Appends one reflector per side built on the computed pair and replaces the
/// blocks by their trailing two-sided updates; dimensions shrink by one per
/// side. The cross block is updated with the side-1 reflector on the left and
/// the side-2 reflector on the right.
pub fn deflate_step(
    state: DeflationState,
    q1: &DVector<f64>,
    q2: &DVector<f64>,
) -> Result<DeflationState> {
    let (d1, d2) = state.blocks.dims();
    if q1.len() != d1 || q2.len() != d2 {
        return Err(Error::DimensionMismatch(format!(
            "pair has lengths ({}, {}), trailing blocks are ({d1}, {d2})",
            q1.len(),
            q2.len()
        )));
    }
    let h1 = reflector_from(q1)?;
    let h2 = reflector_from(q2)?;
    let a11 = two_sided_reflector_update(state.blocks.a11.as_matrix(), &h1, &h1)?;
    let a22 = two_sided_reflector_update(state.blocks.a22.as_matrix(), &h2, &h2)?;
    let a12 = two_sided_reflector_update(&state.blocks.a12, &h1, &h2)?;
    let mut reflectors1 = state.reflectors1;
    let mut reflectors2 = state.reflectors2;
    reflectors1.push(h1);
    reflectors2.push(h2);
    Ok(DeflationState {
        reflectors1,
        reflectors2,
        blocks: WhitenedBlocks {
            a11: SymMatrix::from_dense(&a11)?,
            a22: SymMatrix::from_dense(&a22)?,
            a12,
            chol1: state.blocks.chol1,
            chol2: state.blocks.chol2,
        },
        full_dims: state.full_dims,
    })
}

/// Maps a trailing-coordinates pair back to full coordinates by applying the
/// stored reflector product to the zero-padded vector; `O(j d)` per side.
pub fn recover_column(
    state: &DeflationState,
    q1: &DVector<f64>,
    q2: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let p1 = recover_side(&state.reflectors1, state.full_dims.0, q1)?;
    let p2 = recover_side(&state.reflectors2, state.full_dims.1, q2)?;
    Ok((p1, p2))
}

fn recover_side(reflectors: &[Reflector], dim: usize, q: &DVector<f64>) -> Result<DVector<f64>> {
    let j = reflectors.len();
    if q.len() + j != dim {
        return Err(Error::DimensionMismatch(format!(
            "trailing vector has length {}, expected {} at deflation depth {j}",
            q.len(),
            dim - j
        )));
    }
    let mut z = vec![0.0; dim];
    z[j..].copy_from_slice(q.as_slice());
    // reflector i acts on components i..dim; apply the product right-to-left
    for (i, h) in reflectors.iter().enumerate().rev() {
        h.apply_vec_mut(&mut z[i..]);
    }
    Ok(DVector::from_vec(z))
}

/// Rotates `p2` by the orthogonal polar factor of `p1' c p2`, which maximizes
/// `tr(p1' c p2)` over the residual orthogonal freedom without touching the
/// per-view constraint values.
pub fn align(p1: &DMatrix<f64>, p2: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if p1.nrows() != c.nrows() || p2.nrows() != c.ncols() || p1.ncols() != p2.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "align: p1 {}x{}, p2 {}x{}, c {}x{}",
            p1.nrows(),
            p1.ncols(),
            p2.nrows(),
            p2.ncols(),
            c.nrows(),
            c.ncols()
        )));
    }
    let product = p1.transpose() * c * p2;
    let (u, _, v) = thin_svd(&product)?;
    Ok(p2 * v * u.transpose())
}

/// Learned projection pair with its objective bookkeeping.
#[derive(Debug, Clone)]
pub struct ProjectionPair {
    pub p1: DMatrix<f64>,
    pub p2: DMatrix<f64>,
    /// `f(P1, P2)` evaluated on the final (aligned) pair.
    pub objective: f64,
    /// Whitened quadratic value attained by each greedy round.
    pub per_column_values: Vec<f64>,
}

impl ProjectionPair {
    pub fn k(&self) -> usize {
        self.p1.ncols()
    }
}

/// Full pipeline: whiten, k greedy rounds of alternating maximization with
/// deflation in between, un-whitening and final alignment.
pub fn saa_solve(jp: &JointProblem, k: usize, opts: &SaaOptions) -> Result<ProjectionPair> {
    let (d1, d2) = jp.dims();
    let max_k = d1.min(d2);
    if k == 0 || k > max_k {
        return Err(Error::InvalidK { k, max: max_k });
    }

    let blocks = whiten_with(jp, &opts.jitter)?;
    let mut state = DeflationState::new(blocks);
    let mut cols1: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut cols2: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut per_column_values = Vec::with_capacity(k);

    for round in 0..k {
        let outcome = run_round(state.blocks(), &opts.init, round, opts)?;
        let (q1, mut q2) = (outcome.q1, outcome.q2);
        // the per-column cross term is nonnegative at an alternating optimum;
        // flip the second side if roundoff left it negative
        if q1.dot(&(&state.blocks().a12 * &q2)) < 0.0 {
            q2 = -q2;
        }
        let (c1, c2) = recover_column(&state, &q1, &q2)?;
        cols1.push(c1);
        cols2.push(c2);
        per_column_values.push(outcome.value);
        if round + 1 < k {
            state = deflate_step(state, &q1, &q2)?;
        }
    }

    let pbar1 = DMatrix::from_columns(&cols1.iter().map(|c| c.column(0)).collect::<Vec<_>>());
    let pbar2 = DMatrix::from_columns(&cols2.iter().map(|c| c.column(0)).collect::<Vec<_>>());

    // un-whiten: Ps = Ls^-T Pbar_s
    let (chol1, chol2) = (&state.blocks().chol1, &state.blocks().chol2);
    let p1 = chol1.solve_lower_transpose(&pbar1);
    let p2 = chol2.solve_lower_transpose(&pbar2);
    let p2 = align(&p1, &p2, &jp.c)?;

    let objective = jp.objective(&p1, &p2);
    Ok(ProjectionPair {
        p1,
        p2,
        objective,
        per_column_values,
    })
}

fn run_round(
    blocks: &WhitenedBlocks,
    strategy: &InitStrategy,
    round: usize,
    opts: &SaaOptions,
) -> Result<AlternatingOutcome> {
    match strategy {
        InitStrategy::SvdWarmStart => {
            let init = warm_start(blocks)?;
            alternating_pair(blocks, init, opts.tol, opts.max_sweeps, &opts.trs)
        }
        InitStrategy::Random { restarts, seed } => {
            let restarts = (*restarts).max(1);
            let mut best: Option<AlternatingOutcome> = None;
            for r in 0..restarts {
                let init = Init::Seed(
                    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
                        .wrapping_add((round as u64) << 32)
                        .wrapping_add(r as u64),
                );
                let outcome = alternating_pair(blocks, init, opts.tol, opts.max_sweeps, &opts.trs)?;
                if best.as_ref().is_none_or(|b| outcome.value > b.value) {
                    best = Some(outcome);
                }
            }
            Ok(best.expect("at least one restart"))
        }
    }
}

fn warm_start(blocks: &WhitenedBlocks) -> Result<Init> {
    let (_, d2) = blocks.dims();
    if blocks.a12.norm() == 0.0 {
        let mut e1 = DVector::zeros(d2);
        e1[0] = 1.0;
        return Ok(Init::Vector(e1));
    }
    let (_, _, v) = thin_svd(&blocks.a12)?;
    Ok(Init::Vector(v.column(0).into_owned()))
}

/// Frobenius distance of `P' B P` from the identity.
pub fn constraint_residual(b: &SymMatrix, p: &DMatrix<f64>) -> f64 {
    let k = p.ncols();
    let gram = p.transpose() * b.as_matrix() * p;
    (gram - DMatrix::identity(k, k)).norm()
}

/// Residual of the stationarity system with per-view symmetric multiplier
/// blocks, reported for diagnosis only: the greedy scheme does not drive it
/// to zero.
pub fn kkt_residual(jp: &JointProblem, pair: &ProjectionPair) -> f64 {
    let g1 = &jp.c * &pair.p2 + jp.a1.as_matrix() * &pair.p1;
    let g2 = jp.c.transpose() * &pair.p1 + jp.a2.as_matrix() * &pair.p2;
    let lambda1 = symmetrize(&(pair.p1.transpose() * &g1));
    let lambda2 = symmetrize(&(pair.p2.transpose() * &g2));
    let r1 = &g1 - jp.b1.as_matrix() * &pair.p1 * lambda1;
    let r2 = &g2 - jp.b2.as_matrix() * &pair.p2 * lambda2;
    (r1.norm_squared() + r2.norm_squared()).sqrt()
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()).scale(0.5)
}
