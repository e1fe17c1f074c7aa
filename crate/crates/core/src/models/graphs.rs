//! Affinity graphs, Laplacians and labeled scatter matrices.
//!
//! k-NN graphs are symmetrized by union (an edge exists if either endpoint
//! selects the other) and distance ties break toward the smaller sample
//! index, which keeps every construction deterministic.

use nalgebra::DMatrix;

use super::{TwoViewData, ViewId};
use crate::error::{Error, Result};
use crate::matkernels::SymMatrix;

/// `L = diag(W 1) - W`.
pub fn laplacian_from_weights(w: &SymMatrix) -> SymMatrix {
    let m = w.dim();
    let mut l = (-w.as_matrix()).clone_owned();
    for i in 0..m {
        let row_sum: f64 = w.as_matrix().row(i).sum();
        l[(i, i)] += row_sum;
    }
    SymMatrix::from_dense(&l).expect("laplacian of a symmetric weight matrix")
}

fn squared_distances(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.ncols();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = x.column(i) - x.column(j);
            let dist = diff.norm_squared();
            d[(i, j)] = dist;
            d[(j, i)] = dist;
        }
    }
    d
}

/// Indices of the `k` nearest candidates of `i` under the squared-distance
/// matrix, restricted to `candidates`; ties break toward smaller index.
fn k_nearest(d2: &DMatrix<f64>, i: usize, candidates: impl Iterator<Item = usize>, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = candidates.filter(|&j| j != i).collect();
    order.sort_by(|&a, &b| d2[(i, a)].total_cmp(&d2[(i, b)]).then(a.cmp(&b)));
    order.truncate(k);
    order
}

/// Heat-kernel weighted k-NN graph Laplacian over all samples of view `s`.
///
/// The bandwidth is `heat_scale` times the mean pairwise distance of the
/// paired samples. Zero-distance edges get weight 1 regardless of the
/// bandwidth; a zero bandwidth with any positive-distance edge is an error.
pub fn heat_knn_laplacian(
    data: &TwoViewData,
    s: ViewId,
    knn: usize,
    heat_scale: f64,
) -> Result<SymMatrix> {
    let x = data.view(s);
    let n = x.ncols();
    if knn == 0 || n < knn + 1 {
        return Err(Error::InvalidParameter(format!(
            "knn = {knn} needs at least knn + 1 = {} samples, got {n}",
            knn + 1
        )));
    }
    let npaired = data.paired_count();
    if npaired < 2 {
        return Err(Error::TooFewPaired(npaired));
    }

    let d2 = squared_distances(x);
    let mut mean_dist = 0.0;
    for i in 0..npaired {
        for j in (i + 1)..npaired {
            mean_dist += d2[(i, j)].sqrt();
        }
    }
    mean_dist /= (npaired * (npaired - 1) / 2) as f64;
    let sigma = heat_scale * mean_dist;

    let mut w = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in k_nearest(&d2, i, 0..n, knn) {
            let weight = if d2[(i, j)] == 0.0 {
                1.0
            } else if sigma == 0.0 {
                return Err(Error::DegenerateBandwidth(
                    "zero bandwidth with a positive-distance edge".into(),
                ));
            } else {
                (-d2[(i, j)] / (sigma * sigma)).exp()
            };
            w[(i, j)] = weight;
            w[(j, i)] = weight;
        }
    }
    Ok(laplacian_from_weights(&SymMatrix::from_exact(w)?))
}

// Gaps in the class ids are tolerated: a randomly drawn labeled subset may
// miss a class entirely, and the graphs only ever look up counts of classes
// that appear.
fn class_counts(labels: &[usize]) -> Result<Vec<usize>> {
    if labels.is_empty() {
        return Err(Error::MissingLabels(0));
    }
    let c = labels.iter().max().unwrap() + 1;
    let mut counts = vec![0usize; c];
    for &l in labels {
        counts[l] += 1;
    }
    Ok(counts)
}

/// One-hot discriminant graphs: `W_w` is block-constant `1/m_r` within class
/// `r`, `W_b = (1/m) 11' - W_w`.
pub fn lda_graphs(labels: &[usize]) -> Result<(SymMatrix, SymMatrix)> {
    let counts = class_counts(labels)?;
    let m = labels.len();
    let inv_m = 1.0 / m as f64;
    let mut w_w = DMatrix::zeros(m, m);
    let mut w_b = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let within = if labels[i] == labels[j] {
                1.0 / counts[labels[i]] as f64
            } else {
                0.0
            };
            w_w[(i, j)] = within;
            w_b[(i, j)] = inv_m - within;
        }
    }
    Ok((SymMatrix::from_exact(w_w)?, SymMatrix::from_exact(w_b)?))
}

/// Locality-scaled discriminant graphs.
///
/// Affinity `A_ij = exp(-|xi-xj|^2 / (sigma_i sigma_j))` with `sigma_i` the
/// distance of `xi` to its `knn`-th neighbor; `W_w = A_ij / m_r` on
/// same-class pairs and zero otherwise, `W_b = A_ij (1/m - 1/m_r)` on
/// same-class pairs and `1/m` otherwise.
pub fn lfda_graphs(
    x: &DMatrix<f64>,
    labels: &[usize],
    knn: usize,
) -> Result<(SymMatrix, SymMatrix)> {
    let counts = class_counts(labels)?;
    let m = labels.len();
    if x.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} labeled columns vs {} labels",
            x.ncols(),
            m
        )));
    }
    if knn == 0 || knn >= m {
        return Err(Error::InvalidParameter(format!(
            "lfda knn = {knn} needs 1 <= knn < m = {m}"
        )));
    }
    let d2 = squared_distances(x);
    let mut sigma = vec![0.0f64; m];
    for (i, s) in sigma.iter_mut().enumerate() {
        let neighbors = k_nearest(&d2, i, 0..m, knn);
        *s = d2[(i, neighbors[knn - 1])].sqrt();
        if *s == 0.0 {
            return Err(Error::DegenerateBandwidth(format!(
                "sample {i} has zero local scale (duplicate points)"
            )));
        }
    }
    let inv_m = 1.0 / m as f64;
    let mut w_w = DMatrix::zeros(m, m);
    let mut w_b = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let affinity = (-d2[(i, j)] / (sigma[i] * sigma[j])).exp();
            if labels[i] == labels[j] {
                let inv_mr = 1.0 / counts[labels[i]] as f64;
                w_w[(i, j)] = affinity * inv_mr;
                w_b[(i, j)] = affinity * (inv_m - inv_mr);
            } else {
                w_b[(i, j)] = inv_m;
            }
        }
    }
    Ok((SymMatrix::from_dense(&w_w)?, SymMatrix::from_dense(&w_b)?))
}

/// Margin-based discriminant graphs: 0/1 within-class `k1`-NN adjacency and
/// 0/1 cross-class `k2`-NN adjacency, both union-symmetrized with zero
/// diagonal. Neighbor counts saturate at what a class makes available.
pub fn mfa_graphs(
    x: &DMatrix<f64>,
    labels: &[usize],
    k1: usize,
    k2: usize,
) -> Result<(SymMatrix, SymMatrix)> {
    class_counts(labels)?;
    let m = labels.len();
    if x.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} labeled columns vs {} labels",
            x.ncols(),
            m
        )));
    }
    if k1 == 0 || k2 == 0 {
        return Err(Error::InvalidParameter(
            "mfa neighbor counts must be positive".into(),
        ));
    }
    let d2 = squared_distances(x);
    let mut w_w = DMatrix::zeros(m, m);
    let mut w_b = DMatrix::zeros(m, m);
    for i in 0..m {
        let same = (0..m).filter(|&j| labels[j] == labels[i]);
        for j in k_nearest(&d2, i, same, k1) {
            w_w[(i, j)] = 1.0;
            w_w[(j, i)] = 1.0;
        }
        let other = (0..m).filter(|&j| labels[j] != labels[i]);
        for j in k_nearest(&d2, i, other, k2) {
            w_b[(i, j)] = 1.0;
            w_b[(j, i)] = 1.0;
        }
    }
    Ok((SymMatrix::from_exact(w_w)?, SymMatrix::from_exact(w_b)?))
}

/// Scatter matrices `S = (1/m) X L X'` from weight graphs over the labeled
/// samples.
pub fn scatter_matrices(
    x: &DMatrix<f64>,
    w_w: &SymMatrix,
    w_b: &SymMatrix,
) -> Result<(SymMatrix, SymMatrix)> {
    let m = x.ncols();
    if w_w.dim() != m || w_b.dim() != m {
        return Err(Error::DimensionMismatch(format!(
            "graphs are {}x{} and {}x{}, labeled data has {m} columns",
            w_w.dim(),
            w_w.dim(),
            w_b.dim(),
            w_b.dim()
        )));
    }
    let scale = 1.0 / m as f64;
    let scatter = |w: &SymMatrix| -> Result<SymMatrix> {
        let l = laplacian_from_weights(w);
        SymMatrix::from_dense(&(x * l.as_matrix() * x.transpose()).scale(scale))
    };
    Ok((scatter(w_w)?, scatter(w_b)?))
}
