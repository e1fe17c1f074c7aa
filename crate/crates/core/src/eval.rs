//! Semi-paired evaluation protocol: splits, projection, nearest-neighbor
//! classification and accuracy aggregation.
//!
//! A fully paired labeled dataset is split into train/test; within train, a
//! random subset keeps its cross-view pairing and a random subset keeps its
//! labels, everything else is handed to the learner as unpaired/unlabeled.
//! Learned projections are scored by a 1-nearest-neighbor classifier on the
//! projected test points. Trials are independent jobs; with the `parallel`
//! feature the batch runner distributes them over rayon.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{build_gep, build_joint, solve_gep, ModelSpec, TwoViewData};
use crate::saa::{saa_solve, ProjectionPair, SaaOptions};

/// Fully paired, fully labeled two-view dataset (the evaluation ground
/// truth from which semi-paired training sets are carved).
#[derive(Debug, Clone)]
pub struct PairedDataset {
    pub view1: DMatrix<f64>,
    pub view2: DMatrix<f64>,
    pub labels: Vec<usize>,
    n_classes: usize,
}

impl PairedDataset {
    pub fn new(view1: DMatrix<f64>, view2: DMatrix<f64>, labels: Vec<usize>) -> Result<Self> {
        let n = view1.ncols();
        if view2.ncols() != n || labels.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "views have {} and {} samples, {} labels",
                n,
                view2.ncols(),
                labels.len()
            )));
        }
        if n == 0 {
            return Err(Error::TooFewSamples(0));
        }
        let n_classes = labels.iter().max().unwrap() + 1;
        let mut seen = vec![false; n_classes];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::EmptyClass(missing));
        }
        Ok(PairedDataset {
            view1,
            view2,
            labels,
            n_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.view1.nrows(), self.view2.nrows())
    }
}

/// Split recipe; everything is a deterministic function of `seed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub train_ratio: f64,
    pub paired_ratio: f64,
    pub labeled_ratio: f64,
}

impl SplitPlan {
    pub fn new(seed: u64) -> Self {
        SplitPlan {
            seed,
            train_ratio: 0.5,
            paired_ratio: 0.2,
            labeled_ratio: 0.1,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("train_ratio", self.train_ratio),
            ("paired_ratio", self.paired_ratio),
            ("labeled_ratio", self.labeled_ratio),
        ] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::RatioInfeasible(format!("{name} = {r} not in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// One materialized split. `train` is what a learner sees; the ground-truth
/// labels of every training column are kept alongside for the evaluation
/// protocol only.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: TwoViewData,
    pub train_labels: Vec<usize>,
    /// Columns of `train` whose labels the learner may use.
    pub labeled_columns: Vec<usize>,
    pub test_view1: DMatrix<f64>,
    pub test_view2: DMatrix<f64>,
    pub test_labels: Vec<usize>,
    /// Original dataset indices of the training/testing columns.
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl Split {
    pub fn train_count(&self) -> usize {
        self.train_labels.len()
    }

    pub fn paired_count(&self) -> usize {
        self.train.paired_count()
    }

    pub fn labeled_count(&self) -> usize {
        self.labeled_columns.len()
    }

    pub fn test_count(&self) -> usize {
        self.test_labels.len()
    }
}

fn select_columns(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), idx.len());
    for (col, &i) in idx.iter().enumerate() {
        out.set_column(col, &m.column(i));
    }
    out
}

/// Carves a semi-paired, partially labeled training set and a paired labeled
/// test set out of a fully paired dataset. Deterministic in `plan.seed`;
/// the paired subset is the leading block of the training columns and the
/// labeled subset is drawn independently of it (same subset for both views).
pub fn make_split(dataset: &PairedDataset, plan: &SplitPlan) -> Result<Split> {
    plan.validate()?;
    let n = dataset.len();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_train = (plan.train_ratio * n as f64).round() as usize;
    if n_train < 2 {
        return Err(Error::RatioInfeasible(format!(
            "train split of {n_train} samples is unusable"
        )));
    }
    if n_train >= n {
        return Err(Error::RatioInfeasible("empty test set".into()));
    }
    let train_indices = order[..n_train].to_vec();
    let test_indices = order[n_train..].to_vec();

    let n_paired = (plan.paired_ratio * n_train as f64).round() as usize;
    if n_paired < 2 {
        return Err(Error::RatioInfeasible(format!(
            "paired subset of {n_paired} samples is unusable"
        )));
    }
    let n_labeled = (plan.labeled_ratio * n_train as f64).round() as usize;
    if n_labeled == 0 {
        return Err(Error::RatioInfeasible("empty labeled subset".into()));
    }

    // the shuffled order already randomizes the paired block; draw the
    // labeled columns independently
    let mut labeled_columns: Vec<usize> = {
        let mut cols: Vec<usize> = (0..n_train).collect();
        cols.shuffle(&mut rng);
        cols.truncate(n_labeled);
        cols
    };
    labeled_columns.sort_unstable();

    let train_view1 = select_columns(&dataset.view1, &train_indices);
    let train_view2 = select_columns(&dataset.view2, &train_indices);
    let train_labels: Vec<usize> = train_indices.iter().map(|&i| dataset.labels[i]).collect();
    let labels: Vec<(usize, usize)> = labeled_columns
        .iter()
        .map(|&c| (c, train_labels[c]))
        .collect();

    let train = TwoViewData::new(
        train_view1,
        train_view2,
        n_paired,
        labels.clone(),
        labels,
    )?;

    Ok(Split {
        train,
        train_labels,
        labeled_columns,
        test_view1: select_columns(&dataset.view1, &test_indices),
        test_view2: select_columns(&dataset.view2, &test_indices),
        test_labels: test_indices.iter().map(|&i| dataset.labels[i]).collect(),
        train_indices,
        test_indices,
    })
}

/// Stacks the per-view projections of paired points into `2k` rows.
pub fn project_concat(
    pair: &ProjectionPair,
    x1: &DMatrix<f64>,
    x2: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if x1.ncols() != x2.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "views carry {} and {} test points",
            x1.ncols(),
            x2.ncols()
        )));
    }
    if pair.p1.nrows() != x1.nrows() || pair.p2.nrows() != x2.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "projections expect dims ({}, {}), got ({}, {})",
            pair.p1.nrows(),
            pair.p2.nrows(),
            x1.nrows(),
            x2.nrows()
        )));
    }
    let k = pair.k();
    let z1 = pair.p1.transpose() * x1;
    let z2 = pair.p2.transpose() * x2;
    let mut out = DMatrix::zeros(2 * k, x1.ncols());
    out.view_mut((0, 0), (k, x1.ncols())).copy_from(&z1);
    out.view_mut((k, 0), (k, x2.ncols())).copy_from(&z2);
    Ok(out)
}

fn predict_one(
    train_points: &DMatrix<f64>,
    train_labels: &[usize],
    test_point: nalgebra::DVectorView<'_, f64>,
) -> usize {
    let mut best = (f64::INFINITY, 0usize);
    for (j, col) in train_points.column_iter().enumerate() {
        let d = (col - test_point).norm_squared();
        // strict comparison keeps the smallest index on ties
        if d < best.0 {
            best = (d, j);
        }
    }
    train_labels[best.1]
}

/// 1-nearest-neighbor prediction under Euclidean distance, ties broken by
/// the smallest training index.
pub fn nnc(
    train_points: &DMatrix<f64>,
    train_labels: &[usize],
    test_points: &DMatrix<f64>,
) -> Result<Vec<usize>> {
    if train_points.ncols() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if train_points.ncols() != train_labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} training points vs {} labels",
            train_points.ncols(),
            train_labels.len()
        )));
    }
    if train_points.nrows() != test_points.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "train dim {} vs test dim {}",
            train_points.nrows(),
            test_points.nrows()
        )));
    }
    let indices: Vec<usize> = (0..test_points.ncols()).collect();
    #[cfg(feature = "parallel")]
    let iter = indices.par_iter();
    #[cfg(not(feature = "parallel"))]
    let iter = indices.iter();
    Ok(iter
        .map(|&i| predict_one(train_points, train_labels, test_points.column(i)))
        .collect())
}

/// Which projected features feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestedView {
    Concat,
    View1,
    View2,
}

impl std::fmt::Display for TestedView {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TestedView::Concat => "concat",
            TestedView::View1 => "view1",
            TestedView::View2 => "view2",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for TestedView {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "concat" => Ok(TestedView::Concat),
            "view1" => Ok(TestedView::View1),
            "view2" => Ok(TestedView::View2),
            other => Err(Error::InvalidParameter(format!(
                "unknown tested view '{other}'"
            ))),
        }
    }
}

/// One scored trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub accuracy: f64,
    pub k: usize,
    pub hyperparams: ModelSpec,
    pub seed: u64,
    pub tested_view: TestedView,
}

fn project(
    pair: &ProjectionPair,
    tested_view: TestedView,
    x1: &DMatrix<f64>,
    x2: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    match tested_view {
        TestedView::Concat => project_concat(pair, x1, x2),
        TestedView::View1 => Ok(pair.p1.transpose() * x1),
        TestedView::View2 => Ok(pair.p2.transpose() * x2),
    }
}

/// Runs one full trial: split, fit, project, classify.
///
/// Semi-supervised families train the classifier on the projected labeled
/// subset; unsupervised families learn the subspace without labels and the
/// classifier is trained on all projected training points with their
/// ground-truth labels.
pub fn run_trial(
    dataset: &PairedDataset,
    plan: &SplitPlan,
    spec: &ModelSpec,
    tested_view: TestedView,
    saa_opts: &SaaOptions,
) -> Result<TrialResult> {
    let split = make_split(dataset, plan)?;
    let pair = if spec.family.is_uncorrelated() {
        let jp = build_joint(&split.train, spec)?;
        saa_solve(&jp, spec.k, saa_opts)?
    } else {
        solve_gep(&build_gep(&split.train, spec)?)?
    };

    let (train_x1, train_x2, train_labels): (DMatrix<f64>, DMatrix<f64>, Vec<usize>) =
        if spec.family.is_semi_supervised() {
            let x1 = select_columns(split.train.view(crate::models::ViewId::View1), &split.labeled_columns);
            let x2 = select_columns(split.train.view(crate::models::ViewId::View2), &split.labeled_columns);
            let labels = split
                .labeled_columns
                .iter()
                .map(|&c| split.train_labels[c])
                .collect();
            (x1, x2, labels)
        } else {
            (
                split.train.view(crate::models::ViewId::View1).clone(),
                split.train.view(crate::models::ViewId::View2).clone(),
                split.train_labels.clone(),
            )
        };

    let train_z = project(&pair, tested_view, &train_x1, &train_x2)?;
    let test_z = project(&pair, tested_view, &split.test_view1, &split.test_view2)?;
    let predicted = nnc(&train_z, &train_labels, &test_z)?;
    let correct = predicted
        .iter()
        .zip(&split.test_labels)
        .filter(|(p, t)| p == t)
        .count();
    Ok(TrialResult {
        accuracy: correct as f64 / split.test_labels.len() as f64,
        k: spec.k,
        hyperparams: spec.clone(),
        seed: plan.seed,
        tested_view,
    })
}

/// Mean and sample (n-1) standard deviation of trial accuracies.
pub fn aggregate(results: &[TrialResult]) -> Result<(f64, f64)> {
    if results.len() < 2 {
        return Err(Error::TooFewTrials(results.len()));
    }
    let n = results.len() as f64;
    let mean = results.iter().map(|r| r.accuracy).sum::<f64>() / n;
    let var = results
        .iter()
        .map(|r| (r.accuracy - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    Ok((mean, var.sqrt()))
}

/// One runnable unit of a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialJob {
    pub plan: SplitPlan,
    pub spec: ModelSpec,
    pub tested_view: TestedView,
}

/// Runs a batch of independent trials against one dataset, in parallel when
/// the `parallel` feature is enabled. Result order matches job order.
pub fn run_trials(
    dataset: &PairedDataset,
    jobs: &[TrialJob],
    saa_opts: &SaaOptions,
) -> Vec<Result<TrialResult>> {
    #[cfg(feature = "parallel")]
    {
        jobs.par_iter()
            .map(|job| run_trial(dataset, &job.plan, &job.spec, job.tested_view, saa_opts))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_trials_sequential(dataset, jobs, saa_opts)
    }
}

/// Sequential twin of [`run_trials`], always available (used as the
/// benchmark baseline).
pub fn run_trials_sequential(
    dataset: &PairedDataset,
    jobs: &[TrialJob],
    saa_opts: &SaaOptions,
) -> Vec<Result<TrialResult>> {
    jobs.iter()
        .map(|job| run_trial(dataset, &job.plan, &job.spec, job.tested_view, saa_opts))
        .collect()
}
