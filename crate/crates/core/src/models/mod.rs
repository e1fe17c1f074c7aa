//! Model construction for semi-paired two-view data.
//!
//! Raw data plus hyperparameters turn into either a [`JointProblem`] for the
//! uncorrelated-constraint models (solved by [`crate::saa::saa_solve`]) or a
//! [`GepProblem`] for the baseline formulations (solved by [`solve_gep`]).
//! The quadratic building blocks — paired/total covariances, heat-kernel
//! graph Laplacians and labeled scatter matrices — live in the submodules.

mod builders;
mod covariance;
mod gep;
mod graphs;

pub use builders::{build_gep, build_joint};
pub use covariance::{cross_covariance, total_covariance};
pub use gep::{gep_residual, solve_gep, GepProblem};
pub use graphs::{
    heat_knn_laplacian, laplacian_from_weights, lda_graphs, lfda_graphs, mfa_graphs,
    scatter_matrices,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two views an operation addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewId {
    View1,
    View2,
}

impl ViewId {
    pub const BOTH: [ViewId; 2] = [ViewId::View1, ViewId::View2];

    pub fn index(self) -> usize {
        match self {
            ViewId::View1 => 0,
            ViewId::View2 => 1,
        }
    }
}

/// Semi-paired two-view dataset: columns are samples, the first
/// `paired` columns of each view correspond to each other, and a subset of
/// samples per view may carry class labels.
#[derive(Debug, Clone)]
pub struct TwoViewData {
    view1: DMatrix<f64>,
    view2: DMatrix<f64>,
    paired: usize,
    labels1: Vec<(usize, usize)>,
    labels2: Vec<(usize, usize)>,
    n_classes: usize,
}

impl TwoViewData {
    /// `labels` map sample indices (within the view) to class ids; class ids
    /// must be contiguous `0..c` over the union of both views.
    pub fn new(
        view1: DMatrix<f64>,
        view2: DMatrix<f64>,
        paired: usize,
        mut labels1: Vec<(usize, usize)>,
        mut labels2: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if paired > view1.ncols().min(view2.ncols()) {
            return Err(Error::DimensionMismatch(format!(
                "paired count {paired} exceeds view sizes {} and {}",
                view1.ncols(),
                view2.ncols()
            )));
        }
        labels1.sort_unstable();
        labels2.sort_unstable();
        for (labels, view, name) in [(&labels1, &view1, 1), (&labels2, &view2, 2)] {
            for &(idx, _) in labels.iter() {
                if idx >= view.ncols() {
                    return Err(Error::DimensionMismatch(format!(
                        "label index {idx} out of range for view {name} with {} samples",
                        view.ncols()
                    )));
                }
            }
            if labels.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::DimensionMismatch(format!(
                    "duplicate label index in view {name}"
                )));
            }
        }
        // class ids need not be contiguous here: labeled subsets are drawn
        // at random and may miss classes of the underlying dataset
        let mut n_classes = 0;
        for &(_, class) in labels1.iter().chain(labels2.iter()) {
            n_classes = n_classes.max(class + 1);
        }
        Ok(TwoViewData {
            view1,
            view2,
            paired,
            labels1,
            labels2,
            n_classes,
        })
    }

    pub fn unlabeled(view1: DMatrix<f64>, view2: DMatrix<f64>, paired: usize) -> Result<Self> {
        TwoViewData::new(view1, view2, paired, Vec::new(), Vec::new())
    }

    pub fn view(&self, s: ViewId) -> &DMatrix<f64> {
        match s {
            ViewId::View1 => &self.view1,
            ViewId::View2 => &self.view2,
        }
    }

    /// First `paired` columns of a view.
    pub fn paired_block(&self, s: ViewId) -> DMatrix<f64> {
        self.view(s).columns(0, self.paired).into_owned()
    }

    pub fn paired_count(&self) -> usize {
        self.paired
    }

    pub fn sample_count(&self, s: ViewId) -> usize {
        self.view(s).ncols()
    }

    pub fn dim(&self, s: ViewId) -> usize {
        self.view(s).nrows()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.view1.nrows(), self.view2.nrows())
    }

    pub fn labels(&self, s: ViewId) -> &[(usize, usize)] {
        match s {
            ViewId::View1 => &self.labels1,
            ViewId::View2 => &self.labels2,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn has_labels(&self) -> bool {
        !self.labels1.is_empty() || !self.labels2.is_empty()
    }

    /// Labeled samples of a view packed as columns, with their classes.
    pub fn labeled_view(&self, s: ViewId) -> Result<(DMatrix<f64>, Vec<usize>)> {
        let labels = self.labels(s);
        if labels.is_empty() {
            return Err(Error::MissingLabels(s.index() + 1));
        }
        let x = self.view(s);
        let mut packed = DMatrix::zeros(x.nrows(), labels.len());
        let mut classes = Vec::with_capacity(labels.len());
        for (col, &(idx, class)) in labels.iter().enumerate() {
            packed.set_column(col, &x.column(idx));
            classes.push(class);
        }
        Ok((packed, classes))
    }
}

/// Which graph construction feeds the labeled scatter matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Lda,
    Lfda,
    Mfa,
}

impl std::fmt::Display for GraphKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GraphKind::Lda => "lda",
            GraphKind::Lfda => "lfda",
            GraphKind::Mfa => "mfa",
        };
        f.write_str(s)
    }
}

/// Graph hyperparameters: `knn` doubles as the LFDA locality and the MFA
/// within-class neighbor count; `knn_penalty` is the MFA cross-class count;
/// `heat_scale` scales the heat-kernel bandwidth and `laplacian_knn` the
/// neighbor count of the Laplacian regularizer graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub kind: GraphKind,
    pub knn: usize,
    pub knn_penalty: usize,
    pub heat_scale: f64,
    pub laplacian_knn: usize,
}

impl Default for GraphSpec {
    fn default() -> Self {
        GraphSpec {
            kind: GraphKind::Lda,
            knn: 5,
            knn_penalty: 5,
            heat_scale: 1.0,
            laplacian_knn: 5,
        }
    }
}

/// Model families: five with per-view uncorrelated constraints (solved with
/// the alternating scheme) and six baselines in generalized-eigenvalue form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Cca,
    SemiCca,
    USemiCca,
    SemiCcaLr,
    USemiCcaLr,
    Scca,
    UScca,
    S2Gca,
    US2Gca,
    S2CcaLr,
    US2CcaLr,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 11] = [
        ModelFamily::Cca,
        ModelFamily::SemiCca,
        ModelFamily::USemiCca,
        ModelFamily::SemiCcaLr,
        ModelFamily::USemiCcaLr,
        ModelFamily::Scca,
        ModelFamily::UScca,
        ModelFamily::S2Gca,
        ModelFamily::US2Gca,
        ModelFamily::S2CcaLr,
        ModelFamily::US2CcaLr,
    ];

    /// Families with per-view uncorrelated constraints (alternating solver).
    pub fn is_uncorrelated(self) -> bool {
        matches!(
            self,
            ModelFamily::USemiCca
                | ModelFamily::USemiCcaLr
                | ModelFamily::UScca
                | ModelFamily::US2Gca
                | ModelFamily::US2CcaLr
        )
    }

    /// Families that consume label information.
    pub fn is_semi_supervised(self) -> bool {
        matches!(
            self,
            ModelFamily::Scca
                | ModelFamily::UScca
                | ModelFamily::S2Gca
                | ModelFamily::US2Gca
                | ModelFamily::S2CcaLr
                | ModelFamily::US2CcaLr
        )
    }

    /// Families with a heat-kernel Laplacian regularizer.
    pub fn uses_laplacian(self) -> bool {
        matches!(
            self,
            ModelFamily::SemiCcaLr
                | ModelFamily::USemiCcaLr
                | ModelFamily::S2CcaLr
                | ModelFamily::US2CcaLr
        )
    }

    pub fn uses_gamma(self) -> bool {
        matches!(
            self,
            ModelFamily::SemiCca | ModelFamily::USemiCca | ModelFamily::S2Gca | ModelFamily::US2Gca
        )
    }

    pub fn uses_eta(self) -> bool {
        self.is_semi_supervised()
    }
}

impl std::fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ModelFamily::Cca => "CCA",
            ModelFamily::SemiCca => "SemiCCA",
            ModelFamily::USemiCca => "USemiCCA",
            ModelFamily::SemiCcaLr => "SemiCCALR",
            ModelFamily::USemiCcaLr => "USemiCCALR",
            ModelFamily::Scca => "SCCA",
            ModelFamily::UScca => "USCCA",
            ModelFamily::S2Gca => "S2GCA",
            ModelFamily::US2Gca => "US2GCA",
            ModelFamily::S2CcaLr => "S2CCALR",
            ModelFamily::US2CcaLr => "US2CCALR",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        for family in ModelFamily::ALL {
            if format!("{family}").to_ascii_lowercase() == lower {
                return Ok(family);
            }
        }
        Err(Error::BadFamily(s.to_string()))
    }
}

/// Full hyperparameter snapshot of one model instance. Fields not used by a
/// family are ignored by the builders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    /// Paired-vs-unpaired tradeoff in `[0, 1]`.
    pub gamma: f64,
    /// Ridge part of the Laplacian regularizer.
    pub gamma1: f64,
    /// Weight of the Laplacian regularizer.
    pub gamma2: f64,
    /// Weight of the supervised scatter terms.
    pub eta: f64,
    pub graph: GraphSpec,
    /// Target subspace dimension.
    pub k: usize,
    /// Diagonal regularization added to every constraint matrix.
    pub ridge: f64,
}

impl ModelSpec {
    pub fn new(family: ModelFamily) -> Self {
        ModelSpec {
            family,
            gamma: 0.5,
            gamma1: 0.0,
            gamma2: 1.0,
            eta: 1.0,
            graph: GraphSpec::default(),
            k: 2,
            ridge: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.ridge < 0.0 {
            return Err(Error::InvalidParameter("ridge must be nonnegative".into()));
        }
        if self.family.uses_gamma() && !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {} outside [0, 1]",
                self.gamma
            )));
        }
        if self.family.uses_laplacian() && (self.gamma1 < 0.0 || self.gamma2 < 0.0) {
            return Err(Error::InvalidParameter(
                "gamma1 and gamma2 must be nonnegative".into(),
            ));
        }
        if self.family.uses_eta() && self.eta < 0.0 {
            return Err(Error::InvalidParameter("eta must be nonnegative".into()));
        }
        // the USCCA constraint is eta * Sw + ridge, degenerate at eta = 0
        if self.family == ModelFamily::UScca && self.eta <= 0.0 {
            return Err(Error::InvalidParameter(
                "USCCA requires a strictly positive eta".into(),
            ));
        }
        Ok(())
    }
}
