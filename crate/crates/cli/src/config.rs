//! Experiment configuration: a single TOML file describing the dataset, the
//! model families, the hyperparameter grids and the split protocol.
//!
//! ```toml
//! [dataset]
//! kind = "mfeat"            # or "csv"
//! dir = "data/mfeat"        # mfeat: directory with the six feature files
//! # views = ["a.csv", "b.csv"]   # csv: one file per view, samples as rows
//! # view_names = ["a", "b"]
//! # labels = "labels.csv"        # csv: one integer class per row
//! standardize = false
//!
//! [experiment]
//! pairs = ["fac-fou"]       # view pairs, or ["all"]
//! families = ["cca", "semicca", "usemicca"]
//! graphs = ["lda"]          # graph kinds for semi-supervised families
//! tested_view = "concat"
//! trials = 10
//! seed_base = 0
//! output = "results/run.jsonl"
//! parallelism = 0           # worker threads; 0 = all cores
//!
//! [split]
//! train_ratio = 0.5
//! paired_ratio = 0.2
//! labeled_ratio = 0.1
//!
//! [grid]                    # defaults shown; every axis may be overridden
//! k_min = 2
//! k_max = 6
//! gamma = [0.01, 0.05, 0.1, 0.5, 0.9, 0.95, 0.99]
//! gamma1 = [0.0]
//! gamma2 = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]
//! eta = [0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]
//! heat_scale = [0.25, 0.5, 1.0, 2.0, 4.0]
//! neighbors = [3, 5, 7, 10, 20]
//! k1 = [3, 5, 7, 10, 20]
//! k2 = [3, 5, 7, 10, 20]
//! ridge = 1e-6
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use semiview::eval::TestedView;
use semiview::models::{GraphKind, GraphSpec, ModelFamily, ModelSpec};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub split: SplitSection,
    #[serde(default)]
    pub grid: GridConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub views: Vec<String>,
    #[serde(default)]
    pub view_names: Vec<String>,
    #[serde(default)]
    pub labels: Option<String>,
    #[serde(default)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Mfeat,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub pairs: Vec<String>,
    pub families: Vec<ModelFamily>,
    #[serde(default = "default_graphs")]
    pub graphs: Vec<GraphKind>,
    #[serde(default = "default_tested_view")]
    pub tested_view: TestedView,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed_base: u64,
    pub output: String,
    #[serde(default)]
    pub parallelism: usize,
}

fn default_graphs() -> Vec<GraphKind> {
    vec![GraphKind::Lda]
}

fn default_tested_view() -> TestedView {
    TestedView::Concat
}

fn default_trials() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSection {
    pub train_ratio: f64,
    pub paired_ratio: f64,
    pub labeled_ratio: f64,
}

impl Default for SplitSection {
    fn default() -> Self {
        SplitSection {
            train_ratio: 0.5,
            paired_ratio: 0.2,
            labeled_ratio: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_gamma_grid")]
    pub gamma: Vec<f64>,
    #[serde(default = "default_gamma1_grid")]
    pub gamma1: Vec<f64>,
    #[serde(default = "default_log_grid")]
    pub gamma2: Vec<f64>,
    #[serde(default = "default_log_grid")]
    pub eta: Vec<f64>,
    #[serde(default = "default_heat_grid")]
    pub heat_scale: Vec<f64>,
    #[serde(default = "default_neighbor_grid")]
    pub neighbors: Vec<usize>,
    #[serde(default = "default_neighbor_grid")]
    pub k1: Vec<usize>,
    #[serde(default = "default_neighbor_grid")]
    pub k2: Vec<usize>,
    /// Fixed neighbor count of the heat-kernel regularizer graphs (only the
    /// bandwidth scale is tuned).
    #[serde(default = "default_lap_neighbors")]
    pub lap_neighbors: usize,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
}

fn default_k_min() -> usize {
    2
}

fn default_k_max() -> usize {
    6
}

fn default_gamma_grid() -> Vec<f64> {
    vec![0.01, 0.05, 0.1, 0.5, 0.9, 0.95, 0.99]
}

fn default_gamma1_grid() -> Vec<f64> {
    vec![0.0]
}

fn default_log_grid() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0]
}

fn default_heat_grid() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0, 4.0]
}

fn default_neighbor_grid() -> Vec<usize> {
    vec![3, 5, 7, 10, 20]
}

fn default_lap_neighbors() -> usize {
    5
}

fn default_ridge() -> f64 {
    1e-6
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            k_min: default_k_min(),
            k_max: default_k_max(),
            gamma: default_gamma_grid(),
            gamma1: default_gamma1_grid(),
            gamma2: default_log_grid(),
            eta: default_log_grid(),
            heat_scale: default_heat_grid(),
            neighbors: default_neighbor_grid(),
            k1: default_neighbor_grid(),
            k2: default_neighbor_grid(),
            lap_neighbors: default_lap_neighbors(),
            ridge: default_ridge(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> CliResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|_| CliError::MissingFile(path.display().to_string()))?;
        let config: ExperimentConfig = toml::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        let e = |msg: String| Err(CliError::Config(msg));
        match self.dataset.kind {
            DatasetKind::Mfeat => {
                if self.dataset.dir.is_none() {
                    return e("mfeat dataset needs `dir`".into());
                }
            }
            DatasetKind::Csv => {
                if self.dataset.views.len() < 2 {
                    return e("csv dataset needs at least two `views`".into());
                }
                if self.dataset.labels.is_none() {
                    return e("csv dataset needs `labels`".into());
                }
            }
        }
        if self.experiment.pairs.is_empty() {
            return e("`pairs` must not be empty".into());
        }
        if self.experiment.families.is_empty() {
            return e("`families` must not be empty".into());
        }
        if self.experiment.graphs.is_empty() {
            return e("`graphs` must not be empty".into());
        }
        if self.experiment.trials == 0 {
            return e("`trials` must be positive".into());
        }
        let g = &self.grid;
        if g.k_min == 0 || g.k_max < g.k_min {
            return e(format!("bad k range [{}, {}]", g.k_min, g.k_max));
        }
        for (name, empty) in [
            ("gamma", g.gamma.is_empty()),
            ("gamma1", g.gamma1.is_empty()),
            ("gamma2", g.gamma2.is_empty()),
            ("eta", g.eta.is_empty()),
            ("heat_scale", g.heat_scale.is_empty()),
            ("neighbors", g.neighbors.is_empty()),
            ("k1", g.k1.is_empty()),
            ("k2", g.k2.is_empty()),
        ] {
            if empty {
                return e(format!("grid axis `{name}` must not be empty"));
            }
        }
        Ok(())
    }

    /// Expands the per-family hyperparameter grid; only axes a family
    /// actually reads are iterated. The heat-kernel regularizer graph keeps
    /// a fixed neighbor count, the scatter graphs iterate theirs.
    pub fn expand_grid(&self, family: ModelFamily, graph_kind: GraphKind) -> Vec<ModelSpec> {
        let g = &self.grid;
        let one_f = [0.0f64];
        let one_u = [0usize];
        let gammas: &[f64] = if family.uses_gamma() { &g.gamma } else { &[1.0] };
        let etas: &[f64] = if family.uses_eta() { &g.eta } else { &one_f };
        let (gamma1s, gamma2s, heats): (&[f64], &[f64], &[f64]) = if family.uses_laplacian() {
            (&g.gamma1, &g.gamma2, &g.heat_scale)
        } else {
            (&one_f, &one_f, &[1.0])
        };
        let (graph_knns, graph_k2s): (&[usize], &[usize]) = if family.is_semi_supervised() {
            match graph_kind {
                GraphKind::Lda => (&g.neighbors[..1], &g.k2[..1]),
                GraphKind::Lfda => (&g.neighbors, &g.k2[..1]),
                GraphKind::Mfa => (&g.k1, &g.k2),
            }
        } else {
            (&one_u, &one_u)
        };

        let mut specs = Vec::new();
        for k in g.k_min..=g.k_max {
            for &gamma in gammas {
                for &eta in etas {
                    for &gamma1 in gamma1s {
                        for &gamma2 in gamma2s {
                            for &heat in heats {
                                for &gknn in graph_knns {
                                    for &gk2 in graph_k2s {
                                        let mut spec = ModelSpec::new(family);
                                        spec.k = k;
                                        spec.gamma = gamma;
                                        spec.gamma1 = gamma1;
                                        spec.gamma2 = gamma2;
                                        spec.eta = eta;
                                        spec.ridge = g.ridge;
                                        spec.graph = GraphSpec {
                                            kind: graph_kind,
                                            knn: gknn,
                                            knn_penalty: gk2,
                                            heat_scale: heat,
                                            laplacian_knn: g.lap_neighbors,
                                        };
                                        specs.push(spec);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        specs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_config() -> ExperimentConfig {
        ExperimentConfig {
            dataset: DatasetConfig {
                kind: DatasetKind::Mfeat,
                dir: Some("data/mfeat".into()),
                views: vec![],
                view_names: vec![],
                labels: None,
                standardize: false,
            },
            experiment: ExperimentSection {
                pairs: vec!["fac-fou".into()],
                families: vec![ModelFamily::Cca, ModelFamily::USemiCca],
                graphs: vec![GraphKind::Lda],
                tested_view: TestedView::Concat,
                trials: 10,
                seed_base: 0,
                output: "results/run.jsonl".into(),
                parallelism: 0,
            },
            split: SplitSection::default(),
            grid: GridConfig::default(),
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        let config = sample_config();
        let text = config.to_toml();
        let parsed: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(parsed, config);
    }

    #[test]
    fn grid_axes_depend_on_family() {
        let config = sample_config();
        // CCA: only k varies
        assert_eq!(config.expand_grid(ModelFamily::Cca, GraphKind::Lda).len(), 5);
        // SemiCCA: gamma x k
        assert_eq!(
            config.expand_grid(ModelFamily::SemiCca, GraphKind::Lda).len(),
            7 * 5
        );
        // USemiCCALR: gamma2 x heat x k (regularizer neighbor count fixed)
        assert_eq!(
            config
                .expand_grid(ModelFamily::USemiCcaLr, GraphKind::Lda)
                .len(),
            7 * 5 * 5
        );
        // USCCA with LDA graphs: eta x k
        assert_eq!(
            config.expand_grid(ModelFamily::UScca, GraphKind::Lda).len(),
            7 * 5
        );
        // USCCA with MFA graphs: eta x k1 x k2 x k
        assert_eq!(
            config.expand_grid(ModelFamily::UScca, GraphKind::Mfa).len(),
            7 * 5 * 5 * 5
        );
    }

    #[test]
    fn validation_rejects_empty_axes() {
        let mut config = sample_config();
        config.grid.gamma.clear();
        assert!(matches!(config.validate(), Err(CliError::Config(_))));
        let mut config = sample_config();
        config.experiment.pairs.clear();
        assert!(matches!(config.validate(), Err(CliError::Config(_))));
    }
}
