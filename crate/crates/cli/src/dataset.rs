//! Dataset ingestion: the six-view handwritten-numerals feature files and
//! generic per-view CSV.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use semiview::eval::PairedDataset;

use crate::{CliError, CliResult};

/// Expected mfeat views: name, feature count.
pub const MFEAT_VIEWS: [(&str, usize); 6] = [
    ("fac", 216),
    ("fou", 76),
    ("kar", 64),
    ("mor", 6),
    ("pix", 240),
    ("zer", 47),
];

pub const MFEAT_SAMPLES: usize = 2000;
pub const MFEAT_CLASSES: usize = 10;

/// A named multi-view dataset with one shared label per sample.
#[derive(Debug, Clone)]
pub struct MultiViewDataset {
    pub names: Vec<String>,
    /// One `d x n` matrix per view, columns are samples.
    pub views: Vec<DMatrix<f64>>,
    pub labels: Vec<usize>,
}

impl MultiViewDataset {
    pub fn view_index(&self, name: &str) -> CliResult<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CliError::Config(format!("unknown view '{name}'")))
    }

    /// Two-view slice as a fully paired labeled dataset.
    pub fn pair(&self, a: usize, b: usize) -> CliResult<PairedDataset> {
        Ok(PairedDataset::new(
            self.views[a].clone(),
            self.views[b].clone(),
            self.labels.clone(),
        )?)
    }

    pub fn pair_by_names(&self, a: &str, b: &str) -> CliResult<PairedDataset> {
        self.pair(self.view_index(a)?, self.view_index(b)?)
    }

    /// All unordered view pairs as `name1-name2` strings.
    pub fn all_pair_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        for i in 0..self.names.len() {
            for j in (i + 1)..self.names.len() {
                out.push(format!("{}-{}", self.names[i], self.names[j]));
            }
        }
        out
    }
}

/// Z-scores each feature (row) across samples; constant features are left
/// centered at zero.
pub fn standardize(m: &mut DMatrix<f64>) {
    let n = m.ncols() as f64;
    for mut row in m.row_iter_mut() {
        let mean = row.sum() / n;
        let mut var = 0.0;
        for v in row.iter() {
            var += (v - mean) * (v - mean);
        }
        let std = (var / n).sqrt();
        for v in row.iter_mut() {
            *v = if std > 0.0 { (*v - mean) / std } else { 0.0 };
        }
    }
}

fn mfeat_file(dir: &Path, name: &str) -> CliResult<PathBuf> {
    let prefixed = dir.join(format!("mfeat-{name}"));
    if prefixed.exists() {
        return Ok(prefixed);
    }
    let bare = dir.join(name);
    if bare.exists() {
        return Ok(bare);
    }
    Err(CliError::MissingFile(prefixed.display().to_string()))
}

/// Parses one whitespace-delimited feature file into a `d x n` matrix
/// (samples are rows on disk, columns in memory).
fn parse_whitespace_matrix(path: &Path, rows: usize, cols: usize) -> CliResult<DMatrix<f64>> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|_| CliError::MissingFile(file.clone()))?;
    let mut m = DMatrix::zeros(cols, rows);
    let mut row = 0;
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        if row >= rows {
            return Err(CliError::ShapeMismatch {
                file,
                detail: format!("more than {rows} rows"),
            });
        }
        let mut col = 0;
        for tok in line.split_whitespace() {
            if col >= cols {
                return Err(CliError::ShapeMismatch {
                    file,
                    detail: format!("row {} has more than {cols} columns", row + 1),
                });
            }
            let v: f64 = tok.parse().map_err(|e| CliError::ParseError {
                file: file.clone(),
                row: row + 1,
                col: col + 1,
                detail: format!("{e}"),
            })?;
            m[(col, row)] = v;
            col += 1;
        }
        if col != cols {
            return Err(CliError::ShapeMismatch {
                file,
                detail: format!("row {} has {col} columns, expected {cols}", row + 1),
            });
        }
        row += 1;
    }
    if row != rows {
        return Err(CliError::ShapeMismatch {
            file,
            detail: format!("{row} rows, expected {rows}"),
        });
    }
    Ok(m)
}

/// Loads the six mfeat feature files from `dir`. Labels follow the row-block
/// rule of the distribution: 200 consecutive samples per digit class.
pub fn load_mfeat(dir: impl AsRef<Path>, standardize_features: bool) -> CliResult<MultiViewDataset> {
    let dir = dir.as_ref();
    let mut names = Vec::new();
    let mut views = Vec::new();
    for (name, dim) in MFEAT_VIEWS {
        let path = mfeat_file(dir, name)?;
        let mut m = parse_whitespace_matrix(&path, MFEAT_SAMPLES, dim)?;
        if standardize_features {
            standardize(&mut m);
        }
        names.push(name.to_string());
        views.push(m);
    }
    let per_class = MFEAT_SAMPLES / MFEAT_CLASSES;
    let labels: Vec<usize> = (0..MFEAT_SAMPLES).map(|i| i / per_class).collect();
    Ok(MultiViewDataset {
        names,
        views,
        labels,
    })
}

/// Loads one numeric CSV with samples as rows into a `d x n` matrix.
pub fn load_csv_matrix(path: impl AsRef<Path>) -> CliResult<DMatrix<f64>> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|_| CliError::MissingFile(file.clone()))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::ParseError {
            file: file.clone(),
            row: r + 1,
            col: 0,
            detail: format!("{e}"),
        })?;
        let mut row = Vec::with_capacity(record.len());
        for (c, tok) in record.iter().enumerate() {
            let v: f64 = tok.trim().parse().map_err(|e| CliError::ParseError {
                file: file.clone(),
                row: r + 1,
                col: c + 1,
                detail: format!("{e}"),
            })?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(CliError::ShapeMismatch {
                    file,
                    detail: format!(
                        "row {} has {} columns, expected {}",
                        r + 1,
                        row.len(),
                        first.len()
                    ),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::ShapeMismatch {
            file,
            detail: "empty file".into(),
        });
    }
    let (n, d) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_fn(d, n, |r, c| rows[c][r]))
}

fn load_labels(path: impl AsRef<Path>) -> CliResult<Vec<usize>> {
    let path = path.as_ref();
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|_| CliError::MissingFile(file.clone()))?;
    let mut labels = Vec::new();
    for (r, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: usize = t.parse().map_err(|e| CliError::ParseError {
            file: file.clone(),
            row: r + 1,
            col: 1,
            detail: format!("{e}"),
        })?;
        labels.push(v);
    }
    Ok(labels)
}

/// Generic loader: per-view CSVs (samples as rows) plus a label file with
/// one integer class per row.
pub fn load_csv_views(
    view_paths: &[String],
    view_names: &[String],
    label_path: &str,
    standardize_features: bool,
) -> CliResult<MultiViewDataset> {
    let mut views = Vec::new();
    let mut n_samples = None;
    for path in view_paths {
        let mut m = load_csv_matrix(path)?;
        if let Some(n) = n_samples {
            if m.ncols() != n {
                return Err(CliError::ShapeMismatch {
                    file: path.clone(),
                    detail: format!("{} samples, other views have {n}", m.ncols()),
                });
            }
        } else {
            n_samples = Some(m.ncols());
        }
        if standardize_features {
            standardize(&mut m);
        }
        views.push(m);
    }
    let labels = load_labels(label_path)?;
    if labels.len() != n_samples.unwrap_or(0) {
        return Err(CliError::ShapeMismatch {
            file: label_path.to_string(),
            detail: format!(
                "{} labels, views have {} samples",
                labels.len(),
                n_samples.unwrap_or(0)
            ),
        });
    }
    let names: Vec<String> = if view_names.len() == view_paths.len() {
        view_names.to_vec()
    } else {
        (1..=view_paths.len()).map(|i| format!("v{i}")).collect()
    };
    Ok(MultiViewDataset {
        names,
        views,
        labels,
    })
}

/// Loads whatever the config points at.
pub fn load_dataset(cfg: &crate::config::DatasetConfig) -> CliResult<MultiViewDataset> {
    match cfg.kind {
        crate::config::DatasetKind::Mfeat => {
            let dir = cfg
                .dir
                .as_ref()
                .ok_or_else(|| CliError::Config("mfeat dataset needs `dir`".into()))?;
            load_mfeat(dir, cfg.standardize)
        }
        crate::config::DatasetKind::Csv => {
            let labels = cfg
                .labels
                .as_ref()
                .ok_or_else(|| CliError::Config("csv dataset needs `labels`".into()))?;
            load_csv_views(&cfg.views, &cfg.view_names, labels, cfg.standardize)
        }
    }
}
