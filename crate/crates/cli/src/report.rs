//! Rendering of result records: best-per-group summary tables and per-k
//! accuracy series for plotting.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::runner::{summarize, write_summary_tsv, TrialRecord};
use crate::{sig15, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Records,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(ReportFormat::Table),
            "records" => Ok(ReportFormat::Records),
            other => Err(format!("unknown format '{other}' (use table|records)")),
        }
    }
}

/// One point of a per-k accuracy curve: the best grid point at that k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub pair: String,
    pub family: String,
    pub graph: String,
    pub k: usize,
    pub mean: f64,
    pub std: f64,
}

pub fn per_k_series(records: &[TrialRecord]) -> Vec<SeriesPoint> {
    // group key without the seed already contains k; fold per (group, k)
    let mut by_point: BTreeMap<String, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_point.entry(r.group_key()).or_default().push(r);
    }
    let mut best: BTreeMap<(String, String, String, usize), (f64, f64)> = BTreeMap::new();
    for group in by_point.values() {
        let n = group.len() as f64;
        let mean = group.iter().map(|r| r.accuracy).sum::<f64>() / n;
        let std = if group.len() > 1 {
            (group
                .iter()
                .map(|r| (r.accuracy - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0))
                .sqrt()
        } else {
            0.0
        };
        let s = group[0];
        let id = (
            s.pair.clone(),
            format!("{}", s.family),
            s.graph_label(),
            s.k,
        );
        let better = match best.get(&id) {
            Some((m, _)) => mean > *m,
            None => true,
        };
        if better {
            best.insert(id, (mean, std));
        }
    }
    best.into_iter()
        .map(|((pair, family, graph, k), (mean, std))| SeriesPoint {
            pair,
            family,
            graph,
            k,
            mean,
            std,
        })
        .collect()
}

/// Writes the report in the requested format.
pub fn render(records: &[TrialRecord], format: ReportFormat, mut w: impl Write) -> CliResult<()> {
    let rows = summarize(records);
    let series = per_k_series(records);
    match format {
        ReportFormat::Table => {
            writeln!(w, "# summary (best grid point per pair/family/graph)")?;
            write_summary_tsv(&rows, &mut w)?;
            writeln!(w)?;
            writeln!(w, "# per-k series")?;
            writeln!(w, "pair\tfamily\tgraph\tk\tmean\tstd")?;
            for p in &series {
                writeln!(
                    w,
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    p.pair,
                    p.family,
                    p.graph,
                    p.k,
                    sig15(p.mean),
                    sig15(p.std)
                )?;
            }
        }
        ReportFormat::Records => {
            #[derive(Serialize)]
            struct Tagged<'a, T: Serialize> {
                #[serde(rename = "type")]
                kind: &'a str,
                #[serde(flatten)]
                value: T,
            }
            for row in &rows {
                let line = serde_json::to_string(&Tagged {
                    kind: "summary",
                    value: row,
                })?;
                writeln!(w, "{line}")?;
            }
            for p in &series {
                let line = serde_json::to_string(&Tagged {
                    kind: "series",
                    value: p,
                })?;
                writeln!(w, "{line}")?;
            }
        }
    }
    Ok(())
}
