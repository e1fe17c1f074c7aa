//! Single model fit: load two views, build the requested model, solve, and
//! write the projection matrices as delimited text.

use std::io::Write;
use std::path::PathBuf;

use nalgebra::DMatrix;

use semiview::models::{
    build_gep, build_joint, solve_gep, GraphKind, GraphSpec, ModelFamily, ModelSpec, TwoViewData,
};
use semiview::saa::{saa_solve, ProjectionPair, SaaOptions};

use crate::dataset::{load_csv_matrix, standardize};
use crate::{sig15, CliError, CliResult};

#[derive(Debug, Clone, clap::Args)]
pub struct SolveArgs {
    /// Model family (e.g. cca, usemicca, us2gca)
    #[arg(long)]
    pub model: String,
    /// CSV with view-1 samples as rows
    #[arg(long)]
    pub view1: PathBuf,
    /// CSV with view-2 samples as rows
    #[arg(long)]
    pub view2: PathBuf,
    /// Optional label file (one integer class per row)
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Number of leading samples treated as paired (default: all)
    #[arg(long)]
    pub paired: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Graph construction for supervised families: lda, lfda or mfa
    #[arg(long, default_value = "lda")]
    pub graph: String,
    #[arg(long, default_value_t = 5)]
    pub knn: usize,
    #[arg(long, default_value_t = 5)]
    pub k2: usize,
    #[arg(long, default_value_t = 1.0)]
    pub heat_scale: f64,
    #[arg(long, default_value_t = 5)]
    pub laplacian_knn: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub ridge: f64,
    #[arg(long, default_value_t = false)]
    pub standardize: bool,
    /// Output prefix; writes <out>.p1.txt and <out>.p2.txt
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_graph(s: &str) -> CliResult<GraphKind> {
    match s.to_ascii_lowercase().as_str() {
        "lda" => Ok(GraphKind::Lda),
        "lfda" => Ok(GraphKind::Lfda),
        "mfa" => Ok(GraphKind::Mfa),
        other => Err(CliError::Config(format!("unknown graph kind '{other}'"))),
    }
}

fn write_matrix(path: &PathBuf, m: &DMatrix<f64>) -> CliResult<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| sig15(m[(r, c)])).collect();
        writeln!(w, "{}", row.join("\t"))?;
    }
    w.flush()?;
    Ok(())
}

pub fn execute_solve(args: &SolveArgs, mut log: impl Write) -> CliResult<ProjectionPair> {
    let family: ModelFamily = args
        .model
        .parse()
        .map_err(|_| CliError::Config(format!("unknown model family '{}'", args.model)))?;

    let mut view1 = load_csv_matrix(&args.view1)?;
    let mut view2 = load_csv_matrix(&args.view2)?;
    if args.standardize {
        standardize(&mut view1);
        standardize(&mut view2);
    }
    let n = view1.ncols().min(view2.ncols());
    let paired = args.paired.unwrap_or(n);
    let labels: Vec<(usize, usize)> = match &args.labels {
        Some(path) => {
            let text =
                std::fs::read_to_string(path).map_err(|_| {
                    CliError::MissingFile(path.display().to_string())
                })?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .enumerate()
                .map(|(i, l)| {
                    l.trim()
                        .parse::<usize>()
                        .map(|c| (i, c))
                        .map_err(|e| CliError::ParseError {
                            file: path.display().to_string(),
                            row: i + 1,
                            col: 1,
                            detail: format!("{e}"),
                        })
                })
                .collect::<CliResult<Vec<_>>>()?
        }
        None => Vec::new(),
    };
    let data = TwoViewData::new(view1, view2, paired, labels.clone(), labels)?;

    let mut spec = ModelSpec::new(family);
    spec.k = args.k;
    spec.gamma = args.gamma;
    spec.gamma1 = args.gamma1;
    spec.gamma2 = args.gamma2;
    spec.eta = args.eta;
    spec.ridge = args.ridge;
    spec.graph = GraphSpec {
        kind: parse_graph(&args.graph)?,
        knn: args.knn,
        knn_penalty: args.k2,
        heat_scale: args.heat_scale,
        laplacian_knn: args.laplacian_knn,
    };

    let pair = if family.is_uncorrelated() {
        let jp = build_joint(&data, &spec)?;
        saa_solve(&jp, spec.k, &SaaOptions::default())?
    } else {
        solve_gep(&build_gep(&data, &spec)?)?
    };

    let p1_path = args.out.with_extension("p1.txt");
    let p2_path = args.out.with_extension("p2.txt");
    write_matrix(&p1_path, &pair.p1)?;
    write_matrix(&p2_path, &pair.p2)?;
    writeln!(log, "objective\t{}", sig15(pair.objective))?;
    for (i, v) in pair.per_column_values.iter().enumerate() {
        writeln!(log, "column_{i}\t{}", sig15(*v))?;
    }
    writeln!(log, "wrote\t{}", p1_path.display())?;
    writeln!(log, "wrote\t{}", p2_path.display())?;
    Ok(pair)
}
