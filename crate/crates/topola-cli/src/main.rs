//! Command-line front end: ingestion → enhancement / diffusion / evaluation
//! → CSV and JSON reports.
//!
//! Every command is a pure function of its input files, flags and seed;
//! repeated runs produce byte-identical output. Exit codes: 0 success,
//! 2 usage or configuration error, 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use topola::diffusion::{cnrwr, rwr, trwr, DiffusionMethod, Normalization, RwrParams};
use topola::enhance::{
    cn_matrix, fastnr_enhance, lambda_grid, nr_enhance, topola_distance, topola_series,
    TopoLaParams,
};
use topola::error::Error;
use topola::eval::{
    pair_analysis, pair_records_csv, run_link_prediction, DEFAULT_BANDS, DEFAULT_BAND_WIDTH,
};
use topola::metrics::spearman;
use topola::net::{
    format_dense_matrix, parse_dense_matrix, parse_edge_list, AdjacencyMatrix, NodeIndex,
};
use topola::paths::{path_census, walk_count};
use topola::spectral::{condition_number, full_svd};
use topola::synth::gnm_random_graph;

#[derive(Parser)]
#[command(
    name = "topola",
    version,
    about = "Latent-distance network enhancement toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance a network (nr, fastnr or cn) and write the result as CSV
    Enhance(EnhanceArgs),
    /// Emit the latent distance matrix as CSV
    Distance(DistanceArgs),
    /// Run one restart diffusion and write the score matrix as CSV
    Predict(PredictArgs),
    /// Cross-validated link prediction; writes a JSON report
    Eval(EvalArgs),
    /// Print singular values, gaps and the condition number
    Spectrum(SpectrumArgs),
    /// Run the exact walk-counting checks on a small graph
    Oracle(OracleArgs),
    /// Per-pair topology records (CSV) with similarity-band statistics
    Analyze(AnalyzeArgs),
    /// Print candidate lambda values scaled to the spectrum
    LambdaGrid(LambdaGridArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Input network: dense CSV matrix or whitespace edge list (sniffed)
    #[arg(long)]
    input: PathBuf,
    /// Treat edge-list input as directed
    #[arg(long)]
    directed: bool,
    /// Parse a third edge-list field as the edge weight
    #[arg(long)]
    weighted: bool,
    /// Order nodes lexicographically instead of first-seen
    #[arg(long)]
    sort_labels: bool,
}

#[derive(Args)]
struct EnhanceArgs {
    #[command(flatten)]
    input: InputArgs,
    /// nr, fastnr or cn
    #[arg(long)]
    method: String,
    #[arg(long)]
    lambda: Option<f64>,
    /// fastnr: retained rank
    #[arg(long)]
    rank: Option<usize>,
    /// fastnr: Frobenius error tolerance (alternative to --rank)
    #[arg(long)]
    tol: Option<f64>,
    /// fastnr: sketch block size
    #[arg(long, default_value_t = 16)]
    block: usize,
    /// fastnr: power iterations
    #[arg(long, default_value_t = 1)]
    power: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct DistanceArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    input: InputArgs,
    /// rwr, trwr or cnrwr
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long)]
    lambda: Option<f64>,
    /// column-stochastic, row-stochastic or symmetric
    #[arg(long, default_value = "column-stochastic")]
    normalization: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: InputArgs,
    /// rwr, trwr or cnrwr
    #[arg(long)]
    method: String,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value = "column-stochastic")]
    normalization: String,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exclude training edges from the ranked candidates (pass false to
    /// score them as negatives)
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    mask_train: bool,
    /// Cap the negative pool on large networks; all absent pairs by default
    #[arg(long)]
    max_negatives: Option<usize>,
    /// Report destination; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Also print the enhanced singular values for this lambda
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Graph file for the walk-count checks (alias of --input)
    #[arg(long, alias = "input")]
    graph: PathBuf,
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    sort_labels: bool,
    /// Node pair to count paths between (labels, or indices for CSV input)
    #[arg(long, num_args = 2)]
    pair: Vec<String>,
    /// Lambda for the series comparison; 2·σ_max² when omitted
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 60)]
    terms: usize,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Analyze this network (otherwise generate one with --nodes/--edges)
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    directed: bool,
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    sort_labels: bool,
    /// Nodes of the generated random graph
    #[arg(long)]
    nodes: Option<usize>,
    /// Edges of the generated random graph
    #[arg(long)]
    edges: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    lambda: f64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct LambdaGridArgs {
    #[command(flatten)]
    input: InputArgs,
}

/// Failures carry the exit code class: 2 for configuration, 3 for numerics.
enum CliError {
    Config(String),
    Numeric(String),
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err {
            Error::SvdFailed
            | Error::SingularSystem
            | Error::CountOverflow
            | Error::Numerical(_)
            | Error::NotOrthonormal { .. }
            | Error::SingleClass
            | Error::EmptyFold { .. } => CliError::Numeric(err.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Enhance(args) => cmd_enhance(args),
        Command::Distance(args) => cmd_distance(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Oracle(args) => cmd_oracle(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::LambdaGrid(args) => cmd_lambda_grid(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

/// TOPOLA_THREADS caps internal parallelism; 0 or unset means automatic.
fn configure_threads() {
    if let Ok(raw) = std::env::var("TOPOLA_THREADS") {
        if let Ok(n) = raw.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn read_to_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))
}

/// Format detection: `.csv` files and anything whose first data line has a
/// comma (or a single numeric field) load as a dense matrix; everything else
/// as a whitespace edge list.
fn load_input(args: &InputArgs) -> CliResult<(AdjacencyMatrix, Option<NodeIndex>)> {
    load_network(&args.input, args.directed, args.weighted, args.sort_labels)
}

fn load_network(
    path: &Path,
    directed: bool,
    weighted: bool,
    sort_labels: bool,
) -> CliResult<(AdjacencyMatrix, Option<NodeIndex>)> {
    let text = read_to_string(path)?;
    let by_extension = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
    let first_data = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'));
    let looks_dense = by_extension
        || first_data.is_some_and(|l| {
            let fields: Vec<&str> = l.split_whitespace().collect();
            l.contains(',') || (fields.len() == 1 && fields[0].parse::<f64>().is_ok())
        });
    if looks_dense {
        Ok((parse_dense_matrix(&text)?, None))
    } else {
        let (matrix, index) = parse_edge_list(&text, directed, weighted, sort_labels)?;
        Ok((matrix, Some(index)))
    }
}

/// Writes through a temp file in the same directory, then renames.
fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, contents)
        .map_err(|e| config_error(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| config_error(format!("cannot rename into {}: {e}", path.display())))
}

fn print_json(value: &serde_json::Value) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn top_values(values: &[f64], count: usize) -> Vec<f64> {
    values.iter().copied().take(count).collect()
}

fn parse_rwr_params(alpha: f64, normalization: &str) -> CliResult<RwrParams> {
    let normalization: Normalization = normalization.parse()?;
    Ok(RwrParams::new(alpha, normalization)?)
}

fn require_lambda(lambda: Option<f64>) -> CliResult<TopoLaParams> {
    let lambda = lambda.ok_or_else(|| config_error("this method needs --lambda"))?;
    Ok(TopoLaParams::new(lambda)?)
}

fn cmd_enhance(args: EnhanceArgs) -> CliResult<()> {
    let (matrix, _) = load_input(&args.input)?;
    let before = full_svd(&matrix)?.s;
    let (enhanced, lambda) = match args.method.as_str() {
        "nr" => {
            let params = require_lambda(args.lambda)?;
            (nr_enhance(&matrix, &params)?, Some(params.lambda()))
        }
        "fastnr" => {
            let params = require_lambda(args.lambda)?;
            let mode = match (args.rank, args.tol) {
                (Some(k), None) => topola::spectral::QbMode::Rank(k),
                (None, Some(t)) => topola::spectral::QbMode::Tolerance(t),
                _ => return Err(config_error("fastnr needs exactly one of --rank or --tol")),
            };
            (
                fastnr_enhance(&matrix, &params, mode, args.block, args.power, args.seed)?,
                Some(params.lambda()),
            )
        }
        "cn" => {
            let cn = AdjacencyMatrix::from_dense(cn_matrix(&matrix))?;
            (cn, None)
        }
        other => {
            return Err(config_error(format!(
                "unknown enhancement method {other:?}"
            )))
        }
    };
    write_atomic(&args.output, &format_dense_matrix(&enhanced))?;
    let after = full_svd(&enhanced)?.s;
    print_json(&json!({
        "method": args.method,
        "lambda": lambda,
        "shape": [enhanced.rows(), enhanced.cols()],
        "singular_values_before": top_values(&before, 10),
        "singular_values_after": top_values(&after, 10),
        "output": args.output,
    }));
    Ok(())
}

fn cmd_distance(args: DistanceArgs) -> CliResult<()> {
    let (matrix, _) = load_input(&args.input)?;
    let params = TopoLaParams::new(args.lambda)?;
    let distance = topola_distance(&matrix, &params)?;
    let wrapped = AdjacencyMatrix::from_dense(distance.values().clone())?;
    write_atomic(&args.output, &format_dense_matrix(&wrapped))?;
    let spectrum = full_svd(&matrix)?.s;
    let eigenvalues: Vec<f64> = spectrum
        .iter()
        .map(|&s| s * s / (s * s + params.lambda()))
        .collect();
    print_json(&json!({
        "lambda": params.lambda(),
        "shape": [wrapped.rows(), wrapped.cols()],
        "top_eigenvalues": top_values(&eigenvalues, 10),
        "output": args.output,
    }));
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> CliResult<()> {
    let (matrix, _) = load_input(&args.input)?;
    let rwr_params = parse_rwr_params(args.alpha, &args.normalization)?;
    let method: DiffusionMethod = args.method.parse()?;
    let result = match method {
        DiffusionMethod::Rwr => rwr(&matrix, &rwr_params)?,
        DiffusionMethod::Trwr => trwr(&matrix, &rwr_params, &require_lambda(args.lambda)?)?,
        DiffusionMethod::Cnrwr => cnrwr(&matrix, &rwr_params)?,
    };
    let scores = AdjacencyMatrix::from_dense(result.scores)?;
    write_atomic(&args.output, &format_dense_matrix(&scores))?;
    print_json(&json!({
        "method": result.method.as_str(),
        "params": {
            "alpha": result.alpha,
            "lambda": result.lambda,
            "normalization": result.normalization.as_str(),
        },
        "shape": [scores.rows(), scores.cols()],
        "output": args.output,
    }));
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> CliResult<()> {
    let (matrix, _) = load_input(&args.input)?;
    let rwr_params = parse_rwr_params(args.alpha, &args.normalization)?;
    let method: DiffusionMethod = args.method.parse()?;
    let topo = match method {
        DiffusionMethod::Trwr => Some(require_lambda(args.lambda)?),
        _ => match args.lambda {
            Some(_) => return Err(config_error("--lambda only applies to trwr")),
            None => None,
        },
    };
    let report = run_link_prediction(
        &matrix,
        method,
        &rwr_params,
        topo.as_ref(),
        args.folds,
        args.seed,
        args.mask_train,
        args.max_negatives,
    )?;
    let rendered = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    match &args.output {
        Some(path) => write_atomic(path, &rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn cmd_spectrum(args: SpectrumArgs) -> CliResult<()> {
    let (matrix, _) = load_input(&args.input)?;
    let spectrum = full_svd(&matrix)?.s;
    let gaps: Vec<f64> = spectrum.windows(2).map(|w| w[0] - w[1]).collect();
    let cond = condition_number(&matrix)?;
    let cond_json = if cond.is_infinite() {
        json!("inf")
    } else {
        json!(cond)
    };
    let enhanced = match args.lambda {
        Some(lambda) => {
            let params = TopoLaParams::new(lambda)?;
            let values: Vec<f64> = spectrum
                .iter()
                .map(|&s| topola::enhance::singular_transform(s, params.lambda()))
                .collect();
            json!(values)
        }
        None => json!(null),
    };
    print_json(&json!({
        "shape": [matrix.rows(), matrix.cols()],
        "condition_number": cond_json,
        "singular_values": spectrum,
        "gaps": gaps,
        "enhanced_singular_values": enhanced,
    }));
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> CliResult<()> {
    let (matrix, index) =
        load_network(&args.graph, args.directed, args.weighted, args.sort_labels)?;
    if args.pair.len() != 2 {
        return Err(config_error("--pair needs exactly two node names"));
    }
    let resolve = |label: &str| -> CliResult<usize> {
        if let Some(idx) = index.as_ref().and_then(|ix| ix.index(label)) {
            return Ok(idx);
        }
        label
            .parse::<usize>()
            .ok()
            .filter(|&i| i < matrix.rows())
            .ok_or_else(|| config_error(format!("unknown node {label:?}")))
    };
    let i = resolve(&args.pair[0])?;
    let j = resolve(&args.pair[1])?;

    let mut all_ok = true;
    for hops in [2usize, 4, 6] {
        let walks = walk_count(&matrix, hops, i, j)?;
        let census = path_census(&matrix, hops, i, j)?;
        let ok = census.total == walks
            && census.total == census.loop_free_at(hops) + census.endpoint_loops + census.remainder;
        all_ok &= ok;
        println!(
            "{}-hop walks {} = loop-free {} + endpoint-loops {} + remainder {} ... {}",
            hops,
            walks,
            census.loop_free_at(hops),
            census.endpoint_loops,
            census.remainder,
            if ok { "PASS" } else { "FAIL" }
        );
    }

    let top = full_svd(&matrix)?.s[0];
    let lambda = args.lambda.unwrap_or(2.0 * top * top);
    let params = TopoLaParams::new(lambda)?;
    let closed = topola_distance(&matrix, &params)?;
    let series = topola_series(&matrix, &params, args.terms)?;
    let gram_max = (matrix.values() * matrix.values().transpose()).amax();
    let tol = 1e-8 * gram_max / lambda;
    let residual = (closed.values() - &series.partial_sum).amax();
    let series_ok = !series.divergent && residual <= tol;
    all_ok &= series_ok;
    println!(
        "closed form vs {}-term series (lambda {}): residual {:.3e} (tolerance {:.3e}){} ... {}",
        args.terms,
        lambda,
        residual,
        tol,
        if series.divergent { ", divergent" } else { "" },
        if series_ok { "PASS" } else { "FAIL" }
    );

    if all_ok {
        println!("PASS");
        Ok(())
    } else {
        println!("FAIL");
        Err(CliError::Numeric("oracle checks failed".into()))
    }
}

fn cmd_analyze(args: AnalyzeArgs) -> CliResult<()> {
    let (matrix, source) = match (&args.input, args.nodes, args.edges) {
        (Some(path), None, None) => {
            let (matrix, _) = load_network(path, args.directed, args.weighted, args.sort_labels)?;
            (matrix, json!(path))
        }
        (None, Some(nodes), Some(edges)) => (
            gnm_random_graph(nodes, edges, args.seed)?,
            json!({"nodes": nodes, "edges": edges, "seed": args.seed}),
        ),
        _ => {
            return Err(config_error(
                "pass either --input or both --nodes and --edges",
            ))
        }
    };
    let params = TopoLaParams::new(args.lambda)?;
    let records = pair_analysis(&matrix, &params, &DEFAULT_BANDS, DEFAULT_BAND_WIDTH)?;
    write_atomic(&args.output, &pair_records_csv(&records))?;

    let mut bands_json = Vec::new();
    for &band in &DEFAULT_BANDS {
        let (mut dtopo, mut union) = (Vec::new(), Vec::new());
        for record in &records {
            if record.band == Some(band) {
                dtopo.push(record.dtopo);
                union.push(record.union as f64);
            }
        }
        let rho = spearman(&dtopo, &union).ok();
        bands_json.push(json!({
            "band": band,
            "pairs": dtopo.len(),
            "spearman_dtopo_union": rho,
        }));
    }
    print_json(&json!({
        "source": source,
        "lambda": params.lambda(),
        "pairs": records.len(),
        "bands": bands_json,
        "output": args.output,
    }));
    Ok(())
}

fn cmd_lambda_grid(args: LambdaGridArgs) -> CliResult<()> {
    let (matrix, _) = load_input(&args.input)?;
    let grid = lambda_grid(&matrix)?;
    print_json(&json!({ "lambda_grid": grid }));
    Ok(())
}
