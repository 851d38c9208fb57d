//! Command-line interface.
//!
//! Exit codes: 0 success, 1 bad input or arguments, 2 refusal (an oracle
//! would exceed its scale guard), 3 internal contract violation (a failed
//! cross-check or a panic caught by the hook in `main`).

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::candidate_space::CandidateSpace;
use crate::engine::{match_all, PruneMode, SearchConfig, SearchStats, StopReason};
use crate::filter::{initial_filter, FilterStats};
use crate::generate::{gen_query, gen_random_hypergraph, GenError};
use crate::hypergraph::{parse_hypergraph, Hypergraph, LabelTable};
use crate::oracle::{oracle_subsets, oracle_vertexiso, OracleLimits};
use crate::sigindex::{content_hash, SignatureIndex};
use crate::Embedding;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_REFUSED: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Refused(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Refused(_) => EXIT_REFUSED,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hypermatch",
    version,
    about = "Exact subhypergraph pattern matching on labeled hypergraphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate all embeddings of each query in a data hypergraph.
    Match(MatchArgs),
    /// Cross-check the engine against brute-force reference matchers.
    Verify(VerifyArgs),
    /// Generate a random data hypergraph.
    GenData(GenDataArgs),
    /// Extract random connected subqueries from a data hypergraph.
    GenQueries(GenQueriesArgs),
    /// Print summary statistics of hypergraph files.
    Stats(StatsArgs),
}

/// In-search filtering variants; all yield the same embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// No in-search filtering; verify each extension individually.
    None,
    /// Connectivity-based pruning against the newly mapped pair.
    Conn,
    /// Intersection-based pruning against the whole partial embedding.
    Isec,
    /// Both pruning stages.
    Both,
}

impl From<ModeArg> for PruneMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::None => PruneMode::None,
            ModeArg::Conn => PruneMode::Connectivity,
            ModeArg::Isec => PruneMode::Intersection,
            ModeArg::Both => PruneMode::Both,
        }
    }
}

#[derive(Args)]
struct MatchArgs {
    /// Data hypergraph file.
    data: PathBuf,
    /// Query hypergraph files.
    #[arg(required = true)]
    queries: Vec<PathBuf>,
    /// Print only the number of embeddings per query.
    #[arg(long)]
    count_only: bool,
    /// Stop each query after this many embeddings (at least 1).
    #[arg(long)]
    limit: Option<u64>,
    /// Per-query time limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// In-search filtering stages to run.
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    /// Write a JSON report per query plus an aggregate line to stderr.
    #[arg(long)]
    stats: bool,
    /// Sort each query's embedding lines lexicographically.
    #[arg(long)]
    sorted: bool,
    /// Seed for shuffling matching-order tiebreaks.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for running queries in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Signature index cache file, reused while it matches the data file.
    #[arg(long)]
    index_cache: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Data hypergraph file.
    data: PathBuf,
    /// Query hypergraph files.
    #[arg(required = true)]
    queries: Vec<PathBuf>,
}

#[derive(Args)]
struct GenDataArgs {
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Vertex pool size; vertices left uncovered are dropped.
    #[arg(long, default_value_t = 100)]
    vertices: usize,
    /// Number of hyperedges.
    #[arg(long, default_value_t = 200)]
    edges: usize,
    /// Number of distinct labels.
    #[arg(long, default_value_t = 3)]
    labels: usize,
    /// Smallest hyperedge size.
    #[arg(long, default_value_t = 2)]
    min_arity: usize,
    /// Largest hyperedge size.
    #[arg(long, default_value_t = 4)]
    max_arity: usize,
    /// Output file (stdout when omitted).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GenQueriesArgs {
    /// Data hypergraph file.
    data: PathBuf,
    /// RNG seed; retries advance it deterministically.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of queries to extract.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Hyperedges per query.
    #[arg(long, default_value_t = 3)]
    edges: usize,
    /// Directory receiving one file per query (stdout when omitted).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Hypergraph files.
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

/// Parses arguments from the environment and runs the selected command,
/// returning the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.cmd {
        Cmd::Match(a) => cmd_match(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::GenData(a) => cmd_gen_data(a),
        Cmd::GenQueries(a) => cmd_gen_queries(a),
        Cmd::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.code()
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_data(path: &Path) -> Result<(Hypergraph, LabelTable, Vec<u8>), CliError> {
    let bytes = read_file(path)?;
    let mut table = LabelTable::new();
    let (h, _) = parse_hypergraph(&bytes[..], &mut table)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((h, table, bytes))
}

/// Parses a query against a copy of the data label table, so label ids are
/// comparable while query-only labels stay local to this query.
fn load_query(path: &Path, base: &LabelTable) -> Result<Hypergraph, CliError> {
    let bytes = read_file(path)?;
    let mut table = base.clone();
    let (q, _) = parse_hypergraph(&bytes[..], &mut table)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    q.validate_query()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok(q)
}

fn data_index(h: &Hypergraph, cache: Option<&Path>, data_bytes: &[u8]) -> SignatureIndex {
    let Some(path) = cache else {
        return SignatureIndex::build(h);
    };
    let hash = content_hash(data_bytes);
    match SignatureIndex::load(path, &hash) {
        Ok(idx) => idx,
        Err(_) => {
            let idx = SignatureIndex::build(h);
            if let Err(e) = idx.save(path, &hash) {
                eprintln!(
                    "warning: could not write index cache {}: {e}",
                    path.display()
                );
            }
            idx
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(e.to_string())),
    }
}

#[derive(serde::Serialize)]
struct RunReport {
    query: String,
    filter: FilterStats,
    search: SearchStats,
}

#[derive(serde::Serialize)]
struct AggregateReport {
    aggregate: bool,
    queries: usize,
    total_embeddings: u64,
    truncated: usize,
    geomean_wall_ms: f64,
    geomean_recursive_calls: f64,
}

fn geometric_mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0f64, 0usize);
    for v in values {
        sum += v.max(1e-9).ln();
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        // Round away ln/exp noise; nanosecond resolution is plenty here.
        ((sum / n as f64).exp() * 1e9).round() / 1e9
    }
}

fn cmd_match(a: MatchArgs) -> Result<i32, CliError> {
    if a.limit == Some(0) {
        return Err(CliError::Input("--limit must be at least 1".into()));
    }
    if let Some(t) = a.timeout {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Input(
                "--timeout must be a positive number of seconds".into(),
            ));
        }
    }
    if a.jobs == 0 {
        return Err(CliError::Input("--jobs must be at least 1".into()));
    }

    let (h, table, bytes) = load_data(&a.data)?;
    let idx = data_index(&h, a.index_cache.as_deref(), &bytes);
    let queries = a
        .queries
        .iter()
        .map(|p| load_query(p, &table).map(|q| (p.clone(), q)))
        .collect::<Result<Vec<_>, _>>()?;

    let cfg = SearchConfig {
        mode: a.mode.into(),
        limit: a.limit,
        timeout: a.timeout.map(Duration::from_secs_f64),
        tiebreak_seed: a.seed,
        validate_state: false,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| CliError::Input(format!("--jobs: {e}")))?;
    let results: Vec<(String, RunReport)> = pool.install(|| {
        queries
            .par_iter()
            .map(|(path, q)| run_one_query(path, q, &h, &idx, &cfg, &a))
            .collect()
    });

    let mut out = io::stdout().lock();
    for (block, _) in &results {
        out.write_all(block.as_bytes())
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    drop(out);

    if a.stats {
        let mut err = io::stderr().lock();
        for (_, report) in &results {
            let line = serde_json::to_string(report).expect("report must serialize");
            let _ = writeln!(err, "{line}");
        }
        // A timed-out query is recorded at the configured limit, since its
        // true cost is unknown but at least that much.
        let timeout_ms = a.timeout.map(|t| t * 1e3);
        let agg = AggregateReport {
            aggregate: true,
            queries: results.len(),
            total_embeddings: results.iter().map(|(_, r)| r.search.embeddings_found).sum(),
            truncated: results.iter().filter(|(_, r)| r.search.truncated).count(),
            geomean_wall_ms: geometric_mean(results.iter().map(|(_, r)| {
                match (r.search.stop_reason, timeout_ms) {
                    (Some(StopReason::Timeout), Some(ms)) => ms,
                    _ => r.search.wall_ms,
                }
            })),
            geomean_recursive_calls: geometric_mean(
                results.iter().map(|(_, r)| r.search.recursive_calls as f64),
            ),
        };
        let line = serde_json::to_string(&agg).expect("report must serialize");
        let _ = writeln!(err, "{line}");
    }
    Ok(EXIT_OK)
}

fn fmt_embedding(m: &[usize]) -> String {
    m.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

fn run_one_query(
    path: &Path,
    q: &Hypergraph,
    h: &Hypergraph,
    idx: &SignatureIndex,
    cfg: &SearchConfig,
    a: &MatchArgs,
) -> (String, RunReport) {
    let mut cs = CandidateSpace::build(q, h, idx);
    let filter = initial_filter(q, &mut cs);
    let mut lines: Vec<String> = Vec::new();
    let search = match_all(q, h, &mut cs, cfg, |m| lines.push(fmt_embedding(m)));
    if a.sorted {
        lines.sort();
    }

    let mut block = format!("# query: {}\n", path.display());
    if a.count_only {
        block.push_str(&search.embeddings_found.to_string());
        block.push('\n');
    } else {
        for line in &lines {
            block.push_str(line);
            block.push('\n');
        }
    }
    match search.stop_reason {
        Some(StopReason::Limit) => block.push_str("# truncated: limit\n"),
        Some(StopReason::Timeout) => block.push_str("# truncated: timeout\n"),
        None => {}
    }

    let report = RunReport {
        query: path.display().to_string(),
        filter,
        search,
    };
    (block, report)
}

fn cmd_verify(a: VerifyArgs) -> Result<i32, CliError> {
    let (h, table, _) = load_data(&a.data)?;
    let idx = SignatureIndex::build(&h);
    let limits = OracleLimits::default();
    let mut all_ok = true;

    for path in &a.queries {
        let q = load_query(path, &table)?;
        let expected = oracle_subsets(&q, &h, &limits)
            .map_err(|e| CliError::Refused(format!("{}: {e}", path.display())))?;
        let viso = oracle_vertexiso(&q, &h, &limits)
            .map_err(|e| CliError::Refused(format!("{}: {e}", path.display())))?;

        // One diff line per embedding in the symmetric difference:
        // '+' only the engine reported it, '-' only the reference did.
        let mut failures: Vec<String> = Vec::new();
        if viso.embeddings != expected {
            failures.push("reference matchers disagree".into());
            for m in viso.embeddings.symmetric_difference(&expected) {
                let side = if expected.contains(m) { '-' } else { '+' };
                failures.push(format!("{side} {}", fmt_embedding(m)));
            }
        }
        for mode in [ModeArg::None, ModeArg::Conn, ModeArg::Isec, ModeArg::Both] {
            let cfg = SearchConfig {
                mode: mode.into(),
                ..SearchConfig::default()
            };
            let mut cs = CandidateSpace::build(&q, &h, &idx);
            initial_filter(&q, &mut cs);
            let mut found: BTreeSet<Embedding> = BTreeSet::new();
            let stats = match_all(&q, &h, &mut cs, &cfg, |m| {
                found.insert(m.to_vec());
            });
            if stats.embeddings_found as usize != found.len() {
                failures.push(format!("mode {mode:?}: duplicate embeddings reported"));
            }
            if found != expected {
                failures.push(format!(
                    "mode {mode:?}: engine found {} embeddings, reference {}",
                    found.len(),
                    expected.len()
                ));
                for m in found.symmetric_difference(&expected) {
                    let side = if expected.contains(m) { '-' } else { '+' };
                    failures.push(format!("{side} {}", fmt_embedding(m)));
                }
            }
        }

        if failures.is_empty() {
            println!("{}: PASS ({} embeddings)", path.display(), expected.len());
        } else {
            all_ok = false;
            println!("{}: FAIL", path.display());
            for line in &failures {
                println!("  {line}");
            }
        }
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_INTERNAL })
}

fn cmd_gen_data(a: GenDataArgs) -> Result<i32, CliError> {
    if a.min_arity > a.max_arity {
        return Err(CliError::Input(
            "--min-arity must not exceed --max-arity".into(),
        ));
    }
    let (h, table) = gen_random_hypergraph(
        a.seed,
        a.vertices,
        a.edges,
        a.labels,
        a.min_arity..=a.max_arity,
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    write_output(a.output.as_deref(), &h.to_text(&table))?;
    Ok(EXIT_OK)
}

fn cmd_gen_queries(a: GenQueriesArgs) -> Result<i32, CliError> {
    if a.count == 0 {
        return Err(CliError::Input("--count must be at least 1".into()));
    }
    let (h, table, _) = load_data(&a.data)?;

    let mut blocks: Vec<(u64, String)> = Vec::new();
    let seed_budget = a.count as u64 * 16;
    let mut offset = 0u64;
    while blocks.len() < a.count {
        if offset >= seed_budget {
            return Err(CliError::Input(format!(
                "query {}: no connected {}-edge subquery of {} found after {} seed attempts",
                blocks.len(),
                a.edges,
                a.data.display(),
                offset
            )));
        }
        let seed = a.seed.wrapping_add(offset);
        offset += 1;
        match gen_query(seed, &h, a.edges) {
            Ok((q, _)) => blocks.push((seed, q.to_text(&table))),
            Err(GenError::NoConnectedSubset { .. }) => continue,
            Err(e) => return Err(CliError::Input(e.to_string())),
        }
    }

    match &a.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
            for (i, (seed, text)) in blocks.iter().enumerate() {
                let path = dir.join(format!("query_{i:03}.hg"));
                fs::write(&path, format!("# seed {seed}\n{text}"))
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            }
        }
        None => {
            let mut out = String::new();
            for (i, (seed, text)) in blocks.iter().enumerate() {
                out.push_str(&format!("# query {i} seed {seed}\n{text}"));
            }
            write_output(None, &out)?;
        }
    }
    Ok(EXIT_OK)
}

#[derive(serde::Serialize)]
struct FileReport {
    path: String,
    vertices: usize,
    edges: usize,
    labels: usize,
    max_arity: usize,
    avg_arity: f64,
    repeated_vertices: usize,
    duplicate_edges: usize,
}

fn cmd_stats(a: StatsArgs) -> Result<i32, CliError> {
    for path in &a.files {
        let bytes = read_file(path)?;
        let mut table = LabelTable::new();
        let (h, norm) = parse_hypergraph(&bytes[..], &mut table)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let arities: Vec<usize> = h.edges().iter().map(Vec::len).collect();
        let avg = arities.iter().sum::<usize>() as f64 / arities.len().max(1) as f64;
        let report = FileReport {
            path: path.display().to_string(),
            vertices: h.vertex_count(),
            edges: h.edge_count(),
            labels: table.len(),
            max_arity: arities.iter().copied().max().unwrap_or(0),
            avg_arity: (avg * 100.0).round() / 100.0,
            repeated_vertices: norm.repeated_vertices,
            duplicate_edges: norm.duplicate_edges,
        };
        println!(
            "{}",
            serde_json::to_string(&report).expect("report must serialize")
        );
    }
    Ok(EXIT_OK)
}
