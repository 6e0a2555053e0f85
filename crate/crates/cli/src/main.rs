mod bench;
mod report;

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use guardmatch::graph::{parse_graph, Graph, ParseOptions};
use guardmatch::{match_query, MatchConfig, Termination, VertexId};
use guardmatch_harness::compare::{first_difference, normalize};
use guardmatch_harness::generate::generate_workload;
use guardmatch_harness::oracle::brute_force_enumerate;
use serde::Serialize;

use report::RunReport;

const EXIT_LIMIT: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

/// Oracle-backed verification refuses anything larger unless forced.
const ENVELOPE_DATA_VERTICES: usize = 40;
const ENVELOPE_QUERY_VERTICES: usize = 8;
const ENVELOPE_LABELS: usize = 6;

#[derive(Parser)]
#[command(
    name = "guardmatch",
    version,
    about = "Subgraph matching with reservation and nogood guards"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate embeddings of a query graph in a data graph.
    Match(MatchArgs),
    /// Compare the engine's embedding set with brute-force enumeration.
    Verify(VerifyArgs),
    /// Write a workload of random-walk queries drawn from a data graph.
    Gen(GenArgs),
    /// Run every query of a workload under one or more guard configurations.
    Bench(bench::BenchArgs),
}

#[derive(Args, Clone, Debug)]
pub struct GuardFlags {
    /// Maximum reservation guard size; 0 keeps every guard trivial.
    #[arg(long, default_value_t = 3, value_name = "R")]
    reservation_size: usize,
    #[arg(long)]
    no_reservation: bool,
    #[arg(long)]
    no_nv: bool,
    #[arg(long)]
    no_ne: bool,
    #[arg(long)]
    no_backjump: bool,
    #[arg(long, default_value_t = 1, value_name = "N")]
    threads: usize,
    /// Recorded in reports; the search itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reject graph files whose declared degrees disagree with their edges.
    #[arg(long)]
    strict_degrees: bool,
}

#[derive(Args, Clone, Debug)]
pub struct LimitFlags {
    /// Stop after this many embeddings; 0 means no limit.
    #[arg(long, default_value_t = 100_000, value_name = "N")]
    limit: u64,
    /// Stop the search after this many seconds.
    #[arg(long, visible_alias = "per-query-time-limit", value_name = "SEC")]
    time_limit: Option<f64>,
}

impl GuardFlags {
    fn config(&self) -> MatchConfig {
        MatchConfig {
            reservation_size: self.reservation_size,
            use_reservation: !self.no_reservation,
            use_nv: !self.no_nv,
            use_ne: !self.no_ne,
            use_backjump: !self.no_backjump,
            threads: self.threads,
            seed: self.seed,
            ..MatchConfig::default()
        }
    }

    fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            strict_degrees: self.strict_degrees,
        }
    }
}

impl LimitFlags {
    fn apply(&self, cfg: &mut MatchConfig) -> Result<()> {
        cfg.embedding_limit = (self.limit > 0).then_some(self.limit);
        cfg.time_limit = match self.time_limit {
            None => None,
            Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
            Some(s) => anyhow::bail!("time limit must be a positive number of seconds, got {s}"),
        };
        Ok(())
    }
}

#[derive(Args)]
struct MatchArgs {
    #[arg(short, long, value_name = "PATH")]
    data: PathBuf,
    #[arg(short, long, value_name = "PATH")]
    query: PathBuf,
    #[command(flatten)]
    guards: GuardFlags,
    #[command(flatten)]
    limits: LimitFlags,
    /// Print one JSON object instead of text.
    #[arg(long)]
    json: bool,
    /// Write every embedding, one per line, image of query vertex 0 first.
    #[arg(long, value_name = "PATH")]
    emit_embeddings: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(short, long, value_name = "PATH")]
    data: PathBuf,
    #[arg(short, long, value_name = "PATH")]
    query: PathBuf,
    #[command(flatten)]
    guards: GuardFlags,
    #[arg(long)]
    json: bool,
    /// Run even when the instance is too large for comfortable brute force.
    #[arg(long)]
    force: bool,
    /// Drop or invent one engine embedding before comparing.
    #[arg(long, hide = true)]
    inject_mismatch: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(short, long, value_name = "PATH")]
    data: PathBuf,
    /// Query sizes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Queries per size.
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(short, long, value_name = "DIR")]
    out: PathBuf,
    #[arg(long)]
    strict_degrees: bool,
}

pub fn read_graph(path: &Path, options: ParseOptions) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text, options).with_context(|| format!("parsing {}", path.display()))
}

fn write_embeddings(path: &Path, embeddings: &[Vec<VertexId>]) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for e in embeddings {
        let line: Vec<String> = e.iter().map(VertexId::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_match(a: &MatchArgs) -> Result<u8> {
    let opts = a.guards.parse_options();
    let g = read_graph(&a.data, opts)?;
    let q = read_graph(&a.query, opts)?;
    let mut cfg = a.guards.config();
    a.limits.apply(&mut cfg)?;
    cfg.emit_embeddings = a.emit_embeddings.is_some();
    let start = Instant::now();
    let r = match_query(&q, &g, &cfg)?;
    let wall = start.elapsed();
    if let Some(path) = &a.emit_embeddings {
        write_embeddings(path, &r.embeddings)?;
    }
    let report = RunReport::new(
        a.data.display().to_string(),
        a.query.display().to_string(),
        &cfg,
        &r,
        wall,
    );
    if a.json {
        println!("{}", serde_json::to_string(&report)?);
    } else {
        println!("{report}");
    }
    Ok(match r.stats.termination {
        Termination::Complete => 0,
        Termination::EmbeddingLimit | Termination::TimeLimit => EXIT_LIMIT,
    })
}

#[derive(Serialize)]
struct Difference {
    only_in: &'static str,
    embedding: Vec<VertexId>,
}

#[derive(Serialize)]
struct VerifyReport {
    data: String,
    query: String,
    equal: bool,
    engine: usize,
    oracle: usize,
    duplicates: bool,
    first_difference: Option<Difference>,
}

fn label_count(q: &Graph, g: &Graph) -> usize {
    let mut all: Vec<_> = q.labels().iter().chain(g.labels()).copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

fn cmd_verify(a: &VerifyArgs) -> Result<u8> {
    let opts = a.guards.parse_options();
    let g = read_graph(&a.data, opts)?;
    let q = read_graph(&a.query, opts)?;
    let labels = label_count(&q, &g);
    if !a.force
        && (g.vertex_count() > ENVELOPE_DATA_VERTICES
            || q.vertex_count() > ENVELOPE_QUERY_VERTICES
            || labels > ENVELOPE_LABELS)
    {
        anyhow::bail!(
            "instance ({} data vertices, {} query vertices, {labels} labels) exceeds the \
             verification envelope ({ENVELOPE_DATA_VERTICES}, {ENVELOPE_QUERY_VERTICES}, \
             {ENVELOPE_LABELS}); pass --force to run anyway",
            g.vertex_count(),
            q.vertex_count()
        );
    }
    let mut cfg = a.guards.config();
    cfg.embedding_limit = None;
    cfg.emit_embeddings = true;
    let r = match_query(&q, &g, &cfg)?;
    let (mut engine, duplicates) = normalize(r.embeddings);
    if a.inject_mismatch {
        if engine.is_empty() {
            engine.push(vec![0; q.vertex_count()]);
        } else {
            engine.remove(0);
        }
    }
    let oracle = brute_force_enumerate(&q, &g, None).embeddings;
    let diff = first_difference(&engine, &oracle);
    let equal = diff.is_none() && !duplicates;
    let report = VerifyReport {
        data: a.data.display().to_string(),
        query: a.query.display().to_string(),
        equal,
        engine: engine.len(),
        oracle: oracle.len(),
        duplicates,
        first_difference: diff.map(|(e, in_engine)| Difference {
            only_in: if in_engine { "engine" } else { "oracle" },
            embedding: e,
        }),
    };
    if a.json {
        println!("{}", serde_json::to_string(&report)?);
    } else if equal {
        println!("equal: {} embeddings", report.oracle);
    } else {
        println!(
            "MISMATCH: engine {} oracle {}",
            report.engine, report.oracle
        );
        if duplicates {
            println!("engine reported duplicate embeddings");
        }
        if let Some(d) = &report.first_difference {
            let pairs: Vec<String> = d
                .embedding
                .iter()
                .enumerate()
                .map(|(u, v)| format!("u{u}->v{v}"))
                .collect();
            println!(
                "first difference, only in {}: {}",
                d.only_in,
                pairs.join(" ")
            );
        }
    }
    Ok(if equal { 0 } else { EXIT_MISMATCH })
}

fn cmd_gen(a: &GenArgs) -> Result<u8> {
    let g = read_graph(
        &a.data,
        ParseOptions {
            strict_degrees: a.strict_degrees,
        },
    )?;
    let w = generate_workload(&g, &a.sizes, a.count, a.seed)?;
    w.write_to(&a.out)?;
    println!("wrote {} queries to {}", w.queries.len(), a.out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Match(a) => cmd_match(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => bench::cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
