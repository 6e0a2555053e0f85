use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{bail, Result};
use clap::Args;
use guardmatch::{match_query, MatchConfig, Termination};
use guardmatch_harness::generate::read_manifest;
use serde::Serialize;

use crate::report::Pruned;
use crate::{read_graph, GuardFlags, LimitFlags};

#[derive(Args)]
pub struct BenchArgs {
    #[arg(short, long, value_name = "PATH")]
    data: PathBuf,
    /// Workload directory written by `gen`.
    #[arg(short, long, value_name = "DIR")]
    workload: PathBuf,
    /// Guard configurations, comma separated: `all`, `none`, `matrix` (all sixteen)
    /// or letters from `r` (reservation), `v` (vertex nogoods), `e` (edge nogoods)
    /// and `b` (backjumping). The `--no-*` flags apply only when this is omitted.
    #[arg(long, value_delimiter = ',')]
    configs: Vec<String>,
    #[command(flatten)]
    guards: GuardFlags,
    #[command(flatten)]
    limits: LimitFlags,
    /// Queries per subgroup.
    #[arg(long, default_value_t = 100, value_name = "N")]
    subgroup_limit: usize,
    /// A configuration whose subgroup takes longer than this in total is marked
    /// did-not-finish and its remaining queries are skipped.
    #[arg(long, value_name = "SEC")]
    subgroup_time: Option<f64>,
    /// One JSON object per row and per summary.
    #[arg(long)]
    json: bool,
}

/// Toggle bits in the order reservation, NV, NE, backjump.
fn parse_configs(specs: &[String]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for s in specs {
        match s.as_str() {
            "all" => out.push(15),
            "none" => out.push(0),
            "matrix" => out.extend(0..16u8),
            letters => {
                let mut bits = 0u8;
                for ch in letters.chars() {
                    bits |= match ch {
                        'r' => 1,
                        'v' => 2,
                        'e' => 4,
                        'b' => 8,
                        '-' => 0,
                        other => bail!("unknown guard letter {other:?} in config {letters:?}"),
                    };
                }
                out.push(bits);
            }
        }
    }
    Ok(out)
}

fn config_name(bits: u8) -> String {
    ['r', 'v', 'e', 'b']
        .iter()
        .enumerate()
        .map(|(i, &c)| if bits & (1 << i) != 0 { c } else { '-' })
        .collect()
}

fn toggles_of(cfg: &MatchConfig) -> u8 {
    cfg.use_reservation as u8
        | (cfg.use_nv as u8) << 1
        | (cfg.use_ne as u8) << 2
        | (cfg.use_backjump as u8) << 3
}

#[derive(Serialize)]
struct Row {
    kind: &'static str,
    query: String,
    config: String,
    subgroup: usize,
    time_ms: f64,
    termination: Option<Termination>,
    embeddings: u64,
    recursions: u64,
    pruned: Option<Pruned>,
    backjumps: u64,
    error: Option<String>,
}

#[derive(Serialize, Default)]
struct Summary {
    kind: &'static str,
    config: String,
    queries: usize,
    run: usize,
    completed: usize,
    limit_terminated: usize,
    time_limited: usize,
    errors: usize,
    over_1s: usize,
    over_1min: usize,
    over_1hr: usize,
    total_time_ms: f64,
    dnf: bool,
    dnf_subgroup: Option<usize>,
}

pub fn cmd_bench(a: &BenchArgs) -> Result<u8> {
    let opts = a.guards.parse_options();
    let g = read_graph(&a.data, opts)?;
    let names = read_manifest(&a.workload)?;
    if a.subgroup_limit == 0 {
        bail!("subgroup size must be positive");
    }
    let mut base = a.guards.config();
    a.limits.apply(&mut base)?;
    base.validate()?;
    let configs = if a.configs.is_empty() {
        vec![toggles_of(&base)]
    } else {
        parse_configs(&a.configs)?
    };
    let subgroup_time = a.subgroup_time.map(Duration::from_secs_f64);

    for bits in configs {
        let cfg = base.clone().with_toggles(bits);
        let mut sum = Summary {
            kind: "summary",
            config: config_name(bits),
            queries: names.len(),
            ..Summary::default()
        };
        for (group, chunk) in names.chunks(a.subgroup_limit).enumerate() {
            let mut group_time = Duration::ZERO;
            for name in chunk {
                let row = run_one(a, &g, &cfg, name, group, opts);
                let elapsed = Duration::from_secs_f64(row.time_ms / 1e3);
                group_time += elapsed;
                sum.run += 1;
                sum.total_time_ms += row.time_ms;
                match row.termination {
                    Some(Termination::Complete) => sum.completed += 1,
                    Some(Termination::EmbeddingLimit) => sum.limit_terminated += 1,
                    Some(Termination::TimeLimit) => sum.time_limited += 1,
                    None => sum.errors += 1,
                }
                let timed_out_at = (row.termination == Some(Termination::TimeLimit))
                    .then_some(cfg.time_limit)
                    .flatten();
                let over = |secs: u64| {
                    let t = Duration::from_secs(secs);
                    elapsed >= t || timed_out_at.is_some_and(|l| l >= t)
                };
                sum.over_1s += over(1) as usize;
                sum.over_1min += over(60) as usize;
                sum.over_1hr += over(3600) as usize;
                emit_row(a.json, &row);
            }
            if subgroup_time.is_some_and(|limit| group_time > limit) {
                sum.dnf = true;
                sum.dnf_subgroup = Some(group);
                break;
            }
        }
        emit_summary(a.json, &sum);
    }
    Ok(0)
}

fn run_one(
    a: &BenchArgs,
    g: &guardmatch::Graph,
    cfg: &MatchConfig,
    name: &str,
    subgroup: usize,
    opts: guardmatch::graph::ParseOptions,
) -> Row {
    let mut row = Row {
        kind: "row",
        query: name.to_string(),
        config: config_name(toggles_of(cfg)),
        subgroup,
        time_ms: 0.0,
        termination: None,
        embeddings: 0,
        recursions: 0,
        pruned: None,
        backjumps: 0,
        error: None,
    };
    let q = match read_graph(&a.workload.join(name), opts) {
        Ok(q) => q,
        Err(e) => {
            row.error = Some(format!("{e:#}"));
            return row;
        }
    };
    let start = Instant::now();
    let r = match_query(&q, g, cfg);
    row.time_ms = start.elapsed().as_secs_f64() * 1e3;
    match r {
        Ok(r) => {
            row.termination = Some(r.stats.termination);
            row.embeddings = r.stats.embeddings;
            row.recursions = r.stats.recursions;
            row.pruned = Some((&r.stats).into());
            row.backjumps = r.stats.backjumps;
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn emit_row(json: bool, r: &Row) {
    if json {
        println!("{}", serde_json::to_string(r).expect("row serializes"));
        return;
    }
    match (&r.error, r.termination) {
        (Some(e), _) => println!("{:<16} {} error: {e}", r.query, r.config),
        (None, Some(t)) => println!(
            "{:<16} {} {:>12.3} ms {:>10} embeddings {:>12} recursions {}",
            r.query,
            r.config,
            r.time_ms,
            r.embeddings,
            r.recursions,
            t.as_str()
        ),
        (None, None) => unreachable!("rows without error carry a termination"),
    }
}

fn emit_summary(json: bool, s: &Summary) {
    if json {
        println!("{}", serde_json::to_string(s).expect("summary serializes"));
        return;
    }
    println!(
        "config {}: {}/{} run, {} complete, {} limit, {} time limit, {} errors; over 1s {}, over 1min {}, over 1hr {}; total {:.1} ms{}",
        s.config,
        s.run,
        s.queries,
        s.completed,
        s.limit_terminated,
        s.time_limited,
        s.errors,
        s.over_1s,
        s.over_1min,
        s.over_1hr,
        s.total_time_ms,
        match s.dnf_subgroup {
            Some(gr) => format!("; DNF in subgroup {gr}"),
            None => String::new(),
        }
    );
}
