//! Engine-versus-oracle comparison over several configurations.

use guardmatch::graph::{Graph, VertexId};
use guardmatch::{match_query, MatchConfig, MatchStats};

use crate::oracle::brute_force_enumerate;

#[derive(Clone, Debug)]
pub struct ConfigRun {
    pub config: MatchConfig,
    pub count: usize,
    pub set_equal: bool,
    pub duplicates: bool,
    pub stats: MatchStats,
    /// First embedding present on one side only, with `true` when the engine has it.
    pub first_difference: Option<(Vec<VertexId>, bool)>,
}

#[derive(Clone, Debug)]
pub struct InstanceReport {
    pub oracle_count: usize,
    pub runs: Vec<ConfigRun>,
}

impl InstanceReport {
    pub fn all_equal(&self) -> bool {
        self.runs.iter().all(|r| r.set_equal)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ComparisonReport {
    pub instances: Vec<InstanceReport>,
    /// `(instance, config)` pairs whose embedding set differs from the oracle's.
    pub mismatches: Vec<(usize, usize)>,
}

impl ComparisonReport {
    pub fn push(&mut self, r: InstanceReport) {
        let i = self.instances.len();
        for (c, run) in r.runs.iter().enumerate() {
            if !run.set_equal {
                self.mismatches.push((i, c));
            }
        }
        self.instances.push(r);
    }
}

/// First element in exactly one of two sorted lists; `true` when it is in `a`.
pub fn first_difference(a: &[Vec<VertexId>], b: &[Vec<VertexId>]) -> Option<(Vec<VertexId>, bool)> {
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => return Some((x.clone(), true)),
            (Some(_), Some(y)) => return Some((y.clone(), false)),
            (Some(x), None) => return Some((x.clone(), true)),
            (None, Some(y)) => return Some((y.clone(), false)),
            (None, None) => unreachable!(),
        }
    }
    None
}

/// Sorts engine output and reports whether it held duplicates.
pub fn normalize(mut e: Vec<Vec<VertexId>>) -> (Vec<Vec<VertexId>>, bool) {
    e.sort();
    let before = e.len();
    e.dedup();
    let dup = e.len() != before;
    (e, dup)
}

/// Runs the oracle once and the engine once per configuration. Limits are taken from
/// the configurations as given; embeddings are always collected.
pub fn compare_runs(
    q: &Graph,
    g: &Graph,
    configs: &[MatchConfig],
) -> Result<InstanceReport, guardmatch::Error> {
    let oracle = brute_force_enumerate(q, g, None).embeddings;
    let mut runs = Vec::with_capacity(configs.len());
    for cfg in configs {
        let mut cfg = cfg.clone();
        cfg.emit_embeddings = true;
        let res = match_query(q, g, &cfg)?;
        let (emb, duplicates) = normalize(res.embeddings);
        let diff = first_difference(&emb, &oracle);
        runs.push(ConfigRun {
            count: emb.len(),
            set_equal: diff.is_none() && !duplicates,
            duplicates,
            stats: res.stats,
            first_difference: diff,
            config: cfg,
        });
    }
    Ok(InstanceReport {
        oracle_count: oracle.len(),
        runs,
    })
}

/// All sixteen guard/backjump combinations with no limit.
pub fn toggle_matrix() -> Vec<MatchConfig> {
    (0..16u8)
        .map(|bits| MatchConfig::exhaustive().with_toggles(bits))
        .collect()
}
