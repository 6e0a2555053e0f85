//! One line per headline criterion. Exits non-zero if any criterion fails.

use std::io::Write;
use std::time::{Duration, Instant};

use guardmatch::nogood::matches_record;
use guardmatch::nogood::{AncestorArray, NodeId, NogoodRecord};
use guardmatch::reservation::is_matchable;
use guardmatch::{
    match_query, Graph, MatchConfig, Plan, PlanOptions, SearchObserver, Termination, VertexId,
};
use guardmatch_harness::compare::{compare_runs, normalize, toggle_matrix};
use guardmatch_harness::fixtures::{clique, running_data, running_query};
use guardmatch_harness::generate::{random_labeled_graph, random_walk_query, rng};
use guardmatch_harness::oracle::{
    brute_force_enumerate, has_cycle_of_length_at_least, rooted_subembeddings,
};
use guardmatch_harness::trace::{to_positions, EmbeddingIndex, NogoodLog};
use rand::Rng;

struct Instance {
    q: Graph,
    g: Graph,
}

/// Draws instances until `count` are collected; a seed whose walk fails is skipped.
fn instances(
    count: usize,
    base: u64,
    vertices: (usize, usize),
    labels: (u32, u32),
    max_avg_degree: f64,
    query: (usize, usize),
) -> Vec<Instance> {
    let mut out = Vec::with_capacity(count);
    let mut seed = base;
    while out.len() < count {
        seed += 1;
        let mut r = rng(seed);
        let n = r.gen_range(vertices.0..=vertices.1);
        let l = r.gen_range(labels.0..=labels.1);
        let avg = r.gen_range(1.0..=max_avg_degree);
        let m = ((avg * n as f64 / 2.0) as usize).clamp(n - 1, n * (n - 1) / 2);
        let g = random_labeled_graph(n, m, l, seed).unwrap();
        let k = r.gen_range(query.0..=query.1);
        if let Ok(q) = random_walk_query(&g, k, seed.wrapping_mul(31)) {
            out.push(Instance { q, g });
        }
    }
    out
}

fn matrix_instances() -> Vec<Instance> {
    instances(100, 1_000, (20, 40), (2, 4), 12.0, (6, 8))
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{} {name}: {} [{:.1}s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        t.elapsed().as_secs_f64()
    );
    o.pass
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let set = instances(500, 0, (10, 40), (2, 6), 8.0, (3, 8));
    let mut bad = 0;
    let mut total = 0usize;
    for inst in &set {
        let r = compare_runs(&inst.q, &inst.g, &[MatchConfig::exhaustive()]).unwrap();
        total += r.oracle_count;
        if !r.all_equal() {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: bad == 0 && secs < 120.0,
        detail: format!(
            "{} instances, {total} embeddings, {bad} mismatches, {secs:.1}s",
            set.len()
        ),
    }
}

fn running_example() -> Outcome {
    let r = match_query(
        &running_query(),
        &running_data(),
        &MatchConfig::exhaustive(),
    )
    .unwrap();
    let oracle = brute_force_enumerate(&running_query(), &running_data(), None).embeddings;
    let expected = vec![1, 4, 7, 10, 0];
    Outcome {
        pass: r.embeddings.contains(&expected) && normalize(r.embeddings.clone()).0 == oracle,
        detail: format!(
            "embeddings {:?}, oracle count {}",
            r.embeddings,
            oracle.len()
        ),
    }
}

fn toggle_matrix_soundness(set: &[Instance]) -> Outcome {
    let configs = toggle_matrix();
    let (mut bad, mut worse, mut cyclic, mut lower) = (0, 0, 0, 0);
    for inst in set {
        let r = compare_runs(&inst.q, &inst.g, &configs).unwrap();
        if !r.all_equal() {
            bad += 1;
        }
        let all = r.runs[15].stats.recursions;
        let none = r.runs[0].stats.recursions;
        if all > none {
            worse += 1;
        }
        if has_cycle_of_length_at_least(&inst.q, 4) {
            cyclic += 1;
            if all < none {
                lower += 1;
            }
        }
    }
    Outcome {
        pass: bad == 0 && worse == 0 && cyclic > 0 && 2 * lower >= cyclic,
        detail: format!(
            "{} instances x 16 configs, {bad} mismatched, {worse} above baseline, strictly lower on {lower}/{cyclic} with a 4+ cycle",
            set.len()
        ),
    }
}

fn reservation_validity() -> Outcome {
    let set = instances(50, 5_000, (10, 25), (2, 4), 8.0, (3, 7));
    let r = 3;
    let (mut guards, mut bad) = (0, 0);
    for inst in &set {
        let plan = Plan::build(
            &inst.q,
            &inst.g,
            &PlanOptions {
                reservation_size: r,
                order: None,
            },
        )
        .unwrap();
        let gcs = plan.gcs();
        let cands: Vec<Vec<VertexId>> = (0..gcs.query_size())
            .map(|p| gcs.candidates(p).to_vec())
            .collect();
        for p in 0..gcs.query_size() {
            for (a, &v) in cands[p].iter().enumerate() {
                let guard = gcs.reservation(p, a);
                if guard.trivial {
                    continue;
                }
                guards += 1;
                let hits = rooted_subembeddings(gcs.query(), &inst.g, &cands, p, v)
                    .iter()
                    .all(|s| s.iter().any(|(_, w)| guard.vertices.contains(w)));
                if !hits || guard.vertices.len() > r || !is_matchable(gcs, &guard.vertices, p) {
                    bad += 1;
                }
            }
        }
    }
    Outcome {
        pass: bad == 0 && guards > 0,
        detail: format!(
            "{guards} non-trivial guards on {} instances, {bad} invalid",
            set.len()
        ),
    }
}

fn nogood_validity(set: &[Instance]) -> Outcome {
    let (mut checked, mut instances_used, mut bad) = (0usize, 0, 0);
    for inst in set {
        let oracle = brute_force_enumerate(&inst.q, &inst.g, Some(10_000));
        if oracle.truncated {
            continue;
        }
        instances_used += 1;
        let plan = Plan::build(&inst.q, &inst.g, &PlanOptions::default()).unwrap();
        let order = plan.gcs().order().as_slice().to_vec();
        let index = EmbeddingIndex::new(
            oracle
                .embeddings
                .iter()
                .map(|e| to_positions(e, &order))
                .collect(),
        );
        let plan0 = Plan::build(
            &inst.q,
            &inst.g,
            &PlanOptions {
                reservation_size: 0,
                order: None,
            },
        )
        .unwrap();
        for cfg in toggle_matrix() {
            if !cfg.use_nv && !cfg.use_ne {
                continue;
            }
            let mut log = NogoodLog::default();
            let p = if cfg.use_reservation { &plan } else { &plan0 };
            p.search_observed(&cfg, &mut log);
            for (_, a) in &log.nogoods {
                checked += 1;
                if index.witness(a).is_some() {
                    bad += 1;
                }
            }
        }
    }
    Outcome {
        pass: bad == 0 && checked > 0,
        detail: format!("{checked} recorded nogoods on {instances_used} instances, {bad} contained in an embedding"),
    }
}

/// Tests sampled stored records against every node the search enters.
struct EncodingProbe {
    anc: Option<AncestorArray>,
    prefixes: std::collections::HashMap<NodeId, Vec<VertexId>>,
    records: Vec<NogoodRecord>,
    rng: rand_chacha::ChaCha8Rng,
    pairs: usize,
    matched: usize,
    violations: usize,
}

const PROBES_PER_NODE: usize = 32;

impl SearchObserver for EncodingProbe {
    fn node_entered(&mut self, id: NodeId, prefix: &[VertexId]) {
        self.prefixes.insert(id, prefix.to_vec());
        match &mut self.anc {
            None => self.anc = Some(AncestorArray::new(id)),
            Some(a) => {
                a.truncate(prefix.len() - 1);
                a.push(id);
            }
        }
        if self.records.is_empty() {
            return;
        }
        let anc = self.anc.as_ref().unwrap();
        for _ in 0..PROBES_PER_NODE {
            let rec = self.records[self.rng.gen_range(0..self.records.len())];
            self.pairs += 1;
            if matches_record(&rec, anc, prefix.len()) {
                self.matched += 1;
                let origin = &self.prefixes[&rec.id];
                if !rec
                    .domain
                    .iter()
                    .all(|d| d < prefix.len() && prefix[d] == origin[d])
                {
                    self.violations += 1;
                }
            }
        }
    }
    fn nv_recorded(&mut self, _pos: usize, _v: VertexId, rec: &NogoodRecord) {
        self.records.push(*rec);
    }
    fn ne_recorded(
        &mut self,
        _from: (usize, VertexId),
        _to: (usize, VertexId),
        rec: &NogoodRecord,
    ) {
        self.records.push(*rec);
    }
}

fn search_node_encoding(set: &[Instance]) -> Outcome {
    let (mut pairs, mut matched, mut violations) = (0, 0, 0);
    for (i, inst) in set.iter().enumerate() {
        let plan = Plan::build(&inst.q, &inst.g, &PlanOptions::default()).unwrap();
        let mut probe = EncodingProbe {
            anc: None,
            prefixes: Default::default(),
            records: Vec::new(),
            rng: rng(i as u64),
            pairs: 0,
            matched: 0,
            violations: 0,
        };
        plan.search_observed(&MatchConfig::exhaustive(), &mut probe);
        pairs += probe.pairs;
        matched += probe.matched;
        violations += probe.violations;
    }
    Outcome {
        pass: pairs >= 100_000 && violations == 0,
        detail: format!("{pairs} pairs sampled, {matched} matched, {violations} violations"),
    }
}

fn r_sweep(set: &[Instance]) -> Outcome {
    let mut bad = 0;
    let mut rec = [0u64; 5];
    for inst in set {
        let oracle = brute_force_enumerate(&inst.q, &inst.g, None).embeddings;
        for (r, total) in rec.iter_mut().enumerate() {
            let mut cfg = MatchConfig::exhaustive();
            cfg.reservation_size = r;
            let res = match_query(&inst.q, &inst.g, &cfg).unwrap();
            *total += res.stats.recursions;
            if normalize(res.embeddings).0 != oracle {
                bad += 1;
            }
        }
    }
    let mean = |r: usize| rec[r] as f64 / set.len() as f64;
    Outcome {
        pass: bad == 0 && rec[3] <= rec[0],
        detail: format!(
            "{bad} mismatches over r=0..4; mean recursions {}",
            (0..5)
                .map(|r| format!("r{r}={:.1}", mean(r)))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    }
}

fn limit_semantics() -> Outcome {
    let (q, g) = (clique(5, 0), clique(15, 0));
    let cfg = MatchConfig {
        emit_embeddings: true,
        ..MatchConfig::default()
    };
    let r = match_query(&q, &g, &cfg).unwrap();
    let (distinct, dup) = normalize(r.embeddings.clone());
    let valid = distinct.iter().all(|e| {
        q.edges()
            .all(|(a, b)| g.has_edge(e[a as usize], e[b as usize]))
    });
    Outcome {
        pass: r.stats.embeddings == 100_000
            && distinct.len() == 100_000
            && !dup
            && valid
            && r.stats.termination == Termination::EmbeddingLimit,
        detail: format!(
            "K5 in K15 (360360 embeddings): emitted {}, termination {}",
            r.stats.embeddings,
            r.stats.termination.as_str()
        ),
    }
}

fn parallel_equivalence(set: &[Instance]) -> Outcome {
    let mut bad = 0;
    let mut rec = [0u64; 4];
    for inst in set {
        let mut reference = None;
        for (slot, threads) in [1, 2, 4, 8].into_iter().enumerate() {
            let mut cfg = MatchConfig::exhaustive();
            cfg.threads = threads;
            let r = match_query(&inst.q, &inst.g, &cfg).unwrap();
            rec[slot] += r.stats.recursions;
            let (e, dup) = normalize(r.embeddings);
            match &reference {
                None => reference = Some(e),
                Some(x) if *x == e && !dup => {}
                Some(_) => bad += 1,
            }
        }
    }
    let within = rec
        .iter()
        .all(|&x| (x as f64 - rec[0] as f64).abs() <= 0.25 * rec[0] as f64);
    Outcome {
        pass: bad == 0 && within,
        detail: format!(
            "{} instances, {bad} mismatches, recursions 1/2/4/8 threads {rec:?}",
            set.len()
        ),
    }
}

/// Fixed eight-vertex query: a 6-cycle with a chord and two pendants.
fn smoke_query() -> Graph {
    Graph::from_edges(
        vec![0, 1, 2, 0, 1, 2, 3, 3],
        &[
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 0),
            (0, 3),
            (1, 6),
            (4, 7),
        ],
    )
    .unwrap()
}

fn build_time(q: &Graph, g: &Graph) -> Duration {
    (0..5)
        .map(|_| {
            let t = Plan::build(q, g, &PlanOptions::default())
                .unwrap()
                .timings();
            t.gcs + t.reservation
        })
        .min()
        .unwrap()
}

fn complexity_smoke() -> Outcome {
    let q = smoke_query();
    let sizes = [10_000usize, 20_000, 40_000, 80_000];
    let times: Vec<Duration> = sizes
        .iter()
        .map(|&m| build_time(&q, &random_labeled_graph(m / 4, m, 4, m as u64).unwrap()))
        .collect();
    let ratios: Vec<f64> = times
        .windows(2)
        .map(|w| w[1].as_secs_f64() / w[0].as_secs_f64())
        .collect();
    Outcome {
        pass: ratios.iter().all(|&r| r < 3.0),
        detail: format!(
            "build times {:?} ms, ratios {:?}",
            times
                .iter()
                .map(|t| (t.as_secs_f64() * 1e4).round() / 10.0)
                .collect::<Vec<_>>(),
            ratios
                .iter()
                .map(|r| (r * 100.0).round() / 100.0)
                .collect::<Vec<_>>()
        ),
    }
}

fn main() {
    let matrix = matrix_instances();
    let results = [
        report("oracle equivalence", oracle_equivalence),
        report("running example replay", running_example),
        report("guard-toggle soundness matrix", || {
            toggle_matrix_soundness(&matrix)
        }),
        report("reservation validity", reservation_validity),
        report("nogood validity", || nogood_validity(&matrix)),
        report("search-node encoding", || search_node_encoding(&matrix)),
        report("r-sweep", || r_sweep(&matrix)),
        report("limit semantics", limit_semantics),
        report("parallel equivalence", || {
            parallel_equivalence(&matrix[..50])
        }),
        report("complexity smoke", complexity_smoke),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
