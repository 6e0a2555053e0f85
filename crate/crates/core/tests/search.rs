mod common;

use std::collections::HashMap;
use std::time::Duration;

use common::{all_embeddings, random_connected_subgraph, random_graph};
use guardmatch::nogood::{matches_record, AncestorArray, NodeId, NogoodRecord, QuerySet};
use guardmatch::{
    match_query, Error, Graph, MatchConfig, Plan, PlanOptions, SearchObserver, Termination,
    VertexId,
};
use proptest::prelude::*;

fn clique(n: u32) -> Graph {
    let mut e = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            e.push((a, b));
        }
    }
    Graph::from_edges(vec![0; n as usize], &e).unwrap()
}

fn sorted(mut e: Vec<Vec<VertexId>>) -> Vec<Vec<VertexId>> {
    e.sort();
    e
}

#[test]
fn triangle_in_k4() {
    let r = match_query(&clique(3), &clique(4), &MatchConfig::exhaustive()).unwrap();
    assert_eq!(r.stats.embeddings, 24);
    assert_eq!(sorted(r.embeddings), all_embeddings(&clique(3), &clique(4)));
    assert_eq!(r.stats.termination, Termination::Complete);
}

#[test]
fn single_vertex_query() {
    let g = random_graph(9, 0.3, 1, 3);
    let q = Graph::from_edges(vec![0], &[]).unwrap();
    let r = match_query(&q, &g, &MatchConfig::exhaustive()).unwrap();
    assert_eq!(r.stats.embeddings, 9);
    assert_eq!(r.stats.recursions, 10);
}

#[test]
fn missing_label_gives_nothing() {
    let q = Graph::from_edges(vec![0, 5], &[(0, 1)]).unwrap();
    let r = match_query(&q, &clique(4), &MatchConfig::exhaustive()).unwrap();
    assert_eq!(r.stats.embeddings, 0);
    assert_eq!(r.stats.recursions, 1);
    assert!(r.embeddings.is_empty());
}

#[test]
fn rejected_inputs() {
    let q = Graph::from_edges(vec![0, 0], &[]).unwrap();
    assert_eq!(
        match_query(&q, &clique(3), &MatchConfig::default()).unwrap_err(),
        Error::DisconnectedQuery
    );
    let empty = Graph::from_edges(vec![], &[]).unwrap();
    assert_eq!(
        match_query(&empty, &clique(3), &MatchConfig::default()).unwrap_err(),
        Error::EmptyQuery
    );
    let mut cfg = MatchConfig {
        reservation_size: 21,
        ..MatchConfig::default()
    };
    assert!(matches!(
        match_query(&clique(3), &clique(3), &cfg),
        Err(Error::InvalidConfig(_))
    ));
    cfg.reservation_size = 20;
    assert!(match_query(&clique(3), &clique(3), &cfg).is_ok());
    let cfg = MatchConfig {
        threads: 0,
        ..MatchConfig::default()
    };
    assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
}

#[test]
fn embedding_limit_is_exact() {
    let mut cfg = MatchConfig {
        embedding_limit: Some(1000),
        emit_embeddings: true,
        ..MatchConfig::default()
    };
    let r = match_query(&clique(4), &clique(12), &cfg).unwrap();
    assert_eq!(r.stats.embeddings, 1000);
    assert_eq!(r.embeddings.len(), 1000);
    assert_eq!(r.stats.termination, Termination::EmbeddingLimit);
    let mut all = r.embeddings.clone();
    all.sort();
    all.dedup();
    assert_eq!(all.len(), 1000);

    cfg.threads = 4;
    let r = match_query(&clique(4), &clique(12), &cfg).unwrap();
    assert_eq!(r.stats.embeddings, 1000);
    assert_eq!(r.stats.termination, Termination::EmbeddingLimit);
}

#[test]
fn limit_equal_to_count_still_reports_limit() {
    let mut cfg = MatchConfig {
        embedding_limit: Some(24),
        ..MatchConfig::default()
    };
    let r = match_query(&clique(3), &clique(4), &cfg).unwrap();
    assert_eq!(r.stats.embeddings, 24);
    assert_eq!(r.stats.termination, Termination::EmbeddingLimit);
    cfg.embedding_limit = Some(25);
    let r = match_query(&clique(3), &clique(4), &cfg).unwrap();
    assert_eq!(r.stats.termination, Termination::Complete);
}

#[test]
fn time_limit_stops_search() {
    let cfg = MatchConfig {
        embedding_limit: None,
        time_limit: Some(Duration::from_millis(50)),
        ..MatchConfig::default()
    };
    let r = match_query(&clique(8), &clique(40), &cfg).unwrap();
    assert_eq!(r.stats.termination, Termination::TimeLimit);
    assert!(r.search_time < Duration::from_secs(5));
}

#[test]
fn embeddings_follow_query_ids() {
    let q = Graph::from_edges(vec![0, 1, 2], &[(0, 1), (1, 2)]).unwrap();
    let g = Graph::from_edges(vec![2, 1, 0, 1], &[(0, 1), (1, 2), (2, 3)]).unwrap();
    for order in [vec![0, 1, 2], vec![2, 1, 0], vec![1, 0, 2]] {
        let plan = Plan::build(
            &q,
            &g,
            &PlanOptions {
                reservation_size: 3,
                order: Some(order.clone()),
            },
        )
        .unwrap();
        let r = plan.search(&MatchConfig::exhaustive()).unwrap();
        assert_eq!(r.embeddings, vec![vec![2, 1, 0]]);
        assert_eq!(r.order, order);
    }
}

fn instance() -> impl Strategy<Value = (Graph, Graph)> {
    (8usize..20, 0.15f64..0.5, 1u32..4, 3usize..7, any::<u64>()).prop_filter_map(
        "query needs a large enough component",
        |(n, p, labels, k, seed)| {
            let g = random_graph(n, p, labels, seed);
            let q = random_connected_subgraph(&g, k, seed.rotate_left(17))?;
            Some((q, g))
        },
    )
}

/// Partial embedding, local candidate indices and bounding set.
type Frame = (Vec<VertexId>, Vec<u32>, QuerySet);

/// Local candidate sets at later positions, keyed by position.
#[derive(Default)]
struct Frames {
    seen: HashMap<usize, Vec<Frame>>,
}

impl SearchObserver for Frames {
    fn local_candidates(
        &mut self,
        pos: usize,
        prefix: &[VertexId],
        v: VertexId,
        frame: &[u32],
        bound: QuerySet,
    ) {
        let mut m = prefix.to_vec();
        m.push(v);
        self.seen
            .entry(pos)
            .or_default()
            .push((m, frame.to_vec(), bound));
    }
}

/// Checks every tested record against the partial embedding it was tested on, and
/// every recorded nogood against every later node.
#[derive(Default)]
struct Encoding {
    anc: Option<AncestorArray>,
    prefixes: HashMap<NodeId, Vec<VertexId>>,
    records: Vec<NogoodRecord>,
    checked: usize,
    violations: usize,
}

impl Encoding {
    fn decoded_within(&self, rec: &NogoodRecord, m: &[VertexId]) -> bool {
        let origin = &self.prefixes[&rec.id];
        origin.len() == rec.len && rec.domain.iter().all(|d| d < m.len() && m[d] == origin[d])
    }
}

impl SearchObserver for Encoding {
    fn node_entered(&mut self, id: NodeId, prefix: &[VertexId]) {
        self.prefixes.insert(id, prefix.to_vec());
        match &mut self.anc {
            None => self.anc = Some(AncestorArray::new(id)),
            Some(a) => {
                a.truncate(prefix.len() - 1);
                a.push(id);
            }
        }
        let anc = self.anc.as_ref().unwrap();
        for i in 0..self.records.len() {
            let rec = self.records[i];
            if matches_record(&rec, anc, prefix.len()) {
                self.checked += 1;
                if !self.decoded_within(&rec, prefix) {
                    self.violations += 1;
                }
            }
        }
    }
    fn nogood_tested(&mut self, rec: &NogoodRecord, prefix: &[VertexId], matched: bool) {
        if matched {
            self.checked += 1;
            if !self.decoded_within(rec, prefix) {
                self.violations += 1;
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

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_toggle_combination_matches_brute_force((q, g) in instance()) {
        let expect = all_embeddings(&q, &g);
        for bits in 0..16u8 {
            let cfg = MatchConfig::exhaustive().with_toggles(bits);
            let r = match_query(&q, &g, &cfg).unwrap();
            prop_assert_eq!(r.stats.embeddings as usize, expect.len());
            prop_assert_eq!(&sorted(r.embeddings), &expect, "toggles {:04b}", bits);
        }
    }

    #[test]
    fn threads_do_not_change_results((q, g) in instance(), threads in 2usize..5) {
        let expect = all_embeddings(&q, &g);
        let mut cfg = MatchConfig::exhaustive();
        cfg.threads = threads;
        let r = match_query(&q, &g, &cfg).unwrap();
        prop_assert_eq!(sorted(r.embeddings), expect);
    }

    #[test]
    fn bounding_set_determines_local_candidates((q, g) in instance()) {
        let plan = Plan::build(&q, &g, &PlanOptions::default()).unwrap();
        let mut cfg = MatchConfig::exhaustive();
        cfg.use_ne = false;
        let mut obs = Frames::default();
        plan.search_observed(&cfg, &mut obs);
        for list in obs.seen.values() {
            for (m, frame, bound) in list {
                for (m2, frame2, _) in list {
                    let agrees = bound.iter().all(|b| b < m2.len() && m2[b] == m[b]);
                    if agrees {
                        prop_assert!(frame2.iter().all(|x| frame.binary_search(x).is_ok()),
                            "{:?} {:?} bounded by {:?} vs {:?} {:?}", m, frame, bound, m2, frame2);
                    }
                }
            }
        }
    }

    #[test]
    fn matched_records_decode_into_the_current_embedding((q, g) in instance()) {
        let plan = Plan::build(&q, &g, &PlanOptions::default()).unwrap();
        let mut obs = Encoding::default();
        plan.search_observed(&MatchConfig::exhaustive(), &mut obs);
        prop_assert_eq!(obs.violations, 0);
    }
}
