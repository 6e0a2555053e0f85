mod common;

use common::{all_embeddings, random_connected_subgraph, random_graph};
use guardmatch::plan::{
    build_gcs, build_matching_order, dp_refine, filter_candidates, ldf_filter, nlf_filter,
    CandidateSets,
};
use guardmatch::Graph;
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (Graph, Graph)> {
    (6usize..16, 0.15f64..0.6, 1u32..4, 2usize..6, any::<u64>()).prop_filter_map(
        "query needs a large enough component",
        |(n, p, labels, k, seed)| {
            let g = random_graph(n, p, labels, seed);
            let q = random_connected_subgraph(&g, k, seed ^ 0x5555)?;
            Some((q, g))
        },
    )
}

fn holds_embeddings(c: &CandidateSets, emb: &[Vec<u32>]) -> bool {
    emb.iter()
        .all(|m| m.iter().enumerate().all(|(u, &v)| c.contains(u, v)))
}

fn satisfies_neighbor_rule(q: &Graph, g: &Graph, c: &CandidateSets) -> bool {
    (0..q.vertex_count()).all(|u| {
        c.get(u).iter().all(|&v| {
            q.neighbors(u as u32)
                .iter()
                .all(|&w| g.neighbors(v).iter().any(|&x| c.contains(w as usize, x)))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn every_stage_keeps_every_embedding((q, g) in instance()) {
        let emb = all_embeddings(&q, &g);
        prop_assert!(!emb.is_empty());
        let ldf = ldf_filter(&q, &g);
        let nlf = nlf_filter(&q, &g, &ldf);
        let dp = dp_refine(&q, &g, &nlf);
        for c in [&ldf, &nlf, &dp] {
            prop_assert!(holds_embeddings(c, &emb));
            for u in 0..q.vertex_count() {
                prop_assert!(c.get(u).iter().all(|&v| g.label(v) == q.label(u as u32)));
            }
        }
        prop_assert_eq!(&filter_candidates(&q, &g), &dp);
    }

    #[test]
    fn refinement_shrinks_and_settles((q, g) in instance()) {
        let nlf = nlf_filter(&q, &g, &ldf_filter(&q, &g));
        let dp = dp_refine(&q, &g, &nlf);
        for u in 0..q.vertex_count() {
            prop_assert!(dp.get(u).iter().all(|&v| nlf.contains(u, v)));
        }
        if satisfies_neighbor_rule(&q, &g, &dp) {
            prop_assert_eq!(dp_refine(&q, &g, &dp), dp);
        }
    }

    #[test]
    fn inverse_index_agrees((q, g) in instance()) {
        let c = filter_candidates(&q, &g);
        let inv = c.inverse(g.vertex_count());
        prop_assert_eq!(inv.len(), g.vertex_count());
        for (v, positions) in inv.iter().enumerate() {
            let expect: Vec<usize> = (0..q.vertex_count()).filter(|&u| c.contains(u, v as u32)).collect();
            prop_assert_eq!(positions, &expect);
        }
    }

    #[test]
    fn greedy_order_is_connected((q, g) in instance()) {
        let c = filter_candidates(&q, &g);
        let o = build_matching_order(&q, &c).unwrap();
        let mut seen = vec![false; q.vertex_count()];
        for p in 0..o.len() {
            let u = o.vertex(p);
            prop_assert_eq!(o.position(u), p);
            prop_assert!(!seen[u]);
            if p > 0 {
                prop_assert!(q.neighbors(u as u32).iter().any(|&w| seen[w as usize]));
            }
            seen[u] = true;
        }
    }

    #[test]
    fn candidate_edges_are_exactly_the_data_edges((q, g) in instance()) {
        let c = filter_candidates(&q, &g);
        let o = build_matching_order(&q, &c).unwrap();
        let gcs = build_gcs(&q, &g, &c, &o).unwrap();
        let core = guardmatch::graph::two_core(gcs.query());
        let mut edges = 0;
        for i in 0..gcs.query_size() {
            for j in i + 1..gcs.query_size() {
                let adjacent = gcs.query().has_edge(i as u32, j as u32);
                let Some(e) = gcs.edge_between(i, j) else {
                    prop_assert!(!adjacent);
                    continue;
                };
                prop_assert!(adjacent);
                edges += 1;
                let e = gcs.edge(e);
                prop_assert_eq!((e.from, e.to), (i, j));
                prop_assert_eq!(e.in_two_core, core[i] && core[j]);
                for (a, &v) in gcs.candidates(i).iter().enumerate() {
                    let listed: Vec<u32> = e.targets(a).iter().map(|&b| gcs.candidates(j)[b as usize]).collect();
                    let expect: Vec<u32> = gcs.candidates(j).iter().copied().filter(|&w| g.has_edge(v, w)).collect();
                    prop_assert_eq!(listed, expect);
                    for off in 0..e.targets(a).len() {
                        prop_assert_eq!(e.ne_slot(a, off).is_some(), e.in_two_core);
                    }
                }
            }
        }
        prop_assert_eq!(edges, q.edge_count());
    }
}
