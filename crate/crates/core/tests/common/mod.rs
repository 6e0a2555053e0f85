#![allow(dead_code)]

use guardmatch::graph::{Graph, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_graph(n: usize, p: f64, labels: u32, seed: u64) -> Graph {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let lab = (0..n).map(|_| r.gen_range(0..labels)).collect();
    let mut edges = Vec::new();
    for a in 0..n as VertexId {
        for b in a + 1..n as VertexId {
            if r.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Graph::from_edges(lab, &edges).unwrap()
}

/// Connected subgraph grown from a random vertex by repeatedly adding a random
/// neighbor of the grown set; `None` if the component is too small.
pub fn random_connected_subgraph(g: &Graph, k: usize, seed: u64) -> Option<Graph> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let start = r.gen_range(0..g.vertex_count()) as VertexId;
    let mut vs = vec![start];
    while vs.len() < k {
        let frontier: Vec<VertexId> = vs
            .iter()
            .flat_map(|&v| g.neighbors(v).iter().copied())
            .filter(|w| !vs.contains(w))
            .collect();
        if frontier.is_empty() {
            return None;
        }
        vs.push(frontier[r.gen_range(0..frontier.len())]);
    }
    Some(g.induced_subgraph(&vs))
}

/// Every injective, label- and edge-preserving map, sorted, indexed by query vertex.
pub fn all_embeddings(q: &Graph, g: &Graph) -> Vec<Vec<VertexId>> {
    fn go(u: usize, q: &Graph, g: &Graph, img: &mut Vec<VertexId>, out: &mut Vec<Vec<VertexId>>) {
        if u == q.vertex_count() {
            out.push(img.clone());
            return;
        }
        for v in 0..g.vertex_count() as VertexId {
            if g.label(v) != q.label(u as VertexId) || img.contains(&v) {
                continue;
            }
            let ok = q
                .neighbors(u as VertexId)
                .iter()
                .filter(|&&w| (w as usize) < u)
                .all(|&w| g.has_edge(v, img[w as usize]));
            if ok {
                img.push(v);
                go(u + 1, q, g, img, out);
                img.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, q, g, &mut Vec::new(), &mut out);
    out.sort();
    out
}
