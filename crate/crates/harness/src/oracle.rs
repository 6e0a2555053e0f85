//! Exhaustive enumeration straight from the embedding definition: labels match,
//! query edges map to data edges, no data vertex is used twice.

use std::collections::VecDeque;

use guardmatch::graph::{Graph, VertexId};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OracleResult {
    /// Sorted; `e[u]` is the image of query vertex `u`.
    pub embeddings: Vec<Vec<VertexId>>,
    pub truncated: bool,
}

/// Breadth-first from vertex 0, then from any vertex left unvisited.
pub fn bfs_order(q: &Graph) -> Vec<usize> {
    let n = q.vertex_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in q.neighbors(u as VertexId) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w as usize);
                }
            }
        }
    }
    order
}

pub fn brute_force_enumerate(q: &Graph, g: &Graph, cap: Option<usize>) -> OracleResult {
    brute_force_with_order(q, g, &bfs_order(q), cap)
}

/// Enumerates with query vertices assigned in `order`, which must be a permutation.
pub fn brute_force_with_order(
    q: &Graph,
    g: &Graph,
    order: &[usize],
    cap: Option<usize>,
) -> OracleResult {
    let n = q.vertex_count();
    assert_eq!(order.len(), n);
    let domain = |u: usize| -> Vec<VertexId> {
        (0..g.vertex_count() as VertexId)
            .filter(|&v| g.label(v) == q.label(u as VertexId))
            .collect()
    };
    let mut st = Enum {
        q,
        g,
        order,
        domains: (0..n).map(domain).collect(),
        image: vec![None; n],
        used: vec![false; g.vertex_count()],
        out: Vec::new(),
        cap,
        truncated: false,
    };
    if n > 0 {
        st.go(0);
    }
    let mut embeddings = st.out;
    embeddings.sort();
    OracleResult {
        embeddings,
        truncated: st.truncated,
    }
}

struct Enum<'a> {
    q: &'a Graph,
    g: &'a Graph,
    order: &'a [usize],
    domains: Vec<Vec<VertexId>>,
    image: Vec<Option<VertexId>>,
    used: Vec<bool>,
    out: Vec<Vec<VertexId>>,
    cap: Option<usize>,
    truncated: bool,
}

impl Enum<'_> {
    fn go(&mut self, p: usize) {
        if self.truncated {
            return;
        }
        if p == self.order.len() {
            if self.cap.is_some_and(|c| self.out.len() >= c) {
                self.truncated = true;
                return;
            }
            self.out
                .push(self.image.iter().map(|x| x.unwrap()).collect());
            return;
        }
        let u = self.order[p];
        for idx in 0..self.domains[u].len() {
            let v = self.domains[u][idx];
            if self.used[v as usize] {
                continue;
            }
            let adjacent =
                self.q
                    .neighbors(u as VertexId)
                    .iter()
                    .all(|&w| match self.image[w as usize] {
                        Some(x) => self.g.has_edge(v, x),
                        None => true,
                    });
            if !adjacent {
                continue;
            }
            self.image[u] = Some(v);
            self.used[v as usize] = true;
            self.go(p + 1);
            self.used[v as usize] = false;
            self.image[u] = None;
        }
    }
}

/// Vertices reachable from `i` by edges to later positions, `i` included. `q` is
/// numbered in matching order.
pub fn inclusive_descendants(q: &Graph, i: usize) -> Vec<usize> {
    let mut seen = vec![false; q.vertex_count()];
    let mut stack = vec![i];
    seen[i] = true;
    while let Some(u) = stack.pop() {
        for &w in q.neighbors(u as VertexId) {
            let w = w as usize;
            if w > u && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    (0..q.vertex_count()).filter(|&u| seen[u]).collect()
}

/// All embeddings of the subquery induced by the inclusive descendants of `i` that
/// send `i` to `v` and every vertex into its candidate set. Each result lists
/// `(position, image)` pairs.
pub fn rooted_subembeddings(
    q: &Graph,
    g: &Graph,
    cands: &[Vec<VertexId>],
    i: usize,
    v: VertexId,
) -> Vec<Vec<(usize, VertexId)>> {
    let members = inclusive_descendants(q, i);
    let sub = q.induced_subgraph(&members.iter().map(|&u| u as VertexId).collect::<Vec<_>>());
    let mut out = Vec::new();
    let mut image = vec![None; members.len()];
    let mut used = vec![false; g.vertex_count()];
    let order = bfs_order(&sub);
    #[allow(clippy::too_many_arguments)]
    fn go(
        p: usize,
        order: &[usize],
        sub: &Graph,
        g: &Graph,
        members: &[usize],
        cands: &[Vec<VertexId>],
        root: (usize, VertexId),
        image: &mut Vec<Option<VertexId>>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<(usize, VertexId)>>,
    ) {
        if p == order.len() {
            out.push(
                members
                    .iter()
                    .zip(image.iter())
                    .map(|(&u, x)| (u, x.unwrap()))
                    .collect(),
            );
            return;
        }
        let s = order[p];
        let u = members[s];
        let options: Vec<VertexId> = if u == root.0 {
            vec![root.1]
        } else {
            cands[u].clone()
        };
        for v in options {
            if used[v as usize] || g.label(v) != sub.label(s as VertexId) {
                continue;
            }
            if !cands[u].contains(&v) {
                continue;
            }
            let ok = sub
                .neighbors(s as VertexId)
                .iter()
                .all(|&w| match image[w as usize] {
                    Some(x) => g.has_edge(v, x),
                    None => true,
                });
            if !ok {
                continue;
            }
            image[s] = Some(v);
            used[v as usize] = true;
            go(p + 1, order, sub, g, members, cands, root, image, used, out);
            used[v as usize] = false;
            image[s] = None;
        }
    }
    go(
        0,
        &order,
        &sub,
        g,
        &members,
        cands,
        (i, v),
        &mut image,
        &mut used,
        &mut out,
    );
    out
}

/// Whether `q` has a simple cycle with at least `len` vertices. Exhaustive, so meant
/// for query-sized graphs.
pub fn has_cycle_of_length_at_least(q: &Graph, len: usize) -> bool {
    fn extend(q: &Graph, start: VertexId, path: &mut Vec<VertexId>, len: usize) -> bool {
        let last = *path.last().unwrap();
        if path.len() >= len.max(3) && q.has_edge(last, start) {
            return true;
        }
        for &w in q.neighbors(last) {
            if w > start && !path.contains(&w) {
                path.push(w);
                if extend(q, start, path, len) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    (0..q.vertex_count() as VertexId).any(|s| extend(q, s, &mut vec![s], len))
}
