//! Candidate filtering, matching order and the guarded candidate space.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::{two_core, Graph, Label, VertexId};
use crate::nogood::{QuerySet, MAX_QUERY_VERTICES};
use crate::reservation::ReservationGuard;

/// Per-query-vertex sorted candidate lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSets {
    sets: Vec<Vec<VertexId>>,
}

impl CandidateSets {
    pub fn new(mut sets: Vec<Vec<VertexId>>) -> CandidateSets {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        CandidateSets { sets }
    }

    pub fn get(&self, u: usize) -> &[VertexId] {
        &self.sets[u]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn total(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, u: usize, v: VertexId) -> bool {
        self.sets[u].binary_search(&v).is_ok()
    }

    /// `inverse[v]` lists the query vertices whose candidate set holds `v`.
    pub fn inverse(&self, data_vertices: usize) -> Vec<Vec<usize>> {
        let mut inv = vec![Vec::new(); data_vertices];
        for (u, s) in self.sets.iter().enumerate() {
            for &v in s {
                inv[v as usize].push(u);
            }
        }
        inv
    }

    pub fn into_inner(self) -> Vec<Vec<VertexId>> {
        self.sets
    }
}

pub fn ldf_filter(q: &Graph, g: &Graph) -> CandidateSets {
    let mut by_label: HashMap<Label, Vec<VertexId>> = HashMap::new();
    for v in 0..g.vertex_count() as VertexId {
        by_label.entry(g.label(v)).or_default().push(v);
    }
    let sets = (0..q.vertex_count() as VertexId)
        .map(|u| {
            let d = q.degree(u);
            by_label
                .get(&q.label(u))
                .map(|vs| vs.iter().copied().filter(|&v| g.degree(v) >= d).collect())
                .unwrap_or_default()
        })
        .collect();
    CandidateSets::new(sets)
}

pub fn nlf_filter(q: &Graph, g: &Graph, c: &CandidateSets) -> CandidateSets {
    // Dense ids for the labels that occur in the query; data labels outside it are ignored.
    let mut dense: HashMap<Label, usize> = HashMap::new();
    for &l in q.labels() {
        let next = dense.len();
        dense.entry(l).or_insert(next);
    }
    let mut counts = vec![0usize; dense.len()];
    let mut sets = Vec::with_capacity(c.len());
    for u in 0..q.vertex_count() as VertexId {
        let mut need = vec![0usize; dense.len()];
        for &w in q.neighbors(u) {
            need[dense[&q.label(w)]] += 1;
        }
        let need: Vec<(usize, usize)> = need
            .into_iter()
            .enumerate()
            .filter(|&(_, n)| n > 0)
            .collect();
        let kept = c
            .get(u as usize)
            .iter()
            .copied()
            .filter(|&v| {
                for &w in g.neighbors(v) {
                    if let Some(&l) = dense.get(&g.label(w)) {
                        counts[l] += 1;
                    }
                }
                let ok = need.iter().all(|&(l, n)| counts[l] >= n);
                for &w in g.neighbors(v) {
                    if let Some(&l) = dense.get(&g.label(w)) {
                        counts[l] = 0;
                    }
                }
                ok
            })
            .collect();
        sets.push(kept);
    }
    CandidateSets::new(sets)
}

pub const DP_MAX_SWEEPS: usize = 10;

/// Arc-consistency refinement: drops `v` from `C(u)` when some neighbor `u'` of
/// `u` has no candidate adjacent to `v`.
pub fn dp_refine(q: &Graph, g: &Graph, c: &CandidateSets) -> CandidateSets {
    let n = q.vertex_count();
    let mut sets: Vec<Vec<VertexId>> = (0..n).map(|u| c.get(u).to_vec()).collect();
    let mut member: Vec<Vec<bool>> = vec![vec![false; g.vertex_count()]; n];
    for (u, s) in sets.iter().enumerate() {
        for &v in s {
            member[u][v as usize] = true;
        }
    }
    for sweep in 0..DP_MAX_SWEEPS {
        let mut changed = false;
        let order: Vec<usize> = if sweep % 2 == 0 {
            (0..n).collect()
        } else {
            (0..n).rev().collect()
        };
        for u in order {
            let qn = q.neighbors(u as VertexId);
            let before = sets[u].len();
            let mut kept = Vec::with_capacity(before);
            for &v in &sets[u] {
                let ok = qn.iter().all(|&u2| {
                    g.neighbors(v)
                        .iter()
                        .any(|&w| member[u2 as usize][w as usize])
                });
                if ok {
                    kept.push(v);
                } else {
                    member[u][v as usize] = false;
                }
            }
            if kept.len() != before {
                changed = true;
            }
            sets[u] = kept;
        }
        if !changed {
            break;
        }
    }
    CandidateSets::new(sets)
}

/// LDF, then NLF, then DP refinement.
pub fn filter_candidates(q: &Graph, g: &Graph) -> CandidateSets {
    let c = ldf_filter(q, g);
    let c = nlf_filter(q, g, &c);
    dp_refine(q, g, &c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingOrder {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl MatchingOrder {
    /// Wraps an explicit order after checking that it is a connected permutation.
    pub fn new(q: &Graph, order: Vec<usize>) -> Result<MatchingOrder> {
        let n = q.vertex_count();
        if order.len() != n {
            return Err(Error::InvalidOrder(format!(
                "order has {} entries for {n} query vertices",
                order.len()
            )));
        }
        let mut position = vec![usize::MAX; n];
        for (p, &u) in order.iter().enumerate() {
            if u >= n || position[u] != usize::MAX {
                return Err(Error::InvalidOrder(format!(
                    "{order:?} is not a permutation"
                )));
            }
            position[u] = p;
        }
        for (p, &u) in order.iter().enumerate().skip(1) {
            if !q
                .neighbors(u as VertexId)
                .iter()
                .any(|&w| position[w as usize] < p)
            {
                return Err(Error::InvalidOrder(format!(
                    "vertex {u} has no earlier neighbor"
                )));
            }
        }
        Ok(MatchingOrder { order, position })
    }

    /// Original query vertex at position `p`.
    pub fn vertex(&self, p: usize) -> usize {
        self.order[p]
    }

    /// Position of original query vertex `u`.
    pub fn position(&self, u: usize) -> usize {
        self.position[u]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

/// Greedy connected order: start at the smallest candidate set, then repeatedly
/// take the frontier vertex minimizing `|C(u)| / (1 + ordered neighbors)`.
pub fn build_matching_order(q: &Graph, c: &CandidateSets) -> Result<MatchingOrder> {
    let n = q.vertex_count();
    if n == 0 {
        return Err(Error::EmptyQuery);
    }
    if !q.is_connected() {
        return Err(Error::DisconnectedQuery);
    }
    let size = |u: usize| c.get(u).len();
    let first = (0..n).min_by_key(|&u| (size(u), u)).unwrap();
    let mut placed = vec![false; n];
    let mut ordered_nb = vec![0usize; n];
    let mut order = Vec::with_capacity(n);
    let mut place = |u: usize, placed: &mut Vec<bool>, ordered_nb: &mut Vec<usize>| {
        placed[u] = true;
        order.push(u);
        for &w in q.neighbors(u as VertexId) {
            ordered_nb[w as usize] += 1;
        }
    };
    place(first, &mut placed, &mut ordered_nb);
    for _ in 1..n {
        let mut best: Option<usize> = None;
        for u in 0..n {
            if placed[u] || ordered_nb[u] == 0 {
                continue;
            }
            best = match best {
                None => Some(u),
                Some(b) => {
                    // size(u)/(1+nb(u)) < size(b)/(1+nb(b)), cross-multiplied.
                    let lhs = size(u) * (1 + ordered_nb[b]);
                    let rhs = size(b) * (1 + ordered_nb[u]);
                    if lhs < rhs {
                        Some(u)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        place(
            best.expect("connected query has a frontier"),
            &mut placed,
            &mut ordered_nb,
        );
    }
    MatchingOrder::new(q, order)
}

/// Candidate edges of one query edge `(u_from, u_to)`, `from < to` in position
/// space. For the `a`-th candidate of `u_from`, `targets(a)` holds indices into
/// `C(u_to)` of its data neighbors.
#[derive(Clone, Debug)]
pub struct QueryEdge {
    pub from: usize,
    pub to: usize,
    pub in_two_core: bool,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    ne_base: Option<usize>,
}

impl QueryEdge {
    pub fn targets(&self, a: usize) -> &[u32] {
        &self.targets[self.offsets[a]..self.offsets[a + 1]]
    }

    /// Edge nogood slot of the `off`-th candidate edge of the `a`-th candidate.
    pub fn ne_slot(&self, a: usize, off: usize) -> Option<usize> {
        self.ne_base.map(|b| b + self.offsets[a] + off)
    }

    pub fn candidate_edge_count(&self) -> usize {
        self.targets.len()
    }
}

/// The guarded candidate space, in matching-order positions.
#[derive(Clone, Debug)]
pub struct Gcs {
    query: Graph,
    order: MatchingOrder,
    cands: Vec<Vec<VertexId>>,
    cand_base: Vec<usize>,
    inverse: Vec<QuerySet>,
    backward: Vec<Vec<usize>>,
    forward: Vec<Vec<(usize, usize)>>,
    edges: Vec<QueryEdge>,
    edge_index: Vec<Option<usize>>,
    reservation: Vec<ReservationGuard>,
    ne_slots: usize,
    data_vertices: usize,
}

pub fn build_gcs(q: &Graph, g: &Graph, c: &CandidateSets, order: &MatchingOrder) -> Result<Gcs> {
    let n = q.vertex_count();
    if n > MAX_QUERY_VERTICES {
        return Err(Error::QueryTooLarge {
            vertices: n,
            max: MAX_QUERY_VERTICES,
        });
    }
    if order.len() != n || c.len() != n {
        return Err(Error::InvalidOrder(
            "order or candidates do not fit the query".into(),
        ));
    }
    let labels = (0..n)
        .map(|p| q.label(order.vertex(p) as VertexId))
        .collect();
    let qedges: Vec<(VertexId, VertexId)> = q
        .edges()
        .map(|(a, b)| {
            (
                order.position(a as usize) as VertexId,
                order.position(b as usize) as VertexId,
            )
        })
        .collect();
    let query = Graph::from_edges(labels, &qedges)?;
    let core = two_core(&query);

    let cands: Vec<Vec<VertexId>> = (0..n).map(|p| c.get(order.vertex(p)).to_vec()).collect();
    let mut cand_base = Vec::with_capacity(n + 1);
    let mut acc = 0;
    for s in &cands {
        cand_base.push(acc);
        acc += s.len();
    }
    cand_base.push(acc);

    let mut inverse = vec![QuerySet::EMPTY; g.vertex_count()];
    for (p, s) in cands.iter().enumerate() {
        for &v in s {
            inverse[v as usize].insert(p);
        }
    }

    let mut backward = vec![Vec::new(); n];
    let mut forward = vec![Vec::new(); n];
    let mut edges = Vec::new();
    let mut edge_index = vec![None; n * n];
    let mut ne_slots = 0;
    let mut index_in = vec![NOT_CANDIDATE; g.vertex_count()];
    for (from, to) in query.edges() {
        let (from, to) = (from as usize, to as usize);
        for (b, &w) in cands[to].iter().enumerate() {
            index_in[w as usize] = b as u32;
        }
        let mut offsets = Vec::with_capacity(cands[from].len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for &v in &cands[from] {
            targets.extend(
                g.neighbors(v)
                    .iter()
                    .map(|&w| index_in[w as usize])
                    .filter(|&b| b != NOT_CANDIDATE),
            );
            offsets.push(targets.len());
        }
        for &w in &cands[to] {
            index_in[w as usize] = NOT_CANDIDATE;
        }
        let in_two_core = core[from] && core[to];
        let ne_base = if in_two_core {
            let b = ne_slots;
            ne_slots += targets.len();
            Some(b)
        } else {
            None
        };
        let e = edges.len();
        edges.push(QueryEdge {
            from,
            to,
            in_two_core,
            offsets,
            targets,
            ne_base,
        });
        edge_index[from * n + to] = Some(e);
        edge_index[to * n + from] = Some(e);
        backward[to].push(from);
        forward[from].push((to, e));
    }
    for b in &mut backward {
        b.sort_unstable();
    }
    for f in &mut forward {
        f.sort_unstable();
    }

    let reservation = cands
        .iter()
        .flat_map(|s| s.iter().map(|&v| ReservationGuard::trivial(v)))
        .collect();

    Ok(Gcs {
        query,
        order: order.clone(),
        cands,
        cand_base,
        inverse,
        backward,
        forward,
        edges,
        edge_index,
        reservation,
        ne_slots,
        data_vertices: g.vertex_count(),
    })
}

const NOT_CANDIDATE: u32 = u32::MAX;

impl Gcs {
    pub fn query_size(&self) -> usize {
        self.cands.len()
    }

    /// The query renumbered so that vertex `p` is the `p`-th vertex of the order.
    pub fn query(&self) -> &Graph {
        &self.query
    }

    pub fn order(&self) -> &MatchingOrder {
        &self.order
    }

    pub fn data_vertex_count(&self) -> usize {
        self.data_vertices
    }

    pub fn candidates(&self, p: usize) -> &[VertexId] {
        &self.cands[p]
    }

    pub fn candidate_index(&self, p: usize, v: VertexId) -> Option<usize> {
        self.cands[p].binary_search(&v).ok()
    }

    pub fn total_candidates(&self) -> usize {
        *self.cand_base.last().unwrap()
    }

    /// Flat slot number of the `a`-th candidate of position `p`.
    pub fn vertex_slot(&self, p: usize, a: usize) -> usize {
        self.cand_base[p] + a
    }

    pub fn ne_slot_count(&self) -> usize {
        self.ne_slots
    }

    /// Positions of the candidate sets containing `v`.
    pub fn inverse(&self, v: VertexId) -> QuerySet {
        self.inverse[v as usize]
    }

    /// Earlier neighbors of position `p`, ascending.
    pub fn backward(&self, p: usize) -> &[usize] {
        &self.backward[p]
    }

    /// Later neighbors of position `p` with their edge index, ascending.
    pub fn forward(&self, p: usize) -> &[(usize, usize)] {
        &self.forward[p]
    }

    pub fn edge(&self, e: usize) -> &QueryEdge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[QueryEdge] {
        &self.edges
    }

    pub fn edge_between(&self, p1: usize, p2: usize) -> Option<usize> {
        self.edge_index[p1 * self.query_size() + p2]
    }

    pub fn reservation(&self, p: usize, a: usize) -> &ReservationGuard {
        &self.reservation[self.vertex_slot(p, a)]
    }

    pub(crate) fn set_reservation(&mut self, p: usize, a: usize, guard: ReservationGuard) {
        let s = self.vertex_slot(p, a);
        self.reservation[s] = guard;
    }

    /// Data neighbors of the `a`-th candidate of `from` inside `C(to)`, as data ids.
    pub fn candidate_neighbors(&self, from: usize, a: usize, to: usize) -> Vec<VertexId> {
        let Some(e) = self.edge_between(from, to) else {
            return Vec::new();
        };
        let edge = &self.edges[e];
        assert!(
            edge.from == from,
            "candidate edges are stored from the earlier position"
        );
        edge.targets(a)
            .iter()
            .map(|&b| self.cands[to][b as usize])
            .collect()
    }
}
