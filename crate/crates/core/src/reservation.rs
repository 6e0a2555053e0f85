//! Reservation guards: small vertex sets hit by every subembedding rooted at a
//! candidate vertex.

use crate::graph::VertexId;
use crate::nogood::QuerySet;
use crate::plan::Gcs;

pub const MAX_RESERVATION_SIZE: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReservationGuard {
    /// Sorted.
    pub vertices: Vec<VertexId>,
    pub trivial: bool,
}

impl ReservationGuard {
    pub fn trivial(v: VertexId) -> ReservationGuard {
        ReservationGuard {
            vertices: vec![v],
            trivial: true,
        }
    }

    pub fn new(mut vertices: Vec<VertexId>) -> ReservationGuard {
        vertices.sort_unstable();
        vertices.dedup();
        ReservationGuard {
            vertices,
            trivial: false,
        }
    }
}

/// True when every guard vertex is already used.
pub fn matches_reservation(guard: &ReservationGuard, in_image: impl Fn(VertexId) -> bool) -> bool {
    guard.vertices.iter().all(|&w| in_image(w))
}

/// Whether some partial embedding of the first `i` positions can use every vertex
/// of `s`: each vertex must be a candidate of some earlier position, and every
/// subset must reach at least as many distinct earlier positions as it has members.
pub fn is_matchable(gcs: &Gcs, s: &[VertexId], i: usize) -> bool {
    let prefix = QuerySet::below(i);
    let masks: Vec<QuerySet> = s
        .iter()
        .map(|&w| gcs.inverse(w).intersection(prefix))
        .collect();
    if masks.iter().any(|m| m.is_empty()) {
        return false;
    }
    assert!(
        masks.len() <= MAX_RESERVATION_SIZE,
        "matchability test on {} vertices",
        masks.len()
    );
    let mut union = vec![QuerySet::EMPTY; 1 << masks.len()];
    for sub in 1usize..union.len() {
        let low = sub.trailing_zeros() as usize;
        union[sub] = union[sub & (sub - 1)] | masks[low];
        if union[sub].len() < sub.count_ones() as usize {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ReservationEdgeSet {
    pub edges: Vec<(VertexId, VertexId)>,
}

impl ReservationEdgeSet {
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut vs: Vec<VertexId> = self.edges.iter().flat_map(|&(a, b)| [a, b]).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }
}

/// Pairs `(v', w)` with `v'` a candidate neighbor of the `a`-th candidate `v` of `i`
/// in `C(j)` and `w` in the guard of `(j, v')` other than `v`.
pub fn build_reservation_edges(gcs: &Gcs, i: usize, a: usize, j: usize) -> ReservationEdgeSet {
    let v = gcs.candidates(i)[a];
    let e = gcs
        .edge_between(i, j)
        .expect("reservation edges need a query edge");
    let mut edges = Vec::new();
    for &b in gcs.edge(e).targets(a) {
        let vp = gcs.candidates(j)[b as usize];
        for &w in &gcs.reservation(j, b as usize).vertices {
            if w != v {
                edges.push((vp, w));
            }
        }
    }
    ReservationEdgeSet { edges }
}

/// Greedy cover of `er` that stays matchable at position `i` and within `r` vertices.
pub fn approx_vertex_cover(
    gcs: &Gcs,
    er: &ReservationEdgeSet,
    r: usize,
    i: usize,
) -> Option<Vec<VertexId>> {
    let mut s: Vec<VertexId> = Vec::new();
    let edges = &er.edges;
    for idx in 0..edges.len() {
        let (a, b) = edges[idx];
        if s.contains(&a) || s.contains(&b) {
            continue;
        }
        let choices: Vec<VertexId> = if a == b {
            vec![a]
        } else {
            let touching = |x: VertexId| {
                edges[idx..]
                    .iter()
                    .filter(|&&(p, q)| (p == x || q == x) && !s.contains(&p) && !s.contains(&q))
                    .count()
            };
            if touching(b) > touching(a) {
                vec![b, a]
            } else {
                vec![a, b]
            }
        };
        if s.len() + 1 > r {
            return None;
        }
        let pick = choices.into_iter().find(|&x| {
            s.push(x);
            let ok = is_matchable(gcs, &s, i);
            s.pop();
            ok
        })?;
        s.push(pick);
    }
    s.sort_unstable();
    Some(s)
}

/// Fills every reservation slot, last position first. `r = 0` leaves all guards trivial.
pub fn generate_reservation_guards(gcs: &mut Gcs, r: usize) {
    assert!(
        r <= MAX_RESERVATION_SIZE,
        "reservation size {r} exceeds {MAX_RESERVATION_SIZE}"
    );
    for i in (0..gcs.query_size()).rev() {
        for a in 0..gcs.candidates(i).len() {
            let v = gcs.candidates(i)[a];
            let mut best: Option<Vec<VertexId>> = None;
            if r > 0 {
                for &(j, _) in gcs.forward(i) {
                    let er = build_reservation_edges(gcs, i, a, j);
                    if let Some(s) = approx_vertex_cover(gcs, &er, r, i) {
                        if best.as_ref().is_none_or(|b| s.len() < b.len()) {
                            best = Some(s);
                        }
                    }
                }
            }
            let guard = match best {
                Some(s) => ReservationGuard::new(s),
                None => ReservationGuard::trivial(v),
            };
            gcs.set_reservation(i, a, guard);
        }
    }
}
