//! Query-vertex sets, search-node encoded nogood records and the mask algebra
//! used to derive them.

use std::fmt;

#[cfg(not(feature = "wide-masks"))]
type Word = u64;
#[cfg(feature = "wide-masks")]
type Word = u128;

/// Largest query the bit sets can describe.
pub const MAX_QUERY_VERTICES: usize = Word::BITS as usize;

/// Set of query-vertex positions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct QuerySet(Word);

impl QuerySet {
    pub const EMPTY: QuerySet = QuerySet(0);

    pub fn singleton(i: usize) -> QuerySet {
        QuerySet(1 << i)
    }

    /// Positions `0..i`.
    pub fn below(i: usize) -> QuerySet {
        if i >= MAX_QUERY_VERTICES {
            QuerySet(Word::MAX)
        } else {
            QuerySet((1 << i) - 1)
        }
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1 << i);
    }

    pub fn with(mut self, i: usize) -> QuerySet {
        self.insert(i);
        self
    }

    pub fn without(mut self, i: usize) -> QuerySet {
        self.remove(i);
        self
    }

    pub fn union(self, other: QuerySet) -> QuerySet {
        QuerySet(self.0 | other.0)
    }

    pub fn intersection(self, other: QuerySet) -> QuerySet {
        QuerySet(self.0 & other.0)
    }

    pub fn is_subset(self, other: QuerySet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Largest position in the set.
    pub fn max(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(MAX_QUERY_VERTICES - 1 - self.0.leading_zeros() as usize)
        }
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut w = self.0;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let i = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(i)
        })
    }
}

impl FromIterator<usize> for QuerySet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = QuerySet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl std::ops::BitOr for QuerySet {
    type Output = QuerySet;
    fn bitor(self, rhs: QuerySet) -> QuerySet {
        self.union(rhs)
    }
}

impl std::ops::BitOrAssign for QuerySet {
    fn bitor_assign(&mut self, rhs: QuerySet) {
        self.0 |= rhs.0;
    }
}

impl fmt::Debug for QuerySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Identifier of a search node. Unique within one run.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct NodeId(pub u64);

/// `ids[d]` is the node whose partial embedding is the length-`d` prefix of the
/// current one.
#[derive(Clone, Debug, Default)]
pub struct AncestorArray {
    ids: Vec<NodeId>,
}

impl AncestorArray {
    pub fn new(root: NodeId) -> AncestorArray {
        AncestorArray { ids: vec![root] }
    }

    /// Depth of the current node, i.e. the length of its partial embedding.
    pub fn depth(&self) -> usize {
        self.ids.len() - 1
    }

    pub fn get(&self, d: usize) -> NodeId {
        self.ids[d]
    }

    pub fn push(&mut self, id: NodeId) {
        self.ids.push(id);
    }

    pub fn pop(&mut self) {
        debug_assert!(self.ids.len() > 1);
        self.ids.pop();
    }

    pub fn truncate(&mut self, depth: usize) {
        self.ids.truncate(depth + 1);
    }
}

/// A nogood stored relative to the node that produced it: it holds at every
/// descendant of the length-`len` ancestor `id`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct NogoodRecord {
    pub id: NodeId,
    pub len: usize,
    pub domain: QuerySet,
}

/// Encodes the sub-mapping of the current partial embedding restricted to `mask`.
pub fn encode_nogood(mask: QuerySet, anc: &AncestorArray) -> NogoodRecord {
    match mask.max() {
        None => NogoodRecord {
            id: anc.get(0),
            len: 0,
            domain: QuerySet::EMPTY,
        },
        Some(i) => {
            debug_assert!(i < anc.depth(), "mask position {i} not assigned");
            NogoodRecord {
                id: anc.get(i + 1),
                len: i + 1,
                domain: mask,
            }
        }
    }
}

/// Whether the current partial embedding of length `depth` extends the sub-mapping
/// the record stands for.
pub fn matches_record(rec: &NogoodRecord, anc: &AncestorArray, depth: usize) -> bool {
    rec.len <= depth && anc.get(rec.len) == rec.id
}

/// Conflict masks for the situations in which extending with `(u_k, v)` fails.
pub mod conflict {
    use super::{NogoodRecord, QuerySet};

    /// `v` is already used by the vertex at position `owner`.
    pub fn injectivity(owner: usize, k: usize) -> QuerySet {
        QuerySet::singleton(owner).with(k)
    }

    /// Every reserved vertex is used; `owners` are the positions using them.
    pub fn reservation(owners: impl IntoIterator<Item = usize>, k: usize) -> QuerySet {
        owners.into_iter().collect::<QuerySet>().with(k)
    }

    /// A stored vertex nogood for `(u_k, v)` matches the current embedding.
    pub fn vertex_nogood(rec: &NogoodRecord, k: usize) -> QuerySet {
        rec.domain.with(k)
    }

    /// Refinement left the frame of some later vertex empty; `bound` is the new
    /// bounding set of that vertex.
    pub fn no_candidate(bound: QuerySet) -> QuerySet {
        bound
    }
}

/// Folds the masks of the children of a node at position `k` into its deadend
/// mask.
#[derive(Clone, Copy, Debug, Default)]
pub struct DeadendFold {
    union: QuerySet,
    short: Option<QuerySet>,
}

impl DeadendFold {
    pub fn new() -> DeadendFold {
        DeadendFold::default()
    }

    /// Adds the deadend mask of one child. Returns true when it excludes `k`,
    /// which settles the fold.
    pub fn add(&mut self, child: QuerySet, k: usize) -> bool {
        if self.short.is_some() {
            return true;
        }
        if !child.contains(k) {
            self.short = Some(child);
            true
        } else {
            self.union |= child;
            false
        }
    }

    pub fn short_circuit(&self) -> Option<QuerySet> {
        self.short
    }

    pub fn union(&self) -> QuerySet {
        self.union
    }

    /// Final mask given the bounding set `bound` of `u_k`, assuming every child
    /// was added.
    pub fn finish(&self, bound: QuerySet, k: usize) -> QuerySet {
        match self.short {
            Some(s) => s,
            None => (self.union | bound).without(k),
        }
    }
}

/// One step of the fixed deadend mask computation for a target `(u_i, v)`.
#[derive(Clone, Copy, Debug)]
pub enum FixedStep {
    /// The node is at the target's own level; `child` is the deadend mask of the
    /// target child.
    TargetChild { child: QuerySet, i: usize },
    /// An embedding through the target was found below this node.
    Found,
    /// The node is itself a conflict with this mask.
    Conflict(QuerySet),
    /// `v` left the frame of `u_i` because it is not adjacent to `M(u_j)`.
    NotAdjacent { j: usize },
    /// `v` left the frame of `u_i` because an edge nogood with this domain matched
    /// at the assignment of `u_j`.
    EdgeNogood { domain: QuerySet, j: usize },
    /// Fold over the children's fixed masks, as in the deadend fold.
    Children {
        fold: DeadendFold,
        bound: QuerySet,
        k: usize,
    },
}

/// Fixed deadend mask for one step, `None` when an embedding through the target
/// exists.
pub fn fixed_deadend_mask(step: FixedStep) -> Option<QuerySet> {
    match step {
        FixedStep::TargetChild { child, i } => Some(child.without(i)),
        FixedStep::Found => None,
        FixedStep::Conflict(m) => Some(m),
        FixedStep::NotAdjacent { j } => Some(QuerySet::singleton(j)),
        FixedStep::EdgeNogood { domain, j } => Some(domain.with(j)),
        FixedStep::Children { fold, bound, k } => Some(fold.finish(bound, k)),
    }
}

/// Vertex and edge nogood tables, one slot per guarded candidate or candidate edge.
#[derive(Clone, Debug)]
pub struct NogoodStore {
    nv: Vec<Option<NogoodRecord>>,
    ne: Vec<Option<NogoodRecord>>,
}

impl NogoodStore {
    pub fn new(nv_slots: usize, ne_slots: usize) -> NogoodStore {
        NogoodStore {
            nv: vec![None; nv_slots],
            ne: vec![None; ne_slots],
        }
    }

    pub fn nv(&self, slot: usize) -> Option<&NogoodRecord> {
        self.nv[slot].as_ref()
    }

    pub fn ne(&self, slot: usize) -> Option<&NogoodRecord> {
        self.ne[slot].as_ref()
    }

    pub fn record_nv(&mut self, slot: usize, rec: NogoodRecord) {
        self.nv[slot] = Some(rec);
    }

    pub fn record_ne(&mut self, slot: usize, rec: NogoodRecord) {
        self.ne[slot] = Some(rec);
    }
}
