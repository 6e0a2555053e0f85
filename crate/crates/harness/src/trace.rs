//! Observers that turn the engine's encoded nogoods back into assignment sets.

use std::collections::HashMap;

use guardmatch::nogood::{NodeId, NogoodRecord};
use guardmatch::{SearchObserver, VertexId};

/// An assignment set in matching-order positions.
pub type Assignments = Vec<(usize, VertexId)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NogoodKind {
    Vertex,
    Edge,
}

/// Every vertex and edge nogood written during one search, decoded.
#[derive(Default)]
pub struct NogoodLog {
    prefixes: HashMap<NodeId, Vec<VertexId>>,
    pub nogoods: Vec<(NogoodKind, Assignments)>,
}

impl NogoodLog {
    /// The sub-mapping a record stands for.
    pub fn decode(&self, rec: &NogoodRecord) -> Assignments {
        let origin = &self.prefixes[&rec.id];
        assert_eq!(
            origin.len(),
            rec.len,
            "record length disagrees with its node"
        );
        rec.domain.iter().map(|p| (p, origin[p])).collect()
    }
}

impl SearchObserver for NogoodLog {
    fn node_entered(&mut self, id: NodeId, prefix: &[VertexId]) {
        self.prefixes.insert(id, prefix.to_vec());
    }

    fn nv_recorded(&mut self, pos: usize, v: VertexId, rec: &NogoodRecord) {
        let mut a = self.decode(rec);
        a.push((pos, v));
        self.nogoods.push((NogoodKind::Vertex, a));
    }

    fn ne_recorded(&mut self, from: (usize, VertexId), to: (usize, VertexId), rec: &NogoodRecord) {
        let mut a = self.decode(rec);
        a.push(from);
        a.push(to);
        self.nogoods.push((NogoodKind::Edge, a));
    }
}

/// Index of full embeddings (position space) by single assignment, for containment
/// queries.
pub struct EmbeddingIndex {
    embeddings: Vec<Vec<VertexId>>,
    by_assignment: HashMap<(usize, VertexId), Vec<usize>>,
}

impl EmbeddingIndex {
    pub fn new(embeddings: Vec<Vec<VertexId>>) -> EmbeddingIndex {
        let mut by_assignment: HashMap<_, Vec<usize>> = HashMap::new();
        for (i, e) in embeddings.iter().enumerate() {
            for (p, &v) in e.iter().enumerate() {
                by_assignment.entry((p, v)).or_default().push(i);
            }
        }
        EmbeddingIndex {
            embeddings,
            by_assignment,
        }
    }

    /// Some embedding containing every assignment of `a`.
    pub fn witness(&self, a: &[(usize, VertexId)]) -> Option<&[VertexId]> {
        let Some(&first) = a.first() else {
            return self.embeddings.first().map(Vec::as_slice);
        };
        self.by_assignment
            .get(&first)?
            .iter()
            .map(|&i| self.embeddings[i].as_slice())
            .find(|e| a.iter().all(|&(p, v)| e[p] == v))
    }
}

/// Reorders an embedding indexed by query vertex into matching-order positions.
pub fn to_positions(e: &[VertexId], order: &[usize]) -> Vec<VertexId> {
    order.iter().map(|&u| e[u]).collect()
}
