//! Undirected vertex-labeled graphs in CSR form, plus the text format reader and writer.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type Label = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<Label>,
    offsets: Vec<usize>,
    adjacency: Vec<VertexId>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Reject files whose declared degrees disagree with the edge list.
    pub strict_degrees: bool,
}

impl Graph {
    /// Builds a graph from per-vertex labels and an edge list.
    ///
    /// Duplicate edges (in either direction) collapse into one. Self-loops and
    /// out-of-range endpoints are rejected.
    pub fn from_edges(labels: Vec<Label>, edges: &[(VertexId, VertexId)]) -> Result<Graph> {
        let n = labels.len();
        let mut pairs = Vec::with_capacity(edges.len() * 2);
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) references a vertex outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on vertex {a}")));
            }
            pairs.push((a, b));
            pairs.push((b, a));
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in &pairs {
            offsets[a as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let adjacency = pairs.into_iter().map(|(_, b)| b).collect();
        Ok(Graph {
            labels,
            offsets,
            adjacency,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn label(&self, v: VertexId) -> Label {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Sorted neighbor list.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        let v = v as usize;
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        if a as usize >= self.vertex_count() || b as usize >= self.vertex_count() {
            return false;
        }
        let (x, y) = if self.degree(a) <= self.degree(b) {
            (a, b)
        } else {
            (b, a)
        };
        self.neighbors(x).binary_search(&y).is_ok()
    }

    /// Every edge once, as (smaller, larger), in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.vertex_count() as VertexId).flat_map(move |a| {
            self.neighbors(a)
                .iter()
                .copied()
                .filter(move |&b| a < b)
                .map(move |b| (a, b))
        })
    }

    pub fn average_degree(&self) -> f64 {
        if self.vertex_count() == 0 {
            return 0.0;
        }
        2.0 * self.edge_count() as f64 / self.vertex_count() as f64
    }

    pub fn distinct_labels(&self) -> usize {
        let mut l = self.labels.clone();
        l.sort_unstable();
        l.dedup();
        l.len()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0 as VertexId]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == n
    }

    /// Subgraph induced by `vertices`; vertex `i` of the result is `vertices[i]`.
    pub fn induced_subgraph(&self, vertices: &[VertexId]) -> Graph {
        let mut index = BTreeMap::new();
        for (i, &v) in vertices.iter().enumerate() {
            index.insert(v, i as VertexId);
        }
        let labels = vertices.iter().map(|&v| self.label(v)).collect();
        let mut edges = Vec::new();
        for (i, &v) in vertices.iter().enumerate() {
            for w in self.neighbors(v) {
                if let Some(&j) = index.get(w) {
                    if (i as VertexId) < j {
                        edges.push((i as VertexId, j));
                    }
                }
            }
        }
        Graph::from_edges(labels, &edges).expect("induced subgraph of a valid graph")
    }

    /// Checks the CSR invariants: sorted, symmetric, loop-free adjacency.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertex_count();
        if self.offsets.len() != n + 1 || *self.offsets.last().unwrap_or(&0) != self.adjacency.len()
        {
            return Err(Error::InvalidGraph("offset array is inconsistent".into()));
        }
        for v in 0..n as VertexId {
            let nb = self.neighbors(v);
            for w in nb.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidGraph(format!(
                        "neighbors of {v} are not strictly increasing"
                    )));
                }
            }
            for &w in nb {
                if w == v {
                    return Err(Error::InvalidGraph(format!("self-loop on vertex {v}")));
                }
                if w as usize >= n || self.neighbors(w).binary_search(&v).is_err() {
                    return Err(Error::InvalidGraph(format!(
                        "edge ({v}, {w}) is not symmetric"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Multiset of neighbor labels of `v`, as label to count.
pub fn nlf_signature(g: &Graph, v: VertexId) -> BTreeMap<Label, usize> {
    let mut sig = BTreeMap::new();
    for &w in g.neighbors(v) {
        *sig.entry(g.label(w)).or_insert(0) += 1;
    }
    sig
}

/// Membership flags of the 2-core (the maximal subgraph of minimum degree 2).
pub fn two_core(g: &Graph) -> Vec<bool> {
    let n = g.vertex_count();
    let mut degree: Vec<usize> = (0..n as VertexId).map(|v| g.degree(v)).collect();
    let mut alive = vec![true; n];
    let mut stack: Vec<VertexId> = (0..n as VertexId)
        .filter(|&v| degree[v as usize] < 2)
        .collect();
    while let Some(v) = stack.pop() {
        if !alive[v as usize] {
            continue;
        }
        alive[v as usize] = false;
        for &w in g.neighbors(v) {
            let w = w as usize;
            if alive[w] {
                degree[w] -= 1;
                if degree[w] == 1 {
                    stack.push(w as VertexId);
                }
            }
        }
    }
    alive
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

/// Reads the `t` / `v` / `e` line format. Lines starting with `#` are comments.
pub fn parse_graph(text: &str, options: ParseOptions) -> Result<Graph> {
    let mut header: Option<(usize, usize)> = None;
    let mut labels: Vec<Option<Label>> = Vec::new();
    let mut declared: Vec<(usize, usize)> = Vec::new();
    let mut edges = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let kind = toks.next().unwrap();
        match kind {
            "t" => {
                if header.is_some() {
                    return Err(parse_err(line, "duplicate header"));
                }
                let n: usize = field(toks.next(), line, "vertex count")?;
                let m: usize = field(toks.next(), line, "edge count")?;
                if n > VertexId::MAX as usize {
                    return Err(parse_err(line, "vertex count too large"));
                }
                header = Some((n, m));
                labels = vec![None; n];
                declared = vec![(0, 0); n];
            }
            "v" => {
                let (n, _) = header.ok_or_else(|| parse_err(line, "vertex line before header"))?;
                let id: usize = field(toks.next(), line, "vertex id")?;
                let label: Label = field(toks.next(), line, "label")?;
                let degree: usize = match toks.next() {
                    Some(t) => field(Some(t), line, "degree")?,
                    None if options.strict_degrees => {
                        return Err(parse_err(line, "missing degree"));
                    }
                    None => 0,
                };
                if id >= n {
                    return Err(parse_err(line, format!("vertex id {id} outside 0..{n}")));
                }
                if labels[id].is_some() {
                    return Err(parse_err(line, format!("vertex {id} declared twice")));
                }
                labels[id] = Some(label);
                declared[id] = (degree, line);
            }
            "e" => {
                let (n, _) = header.ok_or_else(|| parse_err(line, "edge line before header"))?;
                let a: usize = field(toks.next(), line, "edge endpoint")?;
                let b: usize = field(toks.next(), line, "edge endpoint")?;
                if a >= n || b >= n {
                    return Err(parse_err(
                        line,
                        format!("edge ({a}, {b}) references a vertex outside 0..{n}"),
                    ));
                }
                if a == b {
                    return Err(Error::SelfLoop {
                        line,
                        vertex: a as VertexId,
                    });
                }
                edges.push((a as VertexId, b as VertexId));
            }
            other => return Err(parse_err(line, format!("unknown record type '{other}'"))),
        }
    }

    let (_, m) = header.ok_or_else(|| parse_err(last_line.max(1), "missing header line"))?;
    let labels: Vec<Label> = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| parse_err(last_line, format!("vertex {i} never declared"))))
        .collect::<Result<_>>()?;
    let g = Graph::from_edges(labels, &edges)?;
    if options.strict_degrees {
        if g.edge_count() != m {
            return Err(parse_err(
                1,
                format!("header declares {m} edges, found {}", g.edge_count()),
            ));
        }
        for (v, &(d, line)) in declared.iter().enumerate() {
            let actual = g.degree(v as VertexId);
            if d != actual {
                return Err(Error::DegreeMismatch {
                    line,
                    vertex: v as VertexId,
                    declared: d,
                    actual,
                });
            }
        }
    }
    Ok(g)
}

pub fn serialize_graph(g: &Graph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "t {} {}", g.vertex_count(), g.edge_count());
    for v in 0..g.vertex_count() as VertexId {
        let _ = writeln!(out, "v {} {} {}", v, g.label(v), g.degree(v));
    }
    for (a, b) in g.edges() {
        let _ = writeln!(out, "e {a} {b}");
    }
    out
}
