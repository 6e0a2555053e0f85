//! Seeded random graphs, random-walk queries and query workloads.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use guardmatch::graph::{serialize_graph, Graph, Label, VertexId};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("{m} edges do not fit in a simple graph on {n} vertices")]
    TooManyEdges { n: usize, m: usize },
    #[error("could not collect {want} distinct vertices by random walk")]
    WalkFailed { want: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform simple graph with exactly `m` edges and uniform labels in `0..label_count`.
pub fn random_labeled_graph(
    n: usize,
    m: usize,
    label_count: u32,
    seed: u64,
) -> Result<Graph, GenError> {
    let pairs = n * n.saturating_sub(1) / 2;
    if m > pairs {
        return Err(GenError::TooManyEdges { n, m });
    }
    let mut r = rng(seed);
    let labels: Vec<Label> = (0..n).map(|_| r.gen_range(0..label_count.max(1))).collect();
    let edges: Vec<(VertexId, VertexId)> = index::sample(&mut r, pairs, m)
        .into_iter()
        .map(|k| pair_from_index(k, n))
        .collect();
    Ok(Graph::from_edges(labels, &edges).expect("generated edges are valid"))
}

/// Maps `0..n(n-1)/2` onto pairs `(a, b)` with `a < b`, row by row.
fn pair_from_index(mut k: usize, n: usize) -> (VertexId, VertexId) {
    let mut a = 0;
    let mut row = n - 1;
    while k >= row {
        k -= row;
        a += 1;
        row -= 1;
    }
    (a as VertexId, (a + 1 + k) as VertexId)
}

pub const WALK_STALL_FACTOR: usize = 10;
pub const WALK_MAX_RESTARTS: usize = 100;

/// Subgraph induced by the first `n` distinct vertices of a random walk. Query
/// vertex `i` is the `i`-th vertex visited. A walk that goes `10 n` steps without
/// reaching a new vertex restarts from a fresh uniform vertex.
pub fn random_walk_query(g: &Graph, n: usize, seed: u64) -> Result<Graph, GenError> {
    if n == 0 || g.vertex_count() < n {
        return Err(GenError::WalkFailed { want: n });
    }
    let mut r = rng(seed);
    for _ in 0..WALK_MAX_RESTARTS {
        let mut cur = r.gen_range(0..g.vertex_count()) as VertexId;
        let mut visited = vec![cur];
        let mut seen: HashSet<VertexId> = HashSet::from([cur]);
        let mut stall = 0;
        while visited.len() < n && stall < WALK_STALL_FACTOR * n {
            let nb = g.neighbors(cur);
            if nb.is_empty() {
                break;
            }
            cur = nb[r.gen_range(0..nb.len())];
            if seen.insert(cur) {
                visited.push(cur);
                stall = 0;
            } else {
                stall += 1;
            }
        }
        if visited.len() == n {
            return Ok(g.induced_subgraph(&visited));
        }
    }
    Err(GenError::WalkFailed { want: n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Density {
    Sparse,
    Dense,
}

impl Density {
    pub fn of(q: &Graph) -> Density {
        if q.average_degree() < 3.0 {
            Density::Sparse
        } else {
            Density::Dense
        }
    }

    pub fn tag(self) -> char {
        match self {
            Density::Sparse => 'S',
            Density::Dense => 'D',
        }
    }
}

#[derive(Clone, Debug)]
pub struct WorkloadQuery {
    pub name: String,
    pub graph: Graph,
    pub density: Density,
}

#[derive(Clone, Debug)]
pub struct Workload {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub count: usize,
    pub queries: Vec<WorkloadQuery>,
}

/// `count` random-walk queries per size. Query seeds derive from `seed`, the size
/// and the index, so adding sizes leaves the others unchanged.
pub fn generate_workload(
    g: &Graph,
    sizes: &[usize],
    count: usize,
    seed: u64,
) -> Result<Workload, GenError> {
    let mut queries = Vec::new();
    for &size in sizes {
        for i in 0..count {
            let qseed = seed
                .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                .wrapping_add((size as u64) << 32)
                .wrapping_add(i as u64);
            let graph = random_walk_query(g, size, qseed)?;
            let density = Density::of(&graph);
            queries.push(WorkloadQuery {
                name: format!("q{size}_{i:05}"),
                graph,
                density,
            });
        }
    }
    Ok(Workload {
        seed,
        sizes: sizes.to_vec(),
        count,
        queries,
    })
}

impl Workload {
    pub fn manifest(&self) -> String {
        let mut m = String::new();
        let sizes: Vec<String> = self.sizes.iter().map(usize::to_string).collect();
        let _ = writeln!(m, "# seed {}", self.seed);
        let _ = writeln!(m, "# sizes {}", sizes.join(","));
        let _ = writeln!(m, "# count {}", self.count);
        for q in &self.queries {
            let _ = writeln!(
                m,
                "{}.graph {}{} {} {} {:.3}",
                q.name,
                q.graph.vertex_count(),
                q.density.tag(),
                q.graph.vertex_count(),
                q.graph.edge_count(),
                q.graph.average_degree()
            );
        }
        m
    }

    /// One graph file per query plus `manifest.txt`.
    pub fn write_to(&self, dir: &Path) -> Result<(), GenError> {
        std::fs::create_dir_all(dir)?;
        for q in &self.queries {
            std::fs::write(
                dir.join(format!("{}.graph", q.name)),
                serialize_graph(&q.graph),
            )?;
        }
        std::fs::write(dir.join("manifest.txt"), self.manifest())?;
        Ok(())
    }
}

/// Query files listed in a manifest, in order.
pub fn read_manifest(dir: &Path) -> Result<Vec<String>, GenError> {
    let text = std::fs::read_to_string(dir.join("manifest.txt"))?;
    Ok(text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .filter_map(|l| l.split_whitespace().next().map(str::to_string))
        .collect())
}
