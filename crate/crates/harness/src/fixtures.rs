//! Small named instances.

use guardmatch::graph::Graph;

pub const A: u32 = 0;
pub const B: u32 = 1;
pub const C: u32 = 2;
pub const D: u32 = 3;

/// Five-vertex query: triangle `u0 u1 u2` sharing `u2` with triangle `u2 u3 u4`.
/// Labels A B C D A.
pub fn running_query() -> Graph {
    Graph::from_edges(
        vec![A, B, C, D, A],
        &[(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)],
    )
    .unwrap()
}

/// Fourteen-vertex data graph for [`running_query`]: `v0 v1 v13` are A, `v2..v4`
/// B, `v5..v8` C and `v9..v12` D. It has exactly one embedding,
/// `(v1, v4, v7, v10, v0)`.
pub fn running_data() -> Graph {
    let labels = vec![A, A, B, B, B, C, C, C, C, D, D, D, D, A];
    let edges = [
        (0, 2),
        (0, 3),
        (0, 4),
        (0, 5),
        (0, 6),
        (0, 7),
        (0, 9),
        (0, 10),
        (1, 4),
        (1, 7),
        (1, 8),
        (1, 11),
        (1, 12),
        (2, 6),
        (2, 7),
        (3, 5),
        (3, 6),
        (3, 7),
        (3, 8),
        (4, 7),
        (5, 9),
        (5, 13),
        (6, 11),
        (6, 13),
        (7, 10),
        (8, 11),
        (8, 12),
        (8, 13),
        (10, 13),
    ];
    Graph::from_edges(labels, &edges).unwrap()
}

/// Identity matching order, under which the search trace is short enough to check by hand.
pub fn running_order() -> Vec<usize> {
    vec![0, 1, 2, 3, 4]
}

pub fn clique(n: u32, label: u32) -> Graph {
    let mut e = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            e.push((a, b));
        }
    }
    Graph::from_edges(vec![label; n as usize], &e).unwrap()
}

pub fn cycle(n: u32, label: u32) -> Graph {
    let e: Vec<_> = (0..n).map(|a| (a, (a + 1) % n)).collect();
    Graph::from_edges(vec![label; n as usize], &e).unwrap()
}
