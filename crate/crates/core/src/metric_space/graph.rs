use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{DistanceTable, MetricError, MAX_GRAPH_POINTS};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Dijkstra from every source over an undirected weighted graph.
pub(super) fn all_pairs_shortest_paths(
    n: usize,
    edges: &[(usize, usize, f64)],
) -> Result<DistanceTable, MetricError> {
    if n > MAX_GRAPH_POINTS {
        return Err(MetricError::GraphTooLarge { n });
    }
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (edge, &(i, j, weight)) in edges.iter().enumerate() {
        let invalid = |reason| MetricError::InvalidEdge { edge, i, j, weight, reason };
        if i >= n || j >= n {
            return Err(invalid("endpoint out of range"));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(invalid("weight must be finite and nonnegative"));
        }
        adjacency[i].push((j, weight));
        adjacency[j].push((i, weight));
    }

    let mut data = vec![f64::INFINITY; n * n];
    let mut heap = BinaryHeap::new();
    for source in 0..n {
        let row = &mut data[source * n..(source + 1) * n];
        row[source] = 0.0;
        heap.push(Reverse((Dist(0.0), source)));
        while let Some(Reverse((Dist(d), u))) = heap.pop() {
            if d > row[u] {
                continue;
            }
            for &(v, w) in &adjacency[u] {
                let candidate = d + w;
                if candidate < row[v] {
                    row[v] = candidate;
                    heap.push(Reverse((Dist(candidate), v)));
                }
            }
        }
        if let Some(j) = row.iter().position(|d| d.is_infinite()) {
            return Err(MetricError::Disconnected { i: source, j });
        }
    }
    // path sums can differ in the last bit between directions
    for i in 0..n {
        for j in (i + 1)..n {
            let d = data[i * n + j].min(data[j * n + i]);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DistanceTable { n, data })
}
