use std::cmp::Ordering;
use std::collections::BinaryHeap;

use ndarray::Array2;
use rayon::prelude::*;

/// Indices of the `k` nearest other points by `dist`, ties to the lower index.
pub(crate) fn nearest(dist: &Array2<f64>, i: usize, k: usize) -> Vec<usize> {
    let p = dist.nrows();
    let mut others: Vec<usize> = (0..p).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| dist[[i, a]].total_cmp(&dist[[i, b]]).then(a.cmp(&b)));
    others.truncate(k);
    others
}

/// Symmetric k-NN graph: an edge joins `i` and `j` when either is among the
/// other's `k` nearest. Adjacency lists are sorted by neighbor index.
pub(crate) fn knn_graph(dist: &Array2<f64>, k: usize) -> Vec<Vec<(usize, f64)>> {
    let p = dist.nrows();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p];
    for i in 0..p {
        for j in nearest(dist, i, k) {
            adj[i].push((j, dist[[i, j]]));
            adj[j].push((i, dist[[i, j]]));
        }
    }
    for list in &mut adj {
        list.sort_by_key(|a| a.0);
        list.dedup_by_key(|e| e.0);
    }
    adj
}

pub(crate) fn component_count(adj: &[Vec<(usize, f64)>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut count = 0;
    for start in 0..adj.len() {
        if seen[start] {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

#[derive(PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    // Reversed for a min-heap.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Frontier(0.0, source));
    while let Some(Frontier(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Frontier(nd, v));
            }
        }
    }
    dist
}

/// All-pairs shortest paths, Dijkstra from every node.
pub(crate) fn geodesic_distances(adj: &[Vec<(usize, f64)>]) -> Array2<f64> {
    let p = adj.len();
    let rows: Vec<Vec<f64>> = (0..p).into_par_iter().map(|s| dijkstra(adj, s)).collect();
    let mut out = Array2::zeros((p, p));
    for i in 0..p {
        for j in 0..p {
            // Symmetrize against rounding in path sums.
            out[[i, j]] = rows[i][j].min(rows[j][i]);
        }
    }
    out
}
