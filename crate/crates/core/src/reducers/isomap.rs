use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{double_center, symmetric_eigen_ascending};
use crate::matrix::{squared_distance, DataMatrix};
use crate::neighborhoods::knn_index;

/// Weighted adjacency lists.
pub type Graph = Vec<Vec<(usize, f64)>>;

/// Symmetrized k-NN graph with Euclidean edge weights; adjacency sorted by index.
pub fn neighborhood_graph(x: &DataMatrix, k: usize) -> Result<Graph> {
    let idx = knn_index(x, k)?;
    let n = x.nrows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in idx.neighbors(i) {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    Ok(adj
        .into_iter()
        .enumerate()
        .map(|(i, mut nb)| {
            nb.sort_unstable();
            nb.dedup();
            nb.into_iter()
                .map(|j| (j, squared_distance(x.row(i), x.row(j)).sqrt()))
                .collect()
        })
        .collect())
}

fn component_sizes(graph: &Graph) -> Vec<usize> {
    let n = graph.len();
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &(w, _) in &graph[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    sizes
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then index
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(graph: &Graph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; graph.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, source));
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &graph[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Entry(nd, w));
            }
        }
    }
    dist
}

/// All-pairs shortest path lengths (Dijkstra from every source). Unreachable pairs are infinite.
pub fn shortest_paths(graph: &Graph) -> DMatrix<f64> {
    let n = graph.len();
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(graph, s)).collect();
    let mut out = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

/// Geodesic distance estimates over the symmetrized k-NN graph.
pub fn geodesic_distances(x: &DataMatrix, k: usize) -> Result<DMatrix<f64>> {
    let graph = neighborhood_graph(x, k)?;
    let sizes = component_sizes(&graph);
    if sizes.len() > 1 {
        return Err(Error::DisconnectedGraph { component_sizes: sizes });
    }
    Ok(shortest_paths(&graph))
}

/// Classical multidimensional scaling of a distance matrix into `d` dimensions.
pub fn classical_mds(dist: &DMatrix<f64>, d: usize) -> Result<DataMatrix> {
    let n = dist.nrows();
    if !dist.is_square() || d == 0 || d > n {
        return Err(Error::Parameter(format!(
            "MDS needs a square distance matrix and 1 <= d <= n, got {:?} and d = {d}",
            dist.shape()
        )));
    }
    if dist.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("distance matrix has non-finite entries".into()));
    }
    let squared = dist.map(|v| v * v);
    let b = double_center(&squared) * -0.5;
    let (values, vectors) = symmetric_eigen_ascending(b)?;
    let mut out = DMatrix::zeros(n, d);
    for j in 0..d {
        let src = n - 1 - j;
        let lambda = values[src];
        if lambda > 0.0 {
            out.set_column(j, &(vectors.column(src) * lambda.sqrt()));
        } else {
            log::warn!("MDS: eigenvalue {j} is not positive ({lambda:e}); coordinate left at zero");
        }
    }
    DataMatrix::from_dmatrix(&out)
}

/// Isomap: geodesic distances on the k-NN graph embedded by classical MDS.
pub fn isomap(x: &DataMatrix, d: usize, k: usize) -> Result<DataMatrix> {
    classical_mds(&geodesic_distances(x, k)?, d)
}
