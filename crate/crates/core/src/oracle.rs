//! Exhaustive modularity maximization for tiny graphs.
//!
//! Enumerates every set partition as a restricted growth string, keeping
//! per-block degree and internal weight up to date incrementally. Used as
//! ground truth in tests; the Bell number grows too fast for anything beyond
//! a dozen vertices.

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::modularity::modularity;

pub const MAX_ORACLE_VERTICES: usize = 12;

/// Returns a clustering with maximum modularity and its value. Among equally
/// good partitions the first in restricted-growth order wins.
pub fn exact_max_modularity(graph: &Graph) -> Result<(Clustering, f64)> {
    let n = graph.vertex_count();
    if n > MAX_ORACLE_VERTICES {
        return Err(Error::TooLarge {
            vertices: n,
            limit: MAX_ORACLE_VERTICES,
        });
    }
    graph.require_weight()?;
    let search = run_search(graph);
    let clustering = Clustering::from_assignment(graph, &search.best_labels)?;
    // Report the value the way every other caller computes it, so that
    // comparisons against heuristics are not skewed by summation order.
    let value = modularity(graph, &clustering)?;
    Ok((clustering, value))
}

fn run_search(graph: &Graph) -> Search {
    let n = graph.vertex_count();
    let mut weights = vec![vec![0.0; n]; n];
    for (u, v, w) in graph.edges() {
        weights[u][v] = w;
        weights[v][u] = w;
    }
    let mut search = Search {
        weights,
        degrees: graph.degrees().to_vec(),
        total: graph.total_weight(),
        labels: vec![0; n],
        block_degree: vec![0.0; n],
        block_internal: vec![0.0; n],
        best_labels: vec![0; n],
        best_value: f64::NEG_INFINITY,
        visited: 0,
    };
    search.descend(0, 0);
    search
}

struct Search {
    weights: Vec<Vec<f64>>,
    degrees: Vec<f64>,
    total: f64,
    labels: Vec<usize>,
    block_degree: Vec<f64>,
    block_internal: Vec<f64>,
    best_labels: Vec<usize>,
    best_value: f64,
    visited: u64,
}

impl Search {
    fn descend(&mut self, v: usize, blocks: usize) {
        let n = self.labels.len();
        if v == n {
            self.visited += 1;
            let q: f64 = (0..blocks)
                .map(|b| {
                    self.block_internal[b] / self.total - (self.block_degree[b] / self.total).powi(2)
                })
                .sum();
            if q > self.best_value {
                self.best_value = q;
                self.best_labels.copy_from_slice(&self.labels);
            }
            return;
        }
        for b in 0..=blocks {
            let gained = self.weights[v][v]
                + 2.0
                    * (0..v)
                        .filter(|&u| self.labels[u] == b)
                        .map(|u| self.weights[u][v])
                        .sum::<f64>();
            let saved = (self.block_degree[b], self.block_internal[b]);
            self.labels[v] = b;
            self.block_degree[b] += self.degrees[v];
            self.block_internal[b] += gained;
            self.descend(v + 1, blocks.max(b + 1));
            (self.block_degree[b], self.block_internal[b]) = saved;
        }
    }
}
