//! Weighted undirected graphs in compressed adjacency form.
//!
//! Weights follow the literal pair-function model: `f(u, v) = f(v, u)` for
//! every vertex pair, a vertex degree is `deg(v) = Σ_u f(u, v)`, and the
//! total weight is `f(V, V) = Σ_{u,v} f(u, v)`. An undirected edge between
//! two distinct vertices therefore contributes to the total twice, while a
//! self-edge `f(v, v)` contributes once, both to `deg(v)` and to `f(V, V)`.
//! With this convention `deg(V) = f(V, V)` holds exactly.

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Immutable weighted undirected graph.
///
/// Every vertex has an adjacency list of `(neighbor, weight)` entries sorted
/// strictly by neighbor id. A self-edge appears once, in the vertex's own
/// list. Degrees and the total weight are cached at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    adjacency: Vec<(VertexId, f64)>,
    degrees: Vec<f64>,
    total_weight: f64,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from undirected edges.
    ///
    /// An entry `(u, v, w)` with `u != v` adds `w` to both `f(u, v)` and
    /// `f(v, u)`; an entry `(v, v, w)` adds `w` to `f(v, v)`. Repeated pairs
    /// accumulate. The result does not depend on the order of the entries.
    /// Zero weights are accepted and leave no edge behind.
    pub fn from_edges<I>(vertex_count: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (VertexId, VertexId, f64)>,
    {
        let mut canonical = Vec::new();
        for (u, v, w) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {vertex_count} vertices"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) has invalid weight {w}"
                )));
            }
            if w > 0.0 {
                canonical.push((u.min(v), u.max(v), w));
            }
        }
        // Sorting by weight as well makes the accumulated sums independent
        // of input order, even for non-integer weights.
        canonical.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)).then(a.2.total_cmp(&b.2)));

        let mut pairs: Vec<(VertexId, VertexId, f64)> = Vec::with_capacity(canonical.len());
        for (u, v, w) in canonical {
            match pairs.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += w,
                _ => pairs.push((u, v, w)),
            }
        }
        Ok(Self::from_canonical_pairs(vertex_count, &pairs))
    }

    /// `pairs` must be sorted by `(u, v)`, with `u <= v`, unique, and
    /// positive weights.
    pub(crate) fn from_canonical_pairs(vertex_count: usize, pairs: &[(VertexId, VertexId, f64)]) -> Graph {
        let mut counts = vec![0usize; vertex_count];
        for &(u, v, _) in pairs {
            counts[u] += 1;
            if u != v {
                counts[v] += 1;
            }
        }
        let mut offsets = Vec::with_capacity(vertex_count + 1);
        offsets.push(0);
        for c in &counts {
            offsets.push(offsets.last().unwrap() + c);
        }
        let mut cursor = offsets[..vertex_count].to_vec();
        let mut adjacency = vec![(0, 0.0); offsets[vertex_count]];
        // Visiting pairs sorted by (u, v) fills each list in ascending
        // neighbor order: entries (x, u) with x < u arrive before (u, y).
        for &(u, v, w) in pairs {
            adjacency[cursor[u]] = (v, w);
            cursor[u] += 1;
            if u != v {
                adjacency[cursor[v]] = (u, w);
                cursor[v] += 1;
            }
        }
        debug_assert!((0..vertex_count)
            .all(|v| adjacency[offsets[v]..offsets[v + 1]].windows(2).all(|p| p[0].0 < p[1].0)));

        let degrees: Vec<f64> = (0..vertex_count)
            .map(|v| adjacency[offsets[v]..offsets[v + 1]].iter().map(|e| e.1).sum())
            .collect();
        let total_weight = degrees.iter().sum();
        Graph {
            offsets,
            adjacency,
            degrees,
            total_weight,
            edge_count: pairs.len(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.degrees.len()
    }

    /// Number of vertex pairs `{u, v}` with positive weight, self-edges included.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// `f(V, V)`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn degree(&self, v: VertexId) -> f64 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Adjacency entries of `v`, sorted by neighbor id. Includes the
    /// self-edge if `v` has one.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Number of adjacency entries of `v`.
    pub fn neighbor_count(&self, v: VertexId) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn weight(&self, u: VertexId, v: VertexId) -> f64 {
        let list = self.neighbors(u);
        match list.binary_search_by_key(&v, |e| e.0) {
            Ok(i) => list[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn self_weight(&self, v: VertexId) -> f64 {
        self.weight(v, v)
    }

    /// Undirected edges as `(u, v, w)` with `u <= v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |e| e.0 >= u)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub(crate) fn require_weight(&self) -> Result<()> {
        if self.total_weight > 0.0 {
            Ok(())
        } else {
            Err(Error::DegenerateGraph)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_has_total_weight_six() {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        assert_eq!(g.total_weight(), 6.0);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.degrees(), &[2.0, 2.0, 2.0]);
        assert_eq!(g.neighbors(2), &[(0, 1.0), (1, 1.0)]);
    }

    #[test]
    fn self_edge_counts_once() {
        let g = Graph::from_edges(2, [(0, 0, 3.0), (0, 1, 1.0)]).unwrap();
        assert_eq!(g.degree(0), 4.0);
        assert_eq!(g.degree(1), 1.0);
        assert_eq!(g.total_weight(), 5.0);
        assert_eq!(g.self_weight(0), 3.0);
        assert_eq!(g.neighbors(0), &[(0, 3.0), (1, 1.0)]);
    }

    #[test]
    fn duplicates_accumulate_and_lists_stay_sorted() {
        let g = Graph::from_edges(4, [(3, 0, 1.0), (0, 3, 2.5), (2, 0, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(g.weight(0, 3), 3.5);
        assert_eq!(g.weight(3, 0), 3.5);
        let ids: Vec<_> = g.neighbors(0).iter().map(|e| e.0).collect();
        assert_eq!(ids, vec![1, 2, 3]);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edges().count(), 3);
    }

    #[test]
    fn rejects_negative_and_out_of_range() {
        assert!(Graph::from_edges(2, [(0, 1, -1.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, f64::NAN)]).is_err());
        assert!(Graph::from_edges(2, [(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn zero_weight_leaves_no_edge() {
        let g = Graph::from_edges(2, [(0, 1, 0.0)]).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(g.require_weight().is_err());
    }
}
