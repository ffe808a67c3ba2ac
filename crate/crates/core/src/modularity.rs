//! Modularity and its incremental changes under merges and vertex moves.

use crate::clustering::{ClusterId, Clustering};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Destination of a vertex move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveTarget {
    Cluster(ClusterId),
    /// A freshly opened, empty cluster.
    New,
}

/// Modularity `Σ_C f(C,C)/f(V,V) − deg(C)²/deg(V)²`, recomputed from the
/// graph's edges without trusting the clustering's caches.
pub fn modularity(graph: &Graph, clustering: &Clustering) -> Result<f64> {
    graph.require_weight()?;
    if clustering.vertex_count() != graph.vertex_count() {
        return Err(Error::InvalidClustering(format!(
            "clustering covers {} vertices, graph has {}",
            clustering.vertex_count(),
            graph.vertex_count()
        )));
    }
    modularity_of_labels(graph, clustering.assignment())
}

/// Modularity of an arbitrary labelling `vertex -> label`.
pub fn modularity_of_labels(graph: &Graph, labels: &[usize]) -> Result<f64> {
    graph.require_weight()?;
    if labels.len() != graph.vertex_count() {
        return Err(Error::InvalidClustering("label count mismatch".into()));
    }
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    if k > labels.len() {
        let dense = Clustering::from_assignment(graph, labels)?;
        return modularity_of_labels(graph, dense.assignment());
    }
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for (u, v, w) in graph.edges() {
        if labels[u] == labels[v] {
            internal[labels[u]] += if u == v { w } else { 2.0 * w };
        }
    }
    for (v, &c) in labels.iter().enumerate() {
        degree[c] += graph.degree(v);
    }
    let total = graph.total_weight();
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&f, &d)| f / total - (d / total) * (d / total))
        .sum())
}

/// `ΔQ` of merging clusters with inter-cluster weight `between` and
/// degrees `deg_c`, `deg_d`.
#[inline]
pub fn merge_gain(between: f64, deg_c: f64, deg_d: f64, total: f64) -> f64 {
    2.0 * between / total - 2.0 * deg_c * deg_d / (total * total)
}

/// `ΔQ` of moving a vertex of degree `deg_v` from its cluster `C` to `D`,
/// given `f(v, D)`, `f(v, C − v)`, `deg(D)` and `deg(C − v)`.
#[inline]
pub fn move_gain(
    to_target: f64,
    to_own: f64,
    deg_v: f64,
    deg_target: f64,
    deg_own_rest: f64,
    total: f64,
) -> f64 {
    (2.0 * to_target - 2.0 * to_own) / total
        - (2.0 * deg_v * deg_target - 2.0 * deg_v * deg_own_rest) / (total * total)
}

/// Modularity increase from merging clusters `c` and `d`.
pub fn delta_q_merge(graph: &Graph, clustering: &Clustering, c: ClusterId, d: ClusterId) -> Result<f64> {
    graph.require_weight()?;
    clustering.check_pair(c, d)?;
    let between = clustering.weight_between(graph, c, d);
    Ok(merge_gain(
        between,
        clustering.degree(c),
        clustering.degree(d),
        graph.total_weight(),
    ))
}

/// Modularity increase from moving `v` to `target`.
pub fn delta_q_move(graph: &Graph, clustering: &Clustering, v: VertexId, target: MoveTarget) -> Result<f64> {
    graph.require_weight()?;
    if v >= graph.vertex_count() {
        return Err(Error::invalid(format!("vertex {v} does not exist")));
    }
    let own = clustering.cluster_of(v);
    let target_cluster = match target {
        MoveTarget::Cluster(d) if d == own => {
            return Err(Error::invalid(format!("vertex {v} already in cluster {d}")));
        }
        MoveTarget::Cluster(d) if d >= clustering.slot_count() => {
            return Err(Error::invalid(format!("cluster {d} does not exist")));
        }
        MoveTarget::Cluster(d) => Some(d),
        MoveTarget::New => None,
    };
    let mut to_target = 0.0;
    let mut to_own = 0.0;
    for &(u, w) in graph.neighbors(v) {
        if u == v {
            continue;
        }
        let c = clustering.cluster_of(u);
        if c == own {
            to_own += w;
        } else if Some(c) == target_cluster {
            to_target += w;
        }
    }
    let dv = graph.degree(v);
    let deg_target = target_cluster.map_or(0.0, |d| clustering.degree(d));
    Ok(move_gain(
        to_target,
        to_own,
        dv,
        deg_target,
        clustering.degree(own) - dv,
        graph.total_weight(),
    ))
}

/// Builds the quotient graph of `clustering`: one vertex per cluster (in the
/// dense order produced by [`Clustering::compact`]), inter-cluster weights
/// `f(P, Q)`, and a self-edge of weight `f(P, P)` so that each coarse degree
/// equals the cluster degree. Returns the graph and the vertex map.
pub fn contract(graph: &Graph, clustering: &Clustering) -> Result<(Graph, Vec<usize>)> {
    if clustering.vertex_count() != graph.vertex_count() {
        return Err(Error::InvalidClustering("vertex count mismatch".into()));
    }
    let mut dense = clustering.clone();
    dense.compact();
    let k = dense.cluster_count();

    // Each cluster's vertices are processed together; `slot` indexes the
    // current cluster's coarse edges by neighbor cluster.
    let mut slot = vec![usize::MAX; k];
    let mut pairs = Vec::new();
    let mut row: Vec<(usize, f64)> = Vec::new();
    for p in 0..k {
        row.clear();
        for &v in dense.members(p) {
            for &(u, w) in graph.neighbors(v) {
                let q = dense.cluster_of(u);
                if q < p {
                    continue;
                }
                // Within a cluster each distinct pair is visited from both
                // ends, which yields the ordered-pair weight f(P, P).
                if slot[q] == usize::MAX {
                    slot[q] = row.len();
                    row.push((q, 0.0));
                }
                row[slot[q]].1 += w;
            }
        }
        row.sort_unstable_by_key(|e| e.0);
        for &(q, w) in &row {
            slot[q] = usize::MAX;
            pairs.push((p, q, w));
        }
    }
    let coarse = Graph::from_canonical_pairs(k, &pairs);
    Ok((coarse, dense.assignment().to_vec()))
}

/// Transfers a clustering of a coarse graph to the fine graph through the
/// vertex map produced by [`contract`].
pub fn project(fine: &Graph, coarse_clustering: &Clustering, map: &[usize]) -> Result<Clustering> {
    if map.len() != fine.vertex_count() {
        return Err(Error::InvalidClustering(format!(
            "map has {} entries for {} fine vertices",
            map.len(),
            fine.vertex_count()
        )));
    }
    if let Some(&bad) = map.iter().find(|&&c| c >= coarse_clustering.vertex_count()) {
        return Err(Error::InvalidClustering(format!(
            "map refers to coarse vertex {bad}, coarse graph has {}",
            coarse_clustering.vertex_count()
        )));
    }
    let labels: Vec<usize> = map.iter().map(|&c| coarse_clustering.cluster_of(c)).collect();
    Clustering::from_assignment(fine, &labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap()
    }

    /// Unit triangles {0,1,2} and {3,4,5} joined by the bridge 2-3.
    fn two_triangles() -> Graph {
        Graph::from_edges(
            6,
            [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 1.0)],
        )
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn single_cluster_is_zero() {
        let g = two_triangles();
        assert_eq!(modularity(&g, &Clustering::single_cluster(&g)).unwrap(), 0.0);
    }

    #[test]
    fn triangle_singletons() {
        let g = triangle();
        let q = modularity(&g, &Clustering::singletons(&g)).unwrap();
        assert!(close(q, -1.0 / 3.0));
    }

    #[test]
    fn two_triangles_split() {
        let g = two_triangles();
        let c = Clustering::from_assignment(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        assert_eq!(g.total_weight(), 14.0);
        assert!(close(modularity(&g, &c).unwrap(), 5.0 / 14.0));
        assert!(close(c.cached_modularity(&g), 5.0 / 14.0));
    }

    #[test]
    fn degenerate_graph_rejected() {
        let g = Graph::from_edges(2, []).unwrap();
        assert!(matches!(
            modularity(&g, &Clustering::singletons(&g)),
            Err(Error::DegenerateGraph)
        ));
    }

    #[test]
    fn merge_deltas() {
        let g = triangle();
        let c = Clustering::singletons(&g);
        assert!(close(delta_q_merge(&g, &c, 0, 1).unwrap(), 1.0 / 9.0));
        assert!(delta_q_merge(&g, &c, 1, 1).is_err());

        let g = two_triangles();
        let c = Clustering::from_assignment(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        assert!(close(delta_q_merge(&g, &c, 0, 1).unwrap(), -5.0 / 14.0));

        // Non-adjacent pair: only the null-model term remains.
        let s = Clustering::singletons(&g);
        let expected = -2.0 * 2.0 * 2.0 / 196.0;
        assert!(close(delta_q_merge(&g, &s, 0, 5).unwrap(), expected));
    }

    #[test]
    fn move_deltas() {
        let g = two_triangles();
        let s = Clustering::singletons(&g);
        assert_eq!(delta_q_move(&g, &s, 4, MoveTarget::New).unwrap(), 0.0);

        let all = Clustering::single_cluster(&g);
        assert!(close(delta_q_move(&g, &all, 0, MoveTarget::New).unwrap(), -8.0 / 196.0));
        assert!(delta_q_move(&g, &all, 0, MoveTarget::Cluster(0)).is_err());
    }

    #[test]
    fn contraction_of_two_triangles() {
        let g = two_triangles();
        let c = Clustering::from_assignment(&g, &[0, 0, 0, 1, 1, 1]).unwrap();
        let (coarse, map) = contract(&g, &c).unwrap();
        assert_eq!(map, vec![0, 0, 0, 1, 1, 1]);
        assert_eq!(coarse.vertex_count(), 2);
        assert_eq!(coarse.self_weight(0), 6.0);
        assert_eq!(coarse.self_weight(1), 6.0);
        assert_eq!(coarse.weight(0, 1), 1.0);
        assert_eq!(coarse.degrees(), &[7.0, 7.0]);
        assert_eq!(coarse.total_weight(), g.total_weight());

        let apart = Clustering::singletons(&coarse);
        let fine = project(&g, &apart, &map).unwrap();
        assert!(fine.same_partition(&c));
        assert!(close(modularity(&coarse, &apart).unwrap(), 5.0 / 14.0));
        let together = Clustering::single_cluster(&coarse);
        let fine = project(&g, &together, &map).unwrap();
        assert_eq!(modularity(&g, &fine).unwrap(), 0.0);
        assert_eq!(modularity(&coarse, &together).unwrap(), 0.0);
    }

    #[test]
    fn singleton_contraction_is_identity() {
        let g = two_triangles();
        let (coarse, map) = contract(&g, &Clustering::singletons(&g)).unwrap();
        assert_eq!(coarse, g);
        assert_eq!(map, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn project_rejects_mismatched_map() {
        let g = two_triangles();
        let coarse = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let c = Clustering::singletons(&coarse);
        assert!(project(&g, &c, &[0, 1]).is_err());
        assert!(project(&g, &c, &[0, 1, 2, 0, 0, 0]).is_err());
    }
}
