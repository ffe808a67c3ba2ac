//! Vertex partitions with cached per-cluster aggregates.

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

pub type ClusterId = usize;

/// A partition of a graph's vertices.
///
/// Besides the vertex-to-cluster assignment, each cluster caches its member
/// list, its degree `deg(C)` and its internal weight `f(C, C)` (ordered
/// pairs, so an internal edge between distinct vertices counts twice).
///
/// Moves may leave a cluster slot empty. Empty slots contribute nothing to
/// modularity and are dropped by [`Clustering::compact`]; every algorithm in
/// this crate compacts before returning a clustering.
#[derive(Debug, Clone)]
pub struct Clustering {
    assignment: Vec<ClusterId>,
    position: Vec<usize>,
    members: Vec<Vec<VertexId>>,
    degree: Vec<f64>,
    internal: Vec<f64>,
    live: usize,
}

impl Clustering {
    /// Every vertex in its own cluster; cluster ids equal vertex ids.
    pub fn singletons(graph: &Graph) -> Clustering {
        let n = graph.vertex_count();
        Clustering {
            assignment: (0..n).collect(),
            position: vec![0; n],
            members: (0..n).map(|v| vec![v]).collect(),
            degree: graph.degrees().to_vec(),
            internal: (0..n).map(|v| graph.self_weight(v)).collect(),
            live: n,
        }
    }

    /// All vertices in cluster 0. An empty graph yields no clusters.
    pub fn single_cluster(graph: &Graph) -> Clustering {
        Self::from_assignment(graph, &vec![0; graph.vertex_count()]).unwrap()
    }

    /// Builds a clustering from arbitrary cluster labels. Labels are
    /// renumbered densely in order of first appearance.
    pub fn from_assignment(graph: &Graph, labels: &[usize]) -> Result<Clustering> {
        let n = graph.vertex_count();
        if labels.len() != n {
            return Err(Error::InvalidClustering(format!(
                "assignment has {} entries for {} vertices",
                labels.len(),
                n
            )));
        }
        let mut dense = std::collections::HashMap::new();
        let mut assignment = Vec::with_capacity(n);
        for &label in labels {
            let next = dense.len();
            assignment.push(*dense.entry(label).or_insert(next));
        }
        let k = dense.len();
        let mut members = vec![Vec::new(); k];
        let mut position = vec![0; n];
        for (v, &c) in assignment.iter().enumerate() {
            position[v] = members[c].len();
            members[c].push(v);
        }
        let mut degree = vec![0.0; k];
        let mut internal = vec![0.0; k];
        for v in 0..n {
            let c = assignment[v];
            degree[c] += graph.degree(v);
            for &(u, w) in graph.neighbors(v) {
                if assignment[u] == c {
                    internal[c] += w;
                }
            }
        }
        Ok(Clustering {
            assignment,
            position,
            members,
            degree,
            internal,
            live: k,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.assignment.len()
    }

    /// Number of non-empty clusters.
    pub fn cluster_count(&self) -> usize {
        self.live
    }

    /// Number of cluster slots, including empty ones.
    pub fn slot_count(&self) -> usize {
        self.members.len()
    }

    pub fn cluster_of(&self, v: VertexId) -> ClusterId {
        self.assignment[v]
    }

    pub fn assignment(&self) -> &[ClusterId] {
        &self.assignment
    }

    pub fn members(&self, c: ClusterId) -> &[VertexId] {
        &self.members[c]
    }

    pub fn is_empty_cluster(&self, c: ClusterId) -> bool {
        self.members[c].is_empty()
    }

    /// Cached `deg(C)`.
    pub fn degree(&self, c: ClusterId) -> f64 {
        self.degree[c]
    }

    /// Cached `f(C, C)`.
    pub fn internal_weight(&self, c: ClusterId) -> f64 {
        self.internal[c]
    }

    /// Ids of non-empty clusters in ascending order.
    pub fn cluster_ids(&self) -> impl Iterator<Item = ClusterId> + '_ {
        (0..self.members.len()).filter(move |&c| !self.members[c].is_empty())
    }

    /// Modularity from the cached cluster aggregates.
    pub fn cached_modularity(&self, graph: &Graph) -> f64 {
        let total = graph.total_weight();
        self.cluster_ids()
            .map(|c| self.internal[c] / total - (self.degree[c] / total).powi(2))
            .sum()
    }

    /// Opens a new, empty cluster slot and returns its id.
    pub fn open_cluster(&mut self) -> ClusterId {
        self.members.push(Vec::new());
        self.degree.push(0.0);
        self.internal.push(0.0);
        self.members.len() - 1
    }

    /// `f(v, C)` for every cluster adjacent to `v`, excluding the self-edge,
    /// plus the weight from `v` into its own cluster. Uses `scratch` (one slot
    /// per cluster, all zero on entry and on exit) and `touched`.
    pub(crate) fn gather_weights(
        &self,
        graph: &Graph,
        v: VertexId,
        scratch: &mut Vec<f64>,
        touched: &mut Vec<ClusterId>,
    ) {
        if scratch.len() < self.members.len() {
            scratch.resize(self.members.len(), 0.0);
        }
        touched.clear();
        for &(u, w) in graph.neighbors(v) {
            if u == v {
                continue;
            }
            let c = self.assignment[u];
            if scratch[c] == 0.0 {
                touched.push(c);
            }
            scratch[c] += w;
        }
    }

    /// Moves `v` into `target`. `weight_to_target` and `weight_to_own` are
    /// `f(v, target)` and `f(v, C - v)`, excluding the self-edge.
    pub(crate) fn move_with_weights(
        &mut self,
        graph: &Graph,
        v: VertexId,
        target: ClusterId,
        weight_to_target: f64,
        weight_to_own: f64,
    ) {
        let source = self.assignment[v];
        if source == target {
            return;
        }
        let loop_weight = graph.self_weight(v);
        let dv = graph.degree(v);

        let pos = self.position[v];
        self.members[source].swap_remove(pos);
        if let Some(&moved) = self.members[source].get(pos) {
            self.position[moved] = pos;
        }
        self.degree[source] -= dv;
        self.internal[source] -= 2.0 * weight_to_own + loop_weight;
        if self.members[source].is_empty() {
            self.degree[source] = 0.0;
            self.internal[source] = 0.0;
            self.live -= 1;
        }

        if self.members[target].is_empty() {
            self.live += 1;
        }
        self.position[v] = self.members[target].len();
        self.members[target].push(v);
        self.degree[target] += dv;
        self.internal[target] += 2.0 * weight_to_target + loop_weight;
        self.assignment[v] = target;
    }

    /// Moves `v` into cluster `target`, updating all caches.
    pub fn move_vertex(&mut self, graph: &Graph, v: VertexId, target: ClusterId) -> Result<()> {
        if target >= self.members.len() {
            return Err(Error::invalid(format!("cluster {target} does not exist")));
        }
        let source = self.assignment[v];
        let mut to_target = 0.0;
        let mut to_own = 0.0;
        for &(u, w) in graph.neighbors(v) {
            if u == v {
                continue;
            }
            let c = self.assignment[u];
            if c == target {
                to_target += w;
            } else if c == source {
                to_own += w;
            }
        }
        self.move_with_weights(graph, v, target, to_target, to_own);
        Ok(())
    }

    /// Merges cluster `absorbed` into `survivor`. `between` is `f(C, D)`.
    pub(crate) fn merge_with_weight(&mut self, survivor: ClusterId, absorbed: ClusterId, between: f64) {
        let moved = std::mem::take(&mut self.members[absorbed]);
        for v in moved {
            self.assignment[v] = survivor;
            self.position[v] = self.members[survivor].len();
            self.members[survivor].push(v);
        }
        self.degree[survivor] += self.degree[absorbed];
        self.internal[survivor] += self.internal[absorbed] + 2.0 * between;
        self.degree[absorbed] = 0.0;
        self.internal[absorbed] = 0.0;
        self.live -= 1;
    }

    /// Merges cluster `d` into cluster `c`.
    pub fn merge(&mut self, graph: &Graph, c: ClusterId, d: ClusterId) -> Result<()> {
        self.check_pair(c, d)?;
        let between = self.weight_between(graph, c, d);
        self.merge_with_weight(c, d, between);
        Ok(())
    }

    /// `f(C, D)` by scanning the smaller cluster's edges.
    pub fn weight_between(&self, graph: &Graph, c: ClusterId, d: ClusterId) -> f64 {
        let (scan, other) = if self.members[c].len() <= self.members[d].len() {
            (c, d)
        } else {
            (d, c)
        };
        self.members[scan]
            .iter()
            .flat_map(|&v| graph.neighbors(v))
            .filter(|e| self.assignment[e.0] == other)
            .map(|e| e.1)
            .sum()
    }

    pub(crate) fn check_pair(&self, c: ClusterId, d: ClusterId) -> Result<()> {
        if c == d {
            return Err(Error::invalid(format!("cluster {c} paired with itself")));
        }
        for x in [c, d] {
            if x >= self.members.len() || self.members[x].is_empty() {
                return Err(Error::invalid(format!("cluster {x} does not exist")));
            }
        }
        Ok(())
    }

    /// Renumbers clusters densely (in order of their smallest vertex) and
    /// drops empty slots.
    pub fn compact(&mut self) {
        let mut remap = vec![usize::MAX; self.members.len()];
        let mut next = 0;
        for v in 0..self.assignment.len() {
            let c = self.assignment[v];
            if remap[c] == usize::MAX {
                remap[c] = next;
                next += 1;
            }
        }
        let mut members = vec![Vec::new(); next];
        let mut degree = vec![0.0; next];
        let mut internal = vec![0.0; next];
        for (old, new) in remap.iter().enumerate() {
            if *new != usize::MAX {
                members[*new] = std::mem::take(&mut self.members[old]);
                degree[*new] = self.degree[old];
                internal[*new] = self.internal[old];
            }
        }
        for c in &mut self.assignment {
            *c = remap[*c];
        }
        // Members ordered by vertex id keeps iteration deterministic.
        for (c, list) in members.iter_mut().enumerate() {
            list.sort_unstable();
            for (i, &v) in list.iter().enumerate() {
                self.position[v] = i;
                debug_assert_eq!(self.assignment[v], c);
            }
        }
        self.members = members;
        self.degree = degree;
        self.internal = internal;
        self.live = next;
    }

    /// Recomputes every cached aggregate from the graph and reports the first
    /// mismatch beyond a relative tolerance of `1e-9`.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        if self.assignment.len() != graph.vertex_count() {
            return Err(Error::InvalidClustering("vertex count mismatch".into()));
        }
        let fresh = Clustering::from_assignment(graph, &self.assignment)?;
        let mut seen = 0;
        for c in 0..self.members.len() {
            for (i, &v) in self.members[c].iter().enumerate() {
                if self.assignment[v] != c || self.position[v] != i {
                    return Err(Error::InvalidClustering(format!("member list of {c} is stale")));
                }
                seen += 1;
            }
        }
        if seen != self.assignment.len() {
            return Err(Error::InvalidClustering("member lists do not cover V".into()));
        }
        let live = self.cluster_ids().count();
        if live != self.live || live != fresh.live {
            return Err(Error::InvalidClustering("cluster count is stale".into()));
        }
        let scale = graph.total_weight().max(1.0);
        for c in self.cluster_ids() {
            let rep = self.members[c][0];
            let f = fresh.assignment[rep];
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * scale;
            if !close(self.degree[c], fresh.degree[f]) || !close(self.internal[c], fresh.internal[f]) {
                return Err(Error::InvalidClustering(format!("aggregates of cluster {c} are stale")));
            }
        }
        Ok(())
    }

    /// True when both clusterings group the vertices identically, regardless
    /// of cluster ids.
    pub fn same_partition(&self, other: &Clustering) -> bool {
        if self.assignment.len() != other.assignment.len() {
            return false;
        }
        let mut forward = std::collections::HashMap::new();
        let mut backward = std::collections::HashMap::new();
        self.assignment.iter().zip(&other.assignment).all(|(&a, &b)| {
            *forward.entry(a).or_insert(b) == b && *backward.entry(b).or_insert(a) == a
        })
    }
}
