//! Vertex-mover refinement: Complete Greedy, Fast Greedy and an adapted
//! Kernighan-Lin search.
//!
//! A move may target any cluster adjacent to the vertex or a freshly opened
//! cluster. Fresh clusters always get a new slot, so slot ids stay stable
//! while a refiner runs; [`Clustering::compact`] drops the empty slots at
//! the end.

use std::cmp::{Ordering, Reverse};
use std::fmt;
use std::str::FromStr;

use crate::clustering::{ClusterId, Clustering};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::heap::IndexedMaxHeap;
use crate::modularity::{modularity, move_gain, MoveTarget};

/// A single vertex move and its modularity increase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveProposal {
    pub vertex: VertexId,
    pub target: MoveTarget,
    pub gain: f64,
}

/// Best move of `v` over its adjacent clusters and a new cluster. Ties go
/// to the lowest cluster id; a new cluster only wins with a strictly larger
/// gain.
pub fn best_move_for_vertex(graph: &Graph, clustering: &Clustering, v: VertexId) -> Result<MoveProposal> {
    graph.require_weight()?;
    check_sizes(graph, clustering)?;
    if v >= graph.vertex_count() {
        return Err(Error::invalid(format!("vertex {v} does not exist")));
    }
    let mut scanner = MoveScanner::default();
    Ok(scanner.best(graph, clustering, v, true).expect("a new cluster is always a candidate"))
}

fn check_sizes(graph: &Graph, clustering: &Clustering) -> Result<()> {
    if clustering.vertex_count() != graph.vertex_count() {
        return Err(Error::InvalidClustering(format!(
            "clustering covers {} vertices, graph has {}",
            clustering.vertex_count(),
            graph.vertex_count()
        )));
    }
    Ok(())
}

#[derive(Default)]
struct MoveScanner {
    scratch: Vec<f64>,
    touched: Vec<ClusterId>,
}

impl MoveScanner {
    /// With `allow_noop` false, a singleton is not offered a new cluster,
    /// and `None` means `v` has nowhere to go.
    fn best(&mut self, graph: &Graph, clustering: &Clustering, v: VertexId, allow_noop: bool) -> Option<MoveProposal> {
        clustering.gather_weights(graph, v, &mut self.scratch, &mut self.touched);
        let own = clustering.cluster_of(v);
        let to_own = self.scratch[own];
        let dv = graph.degree(v);
        let own_rest = clustering.degree(own) - dv;
        let total = graph.total_weight();

        let mut best: Option<(f64, ClusterId)> = None;
        for &c in &self.touched {
            if c == own {
                continue;
            }
            let gain = move_gain(self.scratch[c], to_own, dv, clustering.degree(c), own_rest, total);
            let better = match best {
                None => true,
                Some((g, d)) => gain > g || (gain == g && c < d),
            };
            if better {
                best = Some((gain, c));
            }
        }
        for &c in &self.touched {
            self.scratch[c] = 0.0;
        }

        let mut proposal = best.map(|(gain, c)| MoveProposal {
            vertex: v,
            target: MoveTarget::Cluster(c),
            gain,
        });
        if allow_noop || clustering.members(own).len() > 1 {
            let gain = move_gain(0.0, to_own, dv, 0.0, own_rest, total);
            if proposal.is_none_or(|p| gain > p.gain) {
                proposal = Some(MoveProposal {
                    vertex: v,
                    target: MoveTarget::New,
                    gain,
                });
            }
        }
        proposal
    }
}

/// Applies `proposal` and returns `(from, to)` cluster slots.
fn apply(graph: &Graph, clustering: &mut Clustering, proposal: &MoveProposal) -> (ClusterId, ClusterId) {
    let from = clustering.cluster_of(proposal.vertex);
    let to = match proposal.target {
        MoveTarget::Cluster(c) => c,
        MoveTarget::New => clustering.open_cluster(),
    };
    clustering
        .move_vertex(graph, proposal.vertex, to)
        .expect("target slot exists");
    (from, to)
}

/// Heap key of a cached per-vertex best move: larger gain first, then the
/// lower vertex id.
#[derive(Debug, Clone, Copy, PartialEq)]
struct MoveKey {
    gain: f64,
    vertex: Reverse<VertexId>,
}

impl Eq for MoveKey {}

impl Ord for MoveKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then(self.vertex.cmp(&other.vertex))
    }
}

impl PartialOrd for MoveKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Per-vertex best moves kept in a max-heap. After a move between two
/// clusters, every vertex in or adjacent to either cluster is rescanned.
struct MoveCache {
    scanner: MoveScanner,
    proposals: Vec<Option<MoveProposal>>,
    heap: IndexedMaxHeap<MoveKey>,
    stamp: Vec<usize>,
    epoch: usize,
    allow_noop: bool,
}

impl MoveCache {
    fn new(graph: &Graph, clustering: &Clustering, allow_noop: bool) -> Self {
        let n = graph.vertex_count();
        let mut cache = MoveCache {
            scanner: MoveScanner::default(),
            proposals: vec![None; n],
            heap: IndexedMaxHeap::new(n),
            stamp: vec![0; n],
            epoch: 0,
            allow_noop,
        };
        for v in 0..n {
            cache.rescan(graph, clustering, v);
        }
        cache
    }

    fn rescan(&mut self, graph: &Graph, clustering: &Clustering, v: VertexId) {
        let proposal = self.scanner.best(graph, clustering, v, self.allow_noop);
        self.proposals[v] = proposal;
        match proposal {
            Some(p) => self.heap.set(
                v,
                MoveKey {
                    gain: p.gain,
                    vertex: Reverse(v),
                },
            ),
            None => {
                self.heap.remove(v);
            }
        }
    }

    fn top(&self) -> Option<MoveProposal> {
        self.heap.peek().and_then(|(v, _)| self.proposals[v])
    }

    /// Drops `v` from consideration until the next [`MoveCache::rescan`].
    fn retire(&mut self, v: VertexId) {
        self.heap.remove(v);
        self.proposals[v] = None;
        self.stamp[v] = usize::MAX;
    }

    fn refresh_around(&mut self, graph: &Graph, clustering: &Clustering, clusters: [ClusterId; 2]) {
        self.epoch += 1;
        let epoch = self.epoch;
        for c in clusters {
            for &u in clustering.members(c) {
                for w in std::iter::once(u).chain(graph.neighbors(u).iter().map(|e| e.0)) {
                    if self.stamp[w] < epoch {
                        self.stamp[w] = epoch;
                        self.rescan(graph, clustering, w);
                    }
                }
            }
        }
    }

    /// Rescans every vertex, including retired ones.
    fn reactivate_all(&mut self, graph: &Graph, clustering: &Clustering) {
        self.stamp.iter_mut().for_each(|s| *s = 0);
        self.epoch = 0;
        for v in 0..graph.vertex_count() {
            self.rescan(graph, clustering, v);
        }
    }
}

/// Repeatedly applies the globally best vertex move while it increases
/// modularity.
pub fn complete_greedy_refine(graph: &Graph, mut clustering: Clustering) -> Result<Clustering> {
    graph.require_weight()?;
    check_sizes(graph, &clustering)?;
    let mut cache = MoveCache::new(graph, &clustering, true);
    while let Some(proposal) = cache.top() {
        if proposal.gain <= 0.0 {
            break;
        }
        let (from, to) = apply(graph, &mut clustering, &proposal);
        cache.refresh_around(graph, &clustering, [from, to]);
    }
    clustering.compact();
    Ok(clustering)
}

/// Sweeps the vertices in order of increasing neighbor count, moving each
/// to its best cluster when that increases modularity, until a sweep makes
/// no move.
pub fn fast_greedy_refine(graph: &Graph, mut clustering: Clustering) -> Result<Clustering> {
    graph.require_weight()?;
    check_sizes(graph, &clustering)?;
    let mut order: Vec<VertexId> = (0..graph.vertex_count()).collect();
    order.sort_by_key(|&v| (graph.neighbor_count(v), v));
    let mut scanner = MoveScanner::default();
    loop {
        let mut moved = false;
        for &v in &order {
            if let Some(proposal) = scanner.best(graph, &clustering, v, true) {
                if proposal.gain > 0.0 {
                    apply(graph, &mut clustering, &proposal);
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
    }
    clustering.compact();
    Ok(clustering)
}

/// Inner-loop abort threshold: `round(10 log2 n)`, at least one move.
pub fn kernighan_lin_patience(vertex_count: usize) -> usize {
    if vertex_count <= 1 {
        return 1;
    }
    ((10.0 * (vertex_count as f64).log2()).round() as usize).max(1)
}

/// Adapted Kernighan-Lin: each pass moves every vertex at most once, taking
/// the best move even when it lowers modularity, and then returns to the
/// best clustering seen. Passes repeat while they improve modularity.
pub fn kernighan_lin_refine(graph: &Graph, mut clustering: Clustering) -> Result<Clustering> {
    graph.require_weight()?;
    check_sizes(graph, &clustering)?;
    let patience = kernighan_lin_patience(graph.vertex_count());
    let mut current_q = modularity(graph, &clustering)?;
    let mut cache: Option<MoveCache> = None;
    let mut log: Vec<(VertexId, ClusterId)> = Vec::new();
    loop {
        let cache = match cache.as_mut() {
            Some(c) => {
                c.reactivate_all(graph, &clustering);
                c
            }
            None => cache.insert(MoveCache::new(graph, &clustering, false)),
        };
        log.clear();
        let mut gained = 0.0;
        let mut peak_gain = 0.0;
        let mut peak_len = 0;
        while let Some(proposal) = cache.top() {
            let v = proposal.vertex;
            let (from, to) = apply(graph, &mut clustering, &proposal);
            log.push((v, from));
            cache.retire(v);
            gained += proposal.gain;
            if gained > peak_gain {
                peak_gain = gained;
                peak_len = log.len();
            }
            if log.len() - peak_len >= patience {
                break;
            }
            cache.refresh_around(graph, &clustering, [from, to]);
        }
        undo(graph, &mut clustering, &log[peak_len..]);
        if peak_len == 0 {
            break;
        }
        let q = modularity(graph, &clustering)?;
        if q > current_q {
            current_q = q;
        } else {
            undo(graph, &mut clustering, &log[..peak_len]);
            break;
        }
    }
    clustering.compact();
    Ok(clustering)
}

fn undo(graph: &Graph, clustering: &mut Clustering, moves: &[(VertexId, ClusterId)]) {
    for &(v, from) in moves.iter().rev() {
        clustering.move_vertex(graph, v, from).expect("slot kept");
    }
}

/// Refinement algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Refiner {
    None,
    FastGreedy,
    CompleteGreedy,
    KernighanLin,
}

impl Refiner {
    pub const ALL: [Refiner; 4] = [
        Refiner::None,
        Refiner::FastGreedy,
        Refiner::CompleteGreedy,
        Refiner::KernighanLin,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Refiner::None => "none",
            Refiner::FastGreedy => "fast",
            Refiner::CompleteGreedy => "complete",
            Refiner::KernighanLin => "kl",
        }
    }

    pub fn refine(self, graph: &Graph, clustering: Clustering) -> Result<Clustering> {
        match self {
            Refiner::None => {
                check_sizes(graph, &clustering)?;
                Ok(clustering)
            }
            Refiner::FastGreedy => fast_greedy_refine(graph, clustering),
            Refiner::CompleteGreedy => complete_greedy_refine(graph, clustering),
            Refiner::KernighanLin => kernighan_lin_refine(graph, clustering),
        }
    }
}

impl fmt::Display for Refiner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Refiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Refiner::ALL
            .into_iter()
            .find(|r| r.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown refiner '{s}'")))
    }
}
