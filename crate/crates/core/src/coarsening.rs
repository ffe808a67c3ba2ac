//! Greedy coarsening: clusters start as singletons and adjacent pairs are
//! merged in priority order while the merge increases modularity.
//!
//! Both algorithms work on a dynamically coarsened graph in which every live
//! cluster is a vertex with a sorted edge list. Merging two clusters merges
//! the shorter edge list into the longer one and fixes up the position of
//! the redirected edges in the neighbors' lists.

use std::cmp::Ordering;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use crate::clustering::{ClusterId, Clustering};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::heap::IndexedMaxHeap;
use crate::modularity::merge_gain;

/// Ranking criterion for merging two adjacent clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergePrioritizer {
    /// Modularity increase `ΔQ`.
    ModularityIncrease,
    /// Weight density `f(C,D) / (deg(C) deg(D))`.
    WeightDensity,
    /// Significance `ΔQ / sqrt(deg(C) deg(D))`.
    Significance,
    /// Danon et al.: `ΔQ / min(deg(C), deg(D))`.
    Danon,
    /// Wakita and Tsurumi, size measured in vertices.
    WakitaNodes,
    /// Wakita and Tsurumi, size measured in adjacent clusters.
    WakitaEdges,
}

impl MergePrioritizer {
    pub const ALL: [MergePrioritizer; 6] = [
        MergePrioritizer::ModularityIncrease,
        MergePrioritizer::WeightDensity,
        MergePrioritizer::Significance,
        MergePrioritizer::Danon,
        MergePrioritizer::WakitaNodes,
        MergePrioritizer::WakitaEdges,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            MergePrioritizer::ModularityIncrease => "mi",
            MergePrioritizer::WeightDensity => "wd",
            MergePrioritizer::Significance => "sig",
            MergePrioritizer::Danon => "da",
            MergePrioritizer::WakitaNodes => "hn",
            MergePrioritizer::WakitaEdges => "he",
        }
    }

    /// Priority of merging a pair described by `pair`.
    pub fn evaluate(self, pair: &PairStats) -> f64 {
        let gain = merge_gain(pair.weight, pair.degree_a, pair.degree_b, pair.total);
        match self {
            MergePrioritizer::ModularityIncrease => gain,
            MergePrioritizer::WeightDensity => pair.weight / (pair.degree_a * pair.degree_b),
            MergePrioritizer::Significance => gain / (pair.degree_a * pair.degree_b).sqrt(),
            MergePrioritizer::Danon => gain / pair.degree_a.min(pair.degree_b),
            MergePrioritizer::WakitaNodes | MergePrioritizer::WakitaEdges => {
                let ratio = (pair.size_a / pair.size_b).min(pair.size_b / pair.size_a);
                ratio * gain
            }
        }
    }

    fn uses_neighbor_counts(self) -> bool {
        self == MergePrioritizer::WakitaEdges
    }
}

impl fmt::Display for MergePrioritizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for MergePrioritizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MergePrioritizer::ALL
            .into_iter()
            .find(|p| p.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown merge prioritizer '{s}'")))
    }
}

/// Inputs of a merge priority. `size_*` is the vertex count for
/// [`MergePrioritizer::WakitaNodes`] and the adjacent-cluster count for
/// [`MergePrioritizer::WakitaEdges`]; other prioritizers ignore it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairStats {
    pub weight: f64,
    pub degree_a: f64,
    pub degree_b: f64,
    pub size_a: f64,
    pub size_b: f64,
    pub total: f64,
}

/// Merge priority of clusters `c` and `d` of `clustering`.
pub fn priority(
    prioritizer: MergePrioritizer,
    graph: &Graph,
    clustering: &Clustering,
    c: ClusterId,
    d: ClusterId,
) -> Result<f64> {
    graph.require_weight()?;
    clustering.check_pair(c, d)?;
    let weight = clustering.weight_between(graph, c, d);
    if weight <= 0.0 {
        return Err(Error::invalid(format!("clusters {c} and {d} are not adjacent")));
    }
    let size = |x: ClusterId| -> f64 {
        if prioritizer.uses_neighbor_counts() {
            let mut adjacent: Vec<ClusterId> = clustering
                .members(x)
                .iter()
                .flat_map(|&v| graph.neighbors(v))
                .map(|e| clustering.cluster_of(e.0))
                .filter(|&y| y != x)
                .collect();
            adjacent.sort_unstable();
            adjacent.dedup();
            adjacent.len() as f64
        } else {
            clustering.members(x).len() as f64
        }
    };
    let (a, b) = (c.min(d), c.max(d));
    Ok(prioritizer.evaluate(&PairStats {
        weight,
        degree_a: clustering.degree(a),
        degree_b: clustering.degree(b),
        size_a: size(a),
        size_b: size(b),
        total: graph.total_weight(),
    }))
}

/// Which coarsening algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coarsener {
    SingleStep,
    /// Merges up to `merge_fraction` percent of the modularity-increasing
    /// pairs per round.
    MultiStep { merge_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseningConfig {
    pub coarsener: Coarsener,
    pub prioritizer: MergePrioritizer,
}

impl CoarseningConfig {
    pub fn single_step(prioritizer: MergePrioritizer) -> Self {
        CoarseningConfig {
            coarsener: Coarsener::SingleStep,
            prioritizer,
        }
    }

    pub fn multi_step(prioritizer: MergePrioritizer, merge_fraction: f64) -> Self {
        CoarseningConfig {
            coarsener: Coarsener::MultiStep { merge_fraction },
            prioritizer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Coarsener::MultiStep { merge_fraction } = self.coarsener {
            check_merge_fraction(merge_fraction)?;
        }
        Ok(())
    }

    /// Runs the configured coarsener. `vertex_sizes` gives the number of
    /// original vertices behind each vertex of `graph` (all ones when
    /// `None`); only [`MergePrioritizer::WakitaNodes`] reads it.
    pub fn run<F>(&self, graph: &Graph, vertex_sizes: Option<&[usize]>, observer: F) -> Result<Clustering>
    where
        F: FnMut(&MergeStep) -> ControlFlow<()>,
    {
        graph.require_weight()?;
        self.validate()?;
        let mut state = DynamicGraph::new(graph, vertex_sizes)?;
        match self.coarsener {
            Coarsener::SingleStep => run_single_step(&mut state, self.prioritizer, observer),
            Coarsener::MultiStep { merge_fraction } => {
                run_multi_step(&mut state, self.prioritizer, merge_fraction, observer)
            }
        }
        state.into_clustering(graph)
    }
}

/// Reported to the observer after every merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeStep {
    /// Cluster id that remains after the merge.
    pub survivor: ClusterId,
    pub absorbed: ClusterId,
    /// Modularity increase of this merge.
    pub gain: f64,
    /// Live clusters after the merge.
    pub clusters: usize,
}

/// Single-Step Greedy coarsening: repeatedly merges the highest-priority
/// adjacent pair while that merge increases modularity.
pub fn single_step_greedy<F>(graph: &Graph, prioritizer: MergePrioritizer, observer: F) -> Result<Clustering>
where
    F: FnMut(&MergeStep) -> ControlFlow<()>,
{
    CoarseningConfig::single_step(prioritizer).run(graph, None, observer)
}

/// Multi-Step Greedy coarsening with `merge_fraction` in percent, `(0, 100]`.
pub fn multi_step_greedy<F>(
    graph: &Graph,
    prioritizer: MergePrioritizer,
    merge_fraction: f64,
    observer: F,
) -> Result<Clustering>
where
    F: FnMut(&MergeStep) -> ControlFlow<()>,
{
    CoarseningConfig::multi_step(prioritizer, merge_fraction).run(graph, None, observer)
}

fn check_merge_fraction(merge_fraction: f64) -> Result<()> {
    if merge_fraction > 0.0 && merge_fraction <= 100.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "merge fraction must be in (0, 100], got {merge_fraction}"
        )))
    }
}

/// Heap key of a candidate pair. Higher priority wins; ties go to the pair
/// with the smaller lower id, then the smaller higher id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct PairKey {
    pub priority: f64,
    pub lo: usize,
    pub hi: usize,
}

impl PairKey {
    fn new(priority: f64, a: usize, b: usize) -> Self {
        PairKey {
            priority,
            lo: a.min(b),
            hi: a.max(b),
        }
    }
}

impl Eq for PairKey {}

impl Ord for PairKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.lo.cmp(&self.lo))
            .then_with(|| other.hi.cmp(&self.hi))
    }
}

impl PartialOrd for PairKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Clusters as vertices of a shrinking graph. Edge lists hold
/// `(neighbor, f(C, D))` sorted by neighbor and never contain the cluster
/// itself; `f(C, C)` lives in `internal`.
pub(crate) struct DynamicGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    degree: Vec<f64>,
    size: Vec<usize>,
    members: Vec<Vec<usize>>,
    alive: Vec<bool>,
    live: usize,
    total: f64,
}

struct MergeOutcome {
    survivor: usize,
    absorbed: usize,
    gain: f64,
    /// Neighbors adjacent to both clusters before the merge.
    common: Vec<usize>,
}

impl DynamicGraph {
    fn new(graph: &Graph, vertex_sizes: Option<&[usize]>) -> Result<Self> {
        let n = graph.vertex_count();
        let size = match vertex_sizes {
            Some(s) if s.len() != n => {
                return Err(Error::invalid(format!(
                    "{} vertex sizes for {} vertices",
                    s.len(),
                    n
                )))
            }
            Some(s) => s.to_vec(),
            None => vec![1; n],
        };
        let adjacency = (0..n)
            .map(|v| graph.neighbors(v).iter().copied().filter(|e| e.0 != v).collect())
            .collect();
        Ok(DynamicGraph {
            adjacency,
            degree: graph.degrees().to_vec(),
            size,
            members: (0..n).map(|v| vec![v]).collect(),
            alive: vec![true; n],
            live: n,
            total: graph.total_weight(),
        })
    }

    fn stats(&self, prioritizer: MergePrioritizer, a: usize, b: usize, weight: f64) -> PairStats {
        let (a, b) = (a.min(b), a.max(b));
        let size = |x: usize| {
            if prioritizer.uses_neighbor_counts() {
                self.adjacency[x].len() as f64
            } else {
                self.size[x] as f64
            }
        };
        PairStats {
            weight,
            degree_a: self.degree[a],
            degree_b: self.degree[b],
            size_a: size(a),
            size_b: size(b),
            total: self.total,
        }
    }

    fn key(&self, prioritizer: MergePrioritizer, a: usize, b: usize, weight: f64) -> PairKey {
        PairKey::new(prioritizer.evaluate(&self.stats(prioritizer, a, b, weight)), a, b)
    }

    fn gain(&self, a: usize, b: usize, weight: f64) -> f64 {
        merge_gain(weight, self.degree[a.min(b)], self.degree[a.max(b)], self.total)
    }

    /// Best partner of `c` by full scan of its edge list.
    fn best_partner(&self, prioritizer: MergePrioritizer, c: usize) -> Option<PairKey> {
        self.adjacency[c]
            .iter()
            .map(|&(x, w)| self.key(prioritizer, c, x, w))
            .max()
    }

    fn weight_between(&self, a: usize, b: usize) -> f64 {
        let list = &self.adjacency[a];
        match list.binary_search_by_key(&b, |e| e.0) {
            Ok(i) => list[i].1,
            Err(_) => 0.0,
        }
    }

    fn merge(&mut self, a: usize, b: usize) -> MergeOutcome {
        let (survivor, absorbed) = match self.adjacency[a].len().cmp(&self.adjacency[b].len()) {
            Ordering::Less => (b, a),
            Ordering::Greater => (a, b),
            Ordering::Equal => (a.min(b), a.max(b)),
        };
        let between = self.weight_between(survivor, absorbed);
        let gain = self.gain(survivor, absorbed, between);

        let short = std::mem::take(&mut self.adjacency[absorbed]);
        let long = std::mem::take(&mut self.adjacency[survivor]);
        let mut merged = Vec::with_capacity(long.len() + short.len());
        let mut common = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < long.len() || j < short.len() {
            let next_long = long.get(i).map_or(usize::MAX, |e| e.0);
            let next_short = short.get(j).map_or(usize::MAX, |e| e.0);
            if next_long == absorbed {
                i += 1;
            } else if next_short == survivor {
                j += 1;
            } else if next_long < next_short {
                merged.push(long[i]);
                i += 1;
            } else if next_short < next_long {
                merged.push(short[j]);
                j += 1;
            } else {
                merged.push((next_long, long[i].1 + short[j].1));
                common.push(next_long);
                i += 1;
                j += 1;
            }
        }
        self.adjacency[survivor] = merged;

        // Redirect the absorbed cluster's edges in its neighbors' lists.
        for &(x, w) in &short {
            if x == survivor {
                continue;
            }
            let list = &mut self.adjacency[x];
            let pos = list.binary_search_by_key(&absorbed, |e| e.0).unwrap();
            list.remove(pos);
            match list.binary_search_by_key(&survivor, |e| e.0) {
                Ok(k) => list[k].1 += w,
                Err(k) => list.insert(k, (survivor, w)),
            }
        }

        self.degree[survivor] += self.degree[absorbed];
        self.degree[absorbed] = 0.0;
        self.size[survivor] += self.size[absorbed];
        let moved = std::mem::take(&mut self.members[absorbed]);
        self.members[survivor].extend(moved);
        self.alive[absorbed] = false;
        self.live -= 1;

        MergeOutcome {
            survivor,
            absorbed,
            gain,
            common,
        }
    }

    fn into_clustering(self, graph: &Graph) -> Result<Clustering> {
        let mut labels = vec![0; graph.vertex_count()];
        for (c, list) in self.members.iter().enumerate() {
            for &v in list {
                labels[v] = c;
            }
        }
        let mut clustering = Clustering::from_assignment(graph, &labels)?;
        clustering.compact();
        Ok(clustering)
    }

    #[cfg(test)]
    pub(crate) fn brute_force_best(&self, prioritizer: MergePrioritizer) -> Option<PairKey> {
        (0..self.adjacency.len())
            .filter(|&c| self.alive[c])
            .flat_map(|c| self.adjacency[c].iter().map(move |&(x, w)| (c, x, w)))
            .map(|(c, x, w)| self.key(prioritizer, c, x, w))
            .max()
    }
}

fn run_single_step<F>(state: &mut DynamicGraph, prioritizer: MergePrioritizer, mut observer: F)
where
    F: FnMut(&MergeStep) -> ControlFlow<()>,
{
    single_step_loop(state, prioritizer, &mut observer, |_, _| {});
}

/// The queue holds each cluster keyed by its best pair. `after_merge` lets
/// tests inspect the state after every merge.
fn single_step_loop<F, H>(state: &mut DynamicGraph, prioritizer: MergePrioritizer, observer: &mut F, mut after_merge: H)
where
    F: FnMut(&MergeStep) -> ControlFlow<()>,
    H: FnMut(&DynamicGraph, &IndexedMaxHeap<PairKey>),
{
    let n = state.adjacency.len();
    let mut queue = IndexedMaxHeap::new(n);
    for c in 0..n {
        if let Some(key) = state.best_partner(prioritizer, c) {
            queue.set(c, key);
        }
    }

    let mut dirty = Vec::new();
    let mut mark = vec![false; n];
    while let Some((_, top)) = queue.peek() {
        let weight = state.weight_between(top.lo, top.hi);
        if state.gain(top.lo, top.hi, weight) <= 0.0 {
            break;
        }
        let outcome = state.merge(top.lo, top.hi);
        let (survivor, absorbed) = (outcome.survivor, outcome.absorbed);
        queue.remove(absorbed);

        dirty.clear();
        dirty.push(survivor);
        if prioritizer.uses_neighbor_counts() {
            // Neighbor counts of the merged cluster and of common neighbors
            // changed, so every pair touching them has a new priority.
            let mut changed = outcome.common.clone();
            changed.push(survivor);
            for &c in &changed {
                dirty.push(c);
                dirty.extend(state.adjacency[c].iter().map(|e| e.0));
            }
        } else {
            // Only pairs with the merged cluster changed. A neighbor needs a
            // rescan only if its best pair was one of the merged clusters.
            for &(x, w) in &state.adjacency[survivor] {
                match queue.key(x) {
                    Some(best) if [best.lo, best.hi].contains(&survivor) || [best.lo, best.hi].contains(&absorbed) => {
                        dirty.push(x)
                    }
                    Some(best) => {
                        let candidate = state.key(prioritizer, x, survivor, w);
                        if candidate > best {
                            queue.set(x, candidate);
                        }
                    }
                    None => dirty.push(x),
                }
            }
        }
        for &c in &dirty {
            if mark[c] {
                continue;
            }
            mark[c] = true;
            match state.best_partner(prioritizer, c) {
                Some(key) => queue.set(c, key),
                None => {
                    queue.remove(c);
                }
            }
        }
        for &c in &dirty {
            mark[c] = false;
        }

        after_merge(state, &queue);
        let step = MergeStep {
            survivor,
            absorbed,
            gain: outcome.gain,
            clusters: state.live,
        };
        if observer(&step).is_break() {
            break;
        }
    }
}

fn run_multi_step<F>(state: &mut DynamicGraph, prioritizer: MergePrioritizer, merge_fraction: f64, mut observer: F)
where
    F: FnMut(&MergeStep) -> ControlFlow<()>,
{
    let n = state.adjacency.len();
    let mut merged_in_round = vec![0usize; n];
    let mut round = 0usize;
    let mut candidates: Vec<PairKey> = Vec::new();
    loop {
        round += 1;
        candidates.clear();
        for c in 0..n {
            if !state.alive[c] {
                continue;
            }
            for &(x, w) in &state.adjacency[c] {
                if x > c && state.gain(c, x, w) > 0.0 {
                    candidates.push(state.key(prioritizer, c, x, w));
                }
            }
        }
        if candidates.is_empty() {
            return;
        }
        let quota = ((merge_fraction * candidates.len() as f64 / 100.0).ceil() as usize).clamp(1, candidates.len());
        if quota < candidates.len() {
            candidates.select_nth_unstable_by(quota - 1, |a, b| b.cmp(a));
            candidates.truncate(quota);
        }
        candidates.sort_unstable_by(|a, b| b.cmp(a));

        for pair in &candidates {
            if merged_in_round[pair.lo] == round || merged_in_round[pair.hi] == round {
                continue;
            }
            // Neither cluster changed this round, so the snapshot gain is
            // still exact.
            let outcome = state.merge(pair.lo, pair.hi);
            merged_in_round[pair.lo] = round;
            merged_in_round[pair.hi] = round;
            let step = MergeStep {
                survivor: outcome.survivor,
                absorbed: outcome.absorbed,
                gain: outcome.gain,
                clusters: state.live,
            };
            if observer(&step).is_break() {
                return;
            }
        }
    }
}
