//! Seeded random graphs with planted clusters.

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Unweighted graph with `vertices` split round-robin into `groups`, and
/// exactly `edges` distinct edges. Each edge stays inside a group with
/// probability `1 - mixing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedPartition {
    pub vertices: usize,
    pub groups: usize,
    pub edges: usize,
    pub mixing: f64,
    pub seed: u64,
}

impl PlantedPartition {
    pub fn generate(&self) -> Result<Graph> {
        let n = self.vertices;
        if self.groups == 0 || n < 2 * self.groups {
            return Err(Error::invalid("need at least two vertices per group"));
        }
        if !(0.0..=1.0).contains(&self.mixing) {
            return Err(Error::invalid(format!("mixing {} outside [0, 1]", self.mixing)));
        }
        let group_size = n / self.groups;
        let capacity = self.groups * group_size * (group_size - 1) / 2;
        if self.edges > capacity / 2 {
            return Err(Error::invalid("too many edges for a sparse planted partition"));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut seen = HashSet::with_capacity(self.edges);
        let mut edges = Vec::with_capacity(self.edges);
        while edges.len() < self.edges {
            let u = rng.gen_range(0..n);
            let v = if rng.gen_bool(self.mixing) {
                rng.gen_range(0..n)
            } else {
                // Same residue class modulo `groups`.
                let group = u % self.groups;
                group + self.groups * rng.gen_range(0..(n - group).div_ceil(self.groups))
            };
            if u != v && seen.insert((u.min(v), u.max(v))) {
                edges.push((u, v, 1.0));
            }
        }
        Graph::from_edges(n, edges)
    }
}
