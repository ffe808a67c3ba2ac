//! Multi-level clustering: coarsening with recorded levels, then refinement
//! from the coarsest level back down to the input graph.

use std::ops::ControlFlow;

use crate::clustering::Clustering;
use crate::coarsening::CoarseningConfig;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::modularity::{contract, project};
use crate::refinement::Refiner;

/// Graphs of all coarsening levels. Level 0 is the input graph; level
/// `l + 1` is the quotient graph of the clustering found on level `l`.
#[derive(Debug, Clone)]
pub struct LevelHierarchy<'g> {
    base: &'g Graph,
    coarse: Vec<Graph>,
    maps: Vec<Vec<usize>>,
    reduction_factor: f64,
}

impl<'g> LevelHierarchy<'g> {
    pub fn level_count(&self) -> usize {
        self.coarse.len() + 1
    }

    pub fn reduction_factor(&self) -> f64 {
        self.reduction_factor
    }

    pub fn graph(&self, level: usize) -> &Graph {
        if level == 0 {
            self.base
        } else {
            &self.coarse[level - 1]
        }
    }

    /// Map from vertices of `level` to vertices of `level + 1`.
    pub fn map(&self, level: usize) -> &[usize] {
        &self.maps[level]
    }

    /// The pure coarsening result on the input graph: every vertex labelled
    /// with its image on the coarsest level.
    pub fn coarsening_clustering(&self) -> Result<Clustering> {
        let labels: Vec<usize> = (0..self.base.vertex_count())
            .map(|v| self.maps.iter().fold(v, |x, map| map[x]))
            .collect();
        Clustering::from_assignment(self.base, &labels)
    }

    /// Projects and refines from the coarsest level down to level 0.
    pub fn refine(&self, refiner: Refiner) -> Result<Clustering> {
        let top = self.level_count() - 1;
        let mut clustering = Clustering::singletons(self.graph(top));
        for level in (0..top).rev() {
            let fine = self.graph(level);
            clustering = project(fine, &clustering, self.map(level))?;
            clustering = refiner.refine(fine, clustering)?;
        }
        Ok(clustering)
    }
}

fn check_reduction_factor(reduction_factor: f64) -> Result<()> {
    if reduction_factor > 0.0 && reduction_factor <= 100.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "reduction factor must be in (0, 100], got {reduction_factor}"
        )))
    }
}

/// Runs `config` level by level. Each pass stops once the cluster count has
/// dropped to `(1 - reduction_factor / 100)` of the level's vertex count, or
/// when the coarsener finds nothing more to merge; a pass that merges
/// nothing ends the coarsening phase.
pub fn build_hierarchy<'g>(
    graph: &'g Graph,
    config: &CoarseningConfig,
    reduction_factor: f64,
) -> Result<LevelHierarchy<'g>> {
    graph.require_weight()?;
    config.validate()?;
    check_reduction_factor(reduction_factor)?;
    let keep = 1.0 - reduction_factor / 100.0;

    let mut hierarchy = LevelHierarchy {
        base: graph,
        coarse: Vec::new(),
        maps: Vec::new(),
        reduction_factor,
    };
    // Original vertices behind each vertex of the current level.
    let mut sizes = vec![1usize; graph.vertex_count()];
    loop {
        let level = hierarchy.graph(hierarchy.level_count() - 1);
        let target = keep * level.vertex_count() as f64;
        let mut merges = 0usize;
        let clustering = config.run(level, Some(&sizes), |step| {
            merges += 1;
            if step.clusters as f64 <= target {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        if merges == 0 {
            break;
        }
        let (coarse, map) = contract(level, &clustering)?;
        let mut coarse_sizes = vec![0usize; coarse.vertex_count()];
        for (v, &c) in map.iter().enumerate() {
            coarse_sizes[c] += sizes[v];
        }
        sizes = coarse_sizes;
        hierarchy.coarse.push(coarse);
        hierarchy.maps.push(map);
    }
    Ok(hierarchy)
}

/// Result of [`multi_level_cluster`].
#[derive(Debug, Clone)]
pub struct MultilevelOutcome {
    pub clustering: Clustering,
    pub levels: usize,
}

/// Coarsens with recorded levels and refines back to the input graph.
pub fn multi_level_cluster(
    graph: &Graph,
    config: &CoarseningConfig,
    refiner: Refiner,
    reduction_factor: f64,
) -> Result<MultilevelOutcome> {
    let hierarchy = build_hierarchy(graph, config, reduction_factor)?;
    Ok(MultilevelOutcome {
        clustering: hierarchy.refine(refiner)?,
        levels: hierarchy.level_count(),
    })
}
