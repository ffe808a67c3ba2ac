//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Graphs are looked up in `$MODCLUST_DATA_DIR` if set, otherwise in the
//! bundled `data/graphs`.

use std::cmp::Ordering;
use std::ops::ControlFlow;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use modclust::coarsening::single_step_greedy;
use modclust::modularity::{contract, delta_q_merge, delta_q_move, modularity_of_labels, project};
use modclust::oracle::exact_max_modularity;
use modclust::synthetic::PlantedPartition;
use modclust::{
    build_hierarchy, modularity, multi_level_cluster, read_graph, Clustering, CoarseningConfig, Format, Graph,
    MergePrioritizer, MoveTarget, ReadOptions, Refiner,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Thresholds for SS-Sig + multi-level (rf 50%) Fast Greedy.
const TABLE_THRESHOLDS: [(&str, f64); 6] = [
    ("karate", 0.4190),
    ("dolphins", 0.5250),
    ("polBooks", 0.5240),
    ("afootball", 0.5970),
    ("jazz", 0.4420),
    ("email", 0.5700),
];
const BUNDLED: [&str; 5] = ["karate", "SouthernWomen", "lesmis", "afootball", "celegansneural"];

const ORACLE_SLACK: f64 = 1e-12;
const ORACLE_GRAPHS: usize = 200;
const ORACLE_MAX_VERTICES: usize = 8;
const ORACLE_HIT_RATE: f64 = 0.60;
const DELTA_CHECKS: usize = 10_000;
const DELTA_TOLERANCE: f64 = 1e-10;
const PROJECTION_TOLERANCE: f64 = 1e-12;
const PERF_LIMIT_SECONDS: f64 = 60.0;
const PERF_REFINE_RATIO: f64 = 5.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 table regression", table_regression),
        ("2 oracle equivalence", oracle_equivalence),
        ("3 delta-Q consistency", delta_q_consistency),
        ("4 multi-level dominance", multilevel_dominance),
        ("5 prioritizer ordering", prioritizer_ordering),
        ("6 monotonicity", monotonicity),
        ("7 performance", performance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let message = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("MODCLUST_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", "graphs"].iter().collect())
}

/// Loads `<name>.net` (Pajek) or `<name>.txt` (edge list).
fn load(name: &str) -> Result<Graph, String> {
    let dir = data_dir();
    for (ext, format) in [("net", Format::Pajek), ("txt", Format::Edgelist)] {
        let path = dir.join(format!("{name}.{ext}"));
        if path.exists() {
            return read_graph(&path, format, ReadOptions::default())
                .map(|g| g.graph)
                .map_err(|e| e.to_string());
        }
    }
    Err(format!("{name}: no {name}.net or {name}.txt in {}", dir.display()))
}

fn sig_ss() -> CoarseningConfig {
    CoarseningConfig::single_step(MergePrioritizer::Significance)
}

fn q_of(graph: &Graph, config: &CoarseningConfig, refiner: Refiner, rf: f64) -> f64 {
    let out = multi_level_cluster(graph, config, refiner, rf).unwrap();
    modularity(graph, &out.clustering).unwrap()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn table_regression() -> Outcome {
    let mut report = Vec::new();
    let mut ok = true;
    for (name, threshold) in TABLE_THRESHOLDS {
        match load(name) {
            Ok(g) => {
                let q = q_of(&g, &sig_ss(), Refiner::FastGreedy, 50.0);
                ok &= q >= threshold;
                report.push(format!("{name} {q:.4}{}{threshold}", if q >= threshold { ">=" } else { "<" }));
            }
            Err(e) => {
                ok = false;
                report.push(format!("{name} missing ({e})"));
            }
        }
    }
    let detail = report.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Random graph on 2..=max vertices with unit and real weights, the odd
/// self-edge, and at least one edge.
fn small_random_graph(rng: &mut ChaCha8Rng, max: usize) -> Graph {
    let n = rng.gen_range(2..=max);
    let density = rng.gen_range(0.2..0.8);
    let mut edges = vec![(0, 1, 1.0)];
    for u in 0..n {
        for v in u..n {
            let p = if u == v { 0.05 } else { density };
            if rng.gen_bool(p) {
                let w = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(0.1..5.0) };
                edges.push((u, v, w));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

fn all_configs() -> Vec<(CoarseningConfig, Refiner, f64)> {
    let mut out = Vec::new();
    for p in MergePrioritizer::ALL {
        let coarseners = [
            CoarseningConfig::single_step(p),
            CoarseningConfig::multi_step(p, 10.0),
            CoarseningConfig::multi_step(p, 50.0),
            CoarseningConfig::multi_step(p, 100.0),
        ];
        for c in coarseners {
            for r in Refiner::ALL {
                for rf in [25.0, 50.0, 100.0] {
                    out.push((c, r, rf));
                }
            }
        }
    }
    out
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let configs = all_configs();
    let mut hits = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    for i in 0..ORACLE_GRAPHS {
        let g = small_random_graph(&mut rng, ORACLE_MAX_VERTICES);
        let (_, optimum) = exact_max_modularity(&g).unwrap();
        for (c, r, rf) in &configs {
            let q = q_of(&g, c, *r, *rf);
            worst_excess = worst_excess.max(q - optimum);
            if q > optimum + ORACLE_SLACK {
                return Err(format!("graph {i}: {c:?} {r} rf {rf} gives {q} above optimum {optimum}"));
            }
        }
        let q = q_of(&g, &sig_ss(), Refiner::FastGreedy, 50.0);
        if (q - optimum).abs() <= ORACLE_SLACK {
            hits += 1;
        }
    }
    let rate = hits as f64 / ORACLE_GRAPHS as f64;
    let detail = format!(
        "{} configs x {ORACLE_GRAPHS} graphs never above optimum (max excess {worst_excess:.1e}); SS-Sig+ML optimal on {hits}/{ORACLE_GRAPHS} = {:.1}% (need {:.0}%)",
        configs.len(),
        rate * 100.0,
        ORACLE_HIT_RATE * 100.0
    );
    if rate >= ORACLE_HIT_RATE {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn delta_q_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xD17A);
    let mut worst = 0.0f64;
    let mut checks = 0;
    while checks < DELTA_CHECKS {
        let n = rng.gen_range(3..40);
        let mut edges = vec![(0, 1, 1.0)];
        for u in 0..n {
            for v in u..n {
                if rng.gen_bool(if u == v { 0.03 } else { 0.15 }) {
                    let w = if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(0.01..10.0) };
                    edges.push((u, v, w));
                }
            }
        }
        let g = Graph::from_edges(n, edges).unwrap();
        let k = rng.gen_range(1..=n);
        let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let c = Clustering::from_assignment(&g, &labels).unwrap();
        let labels = c.assignment().to_vec();
        let base = modularity_of_labels(&g, &labels).unwrap();
        for _ in 0..10 {
            let (predicted, after) = if rng.gen_bool(0.5) && c.cluster_count() > 1 {
                let a = rng.gen_range(0..c.cluster_count());
                let b = (a + rng.gen_range(1..c.cluster_count())) % c.cluster_count();
                let merged: Vec<usize> = labels.iter().map(|&x| if x == b { a } else { x }).collect();
                (delta_q_merge(&g, &c, a, b).unwrap(), modularity_of_labels(&g, &merged).unwrap())
            } else {
                let v = rng.gen_range(0..n);
                let own = labels[v];
                let target = rng.gen_range(0..=c.cluster_count());
                let (target, label) = if target == c.cluster_count() || target == own {
                    (MoveTarget::New, n + 1)
                } else {
                    (MoveTarget::Cluster(target), target)
                };
                let mut moved = labels.clone();
                moved[v] = label;
                (delta_q_move(&g, &c, v, target).unwrap(), modularity_of_labels(&g, &moved).unwrap())
            };
            worst = worst.max((predicted - (after - base)).abs());
            checks += 1;
        }
    }
    let detail = format!("{checks} merge/move checks, max |predicted - recomputed| = {worst:.2e} (limit {DELTA_TOLERANCE:.0e})");
    if worst <= DELTA_TOLERANCE {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bundled() -> Vec<(&'static str, Graph)> {
    BUNDLED.iter().map(|&name| (name, load(name).unwrap())).collect()
}

fn multilevel_dominance() -> Outcome {
    let mut half = Vec::new();
    let mut full = Vec::new();
    let mut report = Vec::new();
    for (name, g) in bundled() {
        let q50 = q_of(&g, &sig_ss(), Refiner::FastGreedy, 50.0);
        let q100 = q_of(&g, &sig_ss(), Refiner::FastGreedy, 100.0);
        report.push(format!("{name} {q50:.4}/{q100:.4}"));
        half.push(q50);
        full.push(q100);
    }
    let strictly = half.iter().zip(&full).filter(|(a, b)| a > b).count();
    let detail = format!(
        "mean rf50 {:.5} vs rf100 {:.5}, rf50 strictly better on {strictly} graphs ({})",
        mean(&half),
        mean(&full),
        report.join(", ")
    );
    if mean(&half) >= mean(&full) && strictly > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn prioritizer_ordering() -> Outcome {
    let graphs = bundled();
    let mean_for = |p: MergePrioritizer| {
        let qs: Vec<f64> = graphs
            .iter()
            .map(|(_, g)| q_of(g, &CoarseningConfig::single_step(p), Refiner::None, 100.0))
            .collect();
        mean(&qs)
    };
    let [sig, da, hn, he] = [
        MergePrioritizer::Significance,
        MergePrioritizer::Danon,
        MergePrioritizer::WakitaNodes,
        MergePrioritizer::WakitaEdges,
    ]
    .map(mean_for);
    let detail = format!("mean Q without refinement: sig {sig:.5}, da {da:.5}, hn {hn:.5}, he {he:.5}");
    if sig > hn.max(he) && da > hn.max(he) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x303);
    let mut graphs: Vec<Graph> = bundled().into_iter().map(|(_, g)| g).collect();
    for _ in 0..40 {
        graphs.push(small_random_graph(&mut rng, 60));
    }
    let (mut refiner_runs, mut merges, mut projections) = (0, 0, 0);
    let mut worst_projection = 0.0f64;
    for g in &graphs {
        let n = g.vertex_count();
        for p in MergePrioritizer::ALL {
            for config in [CoarseningConfig::single_step(p), CoarseningConfig::multi_step(p, 20.0)] {
                let mut bad = None;
                config
                    .run(g, None, |step| {
                        merges += 1;
                        if step.gain.partial_cmp(&0.0) != Some(Ordering::Greater) && bad.is_none() {
                            bad = Some(step.gain);
                        }
                        ControlFlow::Continue(())
                    })
                    .unwrap();
                if let Some(gain) = bad {
                    return Err(format!("{config:?} merged with gain {gain}"));
                }
            }
        }

        let coarse = single_step_greedy(g, MergePrioritizer::Significance, |_| ControlFlow::Continue(())).unwrap();
        let random = {
            let k = rng.gen_range(1..=n.min(10));
            Clustering::from_assignment(g, &(0..n).map(|_| rng.gen_range(0..k)).collect::<Vec<_>>()).unwrap()
        };
        for start in [Clustering::singletons(g), Clustering::single_cluster(g), coarse, random] {
            let before = modularity(g, &start).unwrap();
            for r in [Refiner::FastGreedy, Refiner::CompleteGreedy, Refiner::KernighanLin] {
                let after = modularity(g, &r.refine(g, start.clone()).unwrap()).unwrap();
                refiner_runs += 1;
                if after < before {
                    return Err(format!("{r} lowered Q from {before} to {after}"));
                }
            }
        }

        for rf in [20.0, 50.0] {
            let h = build_hierarchy(g, &CoarseningConfig::single_step(MergePrioritizer::Danon), rf).unwrap();
            for level in 0..h.level_count() - 1 {
                let coarse_graph = h.graph(level + 1);
                let m = coarse_graph.vertex_count();
                let k = rng.gen_range(1..=m);
                let labels: Vec<usize> = (0..m).map(|_| rng.gen_range(0..k)).collect();
                let c = Clustering::from_assignment(coarse_graph, &labels).unwrap();
                let fine = project(h.graph(level), &c, h.map(level)).unwrap();
                let qc = modularity(coarse_graph, &c).unwrap();
                let qf = modularity(h.graph(level), &fine).unwrap();
                worst_projection = worst_projection.max((qc - qf).abs() / term_magnitude(coarse_graph, &c));
                projections += 1;
            }
        }
        // Contracting by any clustering and projecting back is exact too.
        let (cg, map) = contract(g, &Clustering::singletons(g)).unwrap();
        let back = project(g, &Clustering::singletons(&cg), &map).unwrap();
        if !back.same_partition(&Clustering::singletons(g)) {
            return Err("identity contraction does not round-trip".into());
        }
    }
    let detail = format!(
        "{refiner_runs} refiner runs never lowered Q, {merges} merges all with gain > 0, {projections} projections within {worst_projection:.1e} relative to the Q terms"
    );
    if worst_projection <= PROJECTION_TOLERANCE {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Sum of the absolute values of the per-cluster terms of Q, the scale of
/// rounding error in Q (Q itself can cancel to zero).
fn term_magnitude(graph: &Graph, clustering: &Clustering) -> f64 {
    let w = graph.total_weight();
    clustering
        .cluster_ids()
        .map(|c| clustering.internal_weight(c) / w + (clustering.degree(c) / w).powi(2))
        .sum()
}

fn performance() -> Outcome {
    let graph = PlantedPartition {
        vertices: 25_000,
        groups: 500,
        edges: 70_000,
        mixing: 0.25,
        seed: 28,
    }
    .generate()
    .unwrap();

    let start = Instant::now();
    single_step_greedy(&graph, MergePrioritizer::Significance, |_| ControlFlow::Continue(())).unwrap();
    let raw = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let hierarchy = build_hierarchy(&graph, &sig_ss(), 50.0).unwrap();
    let coarsening = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let clustering = hierarchy.refine(Refiner::FastGreedy).unwrap();
    let refinement = start.elapsed().as_secs_f64();
    let total = coarsening + refinement;
    let q = modularity(&graph, &clustering).unwrap();

    let detail = format!(
        "{} vertices, {} edges: Q {q:.4}, total {total:.3}s (limit {PERF_LIMIT_SECONDS}s), raw coarsening {raw:.3}s, multi-level coarsening {coarsening:.3}s, refinement {refinement:.3}s = {:.2}x raw (limit {PERF_REFINE_RATIO}x)",
        graph.vertex_count(),
        graph.edge_count(),
        refinement / raw
    );
    if total < PERF_LIMIT_SECONDS && refinement < PERF_REFINE_RATIO * raw {
        Ok(detail)
    } else {
        Err(detail)
    }
}
