//! Benchmark harness: runs a matrix of configurations over a set of graphs
//! and reports modularity and runtime per run.
//!
//! Manifest lines are `name path format [uw]`, with `path` relative to the
//! manifest file. Config lines are `ss|ms:<merge fraction> <prioritizer>
//! <refiner> <reduction factor>`. Both accept `#` comments.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::coarsening::{Coarsener, CoarseningConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::{read_graph, Format, LoadedGraph, ReadOptions};
use crate::modularity::modularity;
use crate::multilevel::{multi_level_cluster, MultilevelOutcome};
use crate::refinement::Refiner;

pub const CSV_HEADER: [&str; 11] = [
    "graph",
    "coarsener",
    "merge_fraction",
    "prioritizer",
    "refiner",
    "reduction_factor",
    "n",
    "m",
    "modularity",
    "runtime_ms",
    "clusters",
];

/// One point of the design space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub coarsening: CoarseningConfig,
    pub refiner: Refiner,
    pub reduction_factor: f64,
}

impl RunConfig {
    pub fn run(&self, graph: &Graph) -> Result<MultilevelOutcome> {
        multi_level_cluster(graph, &self.coarsening, self.refiner, self.reduction_factor)
    }

    pub fn merge_fraction(&self) -> Option<f64> {
        match self.coarsening.coarsener {
            Coarsener::SingleStep => None,
            Coarsener::MultiStep { merge_fraction } => Some(merge_fraction),
        }
    }

    fn coarsener_name(&self) -> &'static str {
        match self.coarsening.coarsener {
            Coarsener::SingleStep => "ss",
            Coarsener::MultiStep { .. } => "ms",
        }
    }
}

impl fmt::Display for RunConfig {
    /// Same syntax as a config file line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.merge_fraction() {
            None => write!(f, "ss")?,
            Some(mf) => write!(f, "ms:{mf}")?,
        }
        write!(
            f,
            " {} {} {}",
            self.coarsening.prioritizer, self.refiner, self.reduction_factor
        )
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn line_error(source: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Parses config lines; `source` only labels errors.
pub fn parse_configs(text: &str, source: &Path) -> Result<Vec<RunConfig>> {
    let mut configs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let err = |m: String| line_error(source, i + 1, m);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [coarsener, prioritizer, refiner, rf] = fields[..] else {
            return Err(err(format!("expected 4 fields, got {}", fields.len())));
        };
        let prioritizer = prioritizer.parse().map_err(|e: Error| err(e.to_string()))?;
        let coarsening = match coarsener.split_once(':') {
            None if coarsener == "ss" => CoarseningConfig::single_step(prioritizer),
            Some(("ms", mf)) => {
                let mf: f64 = mf.parse().map_err(|_| err(format!("invalid merge fraction '{mf}'")))?;
                CoarseningConfig::multi_step(prioritizer, mf)
            }
            _ => return Err(err(format!("unknown coarsener '{coarsener}' (ss or ms:<fraction>)"))),
        };
        coarsening.validate().map_err(|e| err(e.to_string()))?;
        let refiner = refiner.parse().map_err(|e: Error| err(e.to_string()))?;
        let reduction_factor: f64 = rf.parse().map_err(|_| err(format!("invalid reduction factor '{rf}'")))?;
        if !(reduction_factor > 0.0 && reduction_factor <= 100.0) {
            return Err(err(format!("reduction factor must be in (0, 100], got {rf}")));
        }
        configs.push(RunConfig {
            coarsening,
            refiner,
            reduction_factor,
        });
    }
    Ok(configs)
}

pub fn read_configs(path: impl AsRef<Path>) -> Result<Vec<RunConfig>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_configs(&text, path)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    pub path: PathBuf,
    pub format: Format,
    pub unweighted: bool,
}

impl ManifestEntry {
    pub fn load(&self) -> Result<LoadedGraph> {
        let options = ReadOptions {
            unweighted: self.unweighted,
            ..Default::default()
        };
        read_graph(&self.path, self.format, options)
    }
}

/// Parses manifest lines, resolving relative paths against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path, source: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let err = |m: String| line_error(source, i + 1, m);
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (name, path, format, flag) = match fields[..] {
            [name, path, format] => (name, path, format, None),
            [name, path, format, flag] => (name, path, format, Some(flag)),
            _ => return Err(err("expected 'name path format [uw]'".into())),
        };
        let unweighted = match flag {
            None => false,
            Some(f) if f.eq_ignore_ascii_case("uw") => true,
            Some(f) => return Err(err(format!("unknown flag '{f}'"))),
        };
        entries.push(ManifestEntry {
            name: name.to_string(),
            path: base_dir.join(path),
            format: format.parse().map_err(|e: Error| err(e.to_string()))?,
            unweighted,
        });
    }
    Ok(entries)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new(""));
    parse_manifest(&text, base, path)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub modularity: f64,
    pub runtime_ms: f64,
    pub clusters: usize,
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRow {
    pub graph: String,
    pub config: RunConfig,
    /// Vertex and edge counts, absent when the graph failed to load.
    pub size: Option<(usize, usize)>,
    pub outcome: std::result::Result<RunStats, String>,
}

#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    pub rows: Vec<BenchmarkRow>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigSummary {
    pub config: RunConfig,
    pub mean_modularity: f64,
    pub mean_runtime_ms: f64,
    pub runs: usize,
    pub failures: usize,
}

impl BenchmarkReport {
    /// Mean over successful runs, one entry per distinct config in first-seen
    /// order.
    pub fn summary(&self) -> Vec<ConfigSummary> {
        let mut out: Vec<ConfigSummary> = Vec::new();
        for row in &self.rows {
            let entry = match out.iter_mut().position(|s| s.config == row.config) {
                Some(i) => &mut out[i],
                None => {
                    out.push(ConfigSummary {
                        config: row.config,
                        mean_modularity: 0.0,
                        mean_runtime_ms: 0.0,
                        runs: 0,
                        failures: 0,
                    });
                    out.last_mut().unwrap()
                }
            };
            match &row.outcome {
                Ok(stats) => {
                    entry.runs += 1;
                    entry.mean_modularity += stats.modularity;
                    entry.mean_runtime_ms += stats.runtime_ms;
                }
                Err(_) => entry.failures += 1,
            }
        }
        for s in &mut out {
            if s.runs > 0 {
                s.mean_modularity /= s.runs as f64;
                s.mean_runtime_ms /= s.runs as f64;
            } else {
                s.mean_modularity = f64::NAN;
                s.mean_runtime_ms = f64::NAN;
            }
        }
        out
    }

    /// Writes the CSV report. Failed runs leave the result columns empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(writer);
        csv.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let c = &row.config;
            let (n, m) = match row.size {
                Some((n, m)) => (n.to_string(), m.to_string()),
                None => (String::new(), String::new()),
            };
            let (q, ms, k) = match &row.outcome {
                Ok(s) => (format!("{:.9}", s.modularity), format!("{:.3}", s.runtime_ms), s.clusters.to_string()),
                Err(_) => (String::new(), String::new(), String::new()),
            };
            csv.write_record([
                row.graph.as_str(),
                c.coarsener_name(),
                &c.merge_fraction().map_or(String::new(), |mf| mf.to_string()),
                c.coarsening.prioritizer.short_name(),
                c.refiner.short_name(),
                &c.reduction_factor.to_string(),
                &n,
                &m,
                &q,
                &ms,
                &k,
            ])?;
        }
        csv.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchmarkOptions {
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    /// Run each configuration once untimed before the timed run.
    pub warmup: bool,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions { jobs: 1, warmup: false }
    }
}

/// Runs every config on every graph. Rows come out graph-major in manifest
/// and config order regardless of `jobs`; a graph that fails to load yields
/// one failed row per config.
pub fn run_benchmark(
    entries: &[ManifestEntry],
    configs: &[RunConfig],
    options: BenchmarkOptions,
) -> Result<BenchmarkReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        let graphs: Vec<std::result::Result<LoadedGraph, String>> = entries
            .par_iter()
            .map(|e| e.load().map_err(|err| err.to_string()))
            .collect();
        let tasks: Vec<(usize, usize)> = (0..entries.len())
            .flat_map(|g| (0..configs.len()).map(move |c| (g, c)))
            .collect();
        tasks
            .par_iter()
            .map(|&(g, c)| {
                let config = configs[c];
                let graph = entries[g].name.clone();
                match &graphs[g] {
                    Err(message) => BenchmarkRow {
                        graph,
                        config,
                        size: None,
                        outcome: Err(message.clone()),
                    },
                    Ok(loaded) => {
                        let g = &loaded.graph;
                        BenchmarkRow {
                            graph,
                            config,
                            size: Some((g.vertex_count(), g.edge_count())),
                            outcome: timed_run(g, &config, options.warmup).map_err(|e| e.to_string()),
                        }
                    }
                }
            })
            .collect()
    });
    Ok(BenchmarkReport { rows })
}

fn timed_run(graph: &Graph, config: &RunConfig, warmup: bool) -> Result<RunStats> {
    if warmup {
        config.run(graph)?;
    }
    let start = Instant::now();
    let outcome = config.run(graph)?;
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(RunStats {
        modularity: modularity(graph, &outcome.clustering)?,
        runtime_ms,
        clusters: outcome.clustering.cluster_count(),
        levels: outcome.levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarsening::MergePrioritizer;

    fn configs(text: &str) -> Result<Vec<RunConfig>> {
        parse_configs(text, Path::new("configs.txt"))
    }

    #[test]
    fn config_lines() {
        let parsed = configs("# matrix\nss sig fast 50\nms:12.5 he kl 100 # trailing\n").unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].coarsening, CoarseningConfig::single_step(MergePrioritizer::Significance));
        assert_eq!(parsed[0].refiner, Refiner::FastGreedy);
        assert_eq!(parsed[1].merge_fraction(), Some(12.5));
        assert_eq!(parsed[1].to_string(), "ms:12.5 he kl 100");
        assert_eq!(configs(&parsed[1].to_string()).unwrap()[0], parsed[1]);
    }

    #[test]
    fn bad_config_lines() {
        for (text, line) in [
            ("ss sig fast\n", 1),
            ("\nms sig fast 50\n", 2),
            ("ms:0 sig fast 50\n", 1),
            ("ss xx fast 50\n", 1),
            ("ss sig slow 50\n", 1),
            ("ss sig fast 150\n", 1),
        ] {
            match configs(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn manifest_lines() {
        let entries = parse_manifest(
            "karate karate.net pajek uw\n# skip\nsmall sub/x.txt edgelist\n",
            Path::new("/data"),
            Path::new("m"),
        )
        .unwrap();
        assert_eq!(entries[0].path, Path::new("/data/karate.net"));
        assert!(entries[0].unweighted);
        assert_eq!(entries[1].format, Format::Edgelist);
        assert!(!entries[1].unweighted);
        assert!(parse_manifest("a b pajek xx\n", Path::new("."), Path::new("m")).is_err());
        assert!(parse_manifest("a b\n", Path::new("."), Path::new("m")).is_err());
    }

    #[test]
    fn empty_inputs_give_empty_report() {
        let report = run_benchmark(&[], &configs("ss sig fast 50").unwrap(), BenchmarkOptions::default()).unwrap();
        assert!(report.rows.is_empty());
        let mut out = Vec::new();
        report.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn rows_are_ordered_and_deterministic_with_failures() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("t.txt"), "0 1\n1 2\n2 0\n2 3\n3 4\n4 5\n5 3\n").unwrap();
        let entries = parse_manifest("two t.txt edgelist\nmissing none.txt edgelist\n", dir.path(), Path::new("m")).unwrap();
        let cfgs = configs("ss sig fast 50\nms:50 mi none 100\n").unwrap();
        let report = run_benchmark(&entries, &cfgs, BenchmarkOptions { jobs: 3, warmup: true }).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert_eq!(report.rows[0].graph, "two");
        assert_eq!(report.rows[1].config, cfgs[1]);
        assert!(report.rows[2].outcome.is_err() && report.rows[3].outcome.is_err());
        let q = report.rows[0].outcome.as_ref().unwrap().modularity;
        assert!((q - 5.0 / 14.0).abs() < 1e-12);

        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("two,ss,,sig,fast,50,6,7,0.357142857,"));
        assert!(lines[2].starts_with("two,ms,50,mi,none,100,6,7,"));
        assert_eq!(lines[3], "missing,ss,,sig,fast,50,,,,,");

        let summary = report.summary();
        assert_eq!(summary.len(), 2);
        assert_eq!((summary[0].runs, summary[0].failures), (1, 1));
        assert!((summary[0].mean_modularity - q).abs() < 1e-15);
    }
}
