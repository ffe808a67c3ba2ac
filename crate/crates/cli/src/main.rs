use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use modclust::bench::{read_configs, read_manifest, run_benchmark, BenchmarkOptions};
use modclust::io::write_clustering;
use modclust::oracle::exact_max_modularity;
use modclust::{
    modularity, multi_level_cluster, read_graph, CoarseningConfig, Format, LoadedGraph, MergePrioritizer,
    ReadOptions, Refiner,
};

#[derive(Parser)]
#[command(name = "modclust", version, about = "Modularity clustering by multi-level greedy coarsening and refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one graph and print its modularity.
    Cluster(ClusterArgs),
    /// Run a configuration matrix over the graphs in a manifest.
    Benchmark(BenchmarkArgs),
    /// Exact maximum modularity by exhaustive search (at most 12 vertices).
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Edgelist,
    Pajek,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CoarsenArg {
    Ss,
    Ms,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrioritizerArg {
    Mi,
    Wd,
    Sig,
    Da,
    Hn,
    He,
}

#[derive(Clone, Copy, ValueEnum)]
enum RefineArg {
    None,
    Fast,
    Complete,
    Kl,
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to pajek for .net/.paj files and edgelist otherwise.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    drop_self_edges: bool,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    coarsen: CoarsenArg,
    /// Percentage of modularity-increasing pairs merged per round (ms only).
    #[arg(long)]
    merge_fraction: Option<f64>,
    #[arg(long, value_enum)]
    prioritizer: PrioritizerArg,
    #[arg(long, value_enum)]
    refine: RefineArg,
    /// Percentage decrease in cluster count that records a level.
    #[arg(long)]
    reduction_factor: f64,
    /// Write "<vertex label> <cluster>" lines here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    configs: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// One untimed run before each timed run.
    #[arg(long)]
    warmup: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Cluster(args) => match cluster_config(&args) {
            Ok(config) => cluster(&args, config),
            Err(message) => {
                eprintln!("error: {message}");
                return ExitCode::from(1);
            }
        },
        Command::Benchmark(args) => benchmark(&args),
        Command::Oracle(args) => oracle(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(input: &InputArgs) -> anyhow::Result<LoadedGraph> {
    let format = match input.format {
        Some(FormatArg::Edgelist) => Format::Edgelist,
        Some(FormatArg::Pajek) => Format::Pajek,
        None => Format::from_path(&input.input),
    };
    let options = ReadOptions {
        drop_self_edges: input.drop_self_edges,
        ..Default::default()
    };
    Ok(read_graph(&input.input, format, options)?)
}

/// Checks the argument combinations clap cannot express.
fn cluster_config(args: &ClusterArgs) -> Result<(CoarseningConfig, Refiner), String> {
    let prioritizer = match args.prioritizer {
        PrioritizerArg::Mi => MergePrioritizer::ModularityIncrease,
        PrioritizerArg::Wd => MergePrioritizer::WeightDensity,
        PrioritizerArg::Sig => MergePrioritizer::Significance,
        PrioritizerArg::Da => MergePrioritizer::Danon,
        PrioritizerArg::Hn => MergePrioritizer::WakitaNodes,
        PrioritizerArg::He => MergePrioritizer::WakitaEdges,
    };
    let coarsening = match (args.coarsen, args.merge_fraction) {
        (CoarsenArg::Ss, None) => CoarseningConfig::single_step(prioritizer),
        (CoarsenArg::Ss, Some(_)) => return Err("--merge-fraction only applies to --coarsen ms".into()),
        (CoarsenArg::Ms, None) => return Err("--coarsen ms requires --merge-fraction".into()),
        (CoarsenArg::Ms, Some(mf)) => CoarseningConfig::multi_step(prioritizer, mf),
    };
    coarsening.validate().map_err(|e| e.to_string())?;
    if !(args.reduction_factor > 0.0 && args.reduction_factor <= 100.0) {
        return Err(format!("--reduction-factor must be in (0, 100], got {}", args.reduction_factor));
    }
    let refiner = match args.refine {
        RefineArg::None => Refiner::None,
        RefineArg::Fast => Refiner::FastGreedy,
        RefineArg::Complete => Refiner::CompleteGreedy,
        RefineArg::Kl => Refiner::KernighanLin,
    };
    Ok((coarsening, refiner))
}

fn cluster(args: &ClusterArgs, (coarsening, refiner): (CoarseningConfig, Refiner)) -> anyhow::Result<()> {
    let loaded = load(&args.input)?;
    let start = Instant::now();
    let outcome = multi_level_cluster(&loaded.graph, &coarsening, refiner, args.reduction_factor)?;
    let runtime = start.elapsed();
    let q = modularity(&loaded.graph, &outcome.clustering)?;
    println!("modularity: {q:.9}");
    println!("clusters: {}", outcome.clustering.cluster_count());
    println!("levels: {}", outcome.levels);
    println!("runtime_ms: {:.3}", runtime.as_secs_f64() * 1e3);
    if let Some(path) = &args.output {
        write_clustering(path, &loaded.labels, &outcome.clustering)?;
    }
    Ok(())
}

fn benchmark(args: &BenchmarkArgs) -> anyhow::Result<()> {
    let entries = read_manifest(&args.manifest)?;
    let configs = read_configs(&args.configs)?;
    if configs.is_empty() && !entries.is_empty() {
        bail!("{}: no configurations", args.configs.display());
    }
    let options = BenchmarkOptions {
        jobs: args.jobs,
        warmup: args.warmup,
    };
    let report = run_benchmark(&entries, &configs, options)?;
    write_report(&args.out, &report)?;
    for row in &report.rows {
        if let Err(message) = &row.outcome {
            eprintln!("{} [{}]: {message}", row.graph, row.config);
        }
    }
    for s in report.summary() {
        println!(
            "{:<28} mean_modularity {:.6}  mean_runtime_ms {:.3}  runs {}  failures {}",
            s.config.to_string(),
            s.mean_modularity,
            s.mean_runtime_ms,
            s.runs,
            s.failures
        );
    }
    Ok(())
}

fn write_report(path: &Path, report: &modclust::bench::BenchmarkReport) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    report.write_csv(BufWriter::new(file))?;
    Ok(())
}

fn oracle(args: &OracleArgs) -> anyhow::Result<()> {
    let loaded = load(&args.input)?;
    let (clustering, q) = exact_max_modularity(&loaded.graph)?;
    println!("modularity: {q:.9}");
    println!("clusters: {}", clustering.cluster_count());
    for (v, label) in loaded.labels.iter().enumerate() {
        println!("{label} {}", clustering.cluster_of(v));
    }
    Ok(())
}
