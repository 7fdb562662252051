//! `qpredec`: build, analyze, simulate and emit predecoder pipelines.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qpredec::decode2::default_bp_iters;
use qpredec::dem::{merge_duplicates, parse_dem, CssCodeSpec, DetectorErrorModel, NoiseConfig, Sector, Sidecar};
use qpredec::flow::{build, default_timeout, BuildConfig, BuildOutput, ModelSource};
use qpredec::pipeline::{
    build_conflict_graph, emit_pipeline, read_pipeline, truncate_pipeline, Format, Pipeline,
};
use qpredec::primitives::{class_table, PrimitiveSet};
use qpredec::sim::{reports_to_csv, run_experiment, sweep, ExperimentConfig, ExperimentReport, SweepGrid};

#[derive(Parser)]
#[command(name = "qpredec", version, about = "Length-1 predecoder construction and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a pipeline from a model and write it with a build report.
    Build(BuildArgs),
    /// Run a Monte-Carlo experiment on a built pipeline.
    Simulate(SimulateArgs),
    /// Build and simulate over a grid of error rates and/or truncations.
    Sweep(SweepArgs),
    /// Print the class table and conflict-graph statistics of a pipeline.
    Analyze(AnalyzeArgs),
    /// Re-render a pipeline as JSON or netlist text.
    Emit(EmitArgs),
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Detector error model file.
    #[arg(long, conflicts_with = "code")]
    dem: Option<PathBuf>,
    /// CSS code JSON file for a phenomenological model.
    #[arg(long)]
    code: Option<PathBuf>,
    #[arg(long, value_parser = parse_sector, default_value = "Z")]
    sector: Sector,
    #[arg(long, default_value_t = 3)]
    rounds: u32,
    #[arg(long, default_value_t = 1e-3)]
    p_data: f64,
    #[arg(long, default_value_t = 0.0)]
    p_meas: f64,
    #[arg(long, default_value_t = 0.0)]
    p_hook: f64,
    /// Round count for coordinate-free models (round-major layout).
    #[arg(long)]
    dem_rounds: Option<u32>,
    /// JSON map from mechanism index to "data" | "measurement" | "hook".
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

fn parse_sector(s: &str) -> Result<Sector, String> {
    s.parse().map_err(|e: qpredec::Error| e.to_string())
}

impl SourceArgs {
    fn source(&self) -> Result<ModelSource> {
        match (&self.dem, &self.code) {
            (Some(path), None) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let mut model = parse_dem(&text).with_context(|| format!("parsing {}", path.display()))?;
                if let Some(r) = self.dem_rounds {
                    if !model.has_rounds() {
                        model.assign_uniform_rounds(r)?;
                    }
                }
                let sidecar = match &self.sidecar {
                    Some(p) => Some(read_sidecar(p)?),
                    None => None,
                };
                let name = path
                    .file_stem()
                    .map_or_else(|| "model".to_string(), |s| s.to_string_lossy().into_owned());
                Ok(ModelSource::Dem { name, model, sidecar })
            }
            (None, Some(path)) => {
                if self.sidecar.is_some() {
                    bail!("--sidecar applies to --dem inputs; code models carry their own provenance");
                }
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let code = CssCodeSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))?;
                let noise = NoiseConfig {
                    p_data: self.p_data,
                    p_meas: self.p_meas,
                    p_hook: self.p_hook,
                    rounds: self.rounds,
                };
                noise.validate()?;
                Ok(ModelSource::Code {
                    code,
                    sector: self.sector,
                    noise,
                })
            }
            _ => bail!("give exactly one of --dem or --code"),
        }
    }

    fn code_distance(&self) -> Result<Option<usize>> {
        match &self.code {
            Some(path) => Ok(CssCodeSpec::from_json(&fs::read_to_string(path)?)?.d),
            None => Ok(None),
        }
    }
}

fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing sidecar {}", path.display()))
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Exact-coloring budget per conflict graph, seconds [env: QPREDEC_TIMEOUT, default 60].
    #[arg(long)]
    timeout: Option<f64>,
    /// Seed of the random-sequential coloring heuristic.
    #[arg(long, default_value_t = 0)]
    color_seed: u64,
}

impl SolverArgs {
    fn config(&self) -> Result<BuildConfig> {
        let timeout = match self.timeout {
            Some(t) if t.is_finite() && t >= 0.0 => Duration::from_secs_f64(t),
            Some(t) => bail!("timeout must be a non-negative number of seconds, got {t}"),
            None => default_timeout(),
        };
        Ok(BuildConfig {
            timeout,
            greedy_seed: self.color_seed,
        })
    }
}

#[derive(Args, Clone)]
struct DecoderArgs {
    #[arg(long)]
    bp_iters: Option<usize>,
    /// Code distance for the latency-budget iteration count.
    #[arg(long)]
    distance: Option<usize>,
    #[arg(long, default_value_t = 20)]
    ns_per_iter: usize,
    /// Give BP ten times the iteration budget.
    #[arg(long)]
    osd_budget_x10: bool,
}

impl DecoderArgs {
    fn config(&self, source: &SourceArgs) -> Result<ExperimentConfig> {
        let bp_iters = match (self.bp_iters, self.distance.or(source.code_distance()?)) {
            (Some(n), _) => n,
            (None, Some(d)) => default_bp_iters(d, self.ns_per_iter),
            (None, None) => bail!("give --bp-iters, or --distance for the latency budget"),
        };
        if bp_iters == 0 {
            bail!("BP needs at least one iteration");
        }
        Ok(ExperimentConfig {
            bp_iters,
            osd_budget_x10: self.osd_budget_x10,
        })
    }
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = all cores). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Pipeline output path; the build report goes next to it as
    /// `<stem>.report.json`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    pipeline: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Remove this many stages from the tail first.
    #[arg(long, default_value_t = 0)]
    truncate: usize,
    /// Run even if the model hash differs from the pipeline's.
    #[arg(long)]
    force: bool,
    /// CSV output path; a JSON report is written next to it.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    decoder: DecoderArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated physical error rates (code sources only).
    #[arg(long, value_delimiter = ',')]
    p_grid: Vec<f64>,
    /// Comma-separated numbers of tail stages to remove.
    #[arg(long, value_delimiter = ',')]
    truncate_grid: Vec<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
}

#[derive(Args)]
struct AnalyzeArgs {
    pipeline: PathBuf,
    /// Optional model, for round-aware conflict graphs.
    #[command(flatten)]
    source: OptionalSource,
}

#[derive(Args)]
struct OptionalSource {
    #[arg(long)]
    dem: Option<PathBuf>,
}

#[derive(Args)]
struct EmitArgs {
    #[arg(long)]
    pipeline: PathBuf,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    NetlistText,
    Csv,
}

fn pipeline_format(f: OutFormat) -> Result<Format> {
    match f {
        OutFormat::Json => Ok(Format::Json),
        OutFormat::NetlistText => Ok(Format::NetlistText),
        OutFormat::Csv => bail!("pipelines are written as json or netlist-text"),
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    path.with_file_name(format!("{stem}{suffix}"))
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    pool.install(f)
}

fn summary(out: &BuildOutput) -> String {
    let r = &out.report;
    let mut s = format!(
        "code {}\nmodel {} detectors, {} observables, {} mechanisms\n\
         primitives generated {} round-pruned {} composite-pruned {} reinstated {} retained {}\n\
         depth {} (clique bound {})\n",
        r.code,
        r.num_detectors,
        r.num_observables,
        r.input_mechanisms,
        r.generated,
        r.round_pruned,
        r.composite_pruned,
        r.reinstated,
        r.retained,
        r.depth,
        r.omega_sum
    );
    s.push_str("class            nodes  edges  omega  colors  greedy  method\n");
    for g in &r.graphs {
        s.push_str(&format!(
            "{:<16} {:>5}  {:>5}  {:>5}  {:>6}  {:>6}  {}\n",
            g.class.name(),
            g.nodes,
            g.edges,
            g.omega,
            g.colors,
            g.best_greedy_colors,
            g.method
        ));
    }
    if !r.single_error_failures.is_empty() {
        s.push_str(&format!(
            "warning: {} mechanisms are not resolved on their own\n",
            r.single_error_failures.len()
        ));
    }
    s
}

fn cmd_build(args: BuildArgs) -> Result<()> {
    let source = args.source.source()?;
    let out = build(&source, &args.solver.config()?)?;
    let text = emit_pipeline(&out.pipeline, pipeline_format(args.format)?);
    match &args.out {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            let report = serde_json::to_string_pretty(&out.report)? + "\n";
            let report_path = sibling(path, ".report.json");
            fs::write(&report_path, report).with_context(|| format!("writing {}", report_path.display()))?;
            print!("{}", summary(&out));
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn load_pipeline(path: &Path) -> Result<Pipeline> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_pipeline(&text).with_context(|| format!("parsing pipeline {}", path.display()))
}

fn merged_model(source: &ModelSource) -> Result<DetectorErrorModel> {
    Ok(merge_duplicates(&source.load()?.0))
}

fn write_reports(reports: &[ExperimentReport], out: Option<&Path>, format: OutFormat) -> Result<()> {
    let csv = reports_to_csv(reports);
    let json = serde_json::to_string_pretty(reports)? + "\n";
    match out {
        Some(path) => {
            let (main, other, suffix) = match format {
                OutFormat::Json => (&json, &csv, ".csv"),
                _ => (&csv, &json, ".results.json"),
            };
            fs::write(path, main).with_context(|| format!("writing {}", path.display()))?;
            let side = sibling(path, suffix);
            fs::write(&side, other).with_context(|| format!("writing {}", side.display()))
        }
        None => write_or_print(None, if format == OutFormat::Json { &json } else { &csv }),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let source = args.source.source()?;
    let model = merged_model(&source)?;
    let pipeline = load_pipeline(&args.pipeline)?;
    let hash = model.content_hash();
    if hash != pipeline.dem_hash {
        if !args.force {
            bail!(
                "pipeline was built from model {} but this model hashes to {hash}; pass --force to run anyway",
                pipeline.dem_hash
            );
        }
        log::warn!("model hash mismatch ignored");
    }
    let pipeline = truncate_pipeline(&pipeline, args.truncate)?;
    let config = args.decoder.config(&args.source)?;
    let mut report = with_threads(args.run.threads, || {
        Ok(run_experiment(&model, &pipeline, &config, args.run.shots, args.run.seed)?)
    })?;
    report.p = source.p_data();
    report.stages_removed = args.truncate;
    write_reports(&[report], args.out.as_deref(), args.format)
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let source = args.source.source()?;
    let grid = SweepGrid {
        p: args.p_grid.clone(),
        truncate: args.truncate_grid.clone(),
    };
    let build_config = args.solver.config()?;
    let config = args.decoder.config(&args.source)?;
    let reports = with_threads(args.run.threads, || {
        Ok(sweep(&source, &build_config, &config, &grid, args.run.shots, args.run.seed)?)
    })?;
    write_reports(&reports, args.out.as_deref(), args.format)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let pipeline = load_pipeline(&args.pipeline)?;
    let rounds = match &args.source.dem {
        Some(path) => {
            let model = merge_duplicates(&parse_dem(&fs::read_to_string(path)?)?);
            if model.content_hash() != pipeline.dem_hash {
                bail!("{} is not the model this pipeline was built from", path.display());
            }
            qpredec::dem::RoundMap::from_dem(&model).ok()
        }
        None => None,
    };
    let set = PrimitiveSet {
        primitives: pipeline.primitives.clone(),
        dem_ref: pipeline.dem_hash.clone(),
        class_priorities: pipeline.classes.clone(),
        ..Default::default()
    };
    let table = class_table(&set);
    let mut out = format!("pipeline {} depth {}\n", pipeline.code, pipeline.depth());
    out.push_str("priority  class            count  total_p      conditional  average_p\n");
    for (rank, class) in pipeline.classes.iter().enumerate() {
        let row = table
            .iter()
            .find(|r| r.class == *class)
            .ok_or_else(|| anyhow!("class {class} has no primitives"))?;
        out.push_str(&format!(
            "{:>8}  {:<16} {:>5}  {:.4e}  {:>11.4}  {:.4e}\n",
            rank + 1,
            class.name(),
            row.count,
            row.total_probability,
            row.conditional,
            row.average
        ));
    }
    out.push_str("class            nodes  edges  omega  colors\n");
    for class in &pipeline.classes {
        let ids = set.members(*class);
        let graph = build_conflict_graph(&set, &ids, rounds.as_ref());
        let colors = pipeline.stages.iter().filter(|s| s.class == *class).count();
        out.push_str(&format!(
            "{:<16} {:>5}  {:>5}  {:>5}  {:>6}\n",
            class.name(),
            graph.len(),
            graph.num_edges(),
            graph.omega_lb,
            colors
        ));
    }
    if rounds.is_none() && pipeline.primitives.iter().any(|p| p.translatable) {
        out.push_str("note: graphs use canonical sets only; pass --dem for round-aware footprints\n");
    }
    print!("{out}");
    Ok(())
}

fn cmd_emit(args: EmitArgs) -> Result<()> {
    let pipeline = load_pipeline(&args.pipeline)?;
    write_or_print(args.out.as_deref(), &emit_pipeline(&pipeline, pipeline_format(args.format)?))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Build(a) => cmd_build(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Emit(a) => cmd_emit(a),
    }
}
