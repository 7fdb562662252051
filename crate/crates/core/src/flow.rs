//! End-to-end predecoder construction: model, primitives, pruning,
//! classification, per-class coloring and assembly, followed by an
//! exhaustive single-error check of the result.

use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use crate::dem::{
    build_phenomenological_dem_with_provenance, merge_duplicates_with_sources, CssCodeSpec, DetectorErrorModel,
    NoiseConfig, RoundMap, Sector, Sidecar,
};
use crate::pipeline::{
    assemble_pipeline, build_conflict_graph, greedy_color, hybrid_color, instances, order_superset_first,
    validate_coloring, validate_pipeline, ClassSchedule, CostEstimate, Heuristic, Pipeline,
};
use crate::primitives::{
    class_table, classify, generate_primitives_with_sources, prune_composites, prune_round_offsets, rank_classes,
    ClassStats, Primitive, PrimitiveClass, PrimitiveSet, RoundPruning,
};
use crate::sim::CompiledPipeline;
use crate::{Error, Result};

/// Default per-graph solver budget in seconds.
pub const DEFAULT_TIMEOUT_SECS: f64 = 60.0;

/// Solver budget from `QPREDEC_TIMEOUT` (seconds), else the default.
pub fn default_timeout() -> Duration {
    std::env::var("QPREDEC_TIMEOUT")
        .ok()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|s| s.is_finite() && *s >= 0.0)
        .map_or(Duration::from_secs_f64(DEFAULT_TIMEOUT_SECS), Duration::from_secs_f64)
}

/// Where a model comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Dem {
        name: String,
        model: DetectorErrorModel,
        sidecar: Option<Sidecar>,
    },
    /// Phenomenological model of a CSS code; its fault provenance doubles as
    /// the classification sidecar.
    Code {
        code: CssCodeSpec,
        sector: Sector,
        noise: NoiseConfig,
    },
}

impl ModelSource {
    pub fn name(&self) -> String {
        match self {
            ModelSource::Dem { name, .. } => name.clone(),
            ModelSource::Code { code, sector, .. } => format!("{}-{sector}", code.name),
        }
    }

    /// The raw model and the sidecar to classify it with.
    pub fn load(&self) -> Result<(DetectorErrorModel, Option<Sidecar>)> {
        match self {
            ModelSource::Dem { model, sidecar, .. } => Ok((model.clone(), sidecar.clone())),
            ModelSource::Code { code, sector, noise } => {
                let (dem, kinds) = build_phenomenological_dem_with_provenance(code, *sector, noise)?;
                Ok((dem, Some(kinds.into_iter().enumerate().collect())))
            }
        }
    }

    /// The same source with every channel rescaled so that `p_data = p`.
    pub fn at_p(&self, p: f64) -> Result<ModelSource> {
        match self {
            ModelSource::Dem { .. } => Err(Error::InvalidArgument(
                "a p grid needs a code source; a fixed model has no noise parameter".into(),
            )),
            ModelSource::Code { code, sector, noise } => Ok(ModelSource::Code {
                code: code.clone(),
                sector: *sector,
                noise: noise.scaled_to(p),
            }),
        }
    }

    pub fn p_data(&self) -> Option<f64> {
        match self {
            ModelSource::Dem { .. } => None,
            ModelSource::Code { noise, .. } => Some(noise.p_data),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildConfig {
    /// Exact-coloring budget per conflict graph.
    pub timeout: Duration,
    /// Seed of the random-sequential heuristic.
    pub greedy_seed: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            timeout: default_timeout(),
            greedy_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub class: PrimitiveClass,
    pub nodes: usize,
    pub edges: usize,
    pub omega: usize,
    pub colors: usize,
    pub method: String,
    pub best_greedy_colors: usize,
    pub clique_cap_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildReport {
    pub code: String,
    pub dem_hash: String,
    pub num_detectors: usize,
    pub num_observables: usize,
    pub input_mechanisms: usize,
    /// Primitives generated, one per distinct mechanism.
    pub generated: usize,
    pub round_pruned: usize,
    /// Removed as composites and not reinstated.
    pub composite_pruned: usize,
    /// Composites put back because a single-error check failed without them.
    pub reinstated: usize,
    pub retained: usize,
    pub composite_skipped: usize,
    pub round_pruning: RoundPruning,
    pub multi_round_flagged: usize,
    pub class_table: Vec<ClassStats>,
    pub class_priorities: Vec<PrimitiveClass>,
    pub graphs: Vec<GraphStats>,
    pub depth: usize,
    /// Sum of per-class clique bounds; a lower bound on the depth.
    pub omega_sum: usize,
    pub cost: CostEstimate,
    pub mechanisms_checked: usize,
    /// Mechanisms (merged-model indices) whose lone syndrome the pipeline
    /// does not resolve to the right observables.
    pub single_error_failures: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildOutput {
    /// Model after duplicate merging; the pipeline's hash refers to it.
    pub model: DetectorErrorModel,
    pub primitives: PrimitiveSet,
    pub pipeline: Pipeline,
    pub report: BuildReport,
}

/// Loads the source and builds its pipeline.
pub fn build(source: &ModelSource, config: &BuildConfig) -> Result<BuildOutput> {
    let (dem, sidecar) = source.load()?;
    build_from_model(&dem, sidecar.as_ref(), &source.name(), config)
}

/// Builds a pipeline from a raw model.
///
/// Composite pruning can remove a primitive whose cover is not what the
/// pipeline executes: a higher-priority primitive may claim part of the
/// syndrome first. Every mechanism is therefore run through the assembled
/// pipeline on its own, and pruned composites matching a failing mechanism
/// are reinstated until the check passes or nothing is left to reinstate.
pub fn build_from_model(
    dem: &DetectorErrorModel,
    sidecar: Option<&Sidecar>,
    name: &str,
    config: &BuildConfig,
) -> Result<BuildOutput> {
    dem.validate()?;
    if dem.mechanisms.is_empty() {
        return Err(Error::EmptyModel);
    }
    let (model, sources) = merge_duplicates_with_sources(dem);
    let rounds = RoundMap::from_dem(&model).ok();
    let generated = generate_primitives_with_sources(&model, &sources);
    let round_pruned = prune_round_offsets(&generated, &model);
    let composite = prune_composites(&round_pruned);

    let mut reinstated: Vec<Primitive> = Vec::new();
    loop {
        let mut set = composite.set.clone();
        set.primitives.extend(reinstated.iter().cloned());
        set.sort_canonical();
        let mut set = classify(&set, &model, sidecar);
        set.class_priorities = rank_classes(&set);

        let (pipeline, graphs) = schedule(&set, &model, rounds.as_ref(), name, config)?;
        validate_pipeline(&pipeline, rounds.as_ref()).map_err(Error::InvalidPipeline)?;
        let failures = single_error_failures(&pipeline, &model)?;

        let fixes: Vec<Primitive> = composite
            .removed
            .iter()
            .filter(|r| !reinstated.contains(r))
            .filter(|r| {
                failures.iter().any(|&m| {
                    let mech = &model.mechanisms[m];
                    r.observables == mech.observables
                        && instances(r, rounds.as_ref()).contains(&mech.detectors)
                })
            })
            .cloned()
            .collect();
        if failures.is_empty() || fixes.is_empty() {
            if !failures.is_empty() {
                log::warn!("{} mechanisms are not resolved on their own", failures.len());
            }
            let omega_sum = graphs.iter().map(|g| g.omega).sum();
            let report = BuildReport {
                code: name.to_string(),
                dem_hash: model.content_hash(),
                num_detectors: model.num_detectors,
                num_observables: model.num_observables,
                input_mechanisms: dem.mechanisms.len(),
                generated: generated.len(),
                round_pruned: generated.len() - round_pruned.len(),
                composite_pruned: composite.removed.len() - reinstated.len(),
                reinstated: reinstated.len(),
                retained: set.len(),
                composite_skipped: composite.skipped,
                round_pruning: round_pruned.round_pruning,
                multi_round_flagged: set.primitives.iter().filter(|p| p.multi_round).count(),
                class_table: class_table(&set),
                class_priorities: set.class_priorities.clone(),
                graphs,
                depth: pipeline.depth(),
                omega_sum,
                cost: pipeline.cost,
                mechanisms_checked: model.mechanisms.len(),
                single_error_failures: failures,
            };
            return Ok(BuildOutput {
                model,
                primitives: set,
                pipeline,
                report,
            });
        }
        log::info!("reinstating {} composite primitives", fixes.len());
        reinstated.extend(fixes);
    }
}

/// Colors every class and assembles the pipeline.
fn schedule(
    set: &PrimitiveSet,
    model: &DetectorErrorModel,
    rounds: Option<&RoundMap>,
    name: &str,
    config: &BuildConfig,
) -> Result<(Pipeline, Vec<GraphStats>)> {
    let per_class: Vec<(ClassSchedule, GraphStats)> = set
        .class_priorities
        .par_iter()
        .map(|&class| {
            let nodes = set.members(class);
            let graph = build_conflict_graph(set, &nodes, rounds);
            let best_greedy = Heuristic::suite(config.greedy_seed)
                .into_iter()
                .map(|h| greedy_color(&graph, h).num_colors)
                .min()
                .unwrap_or(0);
            let coloring = hybrid_color(&graph, config.timeout, config.greedy_seed);
            let coloring = order_superset_first(&graph, &coloring, set, rounds);
            validate_coloring(&graph, &coloring).map_err(Error::InvalidPipeline)?;
            let stats = GraphStats {
                class,
                nodes: graph.len(),
                edges: graph.num_edges(),
                omega: graph.omega_lb,
                colors: coloring.num_colors,
                method: coloring.method.clone(),
                best_greedy_colors: best_greedy,
                clique_cap_hit: graph.clique_cap_hit,
            };
            Ok((ClassSchedule { class, nodes, coloring }, stats))
        })
        .collect::<Result<_>>()?;
    let (schedules, stats): (Vec<_>, Vec<_>) = per_class.into_iter().unzip();
    let pipeline = assemble_pipeline(set, &schedules, name, model.num_detectors, model.num_observables)?;
    Ok((pipeline, stats))
}

/// Mechanisms whose own syndrome the pipeline leaves unresolved or resolves
/// to the wrong observables.
pub fn single_error_failures(pipeline: &Pipeline, model: &DetectorErrorModel) -> Result<Vec<usize>> {
    let compiled = CompiledPipeline::new(pipeline, model)?;
    let failures = (0..model.mechanisms.len())
        .into_par_iter()
        .filter(|&i| {
            let m = &model.mechanisms[i];
            let mut syndrome = vec![false; model.num_detectors];
            for &d in &m.detectors {
                syndrome[d as usize] = true;
            }
            let out = compiled.run(&syndrome);
            let mut want = vec![false; model.num_observables];
            for &o in &m.observables {
                want[o as usize] = true;
            }
            !(out.fully_resolved && out.predicted_observable_flips == want)
        })
        .collect();
    Ok(failures)
}
