use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CostEstimate, Pipeline, Stage};
use crate::primitives::{Primitive, PrimitiveClass};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    NetlistText,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "netlist-text" => Ok(Format::NetlistText),
            other => Err(Error::InvalidArgument(format!("unknown pipeline format '{other}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PipelineDoc {
    code: String,
    dem_hash: String,
    num_detectors: usize,
    num_observables: usize,
    classes: Vec<PrimitiveClass>,
    depth: usize,
    stages: Vec<StageDoc>,
    cost: CostEstimate,
}

#[derive(Serialize, Deserialize)]
struct StageDoc {
    class: PrimitiveClass,
    primitives: Vec<PrimitiveDoc>,
}

#[derive(Serialize, Deserialize)]
struct PrimitiveDoc {
    #[serde(rename = "S")]
    syndrome: Vec<u32>,
    #[serde(rename = "O")]
    observables: Vec<u32>,
    p: f64,
    translatable: bool,
    multi_round: bool,
    canonical_round: u32,
    sources: Vec<usize>,
}

/// Renders a pipeline. Output is a pure function of the pipeline.
pub fn emit_pipeline(pipeline: &Pipeline, format: Format) -> String {
    match format {
        Format::Json => emit_json(pipeline),
        Format::NetlistText => emit_netlist(pipeline),
    }
}

fn emit_json(pipeline: &Pipeline) -> String {
    let doc = PipelineDoc {
        code: pipeline.code.clone(),
        dem_hash: pipeline.dem_hash.clone(),
        num_detectors: pipeline.num_detectors,
        num_observables: pipeline.num_observables,
        classes: pipeline.classes.clone(),
        depth: pipeline.depth(),
        stages: pipeline
            .stages
            .iter()
            .map(|s| StageDoc {
                class: s.class,
                primitives: s
                    .primitives
                    .iter()
                    .map(|&i| {
                        let p = &pipeline.primitives[i];
                        PrimitiveDoc {
                            syndrome: p.syndrome.clone(),
                            observables: p.observables.clone(),
                            p: p.probability,
                            translatable: p.translatable,
                            multi_round: p.multi_round,
                            canonical_round: p.canonical_round,
                            sources: p.source_ids.clone(),
                        }
                    })
                    .collect(),
            })
            .collect(),
        cost: pipeline.cost,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("pipeline document serializes");
    text.push('\n');
    text
}

fn emit_netlist(pipeline: &Pipeline) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# code={} dem={} depth={} detectors={} observables={}",
        pipeline.code,
        pipeline.dem_hash,
        pipeline.depth(),
        pipeline.num_detectors,
        pipeline.num_observables
    );
    let join = |prefix: char, items: &[u32], sep: &str| {
        items
            .iter()
            .map(|i| format!("{prefix}{i}"))
            .collect::<Vec<_>>()
            .join(sep)
    };
    for (k, stage) in pipeline.stages.iter().enumerate() {
        let _ = writeln!(out, "STAGE {k} CLASS {}", stage.class);
        for &i in &stage.primitives {
            let p = &pipeline.primitives[i];
            let _ = write!(
                out,
                "PRIM cond={} -> clear({}) flip({})",
                join('D', &p.syndrome, "&"),
                join('D', &p.syndrome, ","),
                join('L', &p.observables, ",")
            );
            if p.translatable {
                out.push_str(" every-round");
            }
            out.push('\n');
        }
    }
    out
}

/// Reads a pipeline back from its JSON form.
pub fn read_pipeline(text: &str) -> Result<Pipeline> {
    let doc: PipelineDoc = serde_json::from_str(text)?;
    let mut primitives = Vec::new();
    let mut stages = Vec::with_capacity(doc.stages.len());
    for s in doc.stages {
        let first = primitives.len();
        for p in s.primitives {
            primitives.push(Primitive {
                syndrome: p.syndrome,
                observables: p.observables,
                probability: p.p,
                class: s.class,
                canonical_round: p.canonical_round,
                translatable: p.translatable,
                multi_round: p.multi_round,
                source_ids: p.sources,
            });
        }
        stages.push(Stage {
            class: s.class,
            primitives: (first..primitives.len()).collect(),
        });
    }
    if stages.len() != doc.depth {
        return Err(Error::InvalidPipeline(format!(
            "depth {} disagrees with {} stages",
            doc.depth,
            stages.len()
        )));
    }
    if let Some(p) = primitives.iter().find(|p| {
        p.syndrome.iter().any(|&d| d as usize >= doc.num_detectors)
            || p.observables.iter().any(|&o| o as usize >= doc.num_observables)
    }) {
        return Err(Error::InvalidPipeline(format!(
            "primitive S={:?} O={:?} is out of range",
            p.syndrome, p.observables
        )));
    }
    let pipeline = Pipeline {
        code: doc.code,
        dem_hash: doc.dem_hash,
        num_detectors: doc.num_detectors,
        num_observables: doc.num_observables,
        classes: doc.classes,
        primitives,
        stages,
        cost: doc.cost,
    };
    if pipeline.estimate_cost() != pipeline.cost {
        return Err(Error::InvalidPipeline("cost block disagrees with the stages".into()));
    }
    Ok(pipeline)
}
