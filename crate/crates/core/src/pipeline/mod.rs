//! Conflict graphs, stage coloring and pipeline assembly.

mod color;
mod emit;
mod graph;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::dem::RoundMap;
use crate::primitives::{Primitive, PrimitiveClass, PrimitiveSet};
use crate::{Error, Result};

pub use color::{
    exact_color, greedy_color, hybrid_color, validate_coloring, Coloring, ExactOutcome, Heuristic, MAX_EXACT_COLORS,
};
pub use emit::{emit_pipeline, read_pipeline, Format};
pub use graph::{ConflictGraph, MAX_ENUMERATED_CLIQUES};

/// Every detector set a primitive is applied to: all valid round translates
/// for translatable primitives (given round metadata), else `S` itself.
pub fn instances(p: &Primitive, rounds: Option<&RoundMap>) -> Vec<Vec<u32>> {
    match rounds {
        Some(map) if p.translatable => map.instances(&p.syndrome),
        _ => vec![p.syndrome.clone()],
    }
}

/// Union of all instances of a primitive.
pub fn footprint(p: &Primitive, rounds: Option<&RoundMap>) -> Vec<u32> {
    let all: BTreeSet<u32> = instances(p, rounds).into_iter().flatten().collect();
    all.into_iter().collect()
}

/// Conflict graph over the given primitives, using footprints so that two
/// primitives sharing a stage never touch the same detector at any offset.
pub fn build_conflict_graph(set: &PrimitiveSet, ids: &[usize], rounds: Option<&RoundMap>) -> ConflictGraph {
    let sets: Vec<Vec<u32>> = ids.iter().map(|&i| footprint(&set.primitives[i], rounds)).collect();
    ConflictGraph::from_sets(ids.to_vec(), &sets)
}

/// Renumbers colors so that a group holding a primitive runs before any
/// group holding a primitive whose instance is a proper subset of it. Cycles
/// in that relation are broken by original color index.
pub fn order_superset_first(
    graph: &ConflictGraph,
    coloring: &Coloring,
    set: &PrimitiveSet,
    rounds: Option<&RoundMap>,
) -> Coloring {
    let k = coloring.num_colors;
    let mut by_detector: HashMap<u32, Vec<usize>> = HashMap::new();
    for (local, &id) in graph.nodes.iter().enumerate() {
        for &d in &set.primitives[id].syndrome {
            by_detector.entry(d).or_default().push(local);
        }
    }
    // after[a] holds the colors that must run after color a
    let mut after: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for (local, &id) in graph.nodes.iter().enumerate() {
        for inst in instances(&set.primitives[id], rounds) {
            let Some(first) = inst.first() else { continue };
            for &sup in by_detector.get(first).map(Vec::as_slice).unwrap_or(&[]) {
                let s = &set.primitives[graph.nodes[sup]].syndrome;
                let (a, b) = (coloring.assignment[sup], coloring.assignment[local]);
                if a != b && s.len() > inst.len() && inst.iter().all(|d| s.binary_search(d).is_ok()) {
                    after[a].insert(b);
                }
            }
        }
    }
    let mut indegree = vec![0usize; k];
    for succ in &after {
        for &b in succ {
            indegree[b] += 1;
        }
    }
    let mut placed = vec![false; k];
    let mut order = Vec::with_capacity(k);
    while order.len() < k {
        let next = (0..k)
            .find(|&c| !placed[c] && indegree[c] == 0)
            .or_else(|| (0..k).find(|&c| !placed[c]))
            .expect("colors remain");
        placed[next] = true;
        order.push(next);
        for &b in &after[next] {
            indegree[b] = indegree[b].saturating_sub(1);
        }
    }
    let mut relabel = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    Coloring {
        assignment: coloring.assignment.iter().map(|&c| relabel[c]).collect(),
        num_colors: k,
        method: coloring.method.clone(),
    }
}

/// Coloring of one class, over `nodes` (primitive ids into the set).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSchedule {
    pub class: PrimitiveClass,
    pub nodes: Vec<usize>,
    pub coloring: Coloring,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CostEstimate {
    pub and_gate_inputs: usize,
    pub register_bits: usize,
    pub primitive_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub class: PrimitiveClass,
    /// Indices into [`Pipeline::primitives`], ascending.
    pub primitives: Vec<usize>,
}

/// Priority-ordered stages of mutually non-conflicting primitives.
///
/// Primitives are stored stage by stage, so a stage's ids are contiguous and
/// truncation drops a suffix of [`Pipeline::primitives`].
#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub code: String,
    pub dem_hash: String,
    pub num_detectors: usize,
    pub num_observables: usize,
    pub classes: Vec<PrimitiveClass>,
    pub primitives: Vec<Primitive>,
    pub stages: Vec<Stage>,
    pub cost: CostEstimate,
}

impl Pipeline {
    pub fn empty(code: &str, dem_hash: &str, num_detectors: usize, num_observables: usize) -> Self {
        let mut p = Self {
            code: code.into(),
            dem_hash: dem_hash.into(),
            num_detectors,
            num_observables,
            classes: Vec::new(),
            primitives: Vec::new(),
            stages: Vec::new(),
            cost: CostEstimate::default(),
        };
        p.cost = p.estimate_cost();
        p
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn estimate_cost(&self) -> CostEstimate {
        let used: usize = self.stages.iter().map(|s| s.primitives.len()).sum();
        CostEstimate {
            and_gate_inputs: self
                .stages
                .iter()
                .flat_map(|s| &s.primitives)
                .map(|&i| self.primitives[i].syndrome.len())
                .sum(),
            register_bits: self.depth() * (self.num_detectors + self.num_observables),
            primitive_count: used,
        }
    }
}

/// Concatenates each class's color groups in priority order, color 0 first.
pub fn assemble_pipeline(
    set: &PrimitiveSet,
    schedules: &[ClassSchedule],
    code: &str,
    num_detectors: usize,
    num_observables: usize,
) -> Result<Pipeline> {
    let present = set.present_classes();
    let by_class: BTreeMap<PrimitiveClass, &ClassSchedule> = schedules.iter().map(|s| (s.class, s)).collect();
    let mut wanted: Vec<PrimitiveClass> = by_class.keys().copied().collect();
    wanted.sort();
    if wanted != present || by_class.len() != schedules.len() {
        return Err(Error::InvalidPipeline(format!(
            "colorings for {wanted:?} do not match present classes {present:?}"
        )));
    }
    let mut priority = set.class_priorities.clone();
    let mut sorted_priority = priority.clone();
    sorted_priority.sort();
    sorted_priority.dedup();
    if priority.is_empty() {
        priority = present.clone();
    } else if sorted_priority != present || sorted_priority.len() != priority.len() {
        return Err(Error::InvalidPipeline(format!(
            "class priorities {priority:?} do not match present classes {present:?}"
        )));
    }

    let mut pipeline = Pipeline::empty(code, &set.dem_ref, num_detectors, num_observables);
    pipeline.classes = priority.clone();
    for class in priority {
        let sched = by_class[&class];
        if sched.coloring.assignment.len() != sched.nodes.len() {
            return Err(Error::InvalidPipeline(format!("{class} coloring does not cover its nodes")));
        }
        if sched.nodes.iter().any(|&id| set.primitives.get(id).map(|p| p.class) != Some(class)) {
            return Err(Error::InvalidPipeline(format!("{class} schedule lists a foreign primitive")));
        }
        for group in sched.coloring.groups() {
            let mut ids: Vec<usize> = group.iter().map(|&local| sched.nodes[local]).collect();
            ids.sort_unstable();
            let first = pipeline.primitives.len();
            pipeline.primitives.extend(ids.iter().map(|&id| set.primitives[id].clone()));
            pipeline.stages.push(Stage {
                class,
                primitives: (first..pipeline.primitives.len()).collect(),
            });
        }
    }
    pipeline.cost = pipeline.estimate_cost();
    Ok(pipeline)
}

/// Drops the last `stages_to_remove` stages.
pub fn truncate_pipeline(pipeline: &Pipeline, stages_to_remove: usize) -> Result<Pipeline> {
    if stages_to_remove == 0 {
        return Ok(pipeline.clone());
    }
    if stages_to_remove >= pipeline.depth() {
        return Err(Error::InvalidArgument(format!(
            "cannot remove {stages_to_remove} of {} stages",
            pipeline.depth()
        )));
    }
    let stages = pipeline.stages[..pipeline.depth() - stages_to_remove].to_vec();
    let keep = stages.last().and_then(|s| s.primitives.last()).map_or(0, |&i| i + 1);
    let mut classes = pipeline.classes.clone();
    classes.retain(|c| stages.iter().any(|s| s.class == *c));
    let mut out = Pipeline {
        classes,
        primitives: pipeline.primitives[..keep].to_vec(),
        stages,
        ..pipeline.clone()
    };
    out.cost = out.estimate_cost();
    Ok(out)
}

/// Re-checks a pipeline from primitive syndrome sets alone: every primitive
/// sits in exactly one stage, classes form contiguous blocks in priority
/// order, and no two primitives of a stage share a detector at any offset.
pub fn validate_pipeline(pipeline: &Pipeline, rounds: Option<&RoundMap>) -> std::result::Result<(), String> {
    let mut seen = vec![0usize; pipeline.primitives.len()];
    for s in &pipeline.stages {
        for &i in &s.primitives {
            *seen.get_mut(i).ok_or(format!("stage lists unknown primitive {i}"))? += 1;
        }
    }
    if let Some(i) = seen.iter().position(|&n| n != 1) {
        return Err(format!("primitive {i} appears in {} stages", seen[i]));
    }
    let mut class_pos = 0;
    for (k, s) in pipeline.stages.iter().enumerate() {
        while pipeline.classes.get(class_pos) != Some(&s.class) {
            class_pos += 1;
            if class_pos >= pipeline.classes.len() {
                return Err(format!("stage {k} ({}) is out of priority order", s.class));
            }
        }
    }
    for (k, s) in pipeline.stages.iter().enumerate() {
        let mut owner: HashMap<u32, usize> = HashMap::new();
        for &i in &s.primitives {
            for inst in instances(&pipeline.primitives[i], rounds) {
                for d in inst {
                    if let Some(&j) = owner.get(&d) {
                        if j != i {
                            return Err(format!("stage {k}: primitives {j} and {i} share detector {d}"));
                        }
                    }
                    owner.insert(d, i);
                }
            }
        }
    }
    Ok(())
}
