//! Predecoding primitives: generation from a model, pruning, classification
//! and class prioritisation.
//!
//! A primitive `(S, O)` fires when every detector in `S` is active; it then
//! clears `S` and flips the observables in `O`.

mod classify;
mod composite;
mod round_offset;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dem::DetectorErrorModel;
use crate::Error;

pub use classify::{classify, rank_classes};
pub use composite::{prune_composites, prune_composites_with, CompositeLimits, CompositeOutcome};
pub use round_offset::prune_round_offsets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PrimitiveClass {
    TimeLike,
    BulkSpaceLike,
    EdgeSpaceLike,
    SpacetimeLike,
    HookLike,
    Unclassified,
}

impl PrimitiveClass {
    pub const ALL: [PrimitiveClass; 6] = [
        PrimitiveClass::TimeLike,
        PrimitiveClass::BulkSpaceLike,
        PrimitiveClass::EdgeSpaceLike,
        PrimitiveClass::SpacetimeLike,
        PrimitiveClass::HookLike,
        PrimitiveClass::Unclassified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrimitiveClass::TimeLike => "TimeLike",
            PrimitiveClass::BulkSpaceLike => "BulkSpaceLike",
            PrimitiveClass::EdgeSpaceLike => "EdgeSpaceLike",
            PrimitiveClass::SpacetimeLike => "SpacetimeLike",
            PrimitiveClass::HookLike => "HookLike",
            PrimitiveClass::Unclassified => "Unclassified",
        }
    }
}

impl fmt::Display for PrimitiveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrimitiveClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PrimitiveClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown primitive class '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    /// Syndrome set `S`, sorted. For translatable primitives this is the
    /// earliest instance present in the model.
    pub syndrome: Vec<u32>,
    /// Observable set `O`, sorted.
    pub observables: Vec<u32>,
    pub probability: f64,
    pub class: PrimitiveClass,
    /// Earliest round of `S` relative to the canonical pattern; 0 for every
    /// translatable primitive.
    pub canonical_round: u32,
    /// Whether the primitive is re-instantiated at every valid round offset.
    pub translatable: bool,
    /// Spans more than two rounds, so it was left out of round-offset pruning.
    pub multi_round: bool,
    /// Indices of the source mechanisms in the unmerged input model.
    pub source_ids: Vec<usize>,
}

impl Primitive {
    pub fn new(syndrome: Vec<u32>, observables: Vec<u32>, probability: f64) -> Self {
        Self {
            syndrome,
            observables,
            probability,
            class: PrimitiveClass::Unclassified,
            canonical_round: 0,
            translatable: false,
            multi_round: false,
            source_ids: Vec::new(),
        }
    }

    fn key(&self) -> (&[u32], &[u32]) {
        (&self.syndrome, &self.observables)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RoundPruning {
    #[default]
    NotRun,
    Applied,
    /// Refused because the model lacks round metadata.
    SkippedNoRounds,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrimitiveSet {
    pub primitives: Vec<Primitive>,
    /// Content hash of the source model.
    pub dem_ref: String,
    pub class_priorities: Vec<PrimitiveClass>,
    pub round_pruning: RoundPruning,
}

impl PrimitiveSet {
    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    /// Classes present in the set.
    pub fn present_classes(&self) -> Vec<PrimitiveClass> {
        let mut classes: Vec<_> = self.primitives.iter().map(|p| p.class).collect();
        classes.sort();
        classes.dedup();
        classes
    }

    /// Ids of the primitives of one class, ascending.
    pub fn members(&self, class: PrimitiveClass) -> Vec<usize> {
        (0..self.primitives.len())
            .filter(|&i| self.primitives[i].class == class)
            .collect()
    }

    pub(crate) fn sort_canonical(&mut self) {
        self.primitives.sort_by(|a, b| a.key().cmp(&b.key()));
    }
}

/// Per-class probability statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: PrimitiveClass,
    pub count: usize,
    pub total_probability: f64,
    /// Share of the total probability over all primitives.
    pub conditional: f64,
    /// Mean probability of a member primitive.
    pub average: f64,
}

/// Per-class statistics in canonical class order.
pub fn class_table(set: &PrimitiveSet) -> Vec<ClassStats> {
    let mut sums: BTreeMap<PrimitiveClass, (usize, f64)> = BTreeMap::new();
    for p in &set.primitives {
        let e = sums.entry(p.class).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += p.probability;
    }
    let total: f64 = sums.values().map(|v| v.1).sum();
    sums.into_iter()
        .map(|(class, (count, sum))| ClassStats {
            class,
            count,
            total_probability: sum,
            conditional: if total > 0.0 { sum / total } else { 0.0 },
            average: sum / count as f64,
        })
        .collect()
}

/// One primitive per mechanism, `S` and `O` copied verbatim.
pub fn generate_primitives(dem: &DetectorErrorModel) -> PrimitiveSet {
    let sources: Vec<Vec<usize>> = (0..dem.mechanisms.len()).map(|i| vec![i]).collect();
    generate_primitives_with_sources(dem, &sources)
}

/// Like [`generate_primitives`], attaching the given provenance lists.
pub fn generate_primitives_with_sources(dem: &DetectorErrorModel, sources: &[Vec<usize>]) -> PrimitiveSet {
    let primitives = dem
        .mechanisms
        .iter()
        .zip(sources)
        .map(|(m, src)| Primitive {
            source_ids: src.clone(),
            ..Primitive::new(m.detectors.clone(), m.observables.clone(), m.probability)
        })
        .collect();
    PrimitiveSet {
        primitives,
        dem_ref: dem.content_hash(),
        class_priorities: Vec::new(),
        round_pruning: RoundPruning::NotRun,
    }
}
