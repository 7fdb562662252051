use std::collections::{BTreeMap, BTreeSet};

use super::{Primitive, PrimitiveClass, PrimitiveSet};
use crate::dem::{DetectorErrorModel, FaultKind, RoundMap, Sidecar};

/// Assigns a class to every primitive. Without round metadata all primitives
/// stay [`PrimitiveClass::Unclassified`].
///
/// When a sidecar is given it decides hook membership: a multi-round,
/// multi-check primitive is hook-like iff one of its source mechanisms is
/// marked as a hook fault.
pub fn classify(set: &PrimitiveSet, dem: &DetectorErrorModel, sidecar: Option<&Sidecar>) -> PrimitiveSet {
    let mut out = set.clone();
    let Ok(map) = RoundMap::from_dem(dem) else {
        log::warn!("classification skipped: model has no round metadata");
        for p in &mut out.primitives {
            p.class = PrimitiveClass::Unclassified;
        }
        return out;
    };
    for p in &mut out.primitives {
        p.class = class_of(p, &map, sidecar);
    }
    out
}

fn class_of(p: &Primitive, map: &RoundMap, sidecar: Option<&Sidecar>) -> PrimitiveClass {
    let s = &p.syndrome;
    if s.len() == 1 {
        return PrimitiveClass::EdgeSpaceLike;
    }
    let rounds: BTreeSet<u32> = s.iter().map(|&d| map.round(d)).collect();
    let spatial: BTreeSet<u32> = s.iter().map(|&d| map.spatial(d)).collect();
    if s.len() == 2 && spatial.len() == 1 && map.round(s[0]).abs_diff(map.round(s[1])) == 1 {
        return PrimitiveClass::TimeLike;
    }
    if rounds.len() == 1 {
        return PrimitiveClass::BulkSpaceLike;
    }
    let hook = match sidecar {
        Some(marks) => {
            spatial.len() >= 2
                && p
                    .source_ids
                    .iter()
                    .any(|id| marks.get(id) == Some(&FaultKind::Hook))
        }
        None => s.len() >= 3 && spatial.len() >= 3,
    };
    if hook {
        PrimitiveClass::HookLike
    } else {
        PrimitiveClass::SpacetimeLike
    }
}

/// Orders the present classes by descending mean primitive probability,
/// EdgeSpaceLike last, ties broken by class name.
pub fn rank_classes(set: &PrimitiveSet) -> Vec<PrimitiveClass> {
    let mut sums: BTreeMap<PrimitiveClass, (f64, usize)> = BTreeMap::new();
    for p in &set.primitives {
        let e = sums.entry(p.class).or_insert((0.0, 0));
        e.0 += p.probability;
        e.1 += 1;
    }
    let mut ranked: Vec<(PrimitiveClass, f64)> = sums
        .into_iter()
        .map(|(c, (sum, n))| (c, sum / n as f64))
        .collect();
    ranked.sort_by(|a, b| {
        let edge = |c: PrimitiveClass| c == PrimitiveClass::EdgeSpaceLike;
        edge(a.0)
            .cmp(&edge(b.0))
            .then(b.1.total_cmp(&a.1))
            .then(a.0.name().cmp(b.0.name()))
    });
    ranked.into_iter().map(|(c, _)| c).collect()
}
