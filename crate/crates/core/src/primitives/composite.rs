use std::collections::HashMap;

use super::PrimitiveSet;
use crate::dem::sorted_xor;

/// Search bounds for composite pruning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeLimits {
    /// Largest number of primitives allowed in a cover.
    pub max_cover: usize,
    /// Targets with more candidate sub-primitives than this are skipped.
    pub max_candidates: usize,
}

impl Default for CompositeLimits {
    fn default() -> Self {
        Self {
            max_cover: 3,
            max_candidates: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeOutcome {
    pub set: PrimitiveSet,
    /// Removed primitives, as they were in the input set.
    pub removed: Vec<super::Primitive>,
    /// Number of targets left in place because a search bound was hit.
    pub skipped: usize,
}

/// Removes primitives whose syndrome set is an exact disjoint union of
/// smaller primitives' sets with XOR-matching observables, using the default
/// bounds.
pub fn prune_composites(set: &PrimitiveSet) -> CompositeOutcome {
    prune_composites_with(set, CompositeLimits::default())
}

/// Composite pruning with explicit bounds. Every decision is made against the
/// input set, so the result does not depend on processing order.
pub fn prune_composites_with(set: &PrimitiveSet, limits: CompositeLimits) -> CompositeOutcome {
    let prims = &set.primitives;
    let mut by_detector: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, p) in prims.iter().enumerate() {
        for &d in &p.syndrome {
            by_detector.entry(d).or_default().push(i);
        }
    }

    let mut order: Vec<usize> = (0..prims.len()).collect();
    order.sort_by_key(|&i| prims[i].syndrome.len());

    let mut remove = vec![false; prims.len()];
    let mut skipped = 0;
    for &t in &order {
        let target = &prims[t];
        if target.syndrome.len() < 2 {
            continue;
        }
        if target.syndrome.len() > 64 {
            log::debug!("composite search skipped: |S| = {} exceeds the mask width", target.syndrome.len());
            skipped += 1;
            continue;
        }
        let position: HashMap<u32, usize> = target.syndrome.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        let mut seen: Vec<usize> = target
            .syndrome
            .iter()
            .flat_map(|d| by_detector[d].iter().copied())
            .filter(|&c| c != t && prims[c].syndrome.len() < target.syndrome.len())
            .collect();
        seen.sort_unstable();
        seen.dedup();
        let candidates: Vec<(u64, &[u32])> = seen
            .into_iter()
            .filter_map(|c| {
                let mut mask = 0u64;
                for d in &prims[c].syndrome {
                    mask |= 1u64 << position.get(d)?;
                }
                Some((mask, prims[c].observables.as_slice()))
            })
            .collect();
        if candidates.len() > limits.max_candidates {
            log::debug!(
                "composite search skipped for S={:?}: {} candidates",
                target.syndrome,
                candidates.len()
            );
            skipped += 1;
            continue;
        }
        let full = if target.syndrome.len() == 64 {
            u64::MAX
        } else {
            (1u64 << target.syndrome.len()) - 1
        };
        if covers(&candidates, 0, full, &[], &target.observables, limits.max_cover) {
            remove[t] = true;
        }
    }

    let mut kept = Vec::with_capacity(prims.len());
    let mut removed = Vec::new();
    for (p, r) in prims.iter().zip(&remove) {
        if *r {
            removed.push(p.clone());
        } else {
            kept.push(p.clone());
        }
    }
    CompositeOutcome {
        set: PrimitiveSet {
            primitives: kept,
            ..set.clone()
        },
        removed,
        skipped,
    }
}

/// Depth-first exact cover of `full`, always extending through the lowest
/// uncovered position so each cover is visited once.
fn covers(candidates: &[(u64, &[u32])], covered: u64, full: u64, obs: &[u32], want: &[u32], budget: usize) -> bool {
    if covered == full {
        return obs == want;
    }
    if budget == 0 {
        return false;
    }
    let next = (!covered & full).trailing_zeros();
    candidates.iter().any(|&(mask, o)| {
        mask & (1u64 << next) != 0
            && mask & covered == 0
            && covers(candidates, covered | mask, full, &sorted_xor(obs, o), want, budget - 1)
    })
}
