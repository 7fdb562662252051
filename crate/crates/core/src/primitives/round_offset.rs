use std::collections::BTreeMap;

use super::{Primitive, PrimitiveSet, RoundPruning};
use crate::dem::{DetectorErrorModel, RoundMap};

/// Collapses primitives that are time translates of each other.
///
/// Two primitives collapse when their syndrome sets have the same
/// `(spatial id, round - min round)` pattern and equal observable sets. The
/// survivor keeps the earliest instance as its syndrome set, the maximum
/// probability and the union of provenance, and is marked translatable.
/// Primitives touching more than two rounds are kept as they are and
/// flagged. Without round metadata the input is returned unchanged with
/// [`RoundPruning::SkippedNoRounds`].
pub fn prune_round_offsets(set: &PrimitiveSet, dem: &DetectorErrorModel) -> PrimitiveSet {
    let map = match RoundMap::from_dem(dem) {
        Ok(map) => map,
        Err(e) => {
            log::warn!("round-offset pruning skipped: {e}");
            return PrimitiveSet {
                round_pruning: RoundPruning::SkippedNoRounds,
                ..set.clone()
            };
        }
    };

    let mut order: Vec<usize> = (0..set.primitives.len()).collect();
    let min_round = |p: &Primitive| p.syndrome.iter().map(|&d| map.round(d)).min().unwrap_or(0);
    order.sort_by_key(|&i| (min_round(&set.primitives[i]), i));

    type Pattern = (Vec<(u32, u32)>, Vec<u32>);
    let mut groups: BTreeMap<Pattern, usize> = BTreeMap::new();
    let mut out: Vec<Primitive> = Vec::new();
    for i in order {
        let p = &set.primitives[i];
        let base = min_round(p);
        let mut rounds: Vec<u32> = p.syndrome.iter().map(|&d| map.round(d)).collect();
        rounds.sort_unstable();
        rounds.dedup();
        if rounds.len() > 2 {
            out.push(Primitive {
                multi_round: true,
                translatable: false,
                ..p.clone()
            });
            continue;
        }
        let mut pattern: Vec<(u32, u32)> = p
            .syndrome
            .iter()
            .map(|&d| (map.spatial(d), map.round(d) - base))
            .collect();
        pattern.sort_unstable();
        match groups.get(&(pattern.clone(), p.observables.clone())) {
            Some(&slot) => {
                let rep = &mut out[slot];
                rep.probability = rep.probability.max(p.probability);
                rep.source_ids.extend_from_slice(&p.source_ids);
                rep.source_ids.sort_unstable();
                rep.source_ids.dedup();
            }
            None => {
                groups.insert((pattern, p.observables.clone()), out.len());
                out.push(Primitive {
                    translatable: true,
                    multi_round: false,
                    canonical_round: 0,
                    ..p.clone()
                });
            }
        }
    }
    let mut result = PrimitiveSet {
        primitives: out,
        round_pruning: RoundPruning::Applied,
        ..set.clone()
    };
    result.sort_canonical();
    result
}
