mod common;
mod oracles;

use std::fmt::Write;

use proptest::prelude::*;
use qpredec::dem::{merge_duplicates, parse_dem, DetectorErrorModel, RoundMap};
use oracles::{has_cover, key, removed_composites as brute_force_removed};
use qpredec::primitives::{
    generate_primitives, prune_composites, prune_round_offsets, Primitive, PrimitiveSet, RoundPruning,
};

fn steane_model() -> DetectorErrorModel {
    merge_duplicates(&common::steane(1e-3).load().unwrap().0)
}

fn check_against_oracle(set: &PrimitiveSet) -> usize {
    let outcome = prune_composites(set);
    assert_eq!(outcome.skipped, 0);
    let mut removed: Vec<_> = outcome.removed.iter().map(key).collect();
    removed.sort();
    assert_eq!(removed, brute_force_removed(set));
    let mut retained: Vec<_> = outcome.set.primitives.iter().map(key).collect();
    let mut expect: Vec<_> = set.primitives.iter().map(key).filter(|k| !removed.contains(k)).collect();
    retained.sort();
    expect.sort();
    assert_eq!(retained, expect);
    removed.len()
}

#[test]
fn steane_composites_match_uncapped_pruner() {
    let dem = steane_model();
    let raw = generate_primitives(&dem);
    assert!(check_against_oracle(&raw) > 0);
    check_against_oracle(&prune_round_offsets(&raw, &dem));
}

#[test]
fn repetition_composites_match_uncapped_pruner() {
    let dem = merge_duplicates(&common::repetition(1e-3).load().unwrap().0);
    let raw = generate_primitives(&dem);
    check_against_oracle(&raw);
    check_against_oracle(&prune_round_offsets(&raw, &dem));
}

#[test]
fn composite_removals_stay_covered_by_survivors() {
    let dem = steane_model();
    let set = prune_round_offsets(&generate_primitives(&dem), &dem);
    let outcome = prune_composites(&set);
    let pool: Vec<&Primitive> = outcome.set.primitives.iter().collect();
    for t in &outcome.removed {
        assert!(has_cover(t, &pool), "{t:?}");
    }
}

fn check_round_prune(dem: &DetectorErrorModel) {
    let raw = generate_primitives(dem);
    let once = prune_round_offsets(&raw, dem);
    assert_eq!(once.round_pruning, RoundPruning::Applied);
    assert!(once.len() <= raw.len());
    let twice = prune_round_offsets(&once, dem);
    assert_eq!(twice.primitives, once.primitives);

    // every original primitive is an instance of a survivor with the same O
    let map = RoundMap::from_dem(dem).unwrap();
    for p in &raw.primitives {
        let covered = once.primitives.iter().any(|q| {
            q.observables == p.observables
                && if q.translatable {
                    map.instances(&q.syndrome).contains(&p.syndrome)
                } else {
                    q.syndrome == p.syndrome
                }
        });
        assert!(covered, "{p:?}");
    }
}

#[test]
fn round_prune_is_idempotent_and_covering_on_fixtures() {
    check_round_prune(&steane_model());
    check_round_prune(&merge_duplicates(&common::repetition(1e-3).load().unwrap().0));
    check_round_prune(&merge_duplicates(&common::surface_dem(3)));
    check_round_prune(&merge_duplicates(&common::surface_dem(5)));
}

#[test]
fn repetition_time_like_copies_collapse_per_check() {
    let dem = merge_duplicates(&common::repetition(1e-3).load().unwrap().0);
    let once = prune_round_offsets(&generate_primitives(&dem), &dem);
    let map = RoundMap::from_dem(&dem).unwrap();
    for s in 0..map.num_spatial() {
        let time_like = once
            .primitives
            .iter()
            .filter(|p| {
                p.syndrome.len() == 2
                    && p.syndrome.iter().all(|&d| map.spatial(d) == s)
                    && map.round(p.syndrome[1]) == map.round(p.syndrome[0]) + 1
            })
            .count();
        assert_eq!(time_like, 1, "check {s}");
    }
}

fn round_model() -> impl Strategy<Value = String> {
    (1u32..4, 2u32..5).prop_flat_map(|(spatial, rounds)| {
        let n = spatial * rounds;
        let error = (
            0.001f64..0.2,
            0..rounds,
            proptest::collection::btree_set((0..spatial, 0u32..2), 1..4),
            any::<bool>(),
        );
        proptest::collection::vec(error, 1..20).prop_map(move |errors| {
            let mut s = String::new();
            for (p, r, cells, obs) in errors {
                write!(s, "error({p})").unwrap();
                for (c, dr) in cells {
                    write!(s, " D{}", c + spatial * ((r + dr) % rounds)).unwrap();
                }
                if obs {
                    s.push_str(" L0");
                }
                s.push('\n');
            }
            for i in 0..n {
                writeln!(s, "detector({}, {}) D{i}", i % spatial, i / spatial).unwrap();
            }
            s.push_str("logical_observable L0\n");
            s
        })
    })
}

proptest! {
    #[test]
    fn round_prune_properties_hold(text in round_model()) {
        let dem = merge_duplicates(&parse_dem(&text).unwrap());
        check_round_prune(&dem);
    }

    #[test]
    fn composite_prune_is_idempotent_and_monotone(text in round_model()) {
        let dem = merge_duplicates(&parse_dem(&text).unwrap());
        let set = generate_primitives(&dem);
        let once = prune_composites(&set);
        prop_assert!(once.set.len() + once.removed.len() == set.len());
        let twice = prune_composites(&once.set);
        prop_assert_eq!(&twice.set.primitives, &once.set.primitives);
        prop_assert!(twice.removed.is_empty());
        // the bounded search only removes what the uncapped one removes
        let oracle = brute_force_removed(&set);
        for r in &once.removed {
            prop_assert!(oracle.contains(&key(r)));
        }
    }
}
