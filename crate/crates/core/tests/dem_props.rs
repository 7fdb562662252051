mod common;

use std::collections::BTreeMap;
use std::fmt::Write;

use proptest::prelude::*;
use qpredec::dem::{merge_duplicates, parse_dem, serialize_dem, RoundMap};

#[derive(Debug, Clone)]
struct RawModel {
    detectors: u32,
    observables: u32,
    with_coords: bool,
    errors: Vec<(f64, Vec<u32>, Vec<u32>)>,
}

fn raw_model() -> impl Strategy<Value = RawModel> {
    (1u32..10, 0u32..3, any::<bool>()).prop_flat_map(|(nd, no, with_coords)| {
        let error = (
            0.0001f64..0.45,
            proptest::collection::btree_set(0..nd, 1..4).prop_map(|s| s.into_iter().collect::<Vec<_>>()),
            proptest::collection::vec(0..no.max(1), 0..(no.min(2) as usize + 1)),
        )
            .prop_map(move |(p, d, o)| (p, d, if no == 0 { vec![] } else { o }));
        proptest::collection::vec(error, 0..25).prop_map(move |errors| RawModel {
            detectors: nd,
            observables: no,
            with_coords,
            errors,
        })
    })
}

fn render(m: &RawModel) -> String {
    let mut s = String::new();
    for (p, d, o) in &m.errors {
        write!(s, "error({p})").unwrap();
        for x in d {
            write!(s, " D{x}").unwrap();
        }
        for x in o {
            write!(s, " L{x}").unwrap();
        }
        s.push('\n');
    }
    for i in 0..m.detectors {
        if m.with_coords {
            writeln!(s, "detector({}, {}) D{i}", i % 3, i / 3).unwrap();
        } else {
            writeln!(s, "detector D{i}").unwrap();
        }
    }
    for o in 0..m.observables {
        writeln!(s, "logical_observable L{o}").unwrap();
    }
    s
}

fn xor_set(items: &[u32]) -> Vec<u32> {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &x in items {
        *counts.entry(x).or_default() += 1;
    }
    counts.into_iter().filter(|(_, c)| c % 2 == 1).map(|(x, _)| x).collect()
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_a_fixed_point(raw in raw_model()) {
        let dem = parse_dem(&render(&raw)).unwrap();
        let again = parse_dem(&serialize_dem(&dem)).unwrap();
        prop_assert_eq!(&again, &dem);
        prop_assert_eq!(serialize_dem(&again), serialize_dem(&dem));
    }

    #[test]
    fn merge_is_idempotent(raw in raw_model()) {
        let once = merge_duplicates(&parse_dem(&render(&raw)).unwrap());
        prop_assert_eq!(merge_duplicates(&once), once);
    }

    #[test]
    fn merge_combines_probabilities_as_independent_flips(raw in raw_model()) {
        // independent oracle: P(odd number fire) = (1 - prod(1 - 2p)) / 2
        let mut expect: BTreeMap<(Vec<u32>, Vec<u32>), f64> = BTreeMap::new();
        for (p, d, o) in &raw.errors {
            let key = (xor_set(d), xor_set(o));
            if key.0.is_empty() && key.1.is_empty() {
                continue;
            }
            *expect.entry(key).or_insert(1.0) *= 1.0 - 2.0 * p;
        }
        let merged = merge_duplicates(&parse_dem(&render(&raw)).unwrap());
        prop_assert_eq!(merged.mechanisms.len(), expect.len());
        for m in &merged.mechanisms {
            let prod = expect[&(m.detectors.clone(), m.observables.clone())];
            prop_assert!((m.probability - (1.0 - prod) / 2.0).abs() < 1e-12);
        }
    }
}

#[test]
fn surface_fixtures_have_recorded_sizes() {
    for (d, detectors, errors) in [(3, 24, 219), (5, 120, 1677)] {
        let dem = common::surface_dem(d);
        assert_eq!(dem.num_detectors, detectors);
        assert_eq!(dem.num_observables, 1);
        assert_eq!(dem.mechanisms.len(), errors);
        assert_eq!(dem.rounds, Some(d as u32 + 1));
        let map = RoundMap::from_dem(&dem).unwrap();
        assert_eq!(map.num_rounds(), d as u32 + 1);
    }
}

#[test]
fn surface_fixtures_round_trip() {
    for d in [3, 5] {
        let dem = common::surface_dem(d);
        let again = parse_dem(&serialize_dem(&dem)).unwrap();
        assert_eq!(again, dem);
    }
}

#[test]
fn header_counts_match_the_model() {
    for d in [3, 5] {
        let text = common::read_fixture(&format!("surface_d{d}_nz_si1000_p0.001.dem"));
        let header = text.lines().find(|l| l.contains("num_detectors=")).unwrap();
        let field = |key: &str| -> usize {
            let rest = &header[header.find(key).unwrap() + key.len()..];
            rest.split_whitespace().next().unwrap().parse().unwrap()
        };
        let dem = parse_dem(&text).unwrap();
        assert_eq!(field("num_detectors="), dem.num_detectors);
        assert_eq!(field("num_observables="), dem.num_observables);
    }
}
