//! Detector error models: the decoding hypergraph every later stage consumes.

mod code;
mod parse;
mod rounds;
mod serialize;

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};

pub use code::{
    build_phenomenological_dem, build_phenomenological_dem_with_provenance, CssCodeSpec, FaultKind, NoiseConfig, Sector,
    Sidecar,
};
pub use parse::parse_dem;
pub use rounds::RoundMap;
pub use serialize::serialize_dem;

/// One independent error mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    pub probability: f64,
    /// Sorted, duplicate-free detector indices.
    pub detectors: Vec<u32>,
    /// Sorted, duplicate-free observable indices.
    pub observables: Vec<u32>,
}

impl Mechanism {
    /// Builds a mechanism from arbitrary target lists. Repeated targets cancel
    /// in pairs, matching the XOR semantics of the text format.
    pub fn from_targets(probability: f64, detectors: &[u32], observables: &[u32]) -> Self {
        Self {
            probability,
            detectors: xor_normalize(detectors),
            observables: xor_normalize(observables),
        }
    }
}

/// Sorts and cancels repeated entries pairwise.
pub(crate) fn xor_normalize(items: &[u32]) -> Vec<u32> {
    let mut sorted = items.to_vec();
    sorted.sort_unstable();
    let mut out: Vec<u32> = Vec::with_capacity(sorted.len());
    for x in sorted {
        if out.last() == Some(&x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

/// Symmetric difference of two sorted sets.
pub(crate) fn sorted_xor(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorInfo {
    pub index: u32,
    /// Spatial coordinates followed by a final time coordinate.
    pub coords: Option<Vec<f64>>,
    pub round: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorErrorModel {
    pub mechanisms: Vec<Mechanism>,
    /// One entry per detector, indexed by detector id.
    pub detectors: Vec<DetectorInfo>,
    pub num_detectors: usize,
    pub num_observables: usize,
    pub rounds: Option<u32>,
}

impl DetectorErrorModel {
    pub fn new(num_detectors: usize, num_observables: usize) -> Self {
        Self {
            mechanisms: Vec::new(),
            detectors: (0..num_detectors)
                .map(|i| DetectorInfo {
                    index: i as u32,
                    ..Default::default()
                })
                .collect(),
            num_detectors,
            num_observables,
            rounds: None,
        }
    }

    pub fn has_rounds(&self) -> bool {
        self.rounds.is_some() && self.detectors.iter().all(|d| d.round.is_some())
    }

    /// Infers rounds from the final coordinate when every detector carries
    /// coordinates; otherwise clears round metadata.
    pub fn infer_rounds_from_coords(&mut self) {
        let all_coords = self.num_detectors > 0
            && self
                .detectors
                .iter()
                .all(|d| d.coords.as_ref().is_some_and(|c| !c.is_empty()));
        if !all_coords {
            for d in &mut self.detectors {
                d.round = None;
            }
            self.rounds = None;
            return;
        }
        let mut max_round = 0;
        for d in &mut self.detectors {
            let t = *d.coords.as_ref().and_then(|c| c.last()).unwrap_or(&0.0);
            let r = if t > 0.0 { t.trunc() as u32 } else { 0 };
            d.round = Some(r);
            max_round = max_round.max(r);
        }
        self.rounds = Some(max_round + 1);
    }

    /// Assigns rounds to coordinate-free detectors assuming a round-major
    /// layout with the same number of detectors in every round.
    pub fn assign_uniform_rounds(&mut self, rounds: u32) -> crate::Result<()> {
        if rounds == 0 || !self.num_detectors.is_multiple_of(rounds as usize) {
            return Err(crate::Error::MissingRounds(format!(
                "{} detectors cannot be split evenly into {rounds} rounds",
                self.num_detectors
            )));
        }
        let per_round = self.num_detectors / rounds as usize;
        for d in &mut self.detectors {
            d.round = Some((d.index as usize / per_round) as u32);
        }
        self.rounds = Some(rounds);
        Ok(())
    }

    /// Content hash used to tie pipeline artifacts to their source model.
    pub fn content_hash(&self) -> String {
        let text = serialize_dem(self);
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks the index-range and probability invariants.
    pub fn validate(&self) -> crate::Result<()> {
        if self.detectors.len() != self.num_detectors {
            return Err(crate::Error::Dimension {
                expected: self.num_detectors,
                actual: self.detectors.len(),
            });
        }
        for m in &self.mechanisms {
            if let Some(&d) = m.detectors.last() {
                if d as usize >= self.num_detectors {
                    return Err(crate::Error::Dimension {
                        expected: self.num_detectors,
                        actual: d as usize + 1,
                    });
                }
            }
            if let Some(&o) = m.observables.last() {
                if o as usize >= self.num_observables {
                    return Err(crate::Error::Dimension {
                        expected: self.num_observables,
                        actual: o as usize + 1,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Combines mechanisms that share `(detectors, observables)`; see
/// [`merge_duplicates_with_sources`].
pub fn merge_duplicates(dem: &DetectorErrorModel) -> DetectorErrorModel {
    merge_duplicates_with_sources(dem).0
}

/// Merges duplicate mechanisms with the XOR rule `p1(1-p2) + p2(1-p1)`,
/// folded left in input order. Output mechanisms are sorted by detector set
/// then observable set. The second value lists, per output mechanism, the
/// input indices that were folded into it.
pub fn merge_duplicates_with_sources(dem: &DetectorErrorModel) -> (DetectorErrorModel, Vec<Vec<usize>>) {
    // (S, O) -> (probability, source indices)
    #[allow(clippy::type_complexity)]
    let mut groups: BTreeMap<(&[u32], &[u32]), (f64, Vec<usize>)> = BTreeMap::new();
    for (i, m) in dem.mechanisms.iter().enumerate() {
        groups
            .entry((&m.detectors, &m.observables))
            .and_modify(|(p, src)| {
                *p = *p * (1.0 - m.probability) + m.probability * (1.0 - *p);
                src.push(i);
            })
            .or_insert((m.probability, vec![i]));
    }
    let mut mechanisms = Vec::with_capacity(groups.len());
    let mut sources = Vec::with_capacity(groups.len());
    for ((dets, obs), (p, src)) in groups {
        mechanisms.push(Mechanism {
            probability: p,
            detectors: dets.to_vec(),
            observables: obs.to_vec(),
        });
        sources.push(src);
    }
    let out = DetectorErrorModel {
        mechanisms,
        ..dem.clone()
    };
    (out, sources)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(mechs: &[(f64, &[u32], &[u32])]) -> DetectorErrorModel {
        let mut dem = DetectorErrorModel::new(4, 2);
        dem.mechanisms = mechs
            .iter()
            .map(|(p, d, o)| Mechanism::from_targets(*p, d, o))
            .collect();
        dem
    }

    #[test]
    fn merge_xor_combines_pair() {
        let dem = model(&[(0.1, &[0, 1], &[0]), (0.2, &[0, 1], &[0])]);
        let merged = merge_duplicates(&dem);
        assert_eq!(merged.mechanisms.len(), 1);
        assert!((merged.mechanisms[0].probability - 0.26).abs() < 1e-15);
    }

    #[test]
    fn merge_half_is_fixed_point() {
        let dem = model(&[(0.5, &[2], &[]), (0.5, &[2], &[]), (0.5, &[2], &[])]);
        let merged = merge_duplicates(&dem);
        assert_eq!(merged.mechanisms.len(), 1);
        assert_eq!(merged.mechanisms[0].probability, 0.5);
    }

    #[test]
    fn merge_without_duplicates_sorts() {
        let dem = model(&[(0.1, &[3], &[]), (0.2, &[0, 1], &[1]), (0.3, &[0, 1], &[0])]);
        let (merged, sources) = merge_duplicates_with_sources(&dem);
        let keys: Vec<_> = merged
            .mechanisms
            .iter()
            .map(|m| (m.detectors.clone(), m.observables.clone()))
            .collect();
        assert_eq!(
            keys,
            vec![(vec![0, 1], vec![0]), (vec![0, 1], vec![1]), (vec![3], vec![])]
        );
        assert_eq!(sources, vec![vec![2], vec![1], vec![0]]);
    }

    #[test]
    fn repeated_targets_cancel() {
        let m = Mechanism::from_targets(0.1, &[3, 1, 3, 3], &[0, 0]);
        assert_eq!(m.detectors, vec![1, 3]);
        assert!(m.observables.is_empty());
    }

    #[test]
    fn sorted_xor_is_symmetric_difference() {
        assert_eq!(sorted_xor(&[0, 2, 5], &[2, 3]), vec![0, 3, 5]);
        assert_eq!(sorted_xor(&[], &[1]), vec![1]);
    }
}
