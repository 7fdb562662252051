use std::collections::HashMap;

use super::DetectorErrorModel;
use crate::{Error, Result};

/// Decomposition of detector indices into `(spatial id, round)` pairs.
///
/// Spatial ids come from the spatial part of the detector coordinates (all
/// but the last) in order of first appearance. Detectors without coordinates
/// use their position within their round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMap {
    spatial: Vec<u32>,
    round: Vec<u32>,
    lookup: HashMap<(u32, u32), u32>,
    num_rounds: u32,
    num_spatial: u32,
}

impl RoundMap {
    pub fn from_dem(dem: &DetectorErrorModel) -> Result<Self> {
        if !dem.has_rounds() {
            return Err(Error::MissingRounds(
                "not every detector carries a round".into(),
            ));
        }
        let mut spatial = Vec::with_capacity(dem.num_detectors);
        let mut round = Vec::with_capacity(dem.num_detectors);
        let mut by_coords: HashMap<Vec<u64>, u32> = HashMap::new();
        let mut per_round_count: HashMap<u32, u32> = HashMap::new();
        for d in &dem.detectors {
            let r = d.round.expect("checked above");
            let sid = match &d.coords {
                Some(c) if !c.is_empty() => {
                    let key: Vec<u64> = c[..c.len() - 1].iter().map(|x| x.to_bits()).collect();
                    let next = by_coords.len() as u32;
                    *by_coords.entry(key).or_insert(next)
                }
                _ => {
                    let slot = per_round_count.entry(r).or_insert(0);
                    *slot += 1;
                    *slot - 1
                }
            };
            spatial.push(sid);
            round.push(r);
        }
        let mut lookup = HashMap::with_capacity(spatial.len());
        for (i, (&s, &r)) in spatial.iter().zip(&round).enumerate() {
            if lookup.insert((s, r), i as u32).is_some() {
                return Err(Error::MissingRounds(format!(
                    "two detectors share spatial id {s} in round {r}"
                )));
            }
        }
        let num_rounds = round.iter().max().map_or(0, |r| r + 1);
        let num_spatial = spatial.iter().max().map_or(0, |s| s + 1);
        Ok(Self {
            spatial,
            round,
            lookup,
            num_rounds,
            num_spatial,
        })
    }

    pub fn spatial(&self, detector: u32) -> u32 {
        self.spatial[detector as usize]
    }

    pub fn round(&self, detector: u32) -> u32 {
        self.round[detector as usize]
    }

    pub fn detector(&self, spatial: u32, round: u32) -> Option<u32> {
        self.lookup.get(&(spatial, round)).copied()
    }

    pub fn num_rounds(&self) -> u32 {
        self.num_rounds
    }

    pub fn num_spatial(&self) -> u32 {
        self.num_spatial
    }

    /// Translates a detector set by `delta` rounds. `None` when any shifted
    /// detector does not exist.
    pub fn shift(&self, detectors: &[u32], delta: i64) -> Option<Vec<u32>> {
        let mut out = Vec::with_capacity(detectors.len());
        for &d in detectors {
            let r = self.round(d) as i64 + delta;
            if r < 0 {
                return None;
            }
            out.push(self.detector(self.spatial(d), r as u32)?);
        }
        out.sort_unstable();
        Some(out)
    }

    /// Every valid translate of `detectors`, in ascending round offset.
    pub fn instances(&self, detectors: &[u32]) -> Vec<Vec<u32>> {
        let Some(min_round) = detectors.iter().map(|&d| self.round(d)).min() else {
            return Vec::new();
        };
        (0..self.num_rounds as i64)
            .filter_map(|start| self.shift(detectors, start - min_round as i64))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dem::parse_dem;

    #[test]
    fn shifts_follow_coordinates() {
        let text = "\
detector(0, 0, 0) D0
detector(2, 0, 1) D1
detector(0, 0, 1) D2
detector(2, 0, 2) D3
detector(0, 0, 2) D4
error(0.1) D0 D2
";
        let dem = parse_dem(text).unwrap();
        let map = RoundMap::from_dem(&dem).unwrap();
        assert_eq!(map.num_rounds(), 3);
        assert_eq!(map.spatial(2), map.spatial(0));
        assert_eq!(map.shift(&[0, 2], 1), Some(vec![2, 4]));
        assert_eq!(map.shift(&[0, 2], 2), None);
        // spatial id 1 has no round-0 detector
        assert_eq!(map.instances(&[1]), vec![vec![1], vec![3]]);
        assert_eq!(map.instances(&[3]), vec![vec![1], vec![3]]);
    }

    #[test]
    fn requires_rounds() {
        let dem = parse_dem("error(0.1) D0").unwrap();
        assert!(RoundMap::from_dem(&dem).is_err());
    }
}
