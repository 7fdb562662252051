use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{sorted_xor, DetectorErrorModel, DetectorInfo, Mechanism};
use crate::{Error, Result};

/// A CSS code given by its check and logical matrices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CssCodeSpec {
    pub name: String,
    pub n: usize,
    pub hx: Vec<Vec<u8>>,
    pub hz: Vec<Vec<u8>>,
    pub lx: Vec<Vec<u8>>,
    pub lz: Vec<Vec<u8>>,
    /// Informational code distance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

fn dot_mod2(a: &[u8], b: &[u8]) -> u8 {
    a.iter().zip(b).fold(0, |acc, (x, y)| acc ^ (x & y))
}

impl CssCodeSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let code: Self = serde_json::from_str(text)?;
        code.validate()?;
        Ok(code)
    }

    /// Number of logical qubits.
    pub fn k(&self) -> usize {
        self.lx.len()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, m) in [("hx", &self.hx), ("hz", &self.hz), ("lx", &self.lx), ("lz", &self.lz)] {
            for (i, row) in m.iter().enumerate() {
                if row.len() != self.n {
                    return Err(Error::InvalidCode(format!(
                        "{name} row {i} has {} columns, expected {}",
                        row.len(),
                        self.n
                    )));
                }
                if row.iter().any(|&b| b > 1) {
                    return Err(Error::InvalidCode(format!("{name} row {i} is not binary")));
                }
            }
        }
        let pairs = [("hx", &self.hx, "hz", &self.hz), ("lx", &self.lx, "hz", &self.hz), ("lz", &self.lz, "hx", &self.hx)];
        for (an, a, bn, b) in pairs {
            for (i, ra) in a.iter().enumerate() {
                for (j, rb) in b.iter().enumerate() {
                    if dot_mod2(ra, rb) != 0 {
                        return Err(Error::InvalidCode(format!(
                            "{an} row {i} anticommutes with {bn} row {j}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn sector(&self, sector: Sector) -> (&[Vec<u8>], &[Vec<u8>]) {
        match sector {
            Sector::Z => (&self.hz, &self.lz),
            Sector::X => (&self.hx, &self.lx),
        }
    }
}

/// Which half of a CSS code is decoded. `Z`: `hz` detects X errors, which
/// flip the `lz` observables. `X` is symmetric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    X,
    Z,
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X" | "x" => Ok(Sector::X),
            "Z" | "z" => Ok(Sector::Z),
            other => Err(Error::InvalidArgument(format!("unknown sector '{other}'"))),
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sector::X => "X",
            Sector::Z => "Z",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub p_data: f64,
    pub p_meas: f64,
    pub p_hook: f64,
    pub rounds: u32,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_data", self.p_data), ("p_meas", self.p_meas), ("p_hook", self.p_hook)] {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidNoise(format!("{name}={p} outside [0, 1)")));
            }
        }
        if self.rounds == 0 {
            return Err(Error::InvalidNoise("rounds must be at least 1".into()));
        }
        if self.rounds < 2 && (self.p_meas > 0.0 || self.p_hook > 0.0) {
            return Err(Error::InvalidNoise(
                "measurement and hook channels need at least 2 rounds".into(),
            ));
        }
        Ok(())
    }

    /// Scales every channel so that `p_data` becomes `p`.
    pub fn scaled_to(&self, p: f64) -> Self {
        if self.p_data == 0.0 {
            return Self { p_data: p, ..*self };
        }
        let ratio = p / self.p_data;
        Self {
            p_data: p,
            p_meas: self.p_meas * ratio,
            p_hook: self.p_hook * ratio,
            rounds: self.rounds,
        }
    }
}

/// Fault origin of a mechanism, as recorded in provenance sidecars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultKind {
    Data,
    Measurement,
    Hook,
}

/// Sidecar document mapping mechanism index to fault kind.
pub type Sidecar = BTreeMap<usize, FaultKind>;

/// See [`build_phenomenological_dem_with_provenance`].
pub fn build_phenomenological_dem(
    code: &CssCodeSpec,
    sector: Sector,
    noise: &NoiseConfig,
) -> Result<DetectorErrorModel> {
    build_phenomenological_dem_with_provenance(code, sector, noise).map(|(dem, _)| dem)
}

/// Builds a phenomenological memory-experiment model for one sector.
///
/// Detector `t*m + c` is the parity of consecutive measurements of check `c`
/// at round `t`, with coordinates `[c, t]`. The last round is a perfect
/// readout, so a data error shows up in exactly one round. Channels with
/// zero probability are omitted. Returns the fault kind of each mechanism.
pub fn build_phenomenological_dem_with_provenance(
    code: &CssCodeSpec,
    sector: Sector,
    noise: &NoiseConfig,
) -> Result<(DetectorErrorModel, Vec<FaultKind>)> {
    code.validate()?;
    noise.validate()?;
    let (h, l) = code.sector(sector);
    let m = h.len();
    let n = code.n;
    let rounds = noise.rounds as usize;

    let columns: Vec<Vec<u32>> = (0..n)
        .map(|q| (0..m).filter(|&c| h[c][q] == 1).map(|c| c as u32).collect())
        .collect();
    let obs: Vec<Vec<u32>> = (0..n)
        .map(|q| (0..l.len()).filter(|&j| l[j][q] == 1).map(|j| j as u32).collect())
        .collect();
    let at_round = |cols: &[u32], t: usize| -> Vec<u32> { cols.iter().map(|&c| (t * m) as u32 + c).collect() };

    let mut dem = DetectorErrorModel::new(rounds * m, l.len());
    for t in 0..rounds {
        for c in 0..m {
            let idx = t * m + c;
            dem.detectors[idx] = DetectorInfo {
                index: idx as u32,
                coords: Some(vec![c as f64, t as f64]),
                round: Some(t as u32),
            };
        }
    }
    dem.rounds = Some(noise.rounds);

    let mut kinds = Vec::new();
    let mut push = |dem: &mut DetectorErrorModel, p: f64, dets: Vec<u32>, o: Vec<u32>, kind: FaultKind| -> Result<()> {
        let mech = Mechanism::from_targets(p, &dets, &o);
        if mech.detectors.is_empty() {
            if mech.observables.is_empty() {
                return Ok(());
            }
            return Err(Error::InvalidCode(format!(
                "{kind:?} fault flips observables {:?} without triggering any check",
                mech.observables
            )));
        }
        dem.mechanisms.push(mech);
        kinds.push(kind);
        Ok(())
    };

    if noise.p_data > 0.0 {
        for t in 0..rounds {
            for q in 0..n {
                push(&mut dem, noise.p_data, at_round(&columns[q], t), obs[q].clone(), FaultKind::Data)?;
            }
        }
    }
    if noise.p_meas > 0.0 {
        for t in 0..rounds - 1 {
            for c in 0..m {
                let dets = vec![(t * m + c) as u32, ((t + 1) * m + c) as u32];
                push(&mut dem, noise.p_meas, dets, Vec::new(), FaultKind::Measurement)?;
            }
        }
    }
    if noise.p_hook > 0.0 {
        for row in h {
            let support: Vec<usize> = (0..n).filter(|&q| row[q] == 1).collect();
            for pair in support.windows(2) {
                let (q1, q2) = (pair[0], pair[1]);
                for t in 0..rounds - 1 {
                    let dets = sorted_xor(&at_round(&columns[q1], t), &at_round(&columns[q2], t + 1));
                    let o = sorted_xor(&obs[q1], &obs[q2]);
                    push(&mut dem, noise.p_hook, dets, o, FaultKind::Hook)?;
                }
            }
        }
    }
    Ok((dem, kinds))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn repetition() -> CssCodeSpec {
        CssCodeSpec {
            name: "repetition-3".into(),
            n: 3,
            hx: vec![],
            hz: vec![vec![1, 1, 0], vec![0, 1, 1]],
            lx: vec![vec![1, 1, 1]],
            lz: vec![vec![1, 0, 0]],
            d: Some(3),
        }
    }

    fn steane() -> CssCodeSpec {
        let h = vec![
            vec![0, 0, 0, 1, 1, 1, 1],
            vec![0, 1, 1, 0, 0, 1, 1],
            vec![1, 0, 1, 0, 1, 0, 1],
        ];
        CssCodeSpec {
            name: "steane".into(),
            n: 7,
            hx: h.clone(),
            hz: h,
            lx: vec![vec![1, 1, 1, 0, 0, 0, 0]],
            lz: vec![vec![1, 1, 1, 0, 0, 0, 0]],
            d: Some(3),
        }
    }

    fn noise(p_data: f64, p_meas: f64, p_hook: f64, rounds: u32) -> NoiseConfig {
        NoiseConfig {
            p_data,
            p_meas,
            p_hook,
            rounds,
        }
    }

    #[test]
    fn repetition_counts_and_stamps() {
        let dem = build_phenomenological_dem(&repetition(), Sector::Z, &noise(0.01, 0.002, 0.0, 2)).unwrap();
        assert_eq!(dem.mechanisms.len(), 8);
        assert_eq!(dem.mechanisms.iter().filter(|m| m.probability == 0.01).count(), 6);
        // data error on q1 at round 0
        assert_eq!(dem.mechanisms[1].detectors, vec![0, 1]);
        assert_eq!(dem.mechanisms[1].observables, Vec::<u32>::new());
        assert_eq!(dem.mechanisms[0].observables, vec![0]);
        assert_eq!(dem.num_detectors, 4);
        assert_eq!(dem.detectors[3].coords, Some(vec![1.0, 1.0]));
    }

    #[test]
    fn steane_column_weights() {
        let dem = build_phenomenological_dem(&steane(), Sector::Z, &noise(0.001, 0.0, 0.0, 3)).unwrap();
        let weights: Vec<usize> = dem.mechanisms[..7].iter().map(|m| m.detectors.len()).collect();
        // columns of the Steane check matrix are the binary numbers 1..=7
        assert_eq!(weights, vec![1, 1, 2, 1, 2, 2, 3]);
        assert!(dem.mechanisms.iter().all(|m| (1..=3).contains(&m.detectors.len())));
    }

    #[test]
    fn hook_channel_straddles_rounds() {
        let (dem, kinds) =
            build_phenomenological_dem_with_provenance(&repetition(), Sector::Z, &noise(0.01, 0.0, 0.001, 2)).unwrap();
        let hooks: Vec<_> = dem
            .mechanisms
            .iter()
            .zip(&kinds)
            .filter(|(_, k)| **k == FaultKind::Hook)
            .map(|(m, _)| m)
            .collect();
        // one adjacent pair per check, one straddle per round gap
        assert_eq!(hooks.len(), 2);
        assert_eq!(hooks[0].detectors, vec![0, 2, 3]);
        assert_eq!(hooks[0].observables, vec![0]);
    }

    #[test]
    fn mechanism_count_formula() {
        let code = steane();
        let cfg = noise(0.001, 0.001, 0.0005, 4);
        let (dem, kinds) = build_phenomenological_dem_with_provenance(&code, Sector::X, &cfg).unwrap();
        let hooks: usize = code.hx.iter().map(|r| r.iter().filter(|&&b| b == 1).count() - 1).sum::<usize>() * 3;
        assert_eq!(dem.mechanisms.len(), 4 * 7 + 3 * 3 + hooks);
        let coords = |d: u32| dem.detectors[d as usize].coords.clone().unwrap();
        for (m, _) in dem.mechanisms.iter().zip(&kinds).filter(|(_, k)| **k == FaultKind::Measurement) {
            assert_eq!(m.detectors.len(), 2);
            assert_eq!(coords(m.detectors[0])[0], coords(m.detectors[1])[0]);
        }
    }

    #[test]
    fn rejects_time_channels_with_one_round() {
        assert!(build_phenomenological_dem(&repetition(), Sector::Z, &noise(0.01, 0.01, 0.0, 1)).is_err());
        assert!(build_phenomenological_dem(&repetition(), Sector::Z, &noise(0.01, 0.0, 0.0, 1)).is_ok());
    }

    #[test]
    fn invalid_codes_are_rejected() {
        let mut code = steane();
        code.lz = vec![vec![1, 0, 0, 0, 0, 0, 0]];
        assert!(matches!(code.validate(), Err(Error::InvalidCode(_))));
        let mut code = steane();
        code.hz[0].pop();
        assert!(code.validate().is_err());
    }

    #[test]
    fn code_json_round_trip() {
        let code = steane();
        let text = serde_json::to_string(&code).unwrap();
        assert_eq!(CssCodeSpec::from_json(&text).unwrap(), code);
    }
}
