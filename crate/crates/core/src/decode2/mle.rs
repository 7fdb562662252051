use super::{Correction, TannerGraph};
use crate::dem::DetectorErrorModel;
use crate::{Error, Result};

/// Largest model the exhaustive search accepts.
pub const MLE_MAX_MECHANISMS: usize = 24;

/// Most probable set of mechanisms reproducing `syndrome`, by exhaustive
/// search. Equal-probability optima resolve to the lexicographically
/// smallest list of flagged indices.
pub fn mle_brute_force(dem: &DetectorErrorModel, syndrome: &[bool]) -> Result<Correction> {
    let n = dem.mechanisms.len();
    if n > MLE_MAX_MECHANISMS {
        return Err(Error::TooManyMechanisms {
            cap: MLE_MAX_MECHANISMS,
            actual: n,
        });
    }
    let graph = TannerGraph::<f64>::from_dem(dem);
    graph.check_syndrome_len(syndrome)?;
    let words = dem.num_detectors.div_ceil(64).max(1);
    let pack = |bits: &mut [u64], dets: &[u32]| {
        for &d in dets {
            bits[d as usize / 64] ^= 1u64 << (d % 64);
        }
    };
    let stamps: Vec<Vec<u64>> = dem
        .mechanisms
        .iter()
        .map(|m| {
            let mut w = vec![0u64; words];
            pack(&mut w, &m.detectors);
            w
        })
        .collect();
    let mut target = vec![0u64; words];
    for (d, _) in syndrome.iter().enumerate().filter(|(_, &b)| b) {
        target[d / 64] ^= 1u64 << (d % 64);
    }
    let weight: Vec<f64> = dem
        .mechanisms
        .iter()
        .map(|m| (m.probability / (1.0 - m.probability)).ln())
        .collect();
    let flagged = |mask: u64| -> Vec<usize> { (0..n).filter(|&i| mask >> i & 1 == 1).collect() };

    // Gray-code walk: step i toggles mechanism trailing_zeros(i)
    let mut current = vec![0u64; words];
    let mut mask = 0u64;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for step in 0..(1u64 << n) {
        if step > 0 {
            let i = step.trailing_zeros() as usize;
            mask ^= 1 << i;
            for (c, s) in current.iter_mut().zip(&stamps[i]) {
                *c ^= s;
            }
        }
        if current != target {
            continue;
        }
        let set = flagged(mask);
        let score: f64 = set.iter().map(|&i| weight[i]).sum();
        let better = match &best {
            None => true,
            Some((b, bset)) => {
                let tol = 1e-12 * b.abs().max(1.0);
                score > b + tol || ((score - b).abs() <= tol && set < *bset)
            }
        };
        if better {
            best = Some((score, set));
        }
    }
    let flags = match best {
        Some((_, set)) => (0..n).map(|i| set.contains(&i)).collect(),
        None => vec![false; n],
    };
    Ok(Correction::from_flags(&graph, flags, syndrome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dem::{build_phenomenological_dem, parse_dem, CssCodeSpec, NoiseConfig, Sector};

    #[test]
    fn zero_syndrome_is_empty() {
        let dem = parse_dem("error(0.1) D0 D1\nerror(0.2) D1\n").unwrap();
        let c = mle_brute_force(&dem, &[false, false]).unwrap();
        assert!(c.valid && c.mechanisms_flagged.iter().all(|f| !f));
    }

    #[test]
    fn repetition_single_round_picks_the_weight_one_mechanism() {
        let code = CssCodeSpec {
            name: "rep".into(),
            n: 3,
            hx: vec![],
            hz: vec![vec![1, 1, 0], vec![0, 1, 1]],
            lx: vec![vec![1, 1, 1]],
            lz: vec![vec![1, 0, 0]],
            d: None,
        };
        let noise = NoiseConfig {
            p_data: 0.01,
            p_meas: 0.0,
            p_hook: 0.0,
            rounds: 1,
        };
        let dem = build_phenomenological_dem(&code, Sector::Z, &noise).unwrap();
        let c = mle_brute_force(&dem, &[true, false]).unwrap();
        let q0 = dem.mechanisms.iter().position(|m| m.detectors == [0]).unwrap();
        let expect: Vec<bool> = (0..dem.mechanisms.len()).map(|i| i == q0).collect();
        assert_eq!(c.mechanisms_flagged, expect);
        assert_eq!(c.observable_flips, vec![true]);
    }

    #[test]
    fn ties_go_to_the_lexicographically_smallest_set() {
        let dem = parse_dem("error(0.1) D0 D1\nerror(0.1) D0\nerror(0.1) D0\n").unwrap();
        let c = mle_brute_force(&dem, &[true, false]).unwrap();
        assert_eq!(c.mechanisms_flagged, vec![false, true, false]);
    }

    #[test]
    fn cap_is_enforced() {
        let text: String = (0..25).map(|i| format!("error(0.1) D{i}\n")).collect();
        let dem = parse_dem(&text).unwrap();
        assert!(matches!(
            mle_brute_force(&dem, &[false; 25]),
            Err(Error::TooManyMechanisms { .. })
        ));
    }
}
