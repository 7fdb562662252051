use super::{Correction, TannerGraph};
use crate::{Real, Result};

/// Order-0 ordered-statistics decoding.
///
/// Columns are ranked by ascending posterior LLR (most likely flipped
/// first); Gaussian elimination over GF(2) in that order picks an
/// information set, and the unique solution supported on it is returned. A
/// syndrome outside the column space yields an invalid correction.
pub fn osd0_postprocess<T: Real>(graph: &TannerGraph<T>, syndrome: &[bool], marginals: &[T]) -> Result<Correction> {
    graph.check_syndrome_len(syndrome)?;
    let n = graph.num_vars();
    if marginals.len() != n {
        return Err(crate::Error::Dimension {
            expected: n,
            actual: marginals.len(),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        marginals[a]
            .partial_cmp(&marginals[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let m = graph.num_checks();
    let words = n.div_ceil(64);
    let mut rows = vec![0u64; m * words];
    for (pos, &v) in order.iter().enumerate() {
        for &c in graph.checks_of(v) {
            rows[c as usize * words + pos / 64] |= 1u64 << (pos % 64);
        }
    }
    let mut rhs = syndrome.to_vec();

    let mut pivots: Vec<usize> = Vec::new();
    for pos in 0..n {
        let rank = pivots.len();
        if rank == m {
            break;
        }
        let (w, bit) = (pos / 64, 1u64 << (pos % 64));
        let Some(r) = (rank..m).find(|&r| rows[r * words + w] & bit != 0) else {
            continue;
        };
        if r != rank {
            for k in 0..words {
                rows.swap(r * words + k, rank * words + k);
            }
            rhs.swap(r, rank);
        }
        for other in 0..m {
            if other != rank && rows[other * words + w] & bit != 0 {
                for k in w..words {
                    let x = rows[rank * words + k];
                    rows[other * words + k] ^= x;
                }
                rhs[other] ^= rhs[rank];
            }
        }
        pivots.push(pos);
    }

    let mut flags = vec![false; n];
    for (row, &pos) in pivots.iter().enumerate() {
        flags[order[pos]] = rhs[row];
    }
    Ok(Correction::from_flags(graph, flags, syndrome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decode2::bp_decode;
    use crate::dem::{build_phenomenological_dem, CssCodeSpec, NoiseConfig, Sector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_syndrome_gives_zero_correction() {
        let g = TannerGraph::<f64>::from_columns(2, 0, vec![vec![0, 1], vec![1]], vec![vec![], vec![]], &[0.1, 0.1]);
        let c = osd0_postprocess(&g, &[false, false], &[1.0, 1.0]).unwrap();
        assert!(c.valid);
        assert_eq!(c.mechanisms_flagged, vec![false, false]);
    }

    #[test]
    fn most_likely_column_is_used() {
        let g = TannerGraph::<f64>::from_columns(1, 0, vec![vec![0], vec![0]], vec![vec![], vec![]], &[0.1, 0.1]);
        let c = osd0_postprocess(&g, &[true], &[0.5, -0.2]).unwrap();
        assert_eq!(c.mechanisms_flagged, vec![false, true]);
    }

    #[test]
    fn unreachable_syndrome_is_invalid() {
        let g = TannerGraph::<f64>::from_columns(2, 0, vec![vec![0, 1]], vec![vec![]], &[0.1]);
        assert!(!osd0_postprocess(&g, &[true, false], &[0.0]).unwrap().valid);
    }

    #[test]
    fn sampled_repetition_syndromes_are_always_reproduced() {
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
            p_meas: 0.01,
            p_hook: 0.0,
            rounds: 3,
        };
        let dem = build_phenomenological_dem(&code, Sector::Z, &noise).unwrap();
        let g = TannerGraph::<f64>::from_dem(&dem);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let fired: Vec<bool> = dem.mechanisms.iter().map(|m| rng.gen::<f64>() < m.probability).collect();
            let s = g.syndrome_of(&fired);
            let bp = bp_decode(&g, &s, 1).unwrap();
            assert!(osd0_postprocess(&g, &s, &bp.marginals).unwrap().valid);
        }
    }
}
