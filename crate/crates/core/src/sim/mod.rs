//! Monte-Carlo evaluation of a predecoder pipeline against the BP+OSD second
//! level.
//!
//! Every shot draws from its own ChaCha8 stream, selected by the shot index,
//! so results do not depend on how shots are spread over threads.

mod experiment;
mod predecode;
mod sweep;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dem::DetectorErrorModel;

pub use experiment::{run_experiment, wilson_interval, ExperimentConfig, ExperimentReport};
pub use predecode::{run_predecoder, CompiledPipeline, PredecodeOutcome};
pub use sweep::{point_seed, reports_to_csv, sweep, ModelSource, SweepGrid, CSV_HEADER};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shot {
    pub fired_mechanisms: Vec<bool>,
    pub syndrome: Vec<bool>,
    pub true_observable_flips: Vec<bool>,
}

/// Generator for shot `index` of an experiment seeded with `seed`.
pub fn shot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Fires every mechanism independently with its probability and
/// XOR-accumulates the stamps. Draws exactly one uniform per mechanism.
pub fn sample_shot(dem: &DetectorErrorModel, rng: &mut impl Rng) -> Shot {
    let mut shot = Shot {
        fired_mechanisms: vec![false; dem.mechanisms.len()],
        syndrome: vec![false; dem.num_detectors],
        true_observable_flips: vec![false; dem.num_observables],
    };
    for (i, m) in dem.mechanisms.iter().enumerate() {
        if rng.gen::<f64>() < m.probability {
            shot.fired_mechanisms[i] = true;
            for &d in &m.detectors {
                shot.syndrome[d as usize] ^= true;
            }
            for &o in &m.observables {
                shot.true_observable_flips[o as usize] ^= true;
            }
        }
    }
    shot
}
