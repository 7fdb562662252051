use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::{sample_shot, shot_rng, CompiledPipeline};
use crate::decode2::BpOsdDecoder;
use crate::dem::DetectorErrorModel;
use crate::pipeline::Pipeline;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExperimentConfig {
    pub bp_iters: usize,
    /// Runs BP with ten times `bp_iters`.
    pub osd_budget_x10: bool,
}

impl ExperimentConfig {
    pub fn effective_bp_iters(&self) -> usize {
        if self.osd_budget_x10 {
            self.bp_iters * 10
        } else {
            self.bp_iters
        }
    }
}

fn ratio_or_inf<S: Serializer>(value: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if value.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub p: Option<f64>,
    pub shots: u64,
    pub nonzero_syndrome_shots: u64,
    pub resolved_shots: u64,
    /// Resolved shots over shots with a non-zero syndrome; 1 when there are
    /// none.
    pub coverage: f64,
    pub ler_hierarchy: f64,
    pub ler_l2_only: f64,
    pub ler_hierarchy_ci95: (f64, f64),
    pub ler_l2_only_ci95: (f64, f64),
    pub logical_errors_hierarchy: u64,
    pub logical_errors_l2_only: u64,
    pub per_observable_ler_hierarchy: Vec<f64>,
    pub per_observable_ler_l2_only: Vec<f64>,
    /// `1 / (1 - coverage)`, infinite at full coverage.
    #[serde(serialize_with = "ratio_or_inf")]
    pub utilization_reduction: f64,
    pub bp_nonconverged: u64,
    pub bp_nonconverged_resolved: u64,
    /// Share of BP failures the predecoder resolved; `None` without failures.
    pub osd_reduction: Option<f64>,
    pub stage_fire_counts: Vec<u64>,
    pub depth: usize,
    pub stages_removed: usize,
    pub seed: u64,
    pub bp_iters: usize,
    pub osd_budget_x10: bool,
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Default)]
struct Tally {
    nonzero: u64,
    resolved: u64,
    hier_errors: u64,
    l2_errors: u64,
    bp_fail: u64,
    bp_fail_resolved: u64,
    per_obs_hier: Vec<u64>,
    per_obs_l2: Vec<u64>,
    stage_fires: Vec<u64>,
}

impl Tally {
    fn new(num_observables: usize, depth: usize) -> Self {
        Self {
            per_obs_hier: vec![0; num_observables],
            per_obs_l2: vec![0; num_observables],
            stage_fires: vec![0; depth],
            ..Default::default()
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.nonzero += other.nonzero;
        self.resolved += other.resolved;
        self.hier_errors += other.hier_errors;
        self.l2_errors += other.l2_errors;
        self.bp_fail += other.bp_fail;
        self.bp_fail_resolved += other.bp_fail_resolved;
        for (a, b) in self.per_obs_hier.iter_mut().zip(other.per_obs_hier) {
            *a += b;
        }
        for (a, b) in self.per_obs_l2.iter_mut().zip(other.per_obs_l2) {
            *a += b;
        }
        for (a, b) in self.stage_fires.iter_mut().zip(other.stage_fires) {
            *a += b;
        }
        self
    }
}

/// Runs `shots` shots through both arms: the predecoder with BP+OSD on the
/// original syndrome for unresolved shots, and BP+OSD alone.
///
/// Both arms see the same shots. Shots are evaluated in parallel on the
/// current rayon pool; the report does not depend on the pool size.
pub fn run_experiment(
    dem: &DetectorErrorModel,
    pipeline: &Pipeline,
    config: &ExperimentConfig,
    shots: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    if config.bp_iters == 0 {
        return Err(Error::InvalidArgument("BP needs at least one iteration".into()));
    }
    let compiled = CompiledPipeline::new(pipeline, dem)?;
    let decoder = BpOsdDecoder::<f64>::new(dem, config.effective_bp_iters());
    let num_obs = dem.num_observables;
    let depth = pipeline.depth();

    let tally = (0..shots)
        .into_par_iter()
        .fold(
            || Tally::new(num_obs, depth),
            |mut t, index| {
                let shot = sample_shot(dem, &mut shot_rng(seed, index));
                let truth = &shot.true_observable_flips;
                if shot.syndrome.iter().all(|&b| !b) {
                    if truth.iter().any(|&b| b) {
                        t.hier_errors += 1;
                        t.l2_errors += 1;
                        for (j, &b) in truth.iter().enumerate() {
                            t.per_obs_hier[j] += u64::from(b);
                            t.per_obs_l2[j] += u64::from(b);
                        }
                    }
                    return t;
                }
                t.nonzero += 1;
                let pre = compiled.run(&shot.syndrome);
                for (a, &n) in t.stage_fires.iter_mut().zip(&pre.per_stage_fire_counts) {
                    *a += n as u64;
                }
                let (correction, used_osd) = decoder.decode(&shot.syndrome).expect("dimensions checked at compile");
                let l2 = &correction.observable_flips;
                let hier = if pre.fully_resolved {
                    &pre.predicted_observable_flips
                } else {
                    l2
                };
                t.resolved += u64::from(pre.fully_resolved);
                t.bp_fail += u64::from(used_osd);
                t.bp_fail_resolved += u64::from(used_osd && pre.fully_resolved);
                t.hier_errors += u64::from(hier != truth);
                t.l2_errors += u64::from(l2 != truth);
                for j in 0..num_obs {
                    t.per_obs_hier[j] += u64::from(hier[j] != truth[j]);
                    t.per_obs_l2[j] += u64::from(l2[j] != truth[j]);
                }
                t
            },
        )
        .reduce(|| Tally::new(num_obs, depth), Tally::merge);

    let coverage = if tally.nonzero == 0 {
        1.0
    } else {
        tally.resolved as f64 / tally.nonzero as f64
    };
    let rate = |k: u64| k as f64 / shots as f64;
    Ok(ExperimentReport {
        p: None,
        shots,
        nonzero_syndrome_shots: tally.nonzero,
        resolved_shots: tally.resolved,
        coverage,
        ler_hierarchy: rate(tally.hier_errors),
        ler_l2_only: rate(tally.l2_errors),
        ler_hierarchy_ci95: wilson_interval(tally.hier_errors, shots),
        ler_l2_only_ci95: wilson_interval(tally.l2_errors, shots),
        logical_errors_hierarchy: tally.hier_errors,
        logical_errors_l2_only: tally.l2_errors,
        per_observable_ler_hierarchy: tally.per_obs_hier.iter().map(|&k| rate(k)).collect(),
        per_observable_ler_l2_only: tally.per_obs_l2.iter().map(|&k| rate(k)).collect(),
        utilization_reduction: if tally.resolved == tally.nonzero {
            f64::INFINITY
        } else {
            tally.nonzero as f64 / (tally.nonzero - tally.resolved) as f64
        },
        bp_nonconverged: tally.bp_fail,
        bp_nonconverged_resolved: tally.bp_fail_resolved,
        osd_reduction: (tally.bp_fail > 0).then(|| tally.bp_fail_resolved as f64 / tally.bp_fail as f64),
        stage_fire_counts: tally.stage_fires,
        depth,
        stages_removed: 0,
        seed,
        bp_iters: config.effective_bp_iters(),
        osd_budget_x10: config.osd_budget_x10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_reference_values() {
        // textbook example: 1 success in 10
        let (lo, hi) = wilson_interval(1, 10);
        assert!((lo - 0.017_876_2).abs() < 1e-6, "{lo}");
        assert!((hi - 0.404_150_0).abs() < 1e-6, "{hi}");
        assert!(wilson_interval(0, 100).0 < 1e-12);
        assert_eq!(wilson_interval(3, 0), (0.0, 1.0));
    }

    #[test]
    fn utilization_of_ninety_percent_coverage() {
        let nonzero = 1000u64;
        let resolved = 900u64;
        let coverage = resolved as f64 / nonzero as f64;
        let direct = nonzero as f64 / (nonzero - resolved) as f64;
        assert!((direct - 1.0 / (1.0 - coverage)).abs() < 1e-9);
        assert!((direct - 10.0).abs() < 1e-9);
    }

    #[test]
    fn infinite_reduction_serializes_as_text() {
        #[derive(Serialize)]
        struct W(#[serde(serialize_with = "ratio_or_inf")] f64);
        assert_eq!(serde_json::to_string(&W(f64::INFINITY)).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&W(2.5)).unwrap(), "2.5");
    }
}
