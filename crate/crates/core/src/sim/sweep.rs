use sha2::{Digest, Sha256};

use super::{run_experiment, ExperimentConfig, ExperimentReport};
use crate::flow::{build, BuildConfig};
use crate::pipeline::truncate_pipeline;
use crate::{Error, Result};

pub use crate::flow::ModelSource;

/// Column header of the report CSV.
pub const CSV_HEADER: &str =
    "p,shots,coverage,util_reduction,ler_hier,ler_l2,ler_hier_ci95,ler_l2_ci95,bp_fail,osd_reduction,depth,stages_removed,seed";

/// Grid of sweep points. An empty list means "base value only".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepGrid {
    pub p: Vec<f64>,
    pub truncate: Vec<usize>,
}

/// Seed for the grid point at physical error rate `p`.
pub fn point_seed(base: u64, p: f64) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(p.to_bits().to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// One report per grid point, `p` outermost. Each `p` point rebuilds the
/// model and pipeline and runs on seed [`point_seed`]; truncation points at
/// the same `p` share shots. Without a `p` grid the base seed is used.
pub fn sweep(
    source: &ModelSource,
    build_config: &BuildConfig,
    config: &ExperimentConfig,
    grid: &SweepGrid,
    shots: u64,
    seed: u64,
) -> Result<Vec<ExperimentReport>> {
    let p_points: Vec<Option<f64>> = if grid.p.is_empty() {
        vec![None]
    } else {
        grid.p.iter().copied().map(Some).collect()
    };
    let truncations = if grid.truncate.is_empty() {
        vec![0]
    } else {
        grid.truncate.clone()
    };
    let mut reports = Vec::new();
    for p in p_points {
        let (point, point_seed) = match p {
            Some(p) => {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidArgument(format!("grid point p={p} outside (0, 1)")));
                }
                (source.at_p(p)?, point_seed(seed, p))
            }
            None => (source.clone(), seed),
        };
        let built = build(&point, build_config)?;
        for &t in &truncations {
            if t > 0 && t >= built.pipeline.depth() {
                return Err(Error::InvalidArgument(format!(
                    "grid point removes {t} of {} stages",
                    built.pipeline.depth()
                )));
            }
            let pipeline = truncate_pipeline(&built.pipeline, t)?;
            let mut report = run_experiment(&built.model, &pipeline, config, shots, point_seed)?;
            report.p = p.or_else(|| point.p_data());
            report.stages_removed = t;
            reports.push(report);
        }
    }
    Ok(reports)
}

/// Renders reports under [`CSV_HEADER`]. Confidence intervals are written
/// as `low;high`; an infinite utilization reduction as `inf` and an
/// undefined OSD reduction as `NA`.
pub fn reports_to_csv(reports: &[ExperimentReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
    for r in reports {
        let ci = |(lo, hi): (f64, f64)| format!("{lo:.6e};{hi:.6e}");
        let record = [
            r.p.map_or("NA".into(), |p| format!("{p}")),
            r.shots.to_string(),
            format!("{:.6}", r.coverage),
            if r.utilization_reduction.is_infinite() {
                "inf".into()
            } else {
                format!("{:.4}", r.utilization_reduction)
            },
            format!("{:.6e}", r.ler_hierarchy),
            format!("{:.6e}", r.ler_l2_only),
            ci(r.ler_hierarchy_ci95),
            ci(r.ler_l2_only_ci95),
            r.bp_nonconverged.to_string(),
            r.osd_reduction.map_or("NA".into(), |x| format!("{x:.6}")),
            r.depth.to_string(),
            r.stages_removed.to_string(),
            r.seed.to_string(),
        ];
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}
