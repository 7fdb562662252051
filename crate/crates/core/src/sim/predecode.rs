use crate::dem::{DetectorErrorModel, RoundMap};
use crate::pipeline::{instances, Pipeline};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredecodeOutcome {
    pub residual_syndrome: Vec<bool>,
    pub predicted_observable_flips: Vec<bool>,
    pub fully_resolved: bool,
    /// Pipeline primitive ids in firing order; a translatable primitive
    /// appears once per firing offset.
    pub fired_primitive_ids: Vec<usize>,
    pub per_stage_fire_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
struct Instance {
    primitive: usize,
    detectors: Vec<u32>,
    observables: Vec<u32>,
}

/// A pipeline with every translatable primitive expanded to its round
/// offsets, ready to run on syndromes of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledPipeline {
    stages: Vec<Vec<Instance>>,
    num_detectors: usize,
    num_observables: usize,
}

impl CompiledPipeline {
    /// Expands `pipeline` against `dem`. Within a stage, instances are listed
    /// by primitive id and then by ascending offset; that order is the
    /// lowest-offset-first rule for overlapping offsets of one primitive.
    pub fn new(pipeline: &Pipeline, dem: &DetectorErrorModel) -> Result<Self> {
        if pipeline.num_detectors != dem.num_detectors || pipeline.num_observables != dem.num_observables {
            return Err(Error::InvalidPipeline(format!(
                "pipeline is for {} detectors / {} observables, model has {} / {}",
                pipeline.num_detectors, pipeline.num_observables, dem.num_detectors, dem.num_observables
            )));
        }
        let needs_rounds = pipeline.primitives.iter().any(|p| p.translatable);
        let map = if needs_rounds {
            Some(RoundMap::from_dem(dem)?)
        } else {
            None
        };
        let stages = pipeline
            .stages
            .iter()
            .map(|stage| {
                stage
                    .primitives
                    .iter()
                    .flat_map(|&i| {
                        let p = &pipeline.primitives[i];
                        instances(p, map.as_ref()).into_iter().map(move |detectors| Instance {
                            primitive: i,
                            detectors,
                            observables: p.observables.clone(),
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            stages,
            num_detectors: dem.num_detectors,
            num_observables: dem.num_observables,
        })
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn num_detectors(&self) -> usize {
        self.num_detectors
    }

    /// Applies the stages in order to a copy of `syndrome`.
    pub fn run(&self, syndrome: &[bool]) -> PredecodeOutcome {
        assert_eq!(syndrome.len(), self.num_detectors, "syndrome length");
        let mut residual = syndrome.to_vec();
        let mut flips = vec![false; self.num_observables];
        let mut fired = Vec::new();
        let mut per_stage = vec![0; self.stages.len()];
        if residual.iter().any(|&b| b) {
            for (k, stage) in self.stages.iter().enumerate() {
                for inst in stage {
                    if inst.detectors.iter().all(|&d| residual[d as usize]) {
                        for &d in &inst.detectors {
                            residual[d as usize] = false;
                        }
                        for &o in &inst.observables {
                            flips[o as usize] ^= true;
                        }
                        fired.push(inst.primitive);
                        per_stage[k] += 1;
                    }
                }
            }
        }
        PredecodeOutcome {
            fully_resolved: residual.iter().all(|&b| !b),
            residual_syndrome: residual,
            predicted_observable_flips: flips,
            fired_primitive_ids: fired,
            per_stage_fire_counts: per_stage,
        }
    }
}

/// Compiles and runs a pipeline on one syndrome.
pub fn run_predecoder(pipeline: &Pipeline, dem: &DetectorErrorModel, syndrome: &[bool]) -> Result<PredecodeOutcome> {
    if syndrome.len() != dem.num_detectors {
        return Err(Error::Dimension {
            expected: dem.num_detectors,
            actual: syndrome.len(),
        });
    }
    Ok(CompiledPipeline::new(pipeline, dem)?.run(syndrome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dem::parse_dem;
    use crate::pipeline::Stage;
    use crate::primitives::{Primitive, PrimitiveClass};

    fn time_like_model() -> DetectorErrorModel {
        // one check over three rounds
        parse_dem(
            "detector(0, 0) D0\ndetector(0, 1) D1\ndetector(0, 2) D2\nerror(0.01) D0 D1\nerror(0.01) D1 D2\nerror(0.01) D0 L0\n",
        )
        .unwrap()
    }

    fn pipeline(prims: Vec<Primitive>) -> Pipeline {
        let mut p = Pipeline::empty("t", "h", 3, 1);
        p.classes = vec![PrimitiveClass::TimeLike, PrimitiveClass::EdgeSpaceLike];
        for (i, prim) in prims.into_iter().enumerate() {
            p.stages.push(Stage {
                class: prim.class,
                primitives: vec![i],
            });
            p.primitives.push(prim);
        }
        p.cost = p.estimate_cost();
        p
    }

    fn time_like() -> Primitive {
        Primitive {
            class: PrimitiveClass::TimeLike,
            translatable: true,
            ..Primitive::new(vec![0, 1], vec![], 0.01)
        }
    }

    #[test]
    fn zero_syndrome_fires_nothing() {
        let dem = time_like_model();
        let out = run_predecoder(&pipeline(vec![time_like()]), &dem, &[false; 3]).unwrap();
        assert!(out.fully_resolved);
        assert!(out.fired_primitive_ids.is_empty());
        assert_eq!(out.predicted_observable_flips, vec![false]);
    }

    #[test]
    fn translated_instance_fires() {
        let dem = time_like_model();
        let out = run_predecoder(&pipeline(vec![time_like()]), &dem, &[false, true, true]).unwrap();
        assert!(out.fully_resolved);
        assert_eq!(out.fired_primitive_ids, vec![0]);
        assert_eq!(out.per_stage_fire_counts, vec![1]);
    }

    #[test]
    fn overlapping_offsets_resolve_lowest_first() {
        let dem = time_like_model();
        let out = run_predecoder(&pipeline(vec![time_like()]), &dem, &[true, true, true]).unwrap();
        assert!(!out.fully_resolved);
        assert_eq!(out.residual_syndrome, vec![false, false, true]);
    }

    #[test]
    fn observable_flips_accumulate() {
        let dem = time_like_model();
        let edge = Primitive {
            class: PrimitiveClass::EdgeSpaceLike,
            ..Primitive::new(vec![0], vec![0], 0.01)
        };
        let out = run_predecoder(&pipeline(vec![time_like(), edge]), &dem, &[true, false, false]).unwrap();
        assert!(out.fully_resolved);
        assert_eq!(out.predicted_observable_flips, vec![true]);
        assert_eq!(out.per_stage_fire_counts, vec![0, 1]);
    }
}
