//! Second-level decoding over the model's Tanner graph: min-sum belief
//! propagation, OSD-0 post-processing and an exhaustive maximum-likelihood
//! oracle for tiny models.

mod bp;
mod mle;
mod osd;

use crate::dem::DetectorErrorModel;
use crate::{Error, Real, Result};

pub use bp::{bp_decode, BpResult, MIN_SUM_SCALE};
pub use mle::{mle_brute_force, MLE_MAX_MECHANISMS};
pub use osd::osd0_postprocess;

/// Prior log-likelihood ratios are clamped to this magnitude.
pub const LLR_CLAMP: f64 = 30.0;

/// Default BP iteration budget: the decoding latency budget of `distance`
/// microseconds divided by the time per iteration.
pub fn default_bp_iters(distance: usize, ns_per_iter: usize) -> usize {
    (distance * 1000 / ns_per_iter.max(1)).max(1)
}

/// Bipartite graph with one check per detector and one variable per
/// mechanism.
#[derive(Debug, Clone, PartialEq)]
pub struct TannerGraph<T> {
    num_checks: usize,
    num_observables: usize,
    var_checks: Vec<Vec<u32>>,
    var_observables: Vec<Vec<u32>>,
    check_vars: Vec<Vec<u32>>,
    priors: Vec<T>,
}

impl<T: Real> TannerGraph<T> {
    pub fn from_dem(dem: &DetectorErrorModel) -> Self {
        Self::from_columns(
            dem.num_detectors,
            dem.num_observables,
            dem.mechanisms.iter().map(|m| m.detectors.clone()).collect(),
            dem.mechanisms.iter().map(|m| m.observables.clone()).collect(),
            &dem.mechanisms.iter().map(|m| m.probability).collect::<Vec<_>>(),
        )
    }

    /// Builds a graph from per-variable check and observable lists.
    pub fn from_columns(
        num_checks: usize,
        num_observables: usize,
        var_checks: Vec<Vec<u32>>,
        var_observables: Vec<Vec<u32>>,
        probabilities: &[f64],
    ) -> Self {
        let mut check_vars = vec![Vec::new(); num_checks];
        for (v, checks) in var_checks.iter().enumerate() {
            for &c in checks {
                check_vars[c as usize].push(v as u32);
            }
        }
        let priors = probabilities
            .iter()
            .map(|&p| T::from_f64_lossy(((1.0 - p) / p).ln().clamp(-LLR_CLAMP, LLR_CLAMP)))
            .collect();
        Self {
            num_checks,
            num_observables,
            var_checks,
            var_observables,
            check_vars,
            priors,
        }
    }

    pub fn num_checks(&self) -> usize {
        self.num_checks
    }

    pub fn num_vars(&self) -> usize {
        self.var_checks.len()
    }

    pub fn num_observables(&self) -> usize {
        self.num_observables
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    pub fn checks_of(&self, var: usize) -> &[u32] {
        &self.var_checks[var]
    }

    pub(crate) fn vars_of(&self, check: usize) -> &[u32] {
        &self.check_vars[check]
    }

    /// `H · e` over GF(2).
    pub fn syndrome_of(&self, flags: &[bool]) -> Vec<bool> {
        let mut s = vec![false; self.num_checks];
        for (v, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
            for &c in &self.var_checks[v] {
                s[c as usize] ^= true;
            }
        }
        s
    }

    /// XOR of the observable stamps of the flagged variables.
    pub fn observables_of(&self, flags: &[bool]) -> Vec<bool> {
        let mut o = vec![false; self.num_observables];
        for (v, _) in flags.iter().enumerate().filter(|(_, &f)| f) {
            for &j in &self.var_observables[v] {
                o[j as usize] ^= true;
            }
        }
        o
    }

    pub(crate) fn check_syndrome_len(&self, syndrome: &[bool]) -> Result<()> {
        if syndrome.len() == self.num_checks {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.num_checks,
                actual: syndrome.len(),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Correction {
    pub mechanisms_flagged: Vec<bool>,
    pub observable_flips: Vec<bool>,
    /// Whether the flagged mechanisms reproduce the syndrome.
    pub valid: bool,
}

impl Correction {
    pub fn from_flags<T: Real>(graph: &TannerGraph<T>, flags: Vec<bool>, syndrome: &[bool]) -> Self {
        let valid = graph.syndrome_of(&flags) == syndrome;
        Self {
            observable_flips: graph.observables_of(&flags),
            mechanisms_flagged: flags,
            valid,
        }
    }
}

/// BP, then OSD-0 on the final marginals if BP did not converge. The flag
/// reports whether OSD ran.
pub fn bposd_decode<T: Real>(graph: &TannerGraph<T>, syndrome: &[bool], max_iters: usize) -> Result<(Correction, bool)> {
    let bp = bp_decode(graph, syndrome, max_iters)?;
    if bp.converged {
        Ok((Correction::from_flags(graph, bp.hard_decision, syndrome), false))
    } else {
        Ok((osd0_postprocess(graph, syndrome, &bp.marginals)?, true))
    }
}

/// A Tanner graph paired with an iteration budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BpOsdDecoder<T> {
    pub graph: TannerGraph<T>,
    pub max_iters: usize,
}

impl<T: Real> BpOsdDecoder<T> {
    pub fn new(dem: &DetectorErrorModel, max_iters: usize) -> Self {
        Self {
            graph: TannerGraph::from_dem(dem),
            max_iters,
        }
    }

    pub fn decode(&self, syndrome: &[bool]) -> Result<(Correction, bool)> {
        bposd_decode(&self.graph, syndrome, self.max_iters)
    }
}
