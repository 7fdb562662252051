use super::{TannerGraph, LLR_CLAMP};
use crate::{Error, Real, Result};

/// Scaling applied to every check-to-variable message.
pub const MIN_SUM_SCALE: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct BpResult<T> {
    pub converged: bool,
    pub iterations_used: usize,
    /// `true` where the posterior LLR is negative.
    pub hard_decision: Vec<bool>,
    /// Posterior LLRs after the last iteration.
    pub marginals: Vec<T>,
}

/// Scaled min-sum BP with a flooding schedule.
///
/// The hard decision is tested against the syndrome after every iteration;
/// an LLR of exactly zero decodes to 0.
pub fn bp_decode<T: Real>(graph: &TannerGraph<T>, syndrome: &[bool], max_iters: usize) -> Result<BpResult<T>> {
    graph.check_syndrome_len(syndrome)?;
    if max_iters == 0 {
        return Err(Error::InvalidArgument("BP needs at least one iteration".into()));
    }
    let n = graph.num_vars();
    let scale = T::from_f64_lossy(MIN_SUM_SCALE);
    let cap = T::from_f64_lossy(LLR_CLAMP);

    // edge e joins var edge_var[e] to the check it is listed under
    let mut var_edges: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut check_edges: Vec<Vec<usize>> = Vec::with_capacity(graph.num_checks());
    let mut edge_var: Vec<usize> = Vec::new();
    for c in 0..graph.num_checks() {
        let mut edges = Vec::with_capacity(graph.vars_of(c).len());
        for &v in graph.vars_of(c) {
            let e = edge_var.len();
            edge_var.push(v as usize);
            var_edges[v as usize].push(e);
            edges.push(e);
        }
        check_edges.push(edges);
    }
    let mut q: Vec<T> = edge_var.iter().map(|&v| graph.priors()[v]).collect();
    let mut r: Vec<T> = vec![T::zero(); q.len()];
    let mut posterior: Vec<T> = graph.priors().to_vec();
    let mut decision = vec![false; n];

    for iter in 1..=max_iters {
        for (c, edges) in check_edges.iter().enumerate() {
            let mut negative = syndrome[c];
            let (mut min1, mut min2, mut arg) = (cap, cap, usize::MAX);
            for &e in edges {
                negative ^= q[e] < T::zero();
                let m = q[e].abs();
                if m < min1 {
                    min2 = min1;
                    min1 = m;
                    arg = e;
                } else if m < min2 {
                    min2 = m;
                }
            }
            for &e in edges {
                let own_negative = q[e] < T::zero();
                let mag = if e == arg { min2 } else { min1 } * scale;
                r[e] = if negative ^ own_negative { -mag } else { mag };
            }
        }
        for v in 0..n {
            let total = var_edges[v].iter().fold(graph.priors()[v], |acc, &e| acc + r[e]);
            posterior[v] = total;
            decision[v] = total < T::zero();
            for &e in &var_edges[v] {
                q[e] = total - r[e];
            }
        }
        if graph.syndrome_of(&decision) == syndrome {
            return Ok(BpResult {
                converged: true,
                iterations_used: iter,
                hard_decision: decision,
                marginals: posterior,
            });
        }
    }
    Ok(BpResult {
        converged: false,
        iterations_used: max_iters,
        hard_decision: decision,
        marginals: posterior,
    })
}
