//! Brute-force reference implementations shared by the integration and
//! acceptance suites.
#![allow(dead_code)]

use qpredec::primitives::{Primitive, PrimitiveSet};

/// Chromatic number by exhaustive assignment (each node takes an already
/// used color or the next new one).
pub fn chromatic_number(n: usize, edges: &[(usize, usize)]) -> usize {
    fn go(v: usize, colors: &mut Vec<usize>, used: usize, best: &mut usize, adj: &[Vec<bool>]) {
        if used >= *best {
            return;
        }
        if v == adj.len() {
            *best = used;
            return;
        }
        for c in 0..=used {
            if (0..v).all(|u| !(adj[v][u] && colors[u] == c)) {
                colors.push(c);
                go(v + 1, colors, used.max(c + 1), best, adj);
                colors.pop();
            }
        }
    }
    if n == 0 {
        return 0;
    }
    let mut adj = vec![vec![false; n]; n];
    for &(u, v) in edges {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    let mut best = n;
    go(0, &mut Vec::new(), 0, &mut best, &adj);
    best
}

pub fn key(p: &Primitive) -> (Vec<u32>, Vec<u32>) {
    (p.syndrome.clone(), p.observables.clone())
}

fn xor(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = a.iter().filter(|x| !b.contains(x)).copied().collect();
    out.extend(b.iter().filter(|x| !a.contains(x)));
    out.sort_unstable();
    out
}

/// Whether `target` is an exact disjoint union of members of `pool`, with
/// XOR-matching observables. No bound on cover size or pool size.
pub fn has_cover(target: &Primitive, pool: &[&Primitive]) -> bool {
    fn go(left: &[u32], obs: &[u32], want: &[u32], pool: &[&Primitive]) -> bool {
        let Some(&first) = left.first() else {
            return obs == want;
        };
        pool.iter().any(|c| {
            c.syndrome.contains(&first)
                && c.syndrome.iter().all(|d| left.contains(d))
                && go(
                    &left.iter().filter(|d| !c.syndrome.contains(d)).copied().collect::<Vec<_>>(),
                    &xor(obs, &c.observables),
                    want,
                    pool,
                )
        })
    }
    go(&target.syndrome, &[], &target.observables, pool)
}

/// Removal decisions of an uncapped composite pruner: every target is judged
/// against the full input set. Sorted `(S, O)` keys.
pub fn removed_composites(set: &PrimitiveSet) -> Vec<(Vec<u32>, Vec<u32>)> {
    let mut removed: Vec<_> = set
        .primitives
        .iter()
        .filter(|t| {
            let pool: Vec<&Primitive> = set
                .primitives
                .iter()
                .filter(|c| c.syndrome.len() < t.syndrome.len() && c.syndrome.iter().all(|d| t.syndrome.contains(d)))
                .collect();
            has_cover(t, &pool)
        })
        .map(key)
        .collect();
    removed.sort();
    removed
}
