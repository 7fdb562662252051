use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::graph::ConflictGraph;
use crate::Error;

/// Color assignment over the local nodes of a [`ConflictGraph`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub assignment: Vec<usize>,
    pub num_colors: usize,
    /// Heuristic name, `"exact"` or `"hybrid-fallback"`.
    pub method: String,
}

impl Coloring {
    fn from_assignment(assignment: Vec<usize>, method: impl Into<String>) -> Self {
        let num_colors = assignment.iter().map(|&c| c + 1).max().unwrap_or(0);
        Self {
            assignment,
            num_colors,
            method: method.into(),
        }
    }

    /// Local nodes grouped by color, color 0 first, ascending within a group.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.num_colors];
        for (v, &c) in self.assignment.iter().enumerate() {
            groups[c].push(v);
        }
        groups
    }
}

/// Checks properness and contiguity of `coloring` against `graph`.
pub fn validate_coloring(graph: &ConflictGraph, coloring: &Coloring) -> Result<(), String> {
    if coloring.assignment.len() != graph.len() {
        return Err(format!(
            "coloring covers {} nodes, graph has {}",
            coloring.assignment.len(),
            graph.len()
        ));
    }
    let mut used = vec![false; coloring.num_colors];
    for (v, &c) in coloring.assignment.iter().enumerate() {
        if c >= coloring.num_colors {
            return Err(format!("node {v} has color {c} >= {}", coloring.num_colors));
        }
        used[c] = true;
        if let Some(&u) = graph.neighbors(v).iter().find(|&&u| coloring.assignment[u] == c) {
            return Err(format!("adjacent nodes {v} and {u} share color {c}"));
        }
    }
    match used.iter().position(|u| !u) {
        Some(c) => Err(format!("color {c} is unused")),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    LargestFirst,
    SmallestLast,
    Dsatur,
    RandomSequential(u64),
    ConnectedSequential,
    IndependentSet,
}

impl Heuristic {
    /// Every heuristic, random-sequential using `seed`.
    pub fn suite(seed: u64) -> [Heuristic; 6] {
        [
            Heuristic::LargestFirst,
            Heuristic::SmallestLast,
            Heuristic::Dsatur,
            Heuristic::RandomSequential(seed),
            Heuristic::ConnectedSequential,
            Heuristic::IndependentSet,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            Heuristic::LargestFirst => "largest-first",
            Heuristic::SmallestLast => "smallest-last",
            Heuristic::Dsatur => "dsatur",
            Heuristic::RandomSequential(_) => "random-sequential",
            Heuristic::ConnectedSequential => "connected-sequential",
            Heuristic::IndependentSet => "independent-set",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Heuristic::RandomSequential(seed) => write!(f, "random-sequential({seed})"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if let Some(seed) = s.strip_prefix("random-sequential(").and_then(|r| r.strip_suffix(')')) {
            let seed = seed
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad seed in '{s}'")))?;
            return Ok(Heuristic::RandomSequential(seed));
        }
        Heuristic::suite(0)
            .into_iter()
            .find(|h| h.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown heuristic '{s}'")))
    }
}

/// Colors `graph` greedily with the given heuristic. Deterministic.
pub fn greedy_color(graph: &ConflictGraph, heuristic: Heuristic) -> Coloring {
    let n = graph.len();
    let assignment = match heuristic {
        Heuristic::LargestFirst => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
            sequential(graph, &order)
        }
        Heuristic::SmallestLast => sequential(graph, &smallest_last_order(graph)),
        Heuristic::Dsatur => dsatur(graph),
        Heuristic::RandomSequential(seed) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            sequential(graph, &order)
        }
        Heuristic::ConnectedSequential => sequential(graph, &bfs_order(graph)),
        Heuristic::IndependentSet => independent_sets(graph),
    };
    Coloring::from_assignment(assignment, heuristic.name())
}

/// First-fit coloring in the given order.
fn sequential(graph: &ConflictGraph, order: &[usize]) -> Vec<usize> {
    let mut color = vec![usize::MAX; graph.len()];
    let mut taken = Vec::new();
    for &v in order {
        taken.clear();
        taken.resize(graph.degree(v) + 1, false);
        for &u in graph.neighbors(v) {
            if color[u] < taken.len() {
                taken[color[u]] = true;
            }
        }
        color[v] = taken.iter().position(|t| !t).expect("degree + 1 slots");
    }
    color
}

fn smallest_last_order(graph: &ConflictGraph) -> Vec<usize> {
    let n = graph.len();
    let mut degree: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("nodes remain");
        removed[v] = true;
        order.push(v);
        for &u in graph.neighbors(v) {
            if !removed[u] {
                degree[u] -= 1;
            }
        }
    }
    order.reverse();
    order
}

fn bfs_order(graph: &ConflictGraph) -> Vec<usize> {
    let n = graph.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &u in graph.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    order
}

fn dsatur(graph: &ConflictGraph) -> Vec<usize> {
    let n = graph.len();
    let mut color = vec![usize::MAX; n];
    let mut neighbor_colors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| color[v] == usize::MAX)
            .max_by_key(|&v| (neighbor_colors[v].len(), graph.degree(v), std::cmp::Reverse(v)))
            .expect("uncolored node remains");
        let c = (0..).find(|c| neighbor_colors[v].binary_search(c).is_err()).expect("free color");
        color[v] = c;
        for &u in graph.neighbors(v) {
            if let Err(pos) = neighbor_colors[u].binary_search(&c) {
                neighbor_colors[u].insert(pos, c);
            }
        }
    }
    color
}

/// Peels off one maximal independent set per color, each built by picking
/// the minimum-degree node of the remaining candidate subgraph.
fn independent_sets(graph: &ConflictGraph) -> Vec<usize> {
    let n = graph.len();
    let mut color = vec![usize::MAX; n];
    let mut c = 0;
    let mut left = n;
    while left > 0 {
        let mut candidate: Vec<bool> = (0..n).map(|v| color[v] == usize::MAX).collect();
        loop {
            let pick = (0..n).filter(|&v| candidate[v]).min_by_key(|&v| {
                let d = graph.neighbors(v).iter().filter(|&&u| candidate[u]).count();
                (d, v)
            });
            let Some(v) = pick else { break };
            color[v] = c;
            left -= 1;
            candidate[v] = false;
            for &u in graph.neighbors(v) {
                candidate[u] = false;
            }
        }
        c += 1;
    }
    color
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactOutcome {
    Found(Coloring),
    /// No proper coloring with the requested number of colors exists.
    Exhausted,
    /// The search ran out of time; nothing is known.
    Timeout,
}

/// Largest color count the exact search handles.
pub const MAX_EXACT_COLORS: usize = 128;

/// Backtracking search for a proper `k`-coloring.
///
/// Nodes are chosen by smallest remaining domain (highest saturation), then
/// degree. A largest known clique is pre-colored `0..|clique|`, every known
/// clique is checked for having enough free colors, and a node may only open
/// the next unused color. Requests with `k` above [`MAX_EXACT_COLORS`] report
/// a timeout.
pub fn exact_color(graph: &ConflictGraph, k: usize, timeout: Duration) -> ExactOutcome {
    let start = Instant::now();
    if timeout.is_zero() || k > MAX_EXACT_COLORS {
        return ExactOutcome::Timeout;
    }
    let n = graph.len();
    if n == 0 {
        return ExactOutcome::Found(Coloring::from_assignment(Vec::new(), "exact"));
    }
    if k < graph.omega_lb || k == 0 {
        return ExactOutcome::Exhausted;
    }
    let mut search = Search::new(graph, k, start + timeout);
    if let Some(clique) = graph.cliques.first() {
        for (c, &v) in clique.iter().enumerate() {
            if !search.assign(v, c) {
                return ExactOutcome::Exhausted;
            }
        }
    }
    match search.run() {
        Some(true) => ExactOutcome::Found(Coloring::from_assignment(search.color, "exact")),
        Some(false) => ExactOutcome::Exhausted,
        None => ExactOutcome::Timeout,
    }
}

struct Search<'a> {
    graph: &'a ConflictGraph,
    k: usize,
    deadline: Instant,
    color: Vec<usize>,
    domain: Vec<u128>,
    /// Cliques each node belongs to.
    memberships: Vec<Vec<usize>>,
    trail: Vec<(usize, u128)>,
    max_used: usize,
    nodes_visited: u64,
}

impl<'a> Search<'a> {
    fn new(graph: &'a ConflictGraph, k: usize, deadline: Instant) -> Self {
        let full = if k == 128 { u128::MAX } else { (1u128 << k) - 1 };
        let mut memberships = vec![Vec::new(); graph.len()];
        for (i, clique) in graph.cliques.iter().enumerate() {
            for &v in clique {
                memberships[v].push(i);
            }
        }
        Self {
            graph,
            k,
            deadline,
            color: vec![usize::MAX; graph.len()],
            domain: vec![full; graph.len()],
            memberships,
            trail: Vec::new(),
            max_used: 0,
            nodes_visited: 0,
        }
    }

    /// Colors `v` and prunes neighbor domains; false on a wipe-out or a clique
    /// with fewer free colors than uncolored members. Changes are trailed.
    fn assign(&mut self, v: usize, c: usize) -> bool {
        self.color[v] = c;
        self.max_used = self.max_used.max(c + 1);
        let bit = 1u128 << c;
        for &u in self.graph.neighbors(v) {
            if self.domain[u] & bit != 0 {
                self.trail.push((u, self.domain[u]));
                self.domain[u] &= !bit;
                if self.color[u] == usize::MAX && self.domain[u] == 0 {
                    return false;
                }
            }
        }
        for &ci in &self.memberships[v] {
            let mut open = 0usize;
            let mut free = 0u128;
            for &u in &self.graph.cliques[ci] {
                if self.color[u] == usize::MAX {
                    open += 1;
                    free |= self.domain[u];
                }
            }
            if open > free.count_ones() as usize {
                return false;
            }
        }
        true
    }

    fn undo(&mut self, v: usize, mark: usize, max_used: usize) {
        while self.trail.len() > mark {
            let (u, d) = self.trail.pop().expect("trail above mark");
            self.domain[u] = d;
        }
        self.color[v] = usize::MAX;
        self.max_used = max_used;
    }

    /// `Some(true)` found, `Some(false)` exhausted, `None` timed out.
    fn run(&mut self) -> Option<bool> {
        self.nodes_visited += 1;
        if self.nodes_visited.is_multiple_of(1024) && Instant::now() >= self.deadline {
            return None;
        }
        let pick = (0..self.graph.len())
            .filter(|&v| self.color[v] == usize::MAX)
            .min_by_key(|&v| {
                (
                    self.domain[v].count_ones(),
                    std::cmp::Reverse(self.graph.degree(v)),
                    v,
                )
            });
        let Some(v) = pick else { return Some(true) };
        let limit = (self.max_used + 1).min(self.k);
        for c in 0..limit {
            if self.domain[v] & (1u128 << c) == 0 {
                continue;
            }
            let mark = self.trail.len();
            let max_used = self.max_used;
            if self.assign(v, c) {
                match self.run() {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => {}
                }
            }
            self.undo(v, mark, max_used);
        }
        Some(false)
    }
}

/// Exact search escalating from the clique bound up to the best greedy
/// count within `timeout`; on timeout, the best greedy coloring tagged
/// `"hybrid-fallback"`. Never uses more colors than the best heuristic.
pub fn hybrid_color(graph: &ConflictGraph, timeout: Duration, seed: u64) -> Coloring {
    let start = Instant::now();
    let best = Heuristic::suite(seed)
        .into_iter()
        .map(|h| greedy_color(graph, h))
        .min_by_key(|c| c.num_colors)
        .expect("suite is non-empty");
    let mut k = graph.omega_lb;
    while k <= best.num_colors {
        let left = timeout.saturating_sub(start.elapsed());
        match exact_color(graph, k, left) {
            ExactOutcome::Found(c) => return c,
            ExactOutcome::Exhausted => k += 1,
            ExactOutcome::Timeout => break,
        }
    }
    log::info!(
        "exact coloring gave up at k={k} after {:?}; using {} ({} colors)",
        start.elapsed(),
        best.method,
        best.num_colors
    );
    Coloring {
        method: "hybrid-fallback".into(),
        ..best
    }
}
