use std::collections::{BTreeSet, HashMap};

/// Conflict graph over the primitives of one class.
///
/// Nodes are local indices `0..len()`; `nodes[i]` is the primitive id behind
/// local node `i`. Two nodes are adjacent iff their detector sets intersect.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    pub nodes: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    /// Known cliques (sorted local indices), largest first.
    pub cliques: Vec<Vec<usize>>,
    /// Size of the largest known clique; a lower bound on the chromatic number.
    pub omega_lb: usize,
    /// Whether maximal-clique enumeration stopped at its cap.
    pub clique_cap_hit: bool,
}

/// Upper bound on enumerated maximal cliques.
pub const MAX_ENUMERATED_CLIQUES: usize = 10_000;

impl ConflictGraph {
    /// Builds the graph from one detector set per node. Cliques come from
    /// per-detector groups and from a capped Bron-Kerbosch enumeration.
    pub fn from_sets(nodes: Vec<usize>, sets: &[Vec<u32>]) -> Self {
        assert_eq!(nodes.len(), sets.len());
        let mut groups: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, s) in sets.iter().enumerate() {
            for &d in s {
                groups.entry(d).or_default().push(i);
            }
        }
        let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nodes.len()];
        for group in groups.values() {
            for (a, &u) in group.iter().enumerate() {
                for &v in &group[a + 1..] {
                    adjacency[u].insert(v);
                    adjacency[v].insert(u);
                }
            }
        }
        let mut seeds: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() >= 2).collect();
        for g in &mut seeds {
            g.sort_unstable();
        }
        Self::finish(nodes, adjacency.into_iter().map(|a| a.into_iter().collect()).collect(), seeds)
    }

    /// Builds a graph from an explicit edge list over `n` nodes; node ids are
    /// `0..n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u != v {
                adjacency[u].insert(v);
                adjacency[v].insert(u);
            }
        }
        Self::finish(
            (0..n).collect(),
            adjacency.into_iter().map(|a| a.into_iter().collect()).collect(),
            Vec::new(),
        )
    }

    fn finish(nodes: Vec<usize>, adjacency: Vec<Vec<usize>>, seeds: Vec<Vec<usize>>) -> Self {
        let mut graph = Self {
            nodes,
            adjacency,
            cliques: Vec::new(),
            omega_lb: 0,
            clique_cap_hit: false,
        };
        let (mut cliques, capped) = graph.maximal_cliques(MAX_ENUMERATED_CLIQUES);
        cliques.extend(seeds);
        cliques.retain(|c| c.len() >= 2);
        cliques.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        cliques.dedup();
        graph.omega_lb = match cliques.first() {
            Some(c) => c.len(),
            None => usize::from(!graph.nodes.is_empty()),
        };
        graph.cliques = cliques;
        graph.clique_cap_hit = capped;
        graph
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Maximal cliques by Bron-Kerbosch with Tomita pivoting, stopping after
    /// `cap` cliques. The flag reports whether the cap was reached.
    pub fn maximal_cliques(&self, cap: usize) -> (Vec<Vec<usize>>, bool) {
        let mut out = Vec::new();
        let mut r = Vec::new();
        let p: Vec<usize> = (0..self.len()).collect();
        let capped = self.bron_kerbosch(&mut r, p, Vec::new(), cap, &mut out);
        (out, capped)
    }

    fn bron_kerbosch(
        &self,
        r: &mut Vec<usize>,
        p: Vec<usize>,
        mut x: Vec<usize>,
        cap: usize,
        out: &mut Vec<Vec<usize>>,
    ) -> bool {
        if p.is_empty() && x.is_empty() {
            let mut clique = r.clone();
            clique.sort_unstable();
            out.push(clique);
            return out.len() >= cap;
        }
        let pivot = p
            .iter()
            .chain(&x)
            .copied()
            .max_by_key(|&u| (p.iter().filter(|&&v| self.has_edge(u, v)).count(), std::cmp::Reverse(u)))
            .expect("p or x non-empty");
        let mut p_rest = p.clone();
        for v in p.into_iter().filter(|&v| !self.has_edge(pivot, v)) {
            let p_next: Vec<usize> = p_rest.iter().copied().filter(|&w| self.has_edge(v, w)).collect();
            let x_next: Vec<usize> = x.iter().copied().filter(|&w| self.has_edge(v, w)).collect();
            r.push(v);
            let stop = self.bron_kerbosch(r, p_next, x_next, cap, out);
            r.pop();
            if stop {
                return true;
            }
            p_rest.retain(|&w| w != v);
            x.push(v);
        }
        false
    }
}
