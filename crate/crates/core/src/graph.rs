//! Undirected network topologies over agents `0..n`.

use std::collections::VecDeque;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Number of Erdos-Renyi samples drawn before giving up on connectivity.
pub const ER_MAX_ATTEMPTS: usize = 100;

/// Simple undirected graph. Edges are stored as `(low, high)` pairs in
/// lexicographic order and adjacency lists are sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_agents: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an edge list. Rejects self-loops, duplicate
    /// edges and out-of-range endpoints. Connectivity is not required here;
    /// the generators below enforce it.
    pub fn from_edges(
        n_agents: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::InvalidTopology(
                "graph needs at least one agent".into(),
            ));
        }
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidTopology(format!("self-loop at agent {a}")));
            }
            if a >= n_agents || b >= n_agents {
                return Err(Error::InvalidTopology(format!(
                    "edge ({a}, {b}) out of range for {n_agents} agents"
                )));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidTopology(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut adjacency = vec![Vec::new(); n_agents];
        for &(a, b) in &normalized {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            n_agents,
            edges: normalized,
            adjacency,
        })
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidTopology(format!(
                "cycle needs n >= 3, got {n}"
            )));
        }
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidTopology(format!(
                "complete graph needs n >= 2, got {n}"
            )));
        }
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// G(n, p) conditioned on connectivity by rejection: up to
    /// [`ER_MAX_ATTEMPTS`] samples are drawn from one RNG stream seeded by
    /// `seed`; the first connected one is returned.
    pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Self> {
        Ok(Self::erdos_renyi_with_attempts(n, p, seed)?.0)
    }

    /// Like [`Graph::erdos_renyi`], also returning how many samples were drawn.
    pub fn erdos_renyi_with_attempts(n: usize, p: f64, seed: u64) -> Result<(Self, usize)> {
        if n < 2 {
            return Err(Error::InvalidTopology(format!(
                "Erdos-Renyi needs n >= 2, got {n}"
            )));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidTopology(format!(
                "edge probability must be in (0, 1], got {p}"
            )));
        }
        let mut rng = rng_from_seed(seed);
        for attempt in 1..=ER_MAX_ATTEMPTS {
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random::<f64>() < p {
                        edges.push((i, j));
                    }
                }
            }
            let g = Self::from_edges(n, edges)?;
            if g.is_connected() {
                return Ok((g, attempt));
            }
        }
        Err(Error::NotConnected {
            n,
            p,
            attempts: ER_MAX_ATTEMPTS,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, agent: usize) -> &[usize] {
        &self.adjacency[agent]
    }

    pub fn degree(&self, agent: usize) -> usize {
        self.adjacency[agent].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency
            .get(a)
            .is_some_and(|list| list.binary_search(&b).is_ok())
    }

    /// BFS from agent 0.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n_agents];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        reached == self.n_agents
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_cycle() {
        let g = Graph::cycle(3).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        assert_eq!(g.degrees(), vec![2, 2, 2]);
    }

    #[test]
    fn cycle_shapes() {
        let g = Graph::cycle(4).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(g.degrees().iter().all(|&d| d == 2));
        let g = Graph::cycle(20).unwrap();
        assert_eq!(g.edge_count(), 20);
        assert!(g.is_connected());
        assert!(matches!(Graph::cycle(2), Err(Error::InvalidTopology(_))));
    }

    #[test]
    fn complete_counts() {
        assert_eq!(Graph::complete(2).unwrap().edge_count(), 1);
        let g = Graph::complete(4).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert_eq!(Graph::complete(20).unwrap().edge_count(), 190);
        assert!(Graph::complete(1).is_err());
    }

    #[test]
    fn connectivity() {
        assert!(Graph::cycle(5).unwrap().is_connected());
        assert!(Graph::complete(3).unwrap().is_connected());
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert!(!split.is_connected());
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(Graph::from_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
    }

    #[test]
    fn er_full_probability_is_complete() {
        for seed in [0, 7, 12345] {
            assert_eq!(
                Graph::erdos_renyi(20, 1.0, seed).unwrap(),
                Graph::complete(20).unwrap()
            );
        }
    }

    #[test]
    fn er_is_reproducible_and_connected() {
        let a = Graph::erdos_renyi(20, 0.3, 7).unwrap();
        let b = Graph::erdos_renyi(20, 0.3, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.is_connected());
        // roughly p * n(n-1)/2 = 57 edges
        assert!(
            a.edge_count() > 20 && a.edge_count() < 120,
            "{}",
            a.edge_count()
        );
    }

    #[test]
    fn er_sparse_either_connects_or_reports() {
        match Graph::erdos_renyi_with_attempts(20, 0.1, 7) {
            Ok((g, attempts)) => {
                assert!(g.is_connected());
                assert!((1..=ER_MAX_ATTEMPTS).contains(&attempts));
            }
            Err(Error::NotConnected { attempts, .. }) => assert_eq!(attempts, ER_MAX_ATTEMPTS),
            Err(e) => panic!("unexpected error {e}"),
        }
        // far below the connectivity threshold: always exhausts the budget
        assert!(matches!(
            Graph::erdos_renyi(50, 0.001, 3),
            Err(Error::NotConnected { .. })
        ));
    }

    #[test]
    fn er_rejects_bad_probability() {
        assert!(Graph::erdos_renyi(5, 0.0, 1).is_err());
        assert!(Graph::erdos_renyi(5, 1.5, 1).is_err());
        assert!(Graph::erdos_renyi(1, 0.5, 1).is_err());
    }
}
