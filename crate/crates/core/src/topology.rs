//! EPR graphs, spanning EPR trees and entangled hypergraphs.
//!
//! All choices that the combinatorics leaves open are made deterministically:
//! breadth-first search starts at agent 1 and visits neighbors in increasing
//! index, Kruskal breaks weight ties by lexicographic edge order, and the
//! hyperedge merge order follows the sorted hyperedge list.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Agent index, dense in `1..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{}", self.0)
    }
}

pub(crate) fn agents(n: u32) -> impl Iterator<Item = AgentId> {
    (1..=n).map(AgentId)
}

fn ordered(a: AgentId, b: AgentId) -> (AgentId, AgentId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("a network needs at least one agent")]
    NoAgents,
    #[error("agent {agent} is outside 1..={n}")]
    AgentOutOfRange { agent: u32, n: u32 },
    #[error("self-loop at {0}")]
    SelfLoop(AgentId),
    #[error("duplicate EPR pair between {0} and {1}")]
    DuplicateEdge(AgentId, AgentId),
    #[error("edge ({a}, {b}) has invalid weight {weight}")]
    InvalidWeight { a: AgentId, b: AgentId, weight: f64 },
    #[error("hyperedge #{index} has {size} member(s); at least 2 are required")]
    HyperedgeTooSmall { index: usize, size: usize },
    #[error("hyperedge #{index} lists {agent} twice")]
    DuplicateMember { index: usize, agent: AgentId },
    #[error("hyperedge #{index} repeats hyperedge #{first}")]
    DuplicateHyperedge { index: usize, first: usize },
    #[error("hypergraph has no hyperedges")]
    EmptyHypergraph,
    #[error("a spanning tree needs at least 2 agents, got {0}")]
    TooFewAgents(u32),
    #[error("edge set is not a spanning tree on {n} agents")]
    NotATree { n: u32 },
    #[error(
        "{a} and {b} are not connected; a pure n-partite maximally entangled state \
         can be prepared by LOCC if and only if the {structure} is connected"
    )]
    Disconnected {
        a: AgentId,
        b: AgentId,
        structure: &'static str,
    },
}

pub type Result<T, E = TopologyError> = std::result::Result<T, E>;

fn check_agent(n: u32, a: u32) -> Result<AgentId> {
    if a == 0 || a > n {
        Err(TopologyError::AgentOutOfRange { agent: a, n })
    } else {
        Ok(AgentId(a))
    }
}

/// Breadth-first reachability over an adjacency map; returns the first
/// unreachable agent from agent 1, if any.
fn first_unreachable(n: u32, adj: &BTreeMap<AgentId, BTreeSet<AgentId>>) -> Option<AgentId> {
    let mut seen = BTreeSet::from([AgentId(1)]);
    let mut queue = VecDeque::from([AgentId(1)]);
    while let Some(a) = queue.pop_front() {
        for &b in adj.get(&a).into_iter().flatten() {
            if seen.insert(b) {
                queue.push_back(b);
            }
        }
    }
    agents(n).find(|a| !seen.contains(a))
}

/// Agents joined by an edge share one EPR pair; optional weights price each pair.
#[derive(Clone, Debug, PartialEq)]
pub struct EprGraph {
    n: u32,
    edges: BTreeMap<(AgentId, AgentId), Option<f64>>,
}

impl EprGraph {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(TopologyError::NoAgents);
        }
        Ok(Self {
            n,
            edges: BTreeMap::new(),
        })
    }

    pub fn from_edges(n: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let mut g = Self::new(n)?;
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    fn insert(&mut self, a: u32, b: u32, weight: Option<f64>) -> Result<()> {
        let a = check_agent(self.n, a)?;
        let b = check_agent(self.n, b)?;
        if a == b {
            return Err(TopologyError::SelfLoop(a));
        }
        let key = ordered(a, b);
        if let Some(w) = weight {
            if !w.is_finite() || w < 0.0 {
                return Err(TopologyError::InvalidWeight {
                    a: key.0,
                    b: key.1,
                    weight: w,
                });
            }
        }
        if self.edges.contains_key(&key) {
            return Err(TopologyError::DuplicateEdge(key.0, key.1));
        }
        self.edges.insert(key, weight);
        Ok(())
    }

    pub fn add_edge(&mut self, a: u32, b: u32) -> Result<()> {
        self.insert(a, b, None)
    }

    pub fn add_weighted_edge(&mut self, a: u32, b: u32, weight: f64) -> Result<()> {
        self.insert(a, b, Some(weight))
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Edges as ordered pairs `(a, b)` with `a < b`, lexicographically sorted.
    pub fn edges(&self) -> impl Iterator<Item = (AgentId, AgentId)> + '_ {
        self.edges.keys().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: AgentId, b: AgentId) -> bool {
        self.edges.contains_key(&ordered(a, b))
    }

    /// Explicit weight of an edge, if one was given.
    pub fn explicit_weight(&self, a: AgentId, b: AgentId) -> Option<f64> {
        self.edges.get(&ordered(a, b)).copied().flatten()
    }

    /// Edge weight; a missing weight counts as 1.
    pub fn weight(&self, a: AgentId, b: AgentId) -> f64 {
        self.explicit_weight(a, b).unwrap_or(1.0)
    }

    pub fn has_weights(&self) -> bool {
        self.edges.values().any(Option::is_some)
    }

    fn adjacency(&self) -> BTreeMap<AgentId, BTreeSet<AgentId>> {
        let mut adj: BTreeMap<AgentId, BTreeSet<AgentId>> = BTreeMap::new();
        for (a, b) in self.edges() {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }

    pub fn neighbors(&self, a: AgentId) -> Vec<AgentId> {
        self.adjacency()
            .remove(&a)
            .map(|s| s.into_iter().collect())
            .unwrap_or_default()
    }

    pub fn is_connected(&self) -> bool {
        first_unreachable(self.n, &self.adjacency()).is_none()
    }

    fn require_connected(&self) -> Result<()> {
        match first_unreachable(self.n, &self.adjacency()) {
            None => Ok(()),
            Some(b) => Err(TopologyError::Disconnected {
                a: AgentId(1),
                b,
                structure: "EPR graph",
            }),
        }
    }

    /// Breadth-first spanning tree rooted at agent 1.
    pub fn spanning_tree(&self) -> Result<SpanningTree> {
        if self.n < 2 {
            return Err(TopologyError::TooFewAgents(self.n));
        }
        self.require_connected()?;
        let adj = self.adjacency();
        let mut seen = BTreeSet::from([AgentId(1)]);
        let mut queue = VecDeque::from([AgentId(1)]);
        let mut edges = Vec::with_capacity(self.n as usize - 1);
        while let Some(a) = queue.pop_front() {
            for &b in adj.get(&a).into_iter().flatten() {
                if seen.insert(b) {
                    edges.push(ordered(a, b));
                    queue.push_back(b);
                }
            }
        }
        SpanningTree::from_edge_list(self.n, edges)
    }

    /// Kruskal's algorithm over `(weight, a, b)` order.
    pub fn minimum_spanning_tree(&self) -> Result<SpanningTree> {
        if self.n < 2 {
            return Err(TopologyError::TooFewAgents(self.n));
        }
        self.require_connected()?;
        let mut candidates: Vec<_> = self.edges().map(|e| (self.weight(e.0, e.1), e)).collect();
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        let mut parent: Vec<usize> = (0..=self.n as usize).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut edges = Vec::with_capacity(self.n as usize - 1);
        for (_, (a, b)) in candidates {
            let ra = find(&mut parent, a.0 as usize);
            let rb = find(&mut parent, b.0 as usize);
            if ra != rb {
                parent[ra] = rb;
                edges.push((a, b));
            }
        }
        SpanningTree::from_edge_list(self.n, edges)
    }

    /// Sum of edge weights of `tree` measured in this graph's weights.
    pub fn tree_weight(&self, tree: &SpanningTree) -> f64 {
        tree.edges().iter().map(|&(a, b)| self.weight(a, b)).sum()
    }
}

/// A spanning EPR tree with its distinguished vertices.
///
/// `root_leaf` (T) is the lowest-index degree-1 vertex and `start` (S) its
/// unique neighbor; `leaves` (L) holds every degree-1 vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanningTree {
    n: u32,
    edges: Vec<(AgentId, AgentId)>,
    root_leaf: AgentId,
    start: AgentId,
    leaves: BTreeSet<AgentId>,
}

impl SpanningTree {
    pub fn from_edges(n: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let g = EprGraph::from_edges(n, edges)?;
        if n < 2 {
            return Err(TopologyError::TooFewAgents(n));
        }
        if g.edge_count() != n as usize - 1 {
            return Err(TopologyError::NotATree { n });
        }
        g.require_connected()?;
        Self::from_edge_list(n, g.edges().collect())
    }

    fn from_edge_list(n: u32, mut edges: Vec<(AgentId, AgentId)>) -> Result<Self> {
        edges.sort();
        if edges.len() + 1 != n as usize {
            return Err(TopologyError::NotATree { n });
        }
        let mut degree: BTreeMap<AgentId, usize> = BTreeMap::new();
        for &(a, b) in &edges {
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() += 1;
        }
        let leaves: BTreeSet<AgentId> = degree
            .iter()
            .filter(|(_, &d)| d == 1)
            .map(|(&a, _)| a)
            .collect();
        let root_leaf = *leaves.first().ok_or(TopologyError::NotATree { n })?;
        let start = edges
            .iter()
            .find_map(|&(a, b)| {
                if a == root_leaf {
                    Some(b)
                } else if b == root_leaf {
                    Some(a)
                } else {
                    None
                }
            })
            .ok_or(TopologyError::NotATree { n })?;
        Ok(Self {
            n,
            edges,
            root_leaf,
            start,
            leaves,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn edges(&self) -> &[(AgentId, AgentId)] {
        &self.edges
    }

    /// T: the degree-one vertex the protocol starts from.
    pub fn root_leaf(&self) -> AgentId {
        self.root_leaf
    }

    /// S: the unique neighbor of T.
    pub fn start(&self) -> AgentId {
        self.start
    }

    pub fn leaves(&self) -> &BTreeSet<AgentId> {
        &self.leaves
    }

    /// Number of leaves, k.
    pub fn k(&self) -> usize {
        self.leaves.len()
    }

    pub fn neighbors(&self, a: AgentId) -> Vec<AgentId> {
        let mut out: Vec<AgentId> = self
            .edges
            .iter()
            .filter_map(|&(x, y)| {
                if x == a {
                    Some(y)
                } else if y == a {
                    Some(x)
                } else {
                    None
                }
            })
            .collect();
        out.sort();
        out
    }

    pub fn to_graph(&self) -> EprGraph {
        let mut g = EprGraph::new(self.n).expect("tree has agents");
        for &(a, b) in &self.edges {
            g.add_edge(a.0, b.0).expect("tree edges are simple");
        }
        g
    }
}

/// A set of agents sharing one GHZ-form state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hyperedge {
    /// Position in the input order.
    pub index: usize,
    pub members: BTreeSet<AgentId>,
}

/// Hyperedges stored by decreasing size, ties broken by input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntangledHypergraph {
    n: u32,
    hyperedges: Vec<Hyperedge>,
}

impl EntangledHypergraph {
    pub fn new(n: u32, hyperedges: &[Vec<u32>]) -> Result<Self> {
        if n == 0 {
            return Err(TopologyError::NoAgents);
        }
        let mut stored: Vec<Hyperedge> = Vec::with_capacity(hyperedges.len());
        for (index, raw) in hyperedges.iter().enumerate() {
            let mut members = BTreeSet::new();
            for &a in raw {
                let agent = check_agent(n, a)?;
                if !members.insert(agent) {
                    return Err(TopologyError::DuplicateMember { index, agent });
                }
            }
            if members.len() < 2 {
                return Err(TopologyError::HyperedgeTooSmall {
                    index,
                    size: members.len(),
                });
            }
            if let Some(first) = stored.iter().find(|h| h.members == members) {
                return Err(TopologyError::DuplicateHyperedge {
                    index,
                    first: first.index,
                });
            }
            stored.push(Hyperedge { index, members });
        }
        // stable: equal sizes keep input order
        stored.sort_by_key(|h| std::cmp::Reverse(h.members.len()));
        Ok(Self {
            n,
            hyperedges: stored,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn hyperedges(&self) -> &[Hyperedge] {
        &self.hyperedges
    }

    /// Hyperedges restored to input order.
    pub fn input_order(&self) -> Vec<&Hyperedge> {
        let mut v: Vec<&Hyperedge> = self.hyperedges.iter().collect();
        v.sort_by_key(|h| h.index);
        v
    }

    fn first_unreachable(&self) -> Option<AgentId> {
        // Bipartite agent/hyperedge search: an agent reaches every member of
        // every hyperedge it belongs to.
        let mut seen = BTreeSet::from([AgentId(1)]);
        let mut used = vec![false; self.hyperedges.len()];
        let mut queue = VecDeque::from([AgentId(1)]);
        while let Some(a) = queue.pop_front() {
            for (i, h) in self.hyperedges.iter().enumerate() {
                if !used[i] && h.members.contains(&a) {
                    used[i] = true;
                    for &b in &h.members {
                        if seen.insert(b) {
                            queue.push_back(b);
                        }
                    }
                }
            }
        }
        agents(self.n).find(|a| !seen.contains(a))
    }

    /// True iff a hyperpath joins every pair of agents.
    pub fn is_connected(&self) -> bool {
        self.first_unreachable().is_none()
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        match self.first_unreachable() {
            None => Ok(()),
            Some(b) => Err(TopologyError::Disconnected {
                a: AgentId(1),
                b,
                structure: "entangled hypergraph",
            }),
        }
    }

    /// The sequence of fusions that grows `F = E_1` to cover every agent.
    pub fn merge_schedule(&self) -> Result<Vec<MergeStep>> {
        if self.hyperedges.is_empty() {
            return Err(TopologyError::EmptyHypergraph);
        }
        self.require_connected()?;
        let mut covered = self.hyperedges[0].members.clone();
        let mut remaining: Vec<usize> = (1..self.hyperedges.len()).collect();
        let mut steps = Vec::new();
        loop {
            remaining.retain(|&i| !self.hyperedges[i].members.is_subset(&covered));
            if remaining.is_empty() {
                break;
            }
            let slot = remaining
                .iter()
                .position(|&i| !self.hyperedges[i].members.is_disjoint(&covered))
                .expect("connected hypergraph always offers an overlapping hyperedge");
            let i = remaining.remove(slot);
            let members = self.hyperedges[i].members.clone();
            let overlap: BTreeSet<AgentId> = members.intersection(&covered).copied().collect();
            let junction = *overlap.first().expect("overlap is nonempty");
            steps.push(MergeStep {
                hyperedge: i,
                junction,
                pre_size: covered.len(),
                add_size: members.len(),
                overlap,
                members: members.clone(),
            });
            covered.extend(members);
        }
        Ok(steps)
    }

    /// Sorted positions of hyperedges that no merge step uses (they lie inside
    /// the growing set by the time they are considered).
    pub fn redundant_hyperedges(&self, schedule: &[MergeStep]) -> Vec<usize> {
        let used: BTreeSet<usize> = schedule.iter().map(|s| s.hyperedge).collect();
        (1..self.hyperedges.len())
            .filter(|i| !used.contains(i))
            .collect()
    }
}

/// One fusion of hyperedge `E_i` into the running set `F`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MergeStep {
    /// Position of `E_i` in the sorted hyperedge list.
    pub hyperedge: usize,
    pub members: BTreeSet<AgentId>,
    /// Smallest-index agent in `F ∩ E_i`.
    pub junction: AgentId,
    pub overlap: BTreeSet<AgentId>,
    /// `|F|` before the step.
    pub pre_size: usize,
    /// `|E_i|`.
    pub add_size: usize,
}

impl MergeStep {
    /// `|F| + |E_i| - |F ∩ E_i|`.
    pub fn post_size(&self) -> usize {
        self.pre_size + self.add_size - self.overlap.len()
    }
}
