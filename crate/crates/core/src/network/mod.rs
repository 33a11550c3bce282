//! Unit disk graphs, two-hop knowledge, the eclipse order and node classes.

mod generate;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    arcs_cover_circle, coverage_half_width, coverage_interval, distance, triangle_min_height,
    Point, REL_TOL,
};

pub use generate::{generate_honeycomb_family, generate_random, HoneycombReport};

/// Minimum pairwise separation, relative to `r`.
pub const MIN_SEPARATION: f64 = 1e-3;
/// Minimum triangle height for triples of nodes within `2r` of each other.
pub const MIN_TRIANGLE_HEIGHT: f64 = 1e-3;
/// No pairwise distance may fall within this band around `r`.
pub const RANGE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("network needs at least {needed} nodes, got {got}")]
    TooFewNodes { needed: usize, got: usize },
    #[error("communication range must be positive and finite, got {0}")]
    BadRange(f64),
    #[error("duplicate node id {0}")]
    DuplicateId(u64),
    #[error("node {0} has a non-finite coordinate")]
    NonFinite(u64),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("nodes {0} and {1} are closer than the minimum separation")]
    TooClose(u64, u64),
    #[error("nodes {0}, {1}, {2} are nearly collinear")]
    Collinear(u64, u64, u64),
    #[error("distance between nodes {0} and {1} lies within the margin around r")]
    NearRange(u64, u64),
    #[error("gave up after {attempts} attempts: density too low for a connected network")]
    DensityTooLow { attempts: usize },
    #[error("fixture self-check failed: {0}")]
    Fixture(String),
}

/// A connected unit disk graph with ground-truth positions.
///
/// Nodes are stored sorted by external id; everything internal addresses a
/// node by its index, so index order and id order coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    r: f64,
    ids: Vec<u64>,
    positions: Vec<Point>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Network {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, v: usize) -> u64 {
        self.ids[v]
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn position(&self, v: usize) -> Point {
        self.positions[v]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Neighbors of `v` with measured distances, ascending by index.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.edge_length(a, b).is_some()
    }

    pub fn edge_length(&self, a: usize, b: usize) -> Option<f64> {
        let row = &self.adjacency[a];
        row.binary_search_by_key(&b, |&(n, _)| n).ok().map(|i| row[i].1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (u64, Point)> + '_ {
        self.ids.iter().copied().zip(self.positions.iter().copied())
    }
}

/// Build the unit disk graph on `nodes` and enforce connectivity and the
/// general-position margins.
pub fn build_udg(nodes: &[(u64, Point)], r: f64) -> Result<Network, NetworkError> {
    let net = build_udg_unchecked(nodes, r)?;
    check_margins(&net)?;
    if !is_connected(&net.adjacency, |_| true) {
        return Err(NetworkError::Disconnected);
    }
    check_general_position(&net)?;
    Ok(net)
}

/// Build the unit disk graph without connectivity or general-position checks.
pub fn build_udg_unchecked(nodes: &[(u64, Point)], r: f64) -> Result<Network, NetworkError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(NetworkError::BadRange(r));
    }
    if nodes.is_empty() {
        return Err(NetworkError::TooFewNodes { needed: 1, got: 0 });
    }
    let mut sorted: Vec<(u64, Point)> = nodes.to_vec();
    sorted.sort_by_key(|&(id, _)| id);
    for w in sorted.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(NetworkError::DuplicateId(w[0].0));
        }
    }
    if let Some(&(id, _)) = sorted.iter().find(|(_, p)| !p.is_finite()) {
        return Err(NetworkError::NonFinite(id));
    }
    let ids: Vec<u64> = sorted.iter().map(|&(id, _)| id).collect();
    let positions: Vec<Point> = sorted.iter().map(|&(_, p)| p).collect();
    let n = ids.len();
    let mut adjacency = vec![Vec::new(); n];
    for a in 0..n {
        for b in (a + 1)..n {
            let d = distance(positions[a], positions[b]);
            if d <= r {
                adjacency[a].push((b, d));
                adjacency[b].push((a, d));
            }
        }
    }
    for row in &mut adjacency {
        row.sort_by_key(|&(b, _)| b);
    }
    Ok(Network {
        r,
        ids,
        positions,
        adjacency,
    })
}

fn check_margins(net: &Network) -> Result<(), NetworkError> {
    let r = net.r;
    let n = net.len();
    for a in 0..n {
        for b in (a + 1)..n {
            let d = distance(net.positions[a], net.positions[b]);
            if d < MIN_SEPARATION * r {
                return Err(NetworkError::TooClose(net.ids[a], net.ids[b]));
            }
            if (d - r).abs() < RANGE_MARGIN * r {
                return Err(NetworkError::NearRange(net.ids[a], net.ids[b]));
            }
        }
    }
    Ok(())
}

/// Triples with all pairwise distances within `2r` must not be nearly
/// collinear. Farther triples never share a common neighbor, so no local
/// computation ever uses them together.
fn check_general_position(net: &Network) -> Result<(), NetworkError> {
    let r = net.r;
    let n = net.len();
    let p = &net.positions;
    for a in 0..n {
        let near: Vec<usize> = ((a + 1)..n)
            .filter(|&b| distance(p[a], p[b]) <= 2.0 * r)
            .collect();
        for (i, &b) in near.iter().enumerate() {
            for &c in &near[i + 1..] {
                if distance(p[b], p[c]) <= 2.0 * r
                    && triangle_min_height(p[a], p[b], p[c]) < MIN_TRIANGLE_HEIGHT * r
                {
                    return Err(NetworkError::Collinear(net.ids[a], net.ids[b], net.ids[c]));
                }
            }
        }
    }
    Ok(())
}

/// Connectivity of the subgraph induced by nodes satisfying `keep`. An empty
/// selection counts as disconnected.
pub(crate) fn is_connected(adjacency: &[Vec<(usize, f64)>], keep: impl Fn(usize) -> bool) -> bool {
    let members: Vec<usize> = (0..adjacency.len()).filter(|&v| keep(v)).collect();
    let Some(&start) = members.first() else {
        return false;
    };
    let mut seen = vec![false; adjacency.len()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &(u, _) in &adjacency[v] {
            if !seen[u] && keep(u) {
                seen[u] = true;
                count += 1;
                queue.push_back(u);
            }
        }
    }
    count == members.len()
}

/// What node `v` knows after the neighbor-list exchange: its own measured
/// distances and, for every neighbor `u`, the list `N(u)` with distances.
/// No coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeKnowledge {
    pub node: usize,
    pub r: f64,
    /// Keyed by `node` and each of its neighbors.
    lists: BTreeMap<usize, BTreeMap<usize, f64>>,
}

impl NodeKnowledge {
    /// Knowledge holding only the node's own measurements.
    pub fn own(node: usize, r: f64, neighbors: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut lists = BTreeMap::new();
        lists.insert(node, neighbors.into_iter().collect());
        Self { node, r, lists }
    }

    /// Record the list a neighbor sent. Lists from non-neighbors are ignored.
    pub fn record_list(&mut self, from: usize, list: impl IntoIterator<Item = (usize, f64)>) -> bool {
        if !self.lists[&self.node].contains_key(&from) {
            return false;
        }
        self.lists.insert(from, list.into_iter().collect());
        true
    }

    pub fn neighbors(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.lists[&self.node].iter().map(|(&u, &d)| (u, d))
    }

    pub fn neighbor_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.lists[&self.node].keys().copied()
    }

    pub fn degree(&self) -> usize {
        self.lists[&self.node].len()
    }

    pub fn is_neighbor(&self, u: usize) -> bool {
        self.lists[&self.node].contains_key(&u)
    }

    /// `N(u)` for `u` the node itself or one of its neighbors.
    pub fn list_of(&self, u: usize) -> Option<&BTreeMap<usize, f64>> {
        self.lists.get(&u)
    }

    /// Distance between `a` and `b` if either endpoint's list is known and
    /// they are adjacent.
    pub fn dist(&self, a: usize, b: usize) -> Option<f64> {
        if a == b {
            return Some(0.0);
        }
        self.lists
            .get(&a)
            .and_then(|l| l.get(&b))
            .or_else(|| self.lists.get(&b).and_then(|l| l.get(&a)))
            .copied()
    }

    /// Adjacency between `a` and `b`, when decidable from the known lists.
    pub fn adjacent(&self, a: usize, b: usize) -> Option<bool> {
        if let Some(l) = self.lists.get(&a) {
            return Some(l.contains_key(&b));
        }
        self.lists.get(&b).map(|l| l.contains_key(&a))
    }

    /// Common neighbors of the node and `w`, ascending.
    pub fn common_neighbors(&self, w: usize) -> Vec<usize> {
        let Some(lw) = self.lists.get(&w) else {
            return Vec::new();
        };
        self.lists[&self.node]
            .keys()
            .copied()
            .filter(|u| lw.contains_key(u))
            .collect()
    }
}

/// Two-hop knowledge for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct Knowledge {
    nodes: Vec<NodeKnowledge>,
}

impl Knowledge {
    /// Materialize the result of the neighbor-list exchange.
    pub fn from_network(net: &Network) -> Self {
        let nodes = (0..net.len())
            .map(|v| {
                let mut k = NodeKnowledge::own(v, net.r, net.neighbors(v).iter().copied());
                for &(u, _) in net.neighbors(v) {
                    k.record_list(u, net.neighbors(u).iter().copied());
                }
                k
            })
            .collect();
        Self { nodes }
    }

    pub fn of(&self, v: usize) -> &NodeKnowledge {
        &self.nodes[v]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Whether the arc of `∂Z(v)` covered by `u` nests inside the arc covered by
/// `u'`, from the three pairwise distances alone.
pub fn arc_nested(d_vu: f64, d_vu2: f64, d_uu2: f64, r: f64) -> bool {
    let cos = ((d_vu * d_vu + d_vu2 * d_vu2 - d_uu2 * d_uu2) / (2.0 * d_vu * d_vu2)).clamp(-1.0, 1.0);
    let apart = cos.acos();
    apart + coverage_half_width(d_vu, r) <= coverage_half_width(d_vu2, r) + REL_TOL
}

/// `u ⪯_v u'`: the arc of `∂Z(v)` inside `Z(u)` is contained in the arc
/// inside `Z(u')`. Non-adjacent `u`, `u'` never nest.
pub fn preceq(k: &NodeKnowledge, u: usize, u2: usize) -> bool {
    if u == u2 {
        return true;
    }
    let (Some(a), Some(b)) = (k.dist(k.node, u), k.dist(k.node, u2)) else {
        return false;
    };
    if !k.is_neighbor(u) || !k.is_neighbor(u2) {
        return false;
    }
    match k.dist(u, u2) {
        Some(c) => arc_nested(a, b, c, k.r),
        None => false,
    }
}

pub fn is_maximal_neighbor(k: &NodeKnowledge, u: usize) -> bool {
    k.neighbor_ids().filter(|&w| w != u).all(|w| !preceq(k, u, w))
}

/// Exact interior test: the arcs covered by the neighbors' zones cover the
/// whole boundary circle of `v`.
pub fn interior_oracle(net: &Network, v: usize) -> bool {
    let arcs: Vec<_> = net
        .neighbors(v)
        .iter()
        .filter_map(|&(u, _)| coverage_interval(net.position(v), net.position(u), net.r).ok())
        .collect();
    arcs_cover_circle(&arcs, REL_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeClass {
    Boundary,
    #[serde(rename = "isolated_weak")]
    IsolatedWeaklyInterior,
    #[serde(rename = "weak")]
    NonIsolatedWeaklyInterior,
    #[serde(rename = "strong")]
    StronglyInterior,
}

impl NodeClass {
    pub const ALL: [NodeClass; 4] = [
        NodeClass::Boundary,
        NodeClass::IsolatedWeaklyInterior,
        NodeClass::NonIsolatedWeaklyInterior,
        NodeClass::StronglyInterior,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeClass::Boundary => "boundary",
            NodeClass::IsolatedWeaklyInterior => "isolated_weak",
            NodeClass::NonIsolatedWeaklyInterior => "weak",
            NodeClass::StronglyInterior => "strong",
        }
    }

    pub fn is_interior(self) -> bool {
        self != NodeClass::Boundary
    }

    pub fn is_weak(self) -> bool {
        matches!(
            self,
            NodeClass::IsolatedWeaklyInterior | NodeClass::NonIsolatedWeaklyInterior
        )
    }
}

impl std::str::FromStr for NodeClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown node class {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub classes: Vec<NodeClass>,
    /// Strongly interior nodes, ascending.
    pub strong: Vec<usize>,
}

impl Classification {
    pub fn class(&self, v: usize) -> NodeClass {
        self.classes[v]
    }

    pub fn count(&self, class: NodeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }
}

/// Four-way partition from per-node interior verdicts.
pub fn classify_all(net: &Network, interior: &[bool]) -> Classification {
    assert_eq!(interior.len(), net.len());
    let strong_flags: Vec<bool> = (0..net.len())
        .map(|v| interior[v] && net.neighbors(v).iter().all(|&(u, _)| interior[u]))
        .collect();
    let classes = (0..net.len())
        .map(|v| {
            if !interior[v] {
                NodeClass::Boundary
            } else if strong_flags[v] {
                NodeClass::StronglyInterior
            } else if net.neighbors(v).iter().any(|&(u, _)| strong_flags[u]) {
                NodeClass::NonIsolatedWeaklyInterior
            } else {
                NodeClass::IsolatedWeaklyInterior
            }
        })
        .collect();
    let strong = (0..net.len()).filter(|&v| strong_flags[v]).collect();
    Classification { classes, strong }
}

/// Classification from the exact oracle.
pub fn classify_by_oracle(net: &Network) -> Classification {
    let interior: Vec<bool> = (0..net.len()).map(|v| interior_oracle(net, v)).collect();
    classify_all(net, &interior)
}

/// Whether the subgraph induced by strongly interior nodes is connected and
/// nonempty.
pub fn strong_interior_connected(net: &Network, classes: &Classification) -> bool {
    is_connected(&net.adjacency, |v| classes.classes[v] == NodeClass::StronglyInterior)
}
