//! Generic 2D rigidity oracle: rigidity-matrix rank at random realizations,
//! redundant rigidity, 3-connectivity and the resulting global-rigidity
//! characterization. Desk-scale only; the connectivity sweep is quadratic in
//! the vertex count and the redundancy sweep factors one matrix per edge.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::network::Network;
use crate::protocol::{ConstructionKind, LocalizationResult};
use crate::seed;

static RESAMPLES: AtomicUsize = AtomicUsize::new(0);

/// How often two random realizations disagreed on a rank verdict.
pub fn resample_count() -> usize {
    RESAMPLES.load(Ordering::Relaxed)
}

/// A simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl AbstractGraph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(n);
        for (a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        Self::from_edges(n, (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))))
    }

    pub fn cycle(n: usize) -> Self {
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    /// Hub `0` joined to a cycle on `1..=rims`.
    pub fn wheel(rims: usize) -> Self {
        let mut g = Self::new(rims + 1);
        for i in 0..rims {
            g.add_edge(0, i + 1);
            g.add_edge(i + 1, (i + 1) % rims + 1);
        }
        g
    }

    /// Subgraph of `net` induced by `vertices`, relabeled `0..len` in the
    /// given order.
    pub fn induced(net: &Network, vertices: &[usize]) -> Self {
        let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut g = Self::new(vertices.len());
        for (&v, &i) in &index {
            for &(u, _) in net.neighbors(v) {
                if let Some(&j) = index.get(&u) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a < self.n && b < self.n, "edge ({a}, {b}) out of range");
        assert_ne!(a, b, "self loops are not allowed");
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> bool {
        self.edges.remove(&(a.min(b), a.max(b)))
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * self.n.saturating_sub(1) / 2
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Connectivity after deleting the vertices in `removed`.
    fn connected_without(&self, adj: &[Vec<usize>], removed: &[usize]) -> bool {
        let alive = |v: usize| !removed.contains(&v);
        let Some(start) = (0..self.n).find(|&v| alive(v)) else {
            return true;
        };
        let mut seen = vec![false; self.n];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if alive(u) && !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.n - removed.len()
    }
}

fn realization(n: usize, stream: &str) -> Vec<(f64, f64)> {
    let mut rng = seed::rng(0x7269_6769_6469_7479, stream);
    (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect()
}

fn rigidity_rank(g: &AbstractGraph, pts: &[(f64, f64)]) -> usize {
    let rows = g.edge_count();
    let cols = 2 * g.n;
    if rows == 0 || cols == 0 {
        return 0;
    }
    let mut m = DMatrix::<f64>::zeros(rows, cols);
    for (row, (a, b)) in g.edges().enumerate() {
        let dx = pts[a].0 - pts[b].0;
        let dy = pts[a].1 - pts[b].1;
        m[(row, 2 * a)] = dx;
        m[(row, 2 * a + 1)] = dy;
        m[(row, 2 * b)] = -dx;
        m[(row, 2 * b + 1)] = -dy;
    }
    let threshold = 1e-8 * m.norm();
    let r = m.col_piv_qr().unpack_r();
    (0..rows.min(cols)).filter(|&i| r[(i, i)].abs() > threshold).count()
}

fn required_rank(n: usize) -> usize {
    (2 * n).saturating_sub(3)
}

fn rigid_at(g: &AbstractGraph, stream: &str) -> bool {
    rigidity_rank(g, &realization(g.n, stream)) >= required_rank(g.n)
}

/// Rigidity at two independent random realizations; a disagreement is
/// settled by majority over further samples.
pub fn is_rigid_generic(g: &AbstractGraph) -> bool {
    if g.n <= 1 {
        return true;
    }
    let tag = graph_tag(g);
    let first = rigid_at(g, &format!("{tag}/0"));
    let second = rigid_at(g, &format!("{tag}/1"));
    if first == second {
        return first;
    }
    RESAMPLES.fetch_add(1, Ordering::Relaxed);
    let votes = (2..7).filter(|i| rigid_at(g, &format!("{tag}/{i}"))).count();
    votes >= 3
}

fn graph_tag(g: &AbstractGraph) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(g.n.to_le_bytes());
    for (a, b) in g.edges() {
        h.update(a.to_le_bytes());
        h.update(b.to_le_bytes());
    }
    let digest = h.finalize();
    format!("rigid/{:02x}{:02x}{:02x}{:02x}", digest[0], digest[1], digest[2], digest[3])
}

/// Rigid, and still rigid after deleting any single edge.
pub fn is_redundantly_rigid(g: &AbstractGraph) -> bool {
    if !is_rigid_generic(g) {
        return false;
    }
    g.edges().all(|(a, b)| {
        let mut h = g.clone();
        h.remove_edge(a, b);
        is_rigid_generic(&h)
    })
}

/// No pair of vertices separates the graph. Graphs on fewer than four
/// vertices are never 3-connected.
pub fn is_three_connected(g: &AbstractGraph) -> bool {
    if g.n < 4 {
        return false;
    }
    let adj = g.adjacency();
    if !g.connected_without(&adj, &[]) {
        return false;
    }
    for a in 0..g.n {
        if !g.connected_without(&adj, &[a]) {
            return false;
        }
        for b in (a + 1)..g.n {
            if !g.connected_without(&adj, &[a, b]) {
                return false;
            }
        }
    }
    true
}

/// Complete on at most three vertices, or 3-connected and redundantly rigid.
pub fn is_globally_rigid(g: &AbstractGraph) -> bool {
    (g.n <= 3 && g.is_complete()) || (is_three_connected(g) && is_redundantly_rigid(g))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ConstructionReport {
    pub wheels_checked: usize,
    pub unions_checked: usize,
    /// Size of the localized skeleton when it was checked.
    pub skeleton_checked: Option<usize>,
    pub failures: Vec<String>,
}

impl ConstructionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Networks up to this size also get the whole localized skeleton checked.
pub const SKELETON_LIMIT: usize = 60;

/// Re-check the globally rigid structures a protocol run relied on: every
/// wheel, every union built while answering wheel requests, and on small
/// networks the subgraph spanned by everything localized.
pub fn check_construction(net: &Network, result: &LocalizationResult) -> ConstructionReport {
    let mut report = ConstructionReport::default();
    for rec in &result.constructions {
        match rec.kind {
            ConstructionKind::Wheel => {
                let wheel = result.wheels[rec.hub].as_ref().expect("recorded wheel exists");
                let mut vertices = vec![wheel.hub];
                vertices.extend(&wheel.rim);
                let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
                let g = AbstractGraph::from_edges(
                    vertices.len(),
                    wheel.edges().into_iter().map(|(a, b)| (index[&a], index[&b])),
                );
                report.wheels_checked += 1;
                if !is_globally_rigid(&g) {
                    report
                        .failures
                        .push(format!("wheel of {} with rim {:?} is not globally rigid", net.id(rec.hub), ids(net, &wheel.rim)));
                }
            }
            ConstructionKind::Union => {
                let g = AbstractGraph::induced(net, &rec.vertices);
                report.unions_checked += 1;
                if !is_globally_rigid(&g) {
                    report.failures.push(format!(
                        "union built by {} on {:?} is not globally rigid",
                        net.id(rec.hub),
                        ids(net, &rec.vertices)
                    ));
                }
            }
        }
    }
    if net.len() <= SKELETON_LIMIT {
        let mut vertices: BTreeSet<usize> = (0..net.len()).filter(|&v| result.is_localized(v)).collect();
        for rec in &result.constructions {
            if rec.kind == ConstructionKind::Union {
                vertices.extend(&rec.vertices);
            }
        }
        let vertices: Vec<usize> = vertices.into_iter().collect();
        if vertices.len() >= 2 {
            let g = AbstractGraph::induced(net, &vertices);
            report.skeleton_checked = Some(vertices.len());
            if !is_globally_rigid(&g) {
                report
                    .failures
                    .push(format!("localized skeleton on {} nodes is not globally rigid", vertices.len()));
            }
        }
    }
    report
}

fn ids(net: &Network, vs: &[usize]) -> Vec<u64> {
    vs.iter().map(|&v| net.id(v)).collect()
}
