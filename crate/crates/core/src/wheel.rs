//! Communication-wheel construction from two-hop distance knowledge.
//!
//! A node places itself at the origin of a private frame, puts its closest
//! neighbor `w0` on the positive x-axis and picks the handedness so that the
//! second rim node `w1` has positive y. Subsequent rim nodes are found by
//! [`next_rim`] until the rim closes back on `w0`. Failure to close means the
//! node is on the boundary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    arcs_cover_circle, boundary_intersections, coverage_interval, covers, distance,
    locate_by_three_distances, locate_by_two_distances, Point, REL_TOL,
};
use crate::network::{
    classify_all, is_maximal_neighbor, preceq, Classification, Knowledge, Network, NodeKnowledge,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wheel {
    pub hub: usize,
    /// Rim nodes in counterclockwise order of the hub's local frame.
    pub rim: Vec<usize>,
    /// Hub and rim positions in the hub's local frame.
    pub local_pos: BTreeMap<usize, Point>,
}

impl Wheel {
    pub fn contains(&self, v: usize) -> bool {
        v == self.hub || self.rim.contains(&v)
    }

    pub fn rim_index(&self, v: usize) -> Option<usize> {
        self.rim.iter().position(|&w| w == v)
    }

    /// Rim node following `v` counterclockwise.
    pub fn ccw_next(&self, v: usize) -> Option<usize> {
        self.rim_index(v).map(|i| self.rim[(i + 1) % self.rim.len()])
    }

    /// Rim node preceding `v` counterclockwise.
    pub fn cw_prev(&self, v: usize) -> Option<usize> {
        let m = self.rim.len();
        self.rim_index(v).map(|i| self.rim[(i + m - 1) % m])
    }

    /// Spokes plus rim cycle, as index pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let m = self.rim.len();
        let mut edges: Vec<_> = self.rim.iter().map(|&w| (self.hub, w)).collect();
        edges.extend((0..m).map(|i| (self.rim[i], self.rim[(i + 1) % m])));
        edges
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Interior(Wheel),
    Boundary,
}

impl Verdict {
    pub fn is_interior(&self) -> bool {
        matches!(self, Verdict::Interior(_))
    }

    pub fn wheel(&self) -> Option<&Wheel> {
        match self {
            Verdict::Interior(w) => Some(w),
            Verdict::Boundary => None,
        }
    }
}

fn ccw_point(p: Point, r: f64) -> Point {
    boundary_intersections(Point::ORIGIN, p, r)
        .map(|(ccw, _)| ccw)
        .expect("rim positions are in range")
}

fn cw_point(p: Point, r: f64) -> Point {
    boundary_intersections(Point::ORIGIN, p, r)
        .map(|(_, cw)| cw)
        .expect("rim positions are in range")
}

/// Closest neighbor by `(distance, index)`.
fn closest(candidates: impl Iterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    candidates.min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
}

/// Run the wheel construction for the node owning `k`.
pub fn construct_communication_wheel(k: &NodeKnowledge) -> Verdict {
    let v = k.node;
    let r = k.r;
    let tol = REL_TOL * r;
    let Some((w0, d0)) = closest(k.neighbors()) else {
        return Verdict::Boundary;
    };
    let w0_pos = Point::new(d0, 0.0);

    // w1: closest common neighbor of v and w0 covering a boundary
    // intersection of v and w0 and not eclipsed by w0. Its upper placement is
    // the one nearer to the upper intersection, which becomes CCW(v, w0).
    let upper_ccw = ccw_point(w0_pos, r);
    let w1 = closest(k.common_neighbors(w0).into_iter().filter_map(|u| {
        let du = k.dist(v, u)?;
        let (upper, _) = locate_by_two_distances(Point::ORIGIN, w0_pos, du, k.dist(w0, u)?).ok()?;
        (covers(upper_ccw, upper, r, tol) && !preceq(k, u, w0)).then_some((u, du))
    }));
    let Some((w1, d1)) = w1 else {
        return Verdict::Boundary;
    };
    let (w1_pos, _) = locate_by_two_distances(Point::ORIGIN, w0_pos, d1, k.dist(w0, w1).unwrap())
        .expect("w1 was placed during candidate selection");

    let mut local_pos = BTreeMap::from([(v, Point::ORIGIN), (w0, w0_pos), (w1, w1_pos)]);
    let mut rim = vec![w0, w1];
    let cw_w0 = cw_point(w0_pos, r);
    for _ in 0..k.degree() {
        let prev = *rim.last().unwrap();
        let prev_pos = local_pos[&prev];
        if rim.len() >= 3 && closes_on(k, prev, prev_pos, w0, w0_pos, cw_w0) {
            return Verdict::Interior(Wheel { hub: v, rim, local_pos });
        }
        let prev2 = rim[rim.len() - 2];
        let Some((next, pos)) = next_rim(k, prev, prev2, &local_pos) else {
            return Verdict::Boundary;
        };
        if next == w0 {
            return if rim.len() >= 3 {
                Verdict::Interior(Wheel { hub: v, rim, local_pos })
            } else {
                Verdict::Boundary
            };
        }
        // a mirrored placement can send the walk back over itself
        if rim.contains(&next) {
            return Verdict::Boundary;
        }
        rim.push(next);
        local_pos.insert(next, pos);
    }
    Verdict::Boundary
}

/// The rim may close after `last` when it covers `CW(v, w0)`, is adjacent to
/// `w0`, and `w0` covers `CCW(v, last)`.
fn closes_on(k: &NodeKnowledge, last: usize, last_pos: Point, w0: usize, w0_pos: Point, cw_w0: Point) -> bool {
    let r = k.r;
    let tol = REL_TOL * r;
    k.adjacent(last, w0) == Some(true)
        && covers(cw_w0, last_pos, r, tol)
        && covers(ccw_point(last_pos, r), w0_pos, r, tol)
}

/// Find the next rim node after `prev`, given the rim node `prev2` before it.
///
/// Among common neighbors `u` of the hub and `prev` such that `u` covers
/// `CCW(v, prev)` while `prev` does not cover `CCW(v, u)`, returns the one
/// closest to the hub together with its local position.
pub fn next_rim(
    k: &NodeKnowledge,
    prev: usize,
    prev2: usize,
    local_pos: &BTreeMap<usize, Point>,
) -> Option<(usize, Point)> {
    let v = k.node;
    let r = k.r;
    let tol = REL_TOL * r;
    let prev_pos = local_pos[&prev];
    let prev2_pos = local_pos[&prev2];
    let target = ccw_point(prev_pos, r);
    let qualifies = |u: usize, p: Point| {
        covers(target, p, r, tol) && !covers(ccw_point(p, r), prev_pos, r, tol) && consistent(k, u, p, local_pos)
    };

    let mut best: Option<(usize, f64, Point)> = None;
    for u in k.common_neighbors(prev) {
        if u == prev2 {
            continue;
        }
        let (Some(du), Some(d_prev)) = (k.dist(v, u), k.dist(prev, u)) else {
            continue;
        };
        if let Some((bu, bd, _)) = best {
            if (du, u) >= (bd, bu) {
                continue;
            }
        }
        let placed = if let (Some(true), Some(d_prev2)) = (k.adjacent(u, prev2), k.dist(prev2, u)) {
            locate_by_three_distances([Point::ORIGIN, prev_pos, prev2_pos], [du, d_prev, d_prev2])
                .ok()
                .filter(|&p| qualifies(u, p))
        } else {
            let Ok((p1, p2)) = locate_by_two_distances(Point::ORIGIN, prev_pos, du, d_prev) else {
                continue;
            };
            let c1 = covers(target, p1, r, tol);
            let c2 = covers(target, p2, r, tol);
            // Both mirror placements covering CCW(v, prev) would mean u
            // eclipses prev while missing prev2.
            debug_assert!(!(c1 && c2), "ambiguous placement of {u} in the wheel of {v}");
            match (c1, c2) {
                (true, false) => Some(p1).filter(|&p| qualifies(u, p)),
                (false, true) => Some(p2).filter(|&p| qualifies(u, p)),
                _ => None,
            }
        };
        if let Some(p) = placed {
            best = Some((u, du, p));
        }
    }
    best.map(|(u, _, p)| (u, p))
}

/// A placement of `u` must respect every known distance and non-adjacency
/// to the nodes placed so far.
fn consistent(k: &NodeKnowledge, u: usize, p: Point, local_pos: &BTreeMap<usize, Point>) -> bool {
    let tol = 1e-6 * k.r;
    local_pos.iter().all(|(&w, &q)| match k.adjacent(u, w) {
        _ if w == u => true,
        Some(true) => k.dist(u, w).is_some_and(|d| (distance(p, q) - d).abs() <= tol),
        Some(false) => distance(p, q) > k.r - tol,
        None => true,
    })
}

/// Wheel verdicts for every node of a network.
pub fn construct_all(knowledge: &Knowledge) -> Vec<Verdict> {
    (0..knowledge.len())
        .map(|v| construct_communication_wheel(knowledge.of(v)))
        .collect()
}

/// Four-way classification with interior decided by each node's wheel.
pub fn classify_by_wheels(net: &Network) -> Classification {
    let interior: Vec<bool> = construct_all(&Knowledge::from_network(net))
        .iter()
        .map(Verdict::is_interior)
        .collect();
    classify_all(net, &interior)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WheelDefect {
    #[error("rim has {0} nodes; a wheel needs at least 3")]
    TooSmall(usize),
    #[error("rim node {0} repeats")]
    Repeated(usize),
    #[error("rim node {0} is not adjacent to the hub")]
    NotSpoke(usize),
    #[error("rim node {0} is not a maximal neighbor of the hub")]
    NotMaximal(usize),
    #[error("consecutive rim nodes {0} and {1} are not adjacent")]
    RimGap(usize, usize),
    #[error("boundary intersection of the hub and {0} is not covered by its rim neighbor")]
    Coverage(usize),
    #[error("local frame distance between {0} and {1} disagrees with measurement")]
    Frame(usize, usize),
    #[error("node {0} has no local position")]
    Unplaced(usize),
    #[error("rim zones do not cover the hub's boundary circle")]
    NotCovering,
}

/// Check every wheel invariant against ground truth.
pub fn verify_wheel(wheel: &Wheel, net: &Network) -> Result<(), WheelDefect> {
    let r = net.r();
    let tol = REL_TOL * r;
    let hub = wheel.hub;
    let m = wheel.rim.len();
    if m < 3 {
        return Err(WheelDefect::TooSmall(m));
    }
    for (i, &w) in wheel.rim.iter().enumerate() {
        if wheel.rim[..i].contains(&w) {
            return Err(WheelDefect::Repeated(w));
        }
        if !net.are_adjacent(hub, w) {
            return Err(WheelDefect::NotSpoke(w));
        }
    }
    let k = NodeKnowledge::own(hub, r, net.neighbors(hub).iter().copied());
    let mut k = k;
    for &(u, _) in net.neighbors(hub) {
        k.record_list(u, net.neighbors(u).iter().copied());
    }
    for &w in &wheel.rim {
        if !is_maximal_neighbor(&k, w) {
            return Err(WheelDefect::NotMaximal(w));
        }
    }
    for i in 0..m {
        let a = wheel.rim[i];
        let b = wheel.rim[(i + 1) % m];
        if !net.are_adjacent(a, b) {
            return Err(WheelDefect::RimGap(a, b));
        }
    }
    let pos = |v: usize| wheel.local_pos.get(&v).copied().ok_or(WheelDefect::Unplaced(v));
    let hub_pos = pos(hub)?;
    for i in 0..m {
        let cur = wheel.rim[i];
        let next = wheel.rim[(i + 1) % m];
        let prev = wheel.rim[(i + m - 1) % m];
        let (ccw, cw) = boundary_intersections(hub_pos, pos(cur)?, r).map_err(|_| WheelDefect::Frame(hub, cur))?;
        if !covers(ccw, pos(next)?, r, tol) || !covers(cw, pos(prev)?, r, tol) {
            return Err(WheelDefect::Coverage(cur));
        }
    }
    let members: Vec<usize> = std::iter::once(hub).chain(wheel.rim.iter().copied()).collect();
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            if let Some(d) = net.edge_length(a, b) {
                if (distance(pos(a)?, pos(b)?) - d).abs() > tol {
                    return Err(WheelDefect::Frame(a, b));
                }
            }
        }
    }
    let arcs: Vec<_> = wheel
        .rim
        .iter()
        .filter_map(|&w| coverage_interval(net.position(hub), net.position(w), r).ok())
        .collect();
    if !arcs_cover_circle(&arcs, REL_TOL) {
        return Err(WheelDefect::NotCovering);
    }
    Ok(())
}
