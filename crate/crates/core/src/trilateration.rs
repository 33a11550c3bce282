//! Sequential trilateration baseline seeded by a triangle of mutually
//! adjacent nodes acting as anchors.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{locate_by_distances, locate_by_two_distances, Point};
use crate::network::Network;
use crate::seed;

/// Above this many triangles the sweep samples instead of enumerating.
pub const MAX_EXHAUSTIVE_TRIANGLES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrilaterationError {
    #[error("seed nodes {0} and {1} are not adjacent")]
    NotAdjacent(u64, u64),
    #[error("seed triangle is degenerate")]
    Degenerate,
    #[error("seed node index {0} out of range")]
    UnknownNode(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrilaterationRun {
    pub triangle: [usize; 3],
    /// Positions in the seed triangle's frame; `None` for unlocalized nodes.
    pub positions: Vec<Option<Point>>,
    /// Number of full sweeps until the fixed point (the last one changes nothing).
    pub sweeps: usize,
}

impl TrilaterationRun {
    pub fn localized_count(&self) -> usize {
        self.positions.iter().filter(|p| p.is_some()).count()
    }

    pub fn is_localized(&self, v: usize) -> bool {
        self.positions[v].is_some()
    }
}

/// Trilaterate to a fixed point from `triangle`, processing nodes in
/// ascending index order on every sweep.
pub fn trilaterate_from(net: &Network, triangle: [usize; 3]) -> Result<TrilaterationRun, TrilaterationError> {
    let order: Vec<usize> = (0..net.len()).collect();
    trilaterate_in_order(net, triangle, &order)
}

/// Same as [`trilaterate_from`] with an explicit per-sweep processing order.
pub fn trilaterate_in_order(
    net: &Network,
    triangle: [usize; 3],
    order: &[usize],
) -> Result<TrilaterationRun, TrilaterationError> {
    let [a, b, c] = triangle;
    for v in triangle {
        if v >= net.len() {
            return Err(TrilaterationError::UnknownNode(v));
        }
    }
    for (x, y) in [(a, b), (b, c), (a, c)] {
        if !net.are_adjacent(x, y) {
            return Err(TrilaterationError::NotAdjacent(net.id(x), net.id(y)));
        }
    }
    let dab = net.edge_length(a, b).unwrap();
    let b_pos = Point::new(dab, 0.0);
    let (c_pos, _) = locate_by_two_distances(
        Point::ORIGIN,
        b_pos,
        net.edge_length(a, c).unwrap(),
        net.edge_length(b, c).unwrap(),
    )
    .map_err(|_| TrilaterationError::Degenerate)?;

    let mut positions = vec![None; net.len()];
    positions[a] = Some(Point::ORIGIN);
    positions[b] = Some(b_pos);
    positions[c] = Some(c_pos);

    let mut sweeps = 0;
    loop {
        sweeps += 1;
        let mut changed = false;
        for &v in order {
            if positions[v].is_some() {
                continue;
            }
            let refs: Vec<(Point, f64)> = net
                .neighbors(v)
                .iter()
                .filter_map(|&(u, d)| positions[u].map(|p| (p, d)))
                .collect();
            if refs.len() < 3 {
                continue;
            }
            if let Ok(p) = locate_by_distances(&refs) {
                positions[v] = Some(p);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(TrilaterationRun {
        triangle,
        positions,
        sweeps,
    })
}

/// All triangles `a < b < c` of mutually adjacent nodes.
pub fn triangles(net: &Network) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..net.len() {
        let higher: Vec<usize> = net.neighbors(a).iter().map(|&(u, _)| u).filter(|&u| u > a).collect();
        for (i, &b) in higher.iter().enumerate() {
            for &c in &higher[i + 1..] {
                if net.are_adjacent(b, c) {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    /// `(triangle, localized count)` per seed tried.
    pub per_seed: Vec<([usize; 3], usize)>,
    pub best: usize,
    pub worst: usize,
    /// Localized count → number of seeds.
    pub histogram: BTreeMap<usize, usize>,
    pub total_triangles: usize,
    pub sampled: bool,
}

impl SweepStats {
    pub fn best_triangle(&self) -> Option<[usize; 3]> {
        self.per_seed
            .iter()
            .find(|&&(_, c)| c == self.best)
            .map(|&(t, _)| t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub max_triangles: usize,
    pub seed: u64,
    /// Worker threads; `1` runs inline.
    pub jobs: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            max_triangles: MAX_EXHAUSTIVE_TRIANGLES,
            seed: 0,
            jobs: 1,
        }
    }
}

pub fn sweep_all_triangles(net: &Network) -> SweepStats {
    sweep_triangles(net, &SweepOptions::default())
}

/// Trilaterate from every triangle, or from a seeded sample of
/// `max_triangles` of them when there are more.
pub fn sweep_triangles(net: &Network, opts: &SweepOptions) -> SweepStats {
    let mut all = triangles(net);
    let total_triangles = all.len();
    let sampled = total_triangles > opts.max_triangles;
    if sampled {
        let mut rng = seed::rng(opts.seed, "trilateration/sample");
        all.shuffle(&mut rng);
        all.truncate(opts.max_triangles);
        all.sort();
    }
    let run = |t: &[usize; 3]| {
        let count = trilaterate_from(net, *t).map(|r| r.localized_count()).unwrap_or(0);
        (*t, count)
    };
    let per_seed: Vec<([usize; 3], usize)> = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| all.par_iter().map(run).collect())
    } else {
        all.iter().map(run).collect()
    };
    let mut histogram = BTreeMap::new();
    for &(_, c) in &per_seed {
        *histogram.entry(c).or_insert(0) += 1;
    }
    SweepStats {
        best: per_seed.iter().map(|&(_, c)| c).max().unwrap_or(0),
        worst: per_seed.iter().map(|&(_, c)| c).min().unwrap_or(0),
        per_seed,
        histogram,
        total_triangles,
        sampled,
    }
}
