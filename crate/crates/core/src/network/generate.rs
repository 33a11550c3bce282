//! Network generators: uniform random deployments and the honeycomb family
//! on which trilateration stalls at its seed triangle.

use rand::Rng;

use super::{
    build_udg, classify_by_oracle, is_connected, strong_interior_connected, Network, NetworkError,
    MIN_SEPARATION, MIN_TRIANGLE_HEIGHT, RANGE_MARGIN,
};
use crate::geometry::{distance, triangle_min_height, Point};
use crate::protocol::{run_simulation, SimConfig};
use crate::seed;
use crate::trilateration::sweep_all_triangles;

const MAX_ATTEMPTS: usize = 200;
const MAX_DRAWS_PER_NODE: usize = 10_000;

/// Uniform random deployment in `[0, width] × [0, height]`.
///
/// Points are inserted one at a time; a draw violating the separation,
/// range-margin or collinearity margins against already placed points is
/// redrawn. A disconnected result restarts from a fresh labeled stream.
pub fn generate_random(
    n: usize,
    width: f64,
    height: f64,
    r: f64,
    seed: u64,
) -> Result<Network, NetworkError> {
    if n < 4 {
        return Err(NetworkError::TooFewNodes { needed: 4, got: n });
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(NetworkError::BadRange(r));
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seed::rng(seed, &format!("generate_random/attempt/{attempt}"));
        let Some(points) = place_points(&mut rng, n, width, height, r) else {
            continue;
        };
        let nodes: Vec<(u64, Point)> = points.into_iter().enumerate().map(|(i, p)| (i as u64, p)).collect();
        match build_udg(&nodes, r) {
            Ok(net) => return Ok(net),
            Err(NetworkError::Disconnected) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(NetworkError::DensityTooLow {
        attempts: MAX_ATTEMPTS,
    })
}

fn place_points(rng: &mut impl Rng, n: usize, width: f64, height: f64, r: f64) -> Option<Vec<Point>> {
    let mut placed: Vec<Point> = Vec::with_capacity(n);
    'node: for _ in 0..n {
        for _ in 0..MAX_DRAWS_PER_NODE {
            let p = Point::new(rng.gen::<f64>() * width, rng.gen::<f64>() * height);
            if acceptable(&placed, p, r) {
                placed.push(p);
                continue 'node;
            }
        }
        return None;
    }
    Some(placed)
}

fn acceptable(placed: &[Point], p: Point, r: f64) -> bool {
    let mut near = Vec::new();
    for &q in placed {
        let d = distance(p, q);
        if d < MIN_SEPARATION * r || (d - r).abs() < RANGE_MARGIN * r {
            return false;
        }
        if d <= 2.0 * r {
            near.push(q);
        }
    }
    for (i, &a) in near.iter().enumerate() {
        for &b in &near[i + 1..] {
            if distance(a, b) <= 2.0 * r && triangle_min_height(p, a, b) < MIN_TRIANGLE_HEIGHT * r {
                return false;
            }
        }
    }
    true
}

/// Lattice spacing of the honeycomb family, relative to `r`.
const HONEYCOMB_SPACING: f64 = 0.8;
/// Per-coordinate jitter amplitude, relative to `r`.
const HONEYCOMB_JITTER: f64 = 0.04;
const HONEYCOMB_SEED: u64 = 0x5eed_0f_c0_ffee;

/// Self-check results that accompany a honeycomb network.
#[derive(Debug, Clone, PartialEq)]
pub struct HoneycombReport {
    pub network: Network,
    pub strong_count: usize,
    pub trilateration_best: usize,
    pub trilateration_worst: usize,
    pub wheel_localized: usize,
}

/// The `k`-th member of a family on which trilateration never gets past its
/// seed triangle while the wheel protocol localizes every node.
///
/// Nodes sit on a jittered triangular lattice filling a hexagon of `k + 1`
/// rings around a center node. With spacing `0.8 r` every lattice neighbor is
/// in range and every second-ring lattice point is out of range, so the graph
/// is the triangular lattice itself, which contains no `K4`: no node is ever
/// adjacent to all three vertices of a triangle. Interior lattice nodes see
/// six neighbors whose arcs overlap, so the inner `k - 1` rings are strongly
/// interior.
///
/// The construction is validated, not assumed: the strong interior must be
/// nonempty and connected, an exhaustive trilateration sweep must localize
/// exactly three nodes from every triangle, and a protocol run must localize
/// every node.
pub fn generate_honeycomb_family(k: usize) -> Result<HoneycombReport, NetworkError> {
    if k == 0 {
        return Err(NetworkError::Fixture("k must be at least 1".into()));
    }
    let rings = k as i64 + 1;
    let r = 1.0;
    let s = HONEYCOMB_SPACING * r;
    let e1 = Point::new(s, 0.0);
    let e2 = Point::from_polar(s, std::f64::consts::FRAC_PI_3);
    let mut lattice = Vec::new();
    for a in -rings..=rings {
        for b in -rings..=rings {
            // hex distance on axial coordinates
            if (a.abs() + b.abs() + (a + b).abs()) / 2 <= rings {
                lattice.push(e1 * a as f64 + e2 * b as f64);
            }
        }
    }

    let mut last_err = NetworkError::Fixture("no attempt made".into());
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = seed::rng(HONEYCOMB_SEED, &format!("honeycomb/{k}/{attempt}"));
        let nodes: Vec<(u64, Point)> = lattice
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let jitter = Point::new(
                    rng.gen_range(-HONEYCOMB_JITTER..HONEYCOMB_JITTER),
                    rng.gen_range(-HONEYCOMB_JITTER..HONEYCOMB_JITTER),
                ) * r;
                (i as u64, p + jitter)
            })
            .collect();
        match build_udg(&nodes, r) {
            Ok(net) => return self_check(net),
            Err(e @ (NetworkError::Collinear(..) | NetworkError::TooClose(..))) => last_err = e,
            Err(e) => return Err(e),
        }
    }
    Err(last_err)
}

fn self_check(network: Network) -> Result<HoneycombReport, NetworkError> {
    let classes = classify_by_oracle(&network);
    if !strong_interior_connected(&network, &classes) {
        return Err(NetworkError::Fixture("strong interior empty or disconnected".into()));
    }
    debug_assert!(is_connected(&network.adjacency, |_| true));
    let sweep = sweep_all_triangles(&network);
    if sweep.best != 3 || sweep.worst != 3 {
        return Err(NetworkError::Fixture(format!(
            "trilateration localized between {} and {} nodes",
            sweep.worst, sweep.best
        )));
    }
    let run = run_simulation(&network, &SimConfig::default());
    let wheel_localized = run.localized_count();
    if wheel_localized != network.len() {
        return Err(NetworkError::Fixture(format!(
            "wheel protocol localized {wheel_localized} of {} nodes",
            network.len()
        )));
    }
    Ok(HoneycombReport {
        strong_count: classes.strong.len(),
        trilateration_best: sweep.best,
        trilateration_worst: sweep.worst,
        wheel_localized,
        network,
    })
}
