#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use commwheel::geometry::{coverage_interval, Point};
use commwheel::network::{build_udg, generate_random, Network};
use proptest::prelude::*;

/// The random family shared by the oracle, wheel and main-theorem checks:
/// `n` cycles through `[50, 200]` and the mean degree sweeps 6 to 28.5.
pub fn family_params(i: u64) -> (usize, f64) {
    let n = 50 + (i as usize * 37) % 151;
    let density = 6.0 + (i % 10) as f64 * 2.5;
    let side = (n as f64 * PI / density).sqrt();
    (n, side)
}

pub fn family_network(i: u64) -> Network {
    let (n, side) = family_params(i);
    generate_random(n, side, side, 1.0, i).expect("family network")
}

/// Coverage of angle `theta` on the circle about `v` by any neighbor,
/// decided pointwise from coordinates.
pub fn sampled_covered(net: &Network, v: usize, theta: f64) -> bool {
    let p = net.position(v) + Point::from_polar(net.r(), theta);
    net.neighbors(v)
        .iter()
        .any(|&(u, _)| commwheel::geometry::distance(p, net.position(u)) <= net.r())
}

/// Dense-sampling stand-in for the arc-union oracle. Only trustworthy when
/// every gap or overlap is wider than the sampling step, so callers compare
/// it only away from near-tangent configurations.
pub fn sampled_interior(net: &Network, v: usize, samples: usize) -> bool {
    (0..samples).all(|i| sampled_covered(net, v, TAU * i as f64 / samples as f64))
}

/// Smallest gap or overlap between arc endpoints around `v`, in radians.
pub fn endpoint_margin(net: &Network, v: usize) -> f64 {
    let mut ends = Vec::new();
    for &(u, _) in net.neighbors(v) {
        if let Ok(a) = coverage_interval(net.position(v), net.position(u), net.r()) {
            ends.push(a.start());
            ends.push(a.end());
        }
    }
    ends.sort_by(f64::total_cmp);
    let mut margin = f64::INFINITY;
    for w in ends.windows(2) {
        margin = margin.min(w[1] - w[0]);
    }
    if let (Some(first), Some(last)) = (ends.first(), ends.last()) {
        margin = margin.min(first + TAU - last);
    }
    margin
}

/// A small cluster around a node at the origin (index 0, id 0), rejected
/// unless it passes the generator margins.
pub fn cluster(points: &[(f64, f64)]) -> Option<Network> {
    let mut nodes = vec![(0u64, Point::ORIGIN)];
    nodes.extend(points.iter().enumerate().map(|(i, &(x, y))| (i as u64 + 1, Point::new(x, y))));
    build_udg(&nodes, 1.0).ok()
}

pub fn cluster_points(min: usize, max: usize, radius: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-radius..radius, -radius..radius), min..=max)
}

/// A point strictly inside the unit range of the origin.
pub fn in_range() -> impl Strategy<Value = Point> {
    (0.01f64..0.999, 0.0..TAU).prop_map(|(d, a)| Point::from_polar(d, a))
}

/// Neighbors spread around the origin plus a few nodes beyond its range;
/// the origin is interior in most draws.
pub fn hub_cluster() -> impl Strategy<Value = Vec<(f64, f64)>> {
    let near = prop::collection::vec((0.2f64..0.95, 0.0..TAU), 5..=11);
    let far = prop::collection::vec((1.0f64..1.7, 0.0..TAU), 0..=4);
    (near, far).prop_map(|(near, far)| {
        near.into_iter()
            .chain(far)
            .map(|(d, a)| (d * a.cos(), d * a.sin()))
            .collect()
    })
}
