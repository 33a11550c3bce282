//! Planar primitives for disks sharing a common radius `r`.
//!
//! Everything here is a pure function of its arguments. Angles are radians,
//! normalized to `[0, 2π)`; lengths are in range units.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used for every comparison against `r`.
pub const REL_TOL: f64 = 1e-9;

/// Relative residual accepted when solving for a point from measured distances.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("coincident points")]
    Coincident,
    #[error("points farther apart ({distance}) than the range {range}")]
    OutOfRange { distance: f64, range: f64 },
    #[error("circles do not intersect in two distinct points")]
    NoIntersection,
    #[error("reference points are collinear")]
    Collinear,
    #[error("distances are inconsistent (residual {residual})")]
    Inconsistent { residual: f64 },
    #[error("point sets are not congruent (residual {residual})")]
    NotCongruent { residual: f64 },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(self) -> f64 {
        normalize_angle(self.y.atan2(self.x))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed difference `a - b` wrapped into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

pub fn distance(p: Point, q: Point) -> f64 {
    (p - q).norm()
}

/// Closed arc `[center - half_width, center + half_width]` of a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularInterval {
    pub center: f64,
    pub half_width: f64,
}

impl AngularInterval {
    pub fn new(center: f64, half_width: f64) -> Self {
        debug_assert!(half_width >= 0.0);
        Self {
            center: normalize_angle(center),
            half_width,
        }
    }

    /// Clockwise end of the arc.
    pub fn start(&self) -> f64 {
        normalize_angle(self.center - self.half_width)
    }

    /// Counterclockwise end of the arc.
    pub fn end(&self) -> f64 {
        normalize_angle(self.center + self.half_width)
    }

    pub fn contains(&self, theta: f64, tol: f64) -> bool {
        angle_diff(theta, self.center).abs() <= self.half_width + tol
    }

    /// Arc containment; valid for arcs shorter than π, which is all that
    /// coverage arcs ever are.
    pub fn contains_interval(&self, other: &AngularInterval, tol: f64) -> bool {
        angle_diff(other.center, self.center).abs() + other.half_width <= self.half_width + tol
    }
}

fn check_pair(v: Point, u: Point, r: f64) -> Result<f64, GeometryError> {
    let d = distance(v, u);
    if d <= REL_TOL * r {
        return Err(GeometryError::Coincident);
    }
    if d > r * (1.0 + REL_TOL) {
        return Err(GeometryError::OutOfRange { distance: d, range: r });
    }
    Ok(d)
}

/// Half-width of the arc of `∂Z(v)` covered by `Z(u)` when `d(v, u) = d`.
pub fn coverage_half_width(d: f64, r: f64) -> f64 {
    (d / (2.0 * r)).clamp(-1.0, 1.0).acos()
}

/// The arc of the circle of radius `r` about `v` that lies inside the disk
/// of radius `r` about `u`.
pub fn coverage_interval(v: Point, u: Point, r: f64) -> Result<AngularInterval, GeometryError> {
    let d = check_pair(v, u, r)?;
    Ok(AngularInterval::new((u - v).angle(), coverage_half_width(d, r)))
}

/// Intersections of the two boundary circles, returned as `(ccw, cw)`.
///
/// The clockwise walk along the circle about `v` from `ccw` to `cw` sweeps
/// less than π.
pub fn boundary_intersections(v: Point, u: Point, r: f64) -> Result<(Point, Point), GeometryError> {
    let arc = coverage_interval(v, u, r)?;
    Ok((
        v + Point::from_polar(r, arc.center + arc.half_width),
        v + Point::from_polar(r, arc.center - arc.half_width),
    ))
}

/// Closed-disk membership with an absolute tolerance band.
pub fn covers(p: Point, center: Point, r: f64, tol: f64) -> bool {
    distance(p, center) <= r + tol
}

/// Whether the union of closed arcs covers the entire circle.
///
/// Gaps no wider than `tol` are treated as covered.
pub fn arcs_cover_circle(arcs: &[AngularInterval], tol: f64) -> bool {
    if arcs.iter().any(|a| a.half_width >= PI - tol) {
        return true;
    }
    if arcs.is_empty() {
        return false;
    }
    // Split arcs that wrap past 2π, then sweep [0, 2π] for gaps.
    let mut spans: Vec<(f64, f64)> = Vec::with_capacity(arcs.len() * 2);
    for a in arcs {
        let s = a.start();
        let e = s + 2.0 * a.half_width;
        if e > TAU {
            spans.push((s, TAU));
            spans.push((0.0, e - TAU));
        } else {
            spans.push((s, e));
        }
    }
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = 0.0;
    for &(s, e) in &spans {
        if s > reach + tol {
            return false;
        }
        reach = f64::max(reach, e);
    }
    reach + tol >= TAU
}

/// Both points at distance `da` from `a` and `db` from `b`.
///
/// The point to the left of the directed segment `a → b` comes first.
pub fn locate_by_two_distances(
    a: Point,
    b: Point,
    da: f64,
    db: f64,
) -> Result<(Point, Point), GeometryError> {
    let ab = b - a;
    let d = ab.norm();
    let scale = d.max(da).max(db);
    if d <= REL_TOL * scale {
        return Err(GeometryError::Coincident);
    }
    let along = (da * da - db * db + d * d) / (2.0 * d);
    let h2 = da * da - along * along;
    if h2 <= (REL_TOL * scale).powi(2) {
        return Err(GeometryError::NoIntersection);
    }
    let h = h2.sqrt();
    let ex = ab * (1.0 / d);
    let ey = Point::new(-ex.y, ex.x);
    let foot = a + ex * along;
    Ok((foot + ey * h, foot - ey * h))
}

/// Least-squares point from three or more `(reference, distance)` pairs.
///
/// Rejects near-collinear references and inputs whose best fit misses some
/// constraint by more than [`RESIDUAL_TOL`] relative to the input scale.
pub fn locate_by_distances(refs: &[(Point, f64)]) -> Result<Point, GeometryError> {
    if refs.len() < 3 {
        return Err(GeometryError::TooFewPoints {
            needed: 3,
            got: refs.len(),
        });
    }
    let n = refs.len() as f64;
    let centroid = refs.iter().fold(Point::ORIGIN, |acc, (p, _)| acc + *p) * (1.0 / n);
    let shifted: Vec<(Point, f64)> = refs.iter().map(|(p, d)| (*p - centroid, *d)).collect();
    let scale = shifted
        .iter()
        .map(|(p, d)| p.norm().max(*d))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);

    // Subtracting the first circle equation from the others leaves a linear
    // system A x = b with rows 2 (p_i - p_0).
    let (p0, d0) = shifted[0];
    let mut ata = [[0.0_f64; 2]; 2];
    let mut atb = [0.0_f64; 2];
    for &(p, d) in &shifted[1..] {
        let row = (p - p0) * 2.0;
        let rhs = p.dot(p) - p0.dot(p0) - d * d + d0 * d0;
        ata[0][0] += row.x * row.x;
        ata[0][1] += row.x * row.y;
        ata[1][1] += row.y * row.y;
        atb[0] += row.x * rhs;
        atb[1] += row.y * rhs;
    }
    ata[1][0] = ata[0][1];
    let trace = ata[0][0] + ata[1][1];
    let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
    // λ_min / λ_max of the normal matrix, bounded below via det / trace².
    if trace <= 0.0 || det / (trace * trace) <= 1e-12 {
        return Err(GeometryError::Collinear);
    }
    let x = (atb[0] * ata[1][1] - atb[1] * ata[0][1]) / det;
    let y = (ata[0][0] * atb[1] - ata[1][0] * atb[0]) / det;
    let mut sol = Point::new(x, y);

    // One Gauss-Newton step on the true (non-linearized) residuals.
    let mut jtj = [[0.0_f64; 2]; 2];
    let mut jtr = [0.0_f64; 2];
    for &(p, d) in &shifted {
        let diff = sol - p;
        let dist = diff.norm();
        if dist <= f64::EPSILON * scale {
            continue;
        }
        let g = diff * (1.0 / dist);
        let res = dist - d;
        jtj[0][0] += g.x * g.x;
        jtj[0][1] += g.x * g.y;
        jtj[1][1] += g.y * g.y;
        jtr[0] += g.x * res;
        jtr[1] += g.y * res;
    }
    let gdet = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[0][1];
    if gdet > 1e-12 * (jtj[0][0] + jtj[1][1]).powi(2) {
        let dx = (jtr[0] * jtj[1][1] - jtr[1] * jtj[0][1]) / gdet;
        let dy = (jtj[0][0] * jtr[1] - jtj[0][1] * jtr[0]) / gdet;
        sol = sol - Point::new(dx, dy);
    }

    let residual = shifted
        .iter()
        .map(|&(p, d)| (distance(sol, p) - d).abs())
        .fold(0.0_f64, f64::max);
    if residual > RESIDUAL_TOL * scale {
        return Err(GeometryError::Inconsistent { residual });
    }
    Ok(sol + centroid)
}

/// The unique point at the given distances from three non-collinear points.
pub fn locate_by_three_distances(refs: [Point; 3], dists: [f64; 3]) -> Result<Point, GeometryError> {
    let pairs: Vec<(Point, f64)> = refs.iter().copied().zip(dists).collect();
    locate_by_distances(&pairs)
}

/// A distance-preserving map of the plane, `p ↦ linear · p + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    /// Row-major 2×2 orthogonal matrix.
    pub linear: [[f64; 2]; 2],
    pub translation: Point,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        linear: [[1.0, 0.0], [0.0, 1.0]],
        translation: Point::ORIGIN,
    };

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            linear: [[c, -s], [s, c]],
            translation: Point::ORIGIN,
        }
    }

    /// Reflection across the x-axis.
    pub fn mirror_x() -> Self {
        Self {
            linear: [[1.0, 0.0], [0.0, -1.0]],
            translation: Point::ORIGIN,
        }
    }

    pub fn translate(t: Point) -> Self {
        Self {
            translation: t,
            ..Self::IDENTITY
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        let m = &self.linear;
        Point::new(
            m[0][0] * p.x + m[0][1] * p.y,
            m[1][0] * p.x + m[1][1] * p.y,
        ) + self.translation
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.linear;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn is_reflection(&self) -> bool {
        self.determinant() < 0.0
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let a = &self.linear;
        let b = &other.linear;
        let mut linear = [[0.0; 2]; 2];
        for (i, row) in linear.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Isometry {
            linear,
            translation: self.apply(other.translation),
        }
    }

    pub fn inverse(&self) -> Isometry {
        let m = &self.linear;
        let linear = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
        let inv = Isometry {
            linear,
            translation: Point::ORIGIN,
        };
        let t = inv.apply(self.translation);
        Isometry {
            linear,
            translation: -t,
        }
    }
}

/// Best-fit isometry (rotation or reflection plus translation) taking `src`
/// onto `dst` in the least-squares sense.
///
/// Fails when `src` is collinear (handedness undetermined) or when the fitted
/// map misses some correspondence by more than [`RESIDUAL_TOL`] relative to
/// the spread of the points.
pub fn fit_isometry_points(src: &[Point], dst: &[Point]) -> Result<Isometry, GeometryError> {
    assert_eq!(src.len(), dst.len(), "correspondence lists differ in length");
    if src.len() < 3 {
        return Err(GeometryError::TooFewPoints {
            needed: 3,
            got: src.len(),
        });
    }
    let n = src.len() as f64;
    let sc = src.iter().fold(Point::ORIGIN, |a, p| a + *p) * (1.0 / n);
    let dc = dst.iter().fold(Point::ORIGIN, |a, p| a + *p) * (1.0 / n);

    // Second moments of the centered source decide collinearity.
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let (mut a_rot, mut b_rot, mut a_ref, mut b_ref) = (0.0, 0.0, 0.0, 0.0);
    for (s, d) in src.iter().zip(dst) {
        let s = *s - sc;
        let d = *d - dc;
        sxx += s.x * s.x;
        sxy += s.x * s.y;
        syy += s.y * s.y;
        a_rot += s.dot(d);
        b_rot += s.cross(d);
        let m = Point::new(s.x, -s.y);
        a_ref += m.dot(d);
        b_ref += m.cross(d);
    }
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    if tr <= 0.0 || det / (tr * tr) <= 1e-12 {
        return Err(GeometryError::Collinear);
    }
    let rot_score = a_rot.hypot(b_rot);
    let ref_score = a_ref.hypot(b_ref);
    let linear = if rot_score >= ref_score {
        Isometry::rotation(b_rot.atan2(a_rot)).linear
    } else {
        Isometry::rotation(b_ref.atan2(a_ref))
            .compose(&Isometry::mirror_x())
            .linear
    };
    let mut iso = Isometry {
        linear,
        translation: Point::ORIGIN,
    };
    iso.translation = dc - iso.apply(sc);

    let spread = tr.sqrt().max(f64::MIN_POSITIVE);
    let residual = src
        .iter()
        .zip(dst)
        .map(|(s, d)| distance(iso.apply(*s), *d))
        .fold(0.0_f64, f64::max);
    if residual > RESIDUAL_TOL * spread {
        return Err(GeometryError::NotCongruent { residual });
    }
    Ok(iso)
}

/// Isometry taking the triangle `src` onto the congruent triangle `dst`.
pub fn fit_isometry(src: [Point; 3], dst: [Point; 3]) -> Result<Isometry, GeometryError> {
    fit_isometry_points(&src, &dst)
}

/// Height of the triangle `abc` over its longest side.
pub fn triangle_min_height(a: Point, b: Point, c: Point) -> f64 {
    let longest = distance(a, b).max(distance(b, c)).max(distance(a, c));
    if longest == 0.0 {
        return 0.0;
    }
    ((b - a).cross(c - a)).abs() / longest
}
