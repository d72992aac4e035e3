//! Closed boundary curves parametrized by arclength.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

pub type Point = [f64; 2];

/// Serialized description of a curve: `{"kind": ..., "params": {...}}`.
///
/// Star curves use the radius function
/// `r(phi) = cos[0] + sum_j cos[j] cos(j phi) + sum_j sin[j-1] sin(j phi)`
/// around `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum CurveSpec {
    Circle {
        radius: f64,
        #[serde(default)]
        center: Point,
    },
    Polygon {
        vertices: Vec<Point>,
    },
    Star {
        center: Point,
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

const STAR_PANELS: usize = 512;
const STAR_GAUSS: usize = 10;

#[derive(Clone, Debug)]
enum Geometry {
    Circle,
    Polygon { cumulative: Vec<f64> },
    Star { cumulative: Vec<f64>, rule: (Vec<f64>, Vec<f64>) },
}

/// A simple closed curve with cached arclength data.
///
/// Parameters `t` are arclength values; any real `t` is accepted and wrapped
/// into `[0, total_length)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CurveSpec", into = "CurveSpec")]
pub struct BoundaryCurve {
    spec: CurveSpec,
    total_length: f64,
    geometry: Geometry,
}

impl PartialEq for BoundaryCurve {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl From<BoundaryCurve> for CurveSpec {
    fn from(c: BoundaryCurve) -> Self {
        c.spec
    }
}

impl TryFrom<CurveSpec> for BoundaryCurve {
    type Error = Error;
    fn try_from(spec: CurveSpec) -> Result<Self> {
        BoundaryCurve::new(spec)
    }
}

impl BoundaryCurve {
    pub fn new(spec: CurveSpec) -> Result<Self> {
        match &spec {
            CurveSpec::Circle { radius, center } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidCurve(format!("circle radius must be positive, got {radius}")));
                }
                Ok(Self { total_length: TAU * radius, geometry: Geometry::Circle, spec })
            }
            CurveSpec::Polygon { vertices } => {
                validate_polygon(vertices)?;
                let mut cumulative = Vec::with_capacity(vertices.len() + 1);
                cumulative.push(0.0);
                let n = vertices.len();
                for i in 0..n {
                    let l = dist(vertices[i], vertices[(i + 1) % n]);
                    cumulative.push(cumulative[i] + l);
                }
                let total_length = cumulative[n];
                Ok(Self { total_length, geometry: Geometry::Polygon { cumulative }, spec })
            }
            CurveSpec::Star { center, cos, sin } => {
                if cos.is_empty() || !center.iter().chain(cos).chain(sin).all(|c| c.is_finite()) {
                    return Err(Error::InvalidCurve("star needs finite coefficients and a constant term".into()));
                }
                let samples = 4096;
                for i in 0..samples {
                    let phi = TAU * i as f64 / samples as f64;
                    let (r, _) = star_radius(cos, sin, phi);
                    if r <= 0.0 {
                        return Err(Error::InvalidCurve(format!(
                            "star radius is not positive at phi = {phi:.6} (r = {r})"
                        )));
                    }
                }
                let rule = gauss_legendre(STAR_GAUSS);
                let mut cumulative = Vec::with_capacity(STAR_PANELS + 1);
                cumulative.push(0.0);
                let dphi = TAU / STAR_PANELS as f64;
                for p in 0..STAR_PANELS {
                    let lo = p as f64 * dphi;
                    let seg = panel_integral(&rule, cos, sin, lo, lo + dphi);
                    cumulative.push(cumulative[p] + seg);
                }
                let total_length = cumulative[STAR_PANELS];
                Ok(Self { total_length, geometry: Geometry::Star { cumulative, rule }, spec })
            }
        }
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Self::new(CurveSpec::Circle { radius, center: [0.0, 0.0] })
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Self::new(CurveSpec::Polygon { vertices })
    }

    pub fn star(center: Point, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::new(CurveSpec::Star { center, cos, sin })
    }

    /// The unit square `[0,1]^2`, parametrized from the origin counterclockwise.
    pub fn unit_square() -> Self {
        Self::polygon(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).expect("unit square is valid")
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn kind(&self) -> &'static str {
        match self.spec {
            CurveSpec::Circle { .. } => "circle",
            CurveSpec::Polygon { .. } => "polygon",
            CurveSpec::Star { .. } => "star",
        }
    }

    /// Wraps an arclength parameter into `[0, total_length)`.
    pub fn wrap(&self, t: f64) -> f64 {
        let w = t.rem_euclid(self.total_length);
        if w >= self.total_length {
            0.0
        } else {
            w
        }
    }

    /// Shortest distance between two parameters measured along the curve.
    pub fn cyclic_distance(&self, t: f64, u: f64) -> f64 {
        let d = (t - u).rem_euclid(self.total_length);
        d.min(self.total_length - d)
    }

    /// Parameters of polygon corners; empty for smooth curves.
    pub fn corner_params(&self) -> Vec<f64> {
        match &self.geometry {
            Geometry::Polygon { cumulative } => cumulative[..cumulative.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }

    pub fn point(&self, t: f64) -> Point {
        let t = self.wrap(t);
        match (&self.spec, &self.geometry) {
            (CurveSpec::Circle { radius, center }, _) => {
                let a = t / radius;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
            (CurveSpec::Polygon { vertices }, Geometry::Polygon { cumulative }) => {
                let i = locate(cumulative, t);
                let n = vertices.len();
                let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                let len = cumulative[i + 1] - cumulative[i];
                let s = ((t - cumulative[i]) / len).clamp(0.0, 1.0);
                [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]
            }
            (CurveSpec::Star { center, cos, sin }, Geometry::Star { .. }) => {
                let phi = self.star_angle(t);
                let (r, _) = star_radius(cos, sin, phi);
                [center[0] + r * phi.cos(), center[1] + r * phi.sin()]
            }
            _ => unreachable!("geometry cache always matches the spec"),
        }
    }

    /// Unit tangents just before and just after `t`. They differ only at
    /// polygon corners.
    pub fn one_sided_tangents(&self, t: f64) -> (Point, Point) {
        match (&self.spec, &self.geometry) {
            (CurveSpec::Polygon { vertices }, Geometry::Polygon { cumulative }) => {
                let n = vertices.len();
                let tw = self.wrap(t);
                let edge_dir = |i: usize| {
                    let (p, q) = (vertices[i % n], vertices[(i + 1) % n]);
                    let l = dist(p, q);
                    [(q[0] - p[0]) / l, (q[1] - p[1]) / l]
                };
                let i = locate(cumulative, tw);
                let tol = 1e-12 * self.total_length;
                if (tw - cumulative[i]).abs() <= tol {
                    (edge_dir(i + n - 1), edge_dir(i))
                } else if (cumulative[i + 1] - tw).abs() <= tol {
                    (edge_dir(i), edge_dir(i + 1))
                } else {
                    (edge_dir(i), edge_dir(i))
                }
            }
            _ => {
                let d = self.tangent(t);
                (d, d)
            }
        }
    }

    /// Unit tangent in the direction of increasing parameter.
    pub fn tangent(&self, t: f64) -> Point {
        let t = self.wrap(t);
        match (&self.spec, &self.geometry) {
            (CurveSpec::Circle { radius, .. }, _) => {
                let a = t / radius;
                [-a.sin(), a.cos()]
            }
            (CurveSpec::Polygon { .. }, _) => self.one_sided_tangents(t).1,
            (CurveSpec::Star { cos, sin, .. }, _) => {
                let phi = self.star_angle(t);
                let (r, dr) = star_radius(cos, sin, phi);
                let dx = dr * phi.cos() - r * phi.sin();
                let dy = dr * phi.sin() + r * phi.cos();
                let s = dx.hypot(dy);
                [dx / s, dy / s]
            }
        }
    }

    /// Same curve scaled by `factor` about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let spec = match &self.spec {
            CurveSpec::Circle { radius, center } => {
                CurveSpec::Circle { radius: radius * factor, center: [center[0] * factor, center[1] * factor] }
            }
            CurveSpec::Polygon { vertices } => {
                CurveSpec::Polygon { vertices: vertices.iter().map(|p| [p[0] * factor, p[1] * factor]).collect() }
            }
            CurveSpec::Star { center, cos, sin } => CurveSpec::Star {
                center: [center[0] * factor, center[1] * factor],
                cos: cos.iter().map(|c| c * factor).collect(),
                sin: sin.iter().map(|c| c * factor).collect(),
            },
        };
        Self::new(spec)
    }

    /// Star curves only: polar angle at arclength `t` (already wrapped).
    fn star_angle(&self, t: f64) -> f64 {
        let (CurveSpec::Star { cos, sin, .. }, Geometry::Star { cumulative, rule }) = (&self.spec, &self.geometry)
        else {
            unreachable!()
        };
        let dphi = TAU / STAR_PANELS as f64;
        let p = locate(cumulative, t);
        let lo = p as f64 * dphi;
        let target = t - cumulative[p];
        let panel_len = cumulative[p + 1] - cumulative[p];
        let mut phi = lo + dphi * (target / panel_len);
        let (mut a, mut b) = (lo, lo + dphi);
        for _ in 0..60 {
            let s = panel_integral(rule, cos, sin, lo, phi) - target;
            if s.abs() <= 1e-15 * panel_len.max(1.0) {
                break;
            }
            if s > 0.0 {
                b = phi;
            } else {
                a = phi;
            }
            let (r, dr) = star_radius(cos, sin, phi);
            let speed = r.hypot(dr);
            let mut next = phi - s / speed;
            if !(next > a && next < b) {
                next = 0.5 * (a + b);
            }
            if (next - phi).abs() < 1e-15 {
                phi = next;
                break;
            }
            phi = next;
        }
        phi
    }
}

fn star_radius(cos: &[f64], sin: &[f64], phi: f64) -> (f64, f64) {
    let mut r = cos[0];
    let mut dr = 0.0;
    for (j, c) in cos.iter().enumerate().skip(1) {
        let jf = j as f64;
        r += c * (jf * phi).cos();
        dr -= jf * c * (jf * phi).sin();
    }
    for (j0, s) in sin.iter().enumerate() {
        let jf = (j0 + 1) as f64;
        r += s * (jf * phi).sin();
        dr += jf * s * (jf * phi).cos();
    }
    (r, dr)
}

fn panel_integral(rule: &(Vec<f64>, Vec<f64>), cos: &[f64], sin: &[f64], a: f64, b: f64) -> f64 {
    let (xs, ws) = rule;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (x, w) in xs.iter().zip(ws) {
        let (r, dr) = star_radius(cos, sin, mid + half * x);
        s += w * r.hypot(dr);
    }
    s * half
}

/// Index `i` with `cumulative[i] <= t < cumulative[i + 1]`, clamped to the last panel.
fn locate(cumulative: &[f64], t: f64) -> usize {
    let last = cumulative.len() - 2;
    match cumulative.binary_search_by(|c| c.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(last),
        Err(i) => i.saturating_sub(1).min(last),
    }
}

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn validate_polygon(v: &[Point]) -> Result<()> {
    let n = v.len();
    if n < 3 {
        return Err(Error::InvalidCurve(format!("polygon needs at least 3 vertices, got {n}")));
    }
    if !v.iter().flatten().all(|c| c.is_finite()) {
        return Err(Error::InvalidCurve("polygon vertices must be finite".into()));
    }
    let area2: f64 = (0..n).map(|i| cross([0.0, 0.0], v[i], v[(i + 1) % n])).sum();
    if area2 <= 0.0 {
        return Err(Error::InvalidCurve("polygon must be positively oriented (counterclockwise)".into()));
    }
    for i in 0..n {
        if dist(v[i], v[(i + 1) % n]) == 0.0 {
            return Err(Error::InvalidCurve(format!("polygon edge {i} has zero length")));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::InvalidCurve(format!("polygon edges {i} and {j} intersect")));
            }
        }
    }
    // Consecutive edges must not fold back onto each other.
    for i in 0..n {
        let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
        if cross(a, b, c) == 0.0 {
            let d1 = [b[0] - a[0], b[1] - a[1]];
            let d2 = [c[0] - b[0], c[1] - b[1]];
            if d1[0] * d2[0] + d1[1] * d2[1] < 0.0 {
                return Err(Error::InvalidCurve(format!("polygon folds back at vertex {}", (i + 1) % n)));
            }
        }
    }
    Ok(())
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, p: Point| {
        p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
    };
    (d1 == 0.0 && on(q1, q2, p1))
        || (d2 == 0.0 && on(q1, q2, p2))
        || (d3 == 0.0 && on(p1, p2, q1))
        || (d4 == 0.0 && on(p1, p2, q2))
}

/// Polar angle helper used by tests and experiments.
pub fn polar_angle(p: Point) -> f64 {
    let a = p[1].atan2(p[0]);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}
