//! Hausdorff distances between closed boundary sets.
//!
//! The arclength variant is exact for every curve. The euclidean variant is
//! exact on circles (chord length is monotone in arclength) and on polygons
//! (lower envelope of convex point-to-segment distances, maximized at
//! segment ends or pairwise crossings). Star curves use a Lipschitz
//! branch-and-bound over the arclength parametrization, resolved to
//! `total_length / STAR_RESOLUTION_DIVISOR` with arc endpoints always evaluated.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::arcs::{ClosedArcSet, Interval};
use super::curve::{dist, BoundaryCurve, CurveSpec, Point};
use crate::error::{Error, Result};

pub const STAR_RESOLUTION_DIVISOR: f64 = 1e5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Arclength,
}

/// Hausdorff distance between two nonempty closed sets on the same curve.
pub fn hausdorff_distance(a: &ClosedArcSet, b: &ClosedArcSet, metric: Metric) -> Result<f64> {
    a.check_same_curve(b.curve())?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.is_full() == b.is_full() && a.intervals() == b.intervals() {
        return Ok(0.0);
    }
    let d = match metric {
        Metric::Arclength => directed_arclength(a, b).max(directed_arclength(b, a)),
        Metric::Euclidean => {
            let curve = a.curve();
            match curve.spec() {
                CurveSpec::Circle { radius, .. } => {
                    let s = directed_arclength(a, b).max(directed_arclength(b, a));
                    chord(*radius, s)
                }
                CurveSpec::Polygon { .. } => {
                    let pa = polylines(a);
                    let pb = polylines(b);
                    directed_polyline(&pa, &pb).max(directed_polyline(&pb, &pa))
                }
                CurveSpec::Star { .. } => {
                    let tol = curve.total_length() / STAR_RESOLUTION_DIVISOR;
                    directed_sampled(curve, a, b, tol).max(directed_sampled(curve, b, a, tol))
                }
            }
        }
    };
    Ok(d)
}

fn chord(radius: f64, arclength: f64) -> f64 {
    let s = arclength.min(std::f64::consts::PI * radius);
    2.0 * radius * (s / (2.0 * radius)).sin()
}

/// `sup_{t in A} dist_s(t, B)` along the curve.
fn directed_arclength(a: &ClosedArcSet, b: &ClosedArcSet) -> f64 {
    if b.is_full() {
        return 0.0;
    }
    let l = a.curve().total_length();
    let gaps = b.gaps();
    if a.is_full() {
        return gaps.iter().map(|g| 0.5 * g.len()).fold(0.0, f64::max);
    }
    let mut best: f64 = 0.0;
    for g in &gaps {
        let tent = |x: f64| (x - g.start).min(g.end - x);
        let mid = g.midpoint();
        for iv in a.intervals() {
            for shift in [-l, 0.0, l] {
                let lo = (iv.start + shift).max(g.start);
                let hi = (iv.end + shift).min(g.end);
                if lo > hi {
                    continue;
                }
                let v = if lo <= mid && mid <= hi { 0.5 * g.len() } else { tent(lo).max(tent(hi)) };
                best = best.max(v);
            }
        }
    }
    best
}

/// Closed set as polylines through the polygon corners it contains.
fn polylines(set: &ClosedArcSet) -> Vec<Vec<Point>> {
    let curve = set.curve();
    let l = curve.total_length();
    let corners = curve.corner_params();
    let pieces: Vec<Interval> = if set.is_full() { vec![Interval { start: 0.0, end: l }] } else { set.intervals().to_vec() };
    pieces
        .iter()
        .map(|iv| {
            let mut pts = vec![curve.point(iv.start)];
            let mut inner: Vec<f64> = corners
                .iter()
                .flat_map(|&c| [c, c + l])
                .filter(|&c| c > iv.start && c < iv.end)
                .collect();
            inner.sort_by(f64::total_cmp);
            pts.extend(inner.into_iter().map(|c| curve.point(c)));
            pts.push(curve.point(iv.end));
            pts
        })
        .collect()
}

fn segments(lines: &[Vec<Point>]) -> Vec<(Point, Point)> {
    let mut out = Vec::new();
    for line in lines {
        if line.len() == 1 {
            out.push((line[0], line[0]));
        }
        for w in line.windows(2) {
            out.push((w[0], w[1]));
        }
    }
    out
}

pub(crate) fn point_segment_distance(x: Point, u: Point, v: Point) -> f64 {
    let e = [v[0] - u[0], v[1] - u[1]];
    let e2 = e[0] * e[0] + e[1] * e[1];
    if e2 == 0.0 {
        return dist(x, u);
    }
    let tau = (((x[0] - u[0]) * e[0] + (x[1] - u[1]) * e[1]) / e2).clamp(0.0, 1.0);
    dist(x, [u[0] + tau * e[0], u[1] + tau * e[1]])
}

/// One quadratic piece `c0 + c1 s + c2 s^2` of a squared distance, valid on `[lo, hi]`.
#[derive(Clone, Copy)]
struct Piece {
    c: [f64; 3],
    lo: f64,
    hi: f64,
}

fn squared_distance_pieces(p: Point, d: Point, u: Point, v: Point) -> Vec<Piece> {
    let dd = d[0] * d[0] + d[1] * d[1];
    let to_point = |w: Point, lo: f64, hi: f64| {
        let f = [p[0] - w[0], p[1] - w[1]];
        Piece { c: [f[0] * f[0] + f[1] * f[1], 2.0 * (f[0] * d[0] + f[1] * d[1]), dd], lo, hi }
    };
    let e = [v[0] - u[0], v[1] - u[1]];
    let e2 = e[0] * e[0] + e[1] * e[1];
    if e2 == 0.0 {
        return vec![to_point(u, 0.0, 1.0)];
    }
    let f = [p[0] - u[0], p[1] - u[1]];
    let alpha = (f[0] * e[0] + f[1] * e[1]) / e2;
    let beta = (d[0] * e[0] + d[1] * e[1]) / e2;
    let perp = |lo: f64, hi: f64| Piece {
        c: [
            f[0] * f[0] + f[1] * f[1] - e2 * alpha * alpha,
            2.0 * (f[0] * d[0] + f[1] * d[1]) - 2.0 * e2 * alpha * beta,
            dd - e2 * beta * beta,
        ],
        lo,
        hi,
    };
    if beta == 0.0 {
        return vec![if alpha <= 0.0 {
            to_point(u, 0.0, 1.0)
        } else if alpha >= 1.0 {
            to_point(v, 0.0, 1.0)
        } else {
            perp(0.0, 1.0)
        }];
    }
    // tau(s) = alpha + beta s crosses 0 at s0 and 1 at s1
    let s0 = -alpha / beta;
    let s1 = (1.0 - alpha) / beta;
    let (first, second, a_pt, b_pt) = if beta > 0.0 { (s0, s1, u, v) } else { (s1, s0, v, u) };
    let mut out = Vec::with_capacity(3);
    let clip = |lo: f64, hi: f64| (lo.max(0.0), hi.min(1.0));
    let (lo, hi) = clip(f64::NEG_INFINITY, first);
    if lo <= hi {
        out.push(to_point(a_pt, lo, hi));
    }
    let (lo, hi) = clip(first, second);
    if lo <= hi {
        out.push(perp(lo, hi));
    }
    let (lo, hi) = clip(second, f64::INFINITY);
    if lo <= hi {
        out.push(to_point(b_pt, lo, hi));
    }
    out
}

fn quadratic_roots(c: [f64; 3]) -> Vec<f64> {
    let [c0, c1, c2] = c;
    let scale = c0.abs().max(c1.abs()).max(c2.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    if c2.abs() <= 1e-14 * scale {
        if c1.abs() <= 1e-14 * scale {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        // tangential contact survives rounding as a slightly negative discriminant
        if disc > -1e-12 * c1 * c1 {
            return vec![-c1 / (2.0 * c2)];
        }
        return Vec::new();
    }
    let sq = disc.sqrt();
    let q = -0.5 * (c1 + c1.signum() * sq);
    let mut r = Vec::with_capacity(2);
    if q != 0.0 {
        r.push(q / c2);
        r.push(c0 / q);
    } else {
        r.push(0.0);
    }
    r
}

/// Exact `sup_{x in A} dist(x, B)` for polylines.
fn directed_polyline(a: &[Vec<Point>], b: &[Vec<Point>]) -> f64 {
    let sb = segments(b);
    let eval = |x: Point| sb.iter().map(|&(u, v)| point_segment_distance(x, u, v)).fold(f64::INFINITY, f64::min);
    let mut best: f64 = 0.0;
    for (p, q) in segments(a) {
        let d = [q[0] - p[0], q[1] - p[1]];
        let at = |s: f64| [p[0] + s * d[0], p[1] + s * d[1]];
        let mut candidates = vec![0.0, 1.0];
        if d != [0.0, 0.0] {
            let pieces: Vec<Vec<Piece>> = sb.iter().map(|&(u, v)| squared_distance_pieces(p, d, u, v)).collect();
            for (i, pi) in pieces.iter().enumerate() {
                for pj in &pieces[i + 1..] {
                    for x in pi {
                        for y in pj {
                            let lo = x.lo.max(y.lo);
                            let hi = x.hi.min(y.hi);
                            if lo > hi {
                                continue;
                            }
                            let diff = [x.c[0] - y.c[0], x.c[1] - y.c[1], x.c[2] - y.c[2]];
                            for r in quadratic_roots(diff) {
                                if r >= lo - 1e-12 && r <= hi + 1e-12 {
                                    candidates.push(r.clamp(0.0, 1.0));
                                }
                            }
                        }
                    }
                }
            }
        }
        for s in candidates {
            best = best.max(eval(at(s)));
        }
    }
    best
}

#[derive(PartialEq)]
struct Cell {
    key: f64,
    lo: f64,
    hi: f64,
    value: f64,
}

impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key.total_cmp(&other.key)
    }
}

fn pieces_of(set: &ClosedArcSet) -> Vec<Interval> {
    if set.is_full() {
        let l = set.curve().total_length();
        vec![Interval { start: 0.0, end: l }]
    } else {
        set.intervals().to_vec()
    }
}

/// `dist(x, B)` to within `tol`, using that the curve is 1-Lipschitz in arclength.
fn distance_to_set(curve: &BoundaryCurve, x: Point, b: &[Interval], tol: f64) -> f64 {
    let mut best = f64::INFINITY;
    let mut heap = BinaryHeap::new();
    for iv in b {
        best = best.min(dist(x, curve.point(iv.start))).min(dist(x, curve.point(iv.end)));
        if iv.len() > 0.0 {
            let m = iv.midpoint();
            let v = dist(x, curve.point(m));
            best = best.min(v);
            heap.push(Cell { key: -(v - 0.5 * iv.len()), lo: iv.start, hi: iv.end, value: v });
        }
    }
    while let Some(cell) = heap.pop() {
        let lower = -cell.key;
        if lower >= best - tol {
            break;
        }
        let mid = 0.5 * (cell.lo + cell.hi);
        for (lo, hi) in [(cell.lo, mid), (mid, cell.hi)] {
            let m = 0.5 * (lo + hi);
            let v = dist(x, curve.point(m));
            best = best.min(v);
            heap.push(Cell { key: -(v - 0.5 * (hi - lo)), lo, hi, value: v });
        }
    }
    best
}

/// `sup_{x in A} dist(x, B)` resolved to `tol` by branch and bound.
fn directed_sampled(curve: &BoundaryCurve, a: &ClosedArcSet, b: &ClosedArcSet, tol: f64) -> f64 {
    let pb = pieces_of(b);
    let f = |t: f64| distance_to_set(curve, curve.point(t), &pb, 0.25 * tol);
    let mut best: f64 = 0.0;
    let mut heap = BinaryHeap::new();
    for iv in pieces_of(a) {
        best = best.max(f(iv.start)).max(f(iv.end));
        if iv.len() > 0.0 {
            let v = f(iv.midpoint());
            best = best.max(v);
            heap.push(Cell { key: v + 0.5 * iv.len(), lo: iv.start, hi: iv.end, value: v });
        }
    }
    while let Some(cell) = heap.pop() {
        if cell.key <= best + tol {
            break;
        }
        let mid = 0.5 * (cell.lo + cell.hi);
        for (lo, hi) in [(cell.lo, mid), (mid, cell.hi)] {
            let v = f(0.5 * (lo + hi));
            best = best.max(v);
            heap.push(Cell { key: v + 0.5 * (hi - lo), lo, hi, value: v });
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::arcs::ArcSet;
    use std::f64::consts::PI;
    use std::sync::Arc;

    /// Brute-force oracle: dense uniform samples of both sets, O(n m).
    pub(crate) fn sampled_oracle(a: &ClosedArcSet, b: &ClosedArcSet, per_unit: f64) -> f64 {
        let curve = a.curve();
        let sample = |s: &ClosedArcSet| -> Vec<Point> {
            let mut pts = Vec::new();
            for iv in pieces_of(s) {
                let n = ((iv.len() * per_unit).ceil() as usize).max(1);
                for i in 0..=n {
                    pts.push(curve.point(iv.start + iv.len() * i as f64 / n as f64));
                }
            }
            pts
        };
        let (pa, pb) = (sample(a), sample(b));
        let directed = |x: &[Point], y: &[Point]| {
            x.iter().map(|p| y.iter().map(|q| dist(*p, *q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
        };
        directed(&pa, &pb).max(directed(&pb, &pa))
    }

    fn disk() -> Arc<BoundaryCurve> {
        BoundaryCurve::circle(1.0).unwrap().shared()
    }

    #[test]
    fn identical_sets_have_zero_distance() {
        let c = disk();
        let d = ArcSet::new(c, [(0.0, PI)]).unwrap().complement();
        assert_eq!(hausdorff_distance(&d, &d, Metric::Euclidean).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&d, &d, Metric::Arclength).unwrap(), 0.0);
    }

    #[test]
    fn shifted_dirichlet_arc_on_the_circle() {
        let c = disk();
        let eps = 0.1;
        let d0 = ClosedArcSet::new(c.clone(), [(PI, 2.0 * PI)]).unwrap();
        let d1 = ClosedArcSet::new(c.clone(), [(PI + eps, 2.0 * PI)]).unwrap();
        let s = hausdorff_distance(&d0, &d1, Metric::Arclength).unwrap();
        assert!((s - eps).abs() < 1e-14);
        let e = hausdorff_distance(&d0, &d1, Metric::Euclidean).unwrap();
        assert!((e - 2.0 * (eps / 2.0).sin()).abs() < 1e-14);
        // dense-sampling oracle
        let oracle = sampled_oracle(&d0, &d1, 2000.0);
        assert!((e - oracle).abs() < 1e-6, "{e} vs {oracle}");
    }

    #[test]
    fn antipodal_points() {
        let c = disk();
        let a = ClosedArcSet::point(c.clone(), 0.0);
        let b = ClosedArcSet::point(c, PI);
        assert!((hausdorff_distance(&a, &b, Metric::Euclidean).unwrap() - 2.0).abs() < 1e-14);
        assert!((hausdorff_distance(&a, &b, Metric::Arclength).unwrap() - PI).abs() < 1e-14);
    }

    #[test]
    fn empty_operand_is_rejected() {
        let c = disk();
        let empty = ClosedArcSet::new(c.clone(), std::iter::empty()).unwrap();
        let p = ClosedArcSet::point(c, 1.0);
        assert!(matches!(hausdorff_distance(&empty, &p, Metric::Arclength), Err(Error::EmptySet)));
    }

    #[test]
    fn polygon_exact_matches_dense_oracle() {
        let sq = BoundaryCurve::unit_square().shared();
        let cases = [
            (vec![(0.2, 1.7)], vec![(2.1, 3.3)]),
            (vec![(0.0, 0.5), (2.4, 2.6)], vec![(1.2, 1.2)]),
            (vec![(3.5, 4.4)], vec![(0.9, 1.1), (2.0, 2.9)]),
            (vec![(0.5, 3.5)], vec![(1.5, 1.5)]),
        ];
        for (pa, pb) in cases {
            let a = ClosedArcSet::new(sq.clone(), pa.clone()).unwrap();
            let b = ClosedArcSet::new(sq.clone(), pb.clone()).unwrap();
            let exact = hausdorff_distance(&a, &b, Metric::Euclidean).unwrap();
            let oracle = sampled_oracle(&a, &b, 4000.0);
            assert!(exact >= oracle - 1e-12, "{pa:?} {pb:?}: {exact} < {oracle}");
            assert!(exact - oracle < 1e-3, "{pa:?} {pb:?}: {exact} vs {oracle}");
        }
    }

    #[test]
    fn star_branch_and_bound_matches_circle_closed_form() {
        let star = BoundaryCurve::star([0.0, 0.0], vec![1.0], vec![]).unwrap().shared();
        let eps = 0.3;
        let a = ClosedArcSet::new(star.clone(), [(PI, 2.0 * PI)]).unwrap();
        let b = ClosedArcSet::new(star.clone(), [(PI + eps, 2.0 * PI - 0.1)]).unwrap();
        let d = hausdorff_distance(&a, &b, Metric::Euclidean).unwrap();
        let tol = star.total_length() / STAR_RESOLUTION_DIVISOR;
        assert!((d - 2.0 * (eps / 2.0).sin()).abs() <= tol, "{d}");
    }

    #[test]
    fn star_euclidean_matches_dense_oracle() {
        let star = BoundaryCurve::star([0.0, 0.0], vec![1.0, 0.0, 0.2], vec![0.1]).unwrap().shared();
        let a = ClosedArcSet::new(star.clone(), [(0.3, 2.0), (4.0, 4.5)]).unwrap();
        let b = ClosedArcSet::new(star.clone(), [(1.0, 1.2), (3.0, 5.5)]).unwrap();
        let d = hausdorff_distance(&a, &b, Metric::Euclidean).unwrap();
        let oracle = sampled_oracle(&a, &b, 3000.0);
        assert!((d - oracle).abs() < 2e-4, "{d} vs {oracle}");
    }
}
