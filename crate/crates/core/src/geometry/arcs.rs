//! Finite unions of boundary arcs.
//!
//! An [`ArcSet`] is the relatively open Steklov part of the boundary. It is
//! stored as half-open arclength intervals `[start, end)` sorted by `start`,
//! with `0 <= start < L`. Only the last interval may wrap past the origin, in
//! which case `end > L` and the arc continues on `[0, end - L)`.
//!
//! A [`ClosedArcSet`] is the closed counterpart used for Dirichlet parts and
//! Hausdorff distances; its components may degenerate to single points.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::curve::BoundaryCurve;
use crate::error::{Error, Result};

/// Lifted arclength interval. `end` may exceed the curve length for a wrapping arc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.start + self.end)
    }
}

/// Relatively open union of boundary arcs (the Steklov part).
#[derive(Clone, Debug)]
pub struct ArcSet {
    curve: Arc<BoundaryCurve>,
    intervals: Vec<Interval>,
}

impl PartialEq for ArcSet {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.curve, &other.curve) || self.curve == other.curve) && self.intervals == other.intervals
    }
}

#[derive(Serialize, Deserialize)]
struct ArcSetRepr {
    curve: BoundaryCurve,
    arcs: Vec<[f64; 2]>,
}

impl Serialize for ArcSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ArcSetRepr { curve: (*self.curve).clone(), arcs: self.pairs() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ArcSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ArcSetRepr::deserialize(d)?;
        ArcSet::new(repr.curve.shared(), repr.arcs.iter().map(|p| (p[0], p[1]))).map_err(serde::de::Error::custom)
    }
}

impl ArcSet {
    /// Builds the canonical form of a union of arcs `[a, b)` given in
    /// arclength. Endpoints may be any reals (they are read cyclically) but
    /// each arc must have `0 < b - a < L`. Overlapping or abutting arcs are
    /// merged. The union must leave a Dirichlet part of positive length.
    pub fn new(curve: Arc<BoundaryCurve>, arcs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let l = curve.total_length();
        let mut raw = Vec::new();
        for (i, (a, b)) in arcs.into_iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::InvalidArcSet(format!("arc {i} has non-finite endpoints")));
            }
            let len = b - a;
            if len <= 0.0 {
                return Err(Error::InvalidArcSet(format!("arc {i} = [{a}, {b}) has non-positive length")));
            }
            if len >= l {
                return Err(Error::InvalidArcSet(format!("arc {i} covers the whole curve; Dirichlet part would be empty")));
            }
            let s = curve.wrap(a);
            let end = if s == a { b } else { s + len };
            raw.push(Interval { start: s, end });
        }
        let intervals = merge_cyclic(raw, l);
        let total: f64 = intervals.iter().map(Interval::len).sum();
        if intervals.len() == 1 && intervals[0].len() >= l || total >= l {
            return Err(Error::InvalidArcSet("arcs cover the whole curve; Dirichlet part would be empty".into()));
        }
        Ok(Self { curve, intervals })
    }

    pub fn empty(curve: Arc<BoundaryCurve>) -> Self {
        Self { curve, intervals: Vec::new() }
    }

    pub fn curve(&self) -> &Arc<BoundaryCurve> {
        &self.curve
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn pairs(&self) -> Vec<[f64; 2]> {
        self.intervals.iter().map(|iv| [iv.start, iv.end]).collect()
    }

    /// Total arclength `H^1` of the set.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    /// Measure as a fraction of the curve length.
    pub fn fraction(&self) -> f64 {
        self.measure() / self.curve.total_length()
    }

    pub fn component_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Sorted endpoints in `[0, L)`.
    pub fn endpoints(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self
            .intervals
            .iter()
            .flat_map(|iv| [iv.start, self.curve.wrap(iv.end)])
            .collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// Whether `t` lies in the open arc interior (endpoints excluded).
    pub fn contains_open(&self, t: f64) -> bool {
        let l = self.curve.total_length();
        let t = self.curve.wrap(t);
        self.intervals
            .iter()
            .any(|iv| (t > iv.start && t < iv.end) || (t + l > iv.start && t + l < iv.end))
    }

    /// Index of the arc whose open interior contains `t`.
    pub fn arc_containing(&self, t: f64) -> Option<usize> {
        let l = self.curve.total_length();
        let t = self.curve.wrap(t);
        self.intervals
            .iter()
            .position(|iv| (t > iv.start && t < iv.end) || (t + l > iv.start && t + l < iv.end))
    }

    /// Dirichlet part `∂Ω \ Γ_S` as a closed set; arc endpoints belong to it.
    pub fn complement(&self) -> ClosedArcSet {
        let l = self.curve.total_length();
        let n = self.intervals.len();
        if n == 0 {
            return ClosedArcSet::full(self.curve.clone());
        }
        let mut gaps = Vec::with_capacity(n);
        for i in 0..n {
            let cur = self.intervals[i];
            let next_start = if i + 1 < n { self.intervals[i + 1].start } else { self.intervals[0].start + l };
            let start = self.curve.wrap(cur.end);
            gaps.push(Interval { start, end: start + (next_start - cur.end) });
        }
        gaps.sort_by(|a, b| a.start.total_cmp(&b.start));
        ClosedArcSet { curve: self.curve.clone(), intervals: gaps, full: false }
    }

    /// Topological closure, used when measuring Hausdorff distances between Steklov parts.
    pub fn closure(&self) -> ClosedArcSet {
        ClosedArcSet { curve: self.curve.clone(), intervals: self.intervals.clone(), full: false }
    }

    /// Non-wrapping pieces inside `[0, L)`, sorted.
    pub(crate) fn linear_pieces(&self) -> Vec<Interval> {
        split_linear(&self.intervals, self.curve.total_length())
    }

    /// `H^1(a △ b)` computed exactly by an interval sweep.
    pub fn symmetric_difference_measure(&self, other: &ArcSet) -> Result<f64> {
        self.check_same_curve(other.curve())?;
        let inter = intersection_measure(&self.linear_pieces(), &other.linear_pieces());
        Ok((self.measure() - inter + other.measure() - inter).max(0.0))
    }

    /// Whether every arc of `self` is covered by `other`.
    pub fn is_subset(&self, other: &ArcSet) -> Result<bool> {
        self.check_same_curve(other.curve())?;
        let big = other.linear_pieces();
        Ok(self
            .linear_pieces()
            .iter()
            .all(|p| big.iter().any(|q| q.start <= p.start && p.end <= q.end)))
    }

    /// Shifts every endpoint cyclically. `deltas` holds `[start_0, end_0,
    /// start_1, end_1, ...]` in canonical interval order.
    pub fn perturb_endpoints(&self, deltas: &[f64]) -> Result<ArcSet> {
        let n = self.intervals.len();
        if deltas.len() != 2 * n {
            return Err(Error::InvalidArcSet(format!(
                "expected {} endpoint shifts for {n} arcs, got {}",
                2 * n,
                deltas.len()
            )));
        }
        let l = self.curve.total_length();
        let moved: Vec<Interval> = self
            .intervals
            .iter()
            .enumerate()
            .map(|(i, iv)| Interval { start: iv.start + deltas[2 * i], end: iv.end + deltas[2 * i + 1] })
            .collect();
        for (i, iv) in moved.iter().enumerate() {
            if iv.len() <= 0.0 {
                return Err(Error::PerturbationCollision { interval: i, reason: "shift reverses the arc".into() });
            }
            let next_start = if i + 1 < n { moved[i + 1].start } else { moved[0].start + l };
            if next_start - iv.end <= 0.0 {
                return Err(Error::PerturbationCollision {
                    interval: i,
                    reason: format!("shift closes the gap to arc {}", (i + 1) % n),
                });
            }
        }
        ArcSet::new(self.curve.clone(), moved.iter().map(|iv| (iv.start, iv.end)))
    }

    /// `n` equal arcs of total measure `m L`, equally spaced, the first starting at 0.
    pub fn lgl_sequence(curve: Arc<BoundaryCurve>, m: f64, n: usize) -> Result<ArcSet> {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::InvalidArcSet(format!("measure fraction must lie in (0, 1), got {m}")));
        }
        if n == 0 {
            return Err(Error::InvalidArcSet("need at least one arc".into()));
        }
        let l = curve.total_length();
        let period = l / n as f64;
        let len = m * period;
        ArcSet::new(curve, (0..n).map(|j| (j as f64 * period, j as f64 * period + len)))
    }

    pub(crate) fn check_same_curve(&self, other: &Arc<BoundaryCurve>) -> Result<()> {
        if Arc::ptr_eq(&self.curve, other) || *self.curve == **other {
            Ok(())
        } else {
            Err(Error::IncomparableSets)
        }
    }
}

/// Closed union of boundary arcs; components may be single points.
#[derive(Clone, Debug)]
pub struct ClosedArcSet {
    curve: Arc<BoundaryCurve>,
    intervals: Vec<Interval>,
    full: bool,
}

impl PartialEq for ClosedArcSet {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.curve, &other.curve) || self.curve == other.curve)
            && self.full == other.full
            && self.intervals == other.intervals
    }
}

impl ClosedArcSet {
    /// Canonical closed union of `[a, b]` pieces (`a == b` allowed).
    pub fn new(curve: Arc<BoundaryCurve>, pieces: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let l = curve.total_length();
        let mut raw = Vec::new();
        for (i, (a, b)) in pieces.into_iter().enumerate() {
            if !(a.is_finite() && b.is_finite()) || b < a {
                return Err(Error::InvalidArcSet(format!("closed piece {i} = [{a}, {b}] is invalid")));
            }
            if b - a >= l {
                return Ok(Self::full(curve));
            }
            let s = curve.wrap(a);
            raw.push(Interval { start: s, end: s + (b - a) });
        }
        let intervals = merge_cyclic(raw, l);
        if intervals.len() == 1 && intervals[0].len() >= l {
            return Ok(Self::full(curve));
        }
        Ok(Self { curve, intervals, full: false })
    }

    pub fn full(curve: Arc<BoundaryCurve>) -> Self {
        let l = curve.total_length();
        Self { curve, intervals: vec![Interval { start: 0.0, end: l }], full: true }
    }

    pub fn point(curve: Arc<BoundaryCurve>, t: f64) -> Self {
        let s = curve.wrap(t);
        Self { curve, intervals: vec![Interval { start: s, end: s }], full: false }
    }

    pub fn curve(&self) -> &Arc<BoundaryCurve> {
        &self.curve
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn is_empty(&self) -> bool {
        !self.full && self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    pub fn component_count(&self) -> usize {
        self.intervals.len()
    }

    /// Open gaps between components, lifted so `end > start` (a single
    /// component yields one gap wrapping around).
    pub(crate) fn gaps(&self) -> Vec<Interval> {
        if self.full {
            return Vec::new();
        }
        let l = self.curve.total_length();
        let n = self.intervals.len();
        (0..n)
            .map(|i| {
                let cur = self.intervals[i];
                let next = if i + 1 < n { self.intervals[i + 1].start } else { self.intervals[0].start + l };
                Interval { start: cur.end, end: next }
            })
            .filter(|g| g.len() > 0.0)
            .collect()
    }

    pub(crate) fn check_same_curve(&self, other: &Arc<BoundaryCurve>) -> Result<()> {
        if Arc::ptr_eq(&self.curve, other) || *self.curve == **other {
            Ok(())
        } else {
            Err(Error::IncomparableSets)
        }
    }
}

/// Canonical cyclic union. Touching intervals merge; for open sets this
/// removes abutting boundaries, for closed sets it joins shared endpoints.
fn merge_cyclic(mut raw: Vec<Interval>, l: f64) -> Vec<Interval> {
    if raw.is_empty() {
        return raw;
    }
    raw.sort_by(|a, b| a.start.total_cmp(&b.start).then(a.end.total_cmp(&b.end)));
    let mut merged: Vec<Interval> = Vec::with_capacity(raw.len());
    for iv in raw {
        match merged.last_mut() {
            Some(last) if iv.start <= last.end => last.end = last.end.max(iv.end),
            _ => merged.push(iv),
        }
    }
    // Fold the wrapping tail into the head intervals it reaches.
    loop {
        let n = merged.len();
        if n < 2 {
            break;
        }
        let tail_end = merged[n - 1].end;
        if merged[0].start + l <= tail_end {
            let head = merged.remove(0);
            let last = merged.last_mut().unwrap();
            last.end = last.end.max(head.end + l);
        } else {
            break;
        }
    }
    if merged.len() == 1 && merged[0].len() >= l {
        merged[0] = Interval { start: 0.0, end: l };
        return merged;
    }
    // A tail wrapping past L may still have its start at or past L due to rounding.
    for iv in &mut merged {
        if iv.start >= l {
            iv.start -= l;
            iv.end -= l;
        }
    }
    merged.sort_by(|a, b| a.start.total_cmp(&b.start));
    merged
}

fn split_linear(intervals: &[Interval], l: f64) -> Vec<Interval> {
    let mut out = Vec::with_capacity(intervals.len() + 1);
    for iv in intervals {
        if iv.end > l {
            out.push(Interval { start: iv.start, end: l });
            out.push(Interval { start: 0.0, end: iv.end - l });
        } else {
            out.push(*iv);
        }
    }
    out.sort_by(|a, b| a.start.total_cmp(&b.start));
    out
}

fn intersection_measure(a: &[Interval], b: &[Interval]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let lo = a[i].start.max(b[j].start);
        let hi = a[i].end.min(b[j].end);
        if hi > lo {
            total += hi - lo;
        }
        if a[i].end < b[j].end {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}
