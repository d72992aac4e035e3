//! Boundary curves, arc sets on them, and distances between arc sets.

pub mod arcs;
pub mod curve;
pub mod distance;

pub use arcs::{ArcSet, ClosedArcSet, Interval};
pub use curve::{BoundaryCurve, CurveSpec, Point};
pub use distance::{hausdorff_distance, Metric};
