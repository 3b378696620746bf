//! 1-direction geodesic flow on polysquare translation surfaces and polycube
//! translation 3-manifolds: exact event-driven tracing, direction
//! classification, ball-splitting experiments, and density / visiting
//! frequency statistics.

pub mod directions;
pub mod fixtures;
pub mod geometry;
pub(crate) mod grid;
pub mod num;
pub mod report;
pub mod sampling;
pub mod splitting;
pub mod stats;
pub mod tracer;

pub use directions::{DirectionSpec, KroneckerVerdict, SaddleConnection};
pub use geometry::{Axis, CellId, FaceRef, Manifold, ManifoldDescription, SplittingEdge};
pub use num::{QuadExt, Rat, Scalar};
pub use splitting::{Ball, ColourOutcome};
pub use stats::TargetSet;
pub use tracer::{Direction, ManifoldPoint, Trace};
