//! Exact event-driven tracing of constant-direction geodesics.
//!
//! One engine serves both dimensions (a surface is traced with the z axis
//! frozen) and both numeric modes: `f64` with the 1e-9 singular tolerance,
//! exact rationals with tolerance zero. The flow parameter advances position
//! by `t * v`, not by arc length.

use crate::geometry::{
    Axis, CellId, FaceRef, Manifold, Passage, Side, SplittingEdge,
};
use crate::num::Scalar;
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

/// Flow direction: `(alpha1, alpha2, 1)` in dimension 3, `(1, alpha)` in
/// dimension 2 (third component frozen to zero). The leading/trailing unit
/// component may be -1 for reversed directions.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction<S> {
    components: [S; 3],
    dim: usize,
}

impl<S: Scalar> Direction<S> {
    /// `(alpha1, alpha2, 1)`.
    pub fn dim3(alpha1: S, alpha2: S) -> Self {
        Direction {
            components: [alpha1, alpha2, S::one()],
            dim: 3,
        }
    }

    /// `(1, alpha)`.
    pub fn dim2(alpha: S) -> Self {
        Direction {
            components: [S::one(), alpha, S::zero()],
            dim: 2,
        }
    }

    /// Validate an arbitrary component vector against the normalization:
    /// the last component (dim 3) or first component (dim 2) must be
    /// exactly +-1.
    pub fn from_components(components: [S; 3], dim: usize) -> Result<Self, TraceError> {
        let unit = match dim {
            3 => &components[2],
            2 => {
                if !components[2].is_zero() {
                    return Err(TraceError::BadDirection(
                        "dimension-2 direction must have zero third component".into(),
                    ));
                }
                &components[0]
            }
            _ => return Err(TraceError::BadDirection(format!("bad dimension {dim}"))),
        };
        if !(unit.clone() - S::one()).is_zero() && !(unit.clone() + S::one()).is_zero() {
            return Err(TraceError::BadDirection(
                "normalized component must be exactly +-1".into(),
            ));
        }
        Ok(Direction { components, dim })
    }

    pub fn components(&self) -> &[S; 3] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, axis: Axis) -> &S {
        &self.components[axis.index()]
    }

    /// The opposite direction (`(-1, -alpha)` / `(-a1, -a2, -1)`).
    pub fn reversed(&self) -> Self {
        Direction {
            components: [
                -self.components[0].clone(),
                -self.components[1].clone(),
                -self.components[2].clone(),
            ],
            dim: self.dim,
        }
    }

    /// Euclidean norm, for arc-length conversions.
    pub fn norm_f64(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.as_f64() * c.as_f64())
            .sum::<f64>()
            .sqrt()
    }

    /// Sum of absolute component values; bounds the crossing rate.
    pub fn abs_sum(&self) -> S {
        self.components
            .iter()
            .fold(S::zero(), |acc, c| acc + c.abs())
    }
}

/// A point of the manifold: owning cell plus local coordinates. Canonical
/// points keep every local coordinate in `[0,1)`; boundary points (local
/// coordinate exactly 1) arise as reverse-trace starts and are accepted by
/// the tracer.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint<S> {
    pub cell: CellId,
    pub local: [S; 3],
}

impl<S: Scalar> ManifoldPoint<S> {
    pub fn new(cell: CellId, local: [S; 3]) -> Self {
        ManifoldPoint { cell, local }
    }

    /// Ambient coordinates (cell corner plus local offset).
    pub fn ambient(&self) -> [S; 3] {
        let c = self.cell.coords();
        [
            S::from_i64(c[0]) + self.local[0].clone(),
            S::from_i64(c[1]) + self.local[1].clone(),
            S::from_i64(c[2]) + self.local[2].clone(),
        ]
    }
}

/// Modulo-1 projection onto the unit torus: the cell identity is forgotten.
pub fn project_mod1<S: Scalar>(p: &ManifoldPoint<S>) -> [S; 3] {
    p.local.clone()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EventKind {
    InteriorCrossing,
    GateCrossing,
    PairingTransport,
    SingularHit,
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::InteriorCrossing => "interior-crossing",
            EventKind::GateCrossing => "gate-crossing",
            EventKind::PairingTransport => "pairing-transport",
            EventKind::SingularHit => "singular-hit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event<S> {
    pub time: S,
    pub face: FaceRef,
    pub kind: EventKind,
    pub edge: Option<SplittingEdge>,
}

/// Straight-line piece of the trace inside one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment<S> {
    pub cell: CellId,
    pub enter: [S; 3],
    pub exit: [S; 3],
    pub t0: S,
    pub t1: S,
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Termination<S> {
    TMax,
    SingularHit { time: S, edge: SplittingEdge },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace<S> {
    pub start: ManifoldPoint<S>,
    pub direction: Direction<S>,
    pub segments: Vec<Segment<S>>,
    pub events: Vec<Event<S>>,
    pub terminated: Termination<S>,
}

impl<S: Scalar> Trace<S> {
    pub fn hit_singularity(&self) -> bool {
        matches!(self.terminated, Termination::SingularHit { .. })
    }

    /// Total flow time covered.
    pub fn t_end(&self) -> S {
        self.segments
            .last()
            .map(|s| s.t1.clone())
            .unwrap_or_else(S::zero)
    }

    /// Final point reached (canonical for t_max-terminated traces except
    /// when t_max lands exactly on a crossing).
    pub fn end_point(&self) -> ManifoldPoint<S> {
        let last = self.segments.last().expect("trace has segments");
        ManifoldPoint::new(last.cell, last.exit.clone())
    }

    /// Position at flow time `t` within the traced range.
    pub fn position_at(&self, t: &S) -> Option<ManifoldPoint<S>> {
        if *t < S::zero() || *t > self.t_end() {
            return None;
        }
        let seg = self
            .segments
            .iter()
            .find(|s| s.t0 <= *t && *t <= s.t1)?;
        let dt = t.clone() - seg.t0.clone();
        let v = self.direction.components();
        let local = [
            seg.enter[0].clone() + dt.clone() * v[0].clone(),
            seg.enter[1].clone() + dt.clone() * v[1].clone(),
            seg.enter[2].clone() + dt * v[2].clone(),
        ];
        Some(ManifoldPoint::new(seg.cell, local))
    }

    /// CSV body: one row per segment with ambient endpoint coordinates and
    /// the event kind that ended the segment.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "t_enter,t_exit,cell_i,cell_j,cell_k,x0,y0,z0,x1,y1,z1,event_kind\n",
        );
        for (i, seg) in self.segments.iter().enumerate() {
            let kind = self
                .events
                .get(i)
                .map(|e| e.kind.label())
                .unwrap_or("t-max");
            let c = seg.cell.coords();
            let amb = |local: &[S; 3], k: usize| S::from_i64(c[k]) + local[k].clone();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                seg.t0.as_f64(),
                seg.t1.as_f64(),
                c[0],
                c[1],
                c[2],
                amb(&seg.enter, 0).as_f64(),
                amb(&seg.enter, 1).as_f64(),
                amb(&seg.enter, 2).as_f64(),
                amb(&seg.exit, 0).as_f64(),
                amb(&seg.exit, 1).as_f64(),
                amb(&seg.exit, 2).as_f64(),
                kind,
            );
        }
        out
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("invalid direction: {0}")]
    BadDirection(String),
    #[error("invalid start: {0}")]
    BadStart(String),
    #[error(
        "direction glides inside a face: component {axis} is zero while the \
         start lies on a lattice plane of that axis"
    )]
    GlidingDirection { axis: Axis },
    #[error("trace ended in a singular hit and cannot be reversed")]
    NotReversible,
}

/// Upper bound on the number of events over `[0, t_max]`: each axis-plane
/// family is crossed at rate `|v_a|`.
pub fn event_bound<S: Scalar>(dir: &Direction<S>, t_max: &S) -> usize {
    let total = (t_max.clone() * dir.abs_sum()).as_f64();
    total.ceil() as usize + dir.dim() + 1
}

/// Trace the geodesic from `start` with direction `dir` for flow time
/// `t_max`. Deterministic; singular hits terminate the trace and are a valid
/// result, not an error.
pub fn trace<S: Scalar>(
    manifold: &Manifold,
    start: &ManifoldPoint<S>,
    dir: &Direction<S>,
    t_max: &S,
) -> Result<Trace<S>, TraceError> {
    validate_start(manifold, start, dir, t_max)?;
    if let Some(edge) = start_singularity(manifold, start) {
        return Ok(Trace {
            start: start.clone(),
            direction: dir.clone(),
            segments: vec![Segment {
                cell: start.cell,
                enter: start.local.clone(),
                exit: start.local.clone(),
                t0: S::zero(),
                t1: S::zero(),
            }],
            events: vec![Event {
                time: S::zero(),
                face: FaceRef::new(start.cell, Axis::X, Side::Minus),
                kind: EventKind::SingularHit,
                edge: Some(edge.clone()),
            }],
            terminated: Termination::SingularHit {
                time: S::zero(),
                edge,
            },
        });
    }
    launch(manifold, start.cell, start.local.clone(), dir, t_max)
}

/// Low-level entry: trace from a point that may deliberately sit on the
/// singular set (a splitting-edge sample, a vertex launch), skipping the
/// start-singularity test. The flow must still be transversal.
pub fn launch<S: Scalar>(
    manifold: &Manifold,
    cell: CellId,
    local: [S; 3],
    dir: &Direction<S>,
    t_max: &S,
) -> Result<Trace<S>, TraceError> {
    let start = ManifoldPoint::new(cell, local);
    validate_start(manifold, &start, dir, t_max)?;
    let dim = manifold.dim;
    let tol = S::edge_tol();
    let v = dir.components();

    let mut segments: Vec<Segment<S>> = Vec::new();
    let mut events: Vec<Event<S>> = Vec::new();
    let mut cur_cell = start.cell;
    let mut cur = start.local.clone();
    let mut t = S::zero();
    let cap = event_bound(dir, t_max) + 8;

    loop {
        assert!(
            events.len() <= cap,
            "event bound exceeded: tracer is stuck ({} events)",
            events.len()
        );
        // Next axis-plane crossing per axis.
        let mut best: Option<(S, usize)> = None;
        let mut second: Option<S> = None;
        for a in 0..dim {
            let va = &v[a];
            if va.is_zero() {
                continue;
            }
            let dt = if *va > S::zero() {
                (S::one() - cur[a].clone()) / va.clone()
            } else {
                -cur[a].clone() / va.clone()
            };
            match &best {
                Some((b, _)) if dt >= *b => {
                    if second.as_ref().is_none_or(|s| dt < *s) {
                        second = Some(dt);
                    }
                }
                _ => {
                    if let Some((b, _)) = best.take() {
                        second = Some(b);
                    }
                    best = Some((dt, a));
                }
            }
        }
        let (dt, axis_idx) = best.expect("transversal direction always crosses");
        let t_hit = t.clone() + dt.clone();

        if t_hit >= *t_max {
            // Final partial segment.
            let dt_end = t_max.clone() - t.clone();
            let exit = advance(&cur, v, &dt_end);
            segments.push(Segment {
                cell: cur_cell,
                enter: cur,
                exit,
                t0: t,
                t1: t_max.clone(),
            });
            return Ok(Trace {
                start,
                direction: dir.clone(),
                segments,
                events,
                terminated: Termination::TMax,
            });
        }

        let axis = Axis::from_index(axis_idx);
        let side = if v[axis_idx] > S::zero() {
            Side::Plus
        } else {
            Side::Minus
        };
        let face = FaceRef::new(cur_cell, axis, side);

        // Exit position: crossing coordinate pinned exactly to the plane.
        let mut exit = advance(&cur, v, &dt);
        exit[axis_idx] = if side == Side::Plus { S::one() } else { S::zero() };

        // Simultaneous crossing of two axis planes: a cube edge (dim 3) or a
        // lattice vertex (dim 2).
        if let Some(s2) = &second {
            if (s2.clone() - dt.clone()).abs() <= tol {
                let edge = corner_edge(manifold, cur_cell, &exit, v, dim);
                segments.push(Segment {
                    cell: cur_cell,
                    enter: cur,
                    exit,
                    t0: t,
                    t1: t_hit.clone(),
                });
                events.push(Event {
                    time: t_hit.clone(),
                    face,
                    kind: EventKind::SingularHit,
                    edge: Some(edge.clone()),
                });
                return Ok(Trace {
                    start,
                    direction: dir.clone(),
                    segments,
                    events,
                    terminated: Termination::SingularHit { time: t_hit, edge },
                });
            }
        }

        let uv = face_uv(&exit, axis);
        // Harmonized marker set for this axis: the trace-level singular set.
        let marker = manifold.marker_hit(face, &uv, &tol);
        let transported = match marker {
            Some(edge) => Err(edge),
            None => manifold.transport(face, uv).map_err(|e| e.edge),
        };
        match transported {
            Err(edge) => {
                segments.push(Segment {
                    cell: cur_cell,
                    enter: cur,
                    exit,
                    t0: t,
                    t1: t_hit.clone(),
                });
                events.push(Event {
                    time: t_hit.clone(),
                    face,
                    kind: EventKind::SingularHit,
                    edge: Some(edge.clone()),
                });
                return Ok(Trace {
                    start,
                    direction: dir.clone(),
                    segments,
                    events,
                    terminated: Termination::SingularHit { time: t_hit, edge },
                });
            }
            Ok(tr) => {
                segments.push(Segment {
                    cell: cur_cell,
                    enter: cur.clone(),
                    exit: exit.clone(),
                    t0: t.clone(),
                    t1: t_hit.clone(),
                });
                events.push(Event {
                    time: t_hit.clone(),
                    face,
                    kind: match tr.passage {
                        Passage::Interior => EventKind::InteriorCrossing,
                        Passage::Gate => EventKind::GateCrossing,
                        Passage::Pairing => EventKind::PairingTransport,
                    },
                    edge: None,
                });
                cur_cell = tr.enter_face.cell;
                cur = place_on_face(&tr.enter_face, tr.uv);
                t = t_hit;
            }
        }
    }
}

/// Reverse a completed trace: flow from its end point with the opposite
/// direction for the same flow time. The result retraces the original back
/// to its start (exactly in rational mode).
pub fn reverse<S: Scalar>(manifold: &Manifold, tr: &Trace<S>) -> Result<Trace<S>, TraceError> {
    if tr.hit_singularity() {
        return Err(TraceError::NotReversible);
    }
    let end = tr.end_point();
    let t_total = tr.t_end();
    launch(
        manifold,
        end.cell,
        end.local.clone(),
        &tr.direction.reversed(),
        &t_total,
    )
}

fn validate_start<S: Scalar>(
    manifold: &Manifold,
    start: &ManifoldPoint<S>,
    dir: &Direction<S>,
    t_max: &S,
) -> Result<(), TraceError> {
    if dir.dim() != manifold.dim {
        return Err(TraceError::BadDirection(format!(
            "direction dimension {} does not match manifold dimension {}",
            dir.dim(),
            manifold.dim
        )));
    }
    if *t_max <= S::zero() {
        return Err(TraceError::BadStart("t_max must be positive".into()));
    }
    if !manifold.contains_cell(start.cell) {
        return Err(TraceError::BadStart(format!(
            "cell {} is not part of the manifold",
            start.cell
        )));
    }
    for a in 0..3 {
        let x = &start.local[a];
        if a < manifold.dim {
            if *x < S::zero() || *x > S::one() {
                return Err(TraceError::BadStart(format!(
                    "local coordinate {a} out of [0, 1]"
                )));
            }
        } else if !x.is_zero() {
            return Err(TraceError::BadStart(format!(
                "frozen coordinate {a} must be zero"
            )));
        }
    }
    // A zero direction component is fine unless the start already lies in a
    // lattice plane of that axis: then the geodesic runs inside a face and
    // its transports are undefined.
    for a in 0..manifold.dim {
        if dir.components()[a].is_zero()
            && (start.local[a].is_zero() || (start.local[a].clone() - S::one()).is_zero())
        {
            return Err(TraceError::GlidingDirection {
                axis: Axis::from_index(a),
            });
        }
    }
    Ok(())
}

/// Singularity test for canonical start points: on a face (some local
/// coordinate zero), the point may sit on a cube edge or a marker line.
fn start_singularity<S: Scalar>(
    manifold: &Manifold,
    start: &ManifoldPoint<S>,
) -> Option<SplittingEdge> {
    let tol = S::edge_tol();
    let dim = manifold.dim;
    let on_plane: Vec<usize> = (0..dim)
        .filter(|&a| {
            start.local[a].within_tol(&tol)
                || (start.local[a].clone() - S::one()).within_tol(&tol)
        })
        .collect();
    if on_plane.len() >= 2 {
        // Corner / cube-edge point.
        let mut probe = start.local.clone();
        for &a in &on_plane {
            probe[a] = if start.local[a].within_tol(&tol) {
                S::zero()
            } else {
                S::one()
            };
        }
        return Some(corner_edge_at(manifold, start.cell, &probe, &on_plane, dim));
    }
    if let [a] = on_plane[..] {
        let side = if start.local[a].within_tol(&tol) {
            Side::Minus
        } else {
            Side::Plus
        };
        let face = FaceRef::new(start.cell, Axis::from_index(a), side);
        let uv = face_uv(&start.local, Axis::from_index(a));
        return manifold.marker_hit(face, &uv, &tol);
    }
    None
}

fn advance<S: Scalar>(p: &[S; 3], v: &[S; 3], dt: &S) -> [S; 3] {
    [
        p[0].clone() + dt.clone() * v[0].clone(),
        p[1].clone() + dt.clone() * v[1].clone(),
        p[2].clone() + dt.clone() * v[2].clone(),
    ]
}

/// Tangential local coordinates of a position lying on a face of `axis`.
fn face_uv<S: Scalar>(local: &[S; 3], axis: Axis) -> [S; 2] {
    let t = axis.tangentials();
    [local[t[0].index()].clone(), local[t[1].index()].clone()]
}

/// Place tangential coordinates back into a full local position on the
/// entering face.
fn place_on_face<S: Scalar>(enter: &FaceRef, uv: [S; 2]) -> [S; 3] {
    let mut local = [S::zero(), S::zero(), S::zero()];
    let t = enter.axis.tangentials();
    local[t[0].index()] = uv[0].clone();
    local[t[1].index()] = uv[1].clone();
    local[enter.axis.index()] = match enter.side {
        Side::Minus => S::zero(),
        Side::Plus => S::one(),
    };
    local
}

/// The cube edge (dim 3) or lattice vertex (dim 2) hit when two axis planes
/// are crossed simultaneously at local position `exit`.
fn corner_edge<S: Scalar>(
    manifold: &Manifold,
    cell: CellId,
    exit: &[S; 3],
    _v: &[S; 3],
    dim: usize,
) -> SplittingEdge {
    let tol = S::edge_tol();
    let on_plane: Vec<usize> = (0..dim)
        .filter(|&a| exit[a].within_tol(&tol) || (exit[a].clone() - S::one()).within_tol(&tol))
        .collect();
    corner_edge_at(manifold, cell, exit, &on_plane, dim)
}

fn corner_edge_at<S: Scalar>(
    _manifold: &Manifold,
    cell: CellId,
    local: &[S; 3],
    on_plane: &[usize],
    dim: usize,
) -> SplittingEdge {
    let c = cell.coords();
    let mut anchor = c;
    for &a in on_plane {
        if (local[a].clone() - S::one()).abs() < local[a].abs()
            || (local[a].clone() - S::one()).is_zero()
        {
            anchor[a] = c[a] + 1;
        }
    }
    if dim == 2 {
        return SplittingEdge::CubeEdge {
            anchor: [anchor[0], anchor[1], 0],
            run: Axis::Z,
            unit_length: false,
        };
    }
    // Runs along the axis not involved in the double crossing. A triple
    // corner (a lattice vertex of the cube complex) is reported through its
    // z-direction edge.
    let run_idx = (0..3).find(|a| !on_plane.contains(a)).unwrap_or(2);
    SplittingEdge::CubeEdge {
        anchor,
        run: Axis::from_index(run_idx),
        unit_length: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::num::{rat, rat_int, Rat};

    fn torus() -> Manifold {
        fixtures::build(&fixtures::torus_3d())
    }

    fn point3(cell: CellId, x: f64, y: f64, z: f64) -> ManifoldPoint<f64> {
        ManifoldPoint::new(cell, [x, y, z])
    }

    #[test]
    fn vertical_period_on_torus() {
        let m = torus();
        let start = point3(CellId(0, 0, 0), 0.5, 0.5, 0.5);
        let dir = Direction::dim3(0.0, 0.0);
        let tr = trace(&m, &start, &dir, &2.0).unwrap();
        assert_eq!(tr.events.len(), 2);
        assert!(tr
            .events
            .iter()
            .all(|e| e.kind == EventKind::PairingTransport));
        assert_eq!(tr.events[0].time, 0.5);
        assert_eq!(tr.events[1].time, 1.5);
        let end = tr.end_point();
        assert_eq!(end.cell, CellId(0, 0, 0));
        for a in 0..3 {
            assert!((end.local[a] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn free_torus_flow_matches_closed_form() {
        // Corner launch: the low-level entry deliberately starts on the
        // lattice vertex; a Kronecker direction never returns to an edge.
        let m = torus();
        let dir = Direction::dim3(2f64.sqrt(), 3f64.sqrt());
        let tr = launch(&m, CellId(0, 0, 0), [0.0, 0.0, 0.0], &dir, &10.0).unwrap();
        assert!(!tr.hit_singularity());
        let end = tr.end_point();
        let expect = [
            (10.0 * 2f64.sqrt()).fract(),
            (10.0 * 3f64.sqrt()).fract(),
            10f64.fract(),
        ];
        for a in 0..3 {
            let d = (end.local[a] - expect[a]).abs();
            let d = d.min((d - 1.0).abs());
            assert!(d < 1e-9, "axis {a}: {} vs {}", end.local[a], expect[a]);
        }
    }

    #[test]
    fn projection_commutes_with_flow() {
        let m = fixtures::build(&fixtures::figure2_3d());
        let start = point3(CellId(0, 0, 0), 0.3, 0.4, 0.6);
        let dir = Direction::dim3(2f64.sqrt(), 3f64.sqrt());
        let t_max = 20.0;
        let tr = trace(&m, &start, &dir, &t_max).unwrap();
        assert!(!tr.hit_singularity());
        for k in 1..100 {
            let t = t_max * k as f64 / 100.0;
            let p = tr.position_at(&t).unwrap();
            let proj = project_mod1(&p);
            for a in 0..3 {
                let straight =
                    (start.local[a] + t * dir.components()[a]).rem_euclid(1.0);
                let mut d = (proj[a] - straight).abs();
                d = d.min(1.0 - d);
                assert!(d < 1e-9, "t={t} axis={a}: {} vs {straight}", proj[a]);
            }
        }
    }

    #[test]
    fn backflow_from_barrier_top_edge_hits_it() {
        // figure2: the barrier top edges are the y-direction cube edges at
        // (x, z) = (1, 1). Back-flow from a point on that edge and re-trace.
        let m = fixtures::build(&fixtures::figure2_3d());
        let v = [2f64.sqrt(), 0.2, 1.0];
        let t_star = 0.25;
        let start = point3(
            CellId(0, 0, 0),
            1.0 - t_star * v[0],
            0.5 - t_star * v[1],
            1.0 - t_star * v[2],
        );
        let dir = Direction::dim3(v[0], v[1]);
        let tr = trace(&m, &start, &dir, &1.0).unwrap();
        match &tr.terminated {
            Termination::SingularHit { time, edge } => {
                assert!((time - t_star).abs() < 1e-9);
                assert_eq!(
                    *edge,
                    SplittingEdge::CubeEdge {
                        anchor: [1, 0, 1],
                        run: Axis::Y,
                        unit_length: true,
                    }
                );
            }
            other => panic!("expected singular hit, got {other:?}"),
        }
    }

    #[test]
    fn marker_line_hit_on_gates4() {
        // gates4: the wall at plane x = 2 has height 1/2; aim at its top
        // edge, an interior face line, not a cube edge.
        let m = fixtures::build(&fixtures::gates4_3d());
        let v = [2f64.sqrt(), 0.2, 1.0];
        let t_star = 0.3;
        let start = point3(
            CellId(1, 0, 0),
            2.0 - 1.0 - t_star * v[0],
            0.5 - t_star * v[1],
            0.5 - t_star * v[2],
        );
        let dir = Direction::dim3(v[0], v[1]);
        let tr = trace(&m, &start, &dir, &1.0).unwrap();
        match &tr.terminated {
            Termination::SingularHit { time, edge } => {
                assert!((time - t_star).abs() < 1e-9);
                match edge {
                    SplittingEdge::FaceEdge { face_axis, plane, line, .. } => {
                        assert_eq!(*face_axis, Axis::X);
                        assert_eq!(*plane, 2);
                        assert_eq!(*line, [rat_int(0), rat_int(2), rat_int(1)]);
                    }
                    other => panic!("expected face edge, got {other:?}"),
                }
                assert_eq!(edge.run_axis(), Some(Axis::Y));
            }
            other => panic!("expected singular hit, got {other:?}"),
        }
    }

    #[test]
    fn project_mod1_forgets_cell() {
        let p = ManifoldPoint::new(CellId(2, 1, 0), [0.25, 0.5, 0.75]);
        let q = ManifoldPoint::new(CellId(0, 0, 1), [0.25, 0.5, 0.75]);
        assert_eq!(project_mod1(&p), [0.25, 0.5, 0.75]);
        assert_eq!(project_mod1(&p), project_mod1(&q));
    }

    #[test]
    fn start_on_vertex_is_singular_at_time_zero() {
        let m = torus();
        let start = point3(CellId(0, 0, 0), 0.0, 0.0, 0.0);
        let dir = Direction::dim3(2f64.sqrt(), 3f64.sqrt());
        let tr = trace(&m, &start, &dir, &1.0).unwrap();
        match &tr.terminated {
            Termination::SingularHit { time, .. } => assert_eq!(*time, 0.0),
            other => panic!("expected immediate singular hit, got {other:?}"),
        }
    }

    #[test]
    fn gliding_direction_rejected() {
        let m = torus();
        let dir = Direction::dim3(0.0, 0.0);
        let on_plane = point3(CellId(0, 0, 0), 0.0, 0.5, 0.5);
        assert!(matches!(
            trace(&m, &on_plane, &dir, &1.0),
            Err(TraceError::GlidingDirection { axis: Axis::X })
        ));
        // Same direction from an interior point is fine (a vertical circle).
        let inside = point3(CellId(0, 0, 0), 0.5, 0.5, 0.25);
        assert!(trace(&m, &inside, &dir, &1.0).is_ok());
    }

    #[test]
    fn exact_reverse_round_trip() {
        let m = fixtures::build(&fixtures::figure2_3d());
        let start = ManifoldPoint::new(
            CellId(0, 0, 0),
            [rat(1, 3), rat(2, 5), rat(1, 7)],
        );
        let dir = Direction::dim3(rat(3, 7), rat(2, 11));
        let t_max = rat_int(10);
        let tr = trace(&m, &start, &dir, &t_max).unwrap();
        assert!(!tr.hit_singularity(), "chosen rational flow stays regular");
        let back = reverse(&m, &tr).unwrap();
        let home = back.end_point();
        assert_eq!(home.cell, start.cell);
        assert_eq!(home.local, start.local);
    }

    #[test]
    fn float_reverse_round_trip_many_events() {
        let m = fixtures::build(&fixtures::figure2_3d());
        let start = point3(CellId(1, 0, 1), 0.312, 0.777, 0.421);
        let dir = Direction::dim3(2f64.sqrt(), 3f64.sqrt());
        let tr = trace(&m, &start, &dir, &15.0).unwrap();
        assert!(!tr.hit_singularity());
        assert!(tr.events.len() >= 50);
        let back = reverse(&m, &tr).unwrap();
        assert!(!back.hit_singularity());
        let home = back.end_point();
        assert_eq!(home.cell, start.cell);
        for a in 0..3 {
            assert!((home.local[a] - start.local[a]).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_trace_not_reversible() {
        let m = fixtures::build(&fixtures::figure2_3d());
        let v = [2f64.sqrt(), 0.2, 1.0];
        let start = point3(CellId(0, 0, 0), 1.0 - 0.25 * v[0], 0.5, 0.75);
        let tr = trace(&m, &start, &Direction::dim3(v[0], v[1]), &1.0).unwrap();
        assert!(tr.hit_singularity());
        assert!(matches!(reverse(&m, &tr), Err(TraceError::NotReversible)));
    }

    #[test]
    fn event_count_within_bound() {
        let m = torus();
        let dir = Direction::dim3(2f64.sqrt(), 3f64.sqrt());
        for (i, t_max) in [1.0, 5.0, 17.3].into_iter().enumerate() {
            let start = point3(CellId(0, 0, 0), 0.21 + 0.1 * i as f64, 0.43, 0.77);
            let tr = trace(&m, &start, &dir, &t_max).unwrap();
            assert!(tr.events.len() <= event_bound(&dir, &t_max));
        }
    }

    #[test]
    fn identical_inputs_identical_traces() {
        let m = fixtures::build(&fixtures::gates4_3d());
        let start = point3(CellId(2, 0, 0), 0.3, 0.6, 0.9);
        let dir = Direction::dim3(2f64.sqrt(), 3f64.sqrt());
        let a = trace(&m, &start, &dir, &25.0).unwrap();
        let b = trace(&m, &start, &dir, &25.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn two_dimensional_surface_trace() {
        let m = fixtures::build(&fixtures::figure2_surface_2d());
        // Bottom-left square is sealed horizontally: crossing x = 1 below the
        // top row re-enters the same cell.
        let start = ManifoldPoint::new(CellId(0, 0, 0), [0.9, 0.25, 0.0]);
        let dir = Direction::dim2(0.05);
        let tr = trace(&m, &start, &dir, &0.5).unwrap();
        assert!(!tr.hit_singularity());
        let cross = &tr.events[0];
        assert_eq!(cross.kind, EventKind::PairingTransport);
        assert_eq!(tr.segments[1].cell, CellId(0, 0, 0));
        // The same start in the top row passes through to the neighbour.
        let start = ManifoldPoint::new(CellId(0, 1, 0), [0.9, 0.25, 0.0]);
        let tr = trace(&m, &start, &dir, &0.5).unwrap();
        assert_eq!(tr.segments[1].cell, CellId(1, 1, 0));
    }

    #[test]
    fn csv_has_one_row_per_segment() {
        let m = torus();
        let start = point3(CellId(0, 0, 0), 0.5, 0.5, 0.5);
        let dir = Direction::dim3(0.0, 0.0);
        let tr = trace(&m, &start, &dir, &2.0).unwrap();
        let csv = tr.to_csv();
        let rows: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(rows.len(), 1 + tr.segments.len());
        assert!(rows[0].starts_with("t_enter,t_exit,"));
        assert!(rows.last().unwrap().ends_with("t-max"));
    }
}
