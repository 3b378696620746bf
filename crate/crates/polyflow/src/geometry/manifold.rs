//! Runtime manifold: face topology, the transport map realizing the
//! identifications, and the derived (harmonized) splitting-edge sets.

use super::polygon::Polygon;
use super::{Axis, CellId, FaceRef, Side};
use crate::num::{rat_int, Rat, Scalar};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// How a face connects to the rest of the manifold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaceLink {
    /// The neighbouring lattice cell exists; crossing is a plain interior
    /// passage unless a gate refines it.
    Shared(CellId),
    /// Boundary face identified with a partner face by translation.
    Paired(FaceRef),
    /// Boundary face fully covered by red panes; every point transports
    /// through a pane, so no face-level pairing is needed.
    Sealed,
}

/// One red pane: an impassable polygon re-identified with the congruent
/// polygon at the same local position on another face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RedPane {
    pub polygon: Polygon,
    pub target: FaceRef,
}

/// Gate data attached to one side of a geometric face.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GateSide {
    pub green: Vec<Polygon>,
    pub red: Vec<RedPane>,
}

impl GateSide {
    /// Polygon boundary segments that are not on the unit-square border
    /// (border segments coincide with cube edges and are tracked there).
    fn interior_edge_segments(&self) -> Vec<LocalSegment> {
        let mut segs = Vec::new();
        for poly in self.green.iter().chain(self.red.iter().map(|r| &r.polygon)) {
            for (a, b) in poly.edges() {
                let seg = LocalSegment::through(a.clone(), b.clone());
                if !seg.on_unit_border() {
                    segs.push(seg);
                }
            }
        }
        segs
    }
}

#[derive(Clone, Debug)]
pub struct FaceData {
    pub link: FaceLink,
    pub gate: Option<GateSide>,
}

/// Census classification: each face is exactly one of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FaceClass {
    Interior,
    Gated,
    Paired,
}

#[derive(Clone, Debug)]
pub struct FaceCensus {
    pub classes: BTreeMap<FaceRef, FaceClass>,
    pub interior: usize,
    pub gated: usize,
    pub paired: usize,
    pub pairings: usize,
}

/// A marker segment in face-local coordinates with its supporting line
/// `c1*u + c2*v = c3` (coefficients integer, primitive, first nonzero of
/// `(c1, c2)` positive).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LocalSegment {
    pub line: [Rat; 3],
    pub a: [Rat; 2],
    pub b: [Rat; 2],
}

impl LocalSegment {
    pub fn through(a: [Rat; 2], b: [Rat; 2]) -> Self {
        let c1 = &b[1] - &a[1];
        let c2 = &a[0] - &b[0];
        let c3 = &c1 * &a[0] + &c2 * &a[1];
        let line = normalize_line([c1, c2, c3]);
        let (a, b) = order_endpoints(a, b);
        LocalSegment { line, a, b }
    }

    fn on_unit_border(&self) -> bool {
        let [c1, c2, c3] = &self.line;
        (c2.is_zero() && (c3.is_zero() || c3 == c1))
            || (c1.is_zero() && (c3.is_zero() || c3 == c2))
    }

    /// Scalar position of a point along the line direction, for interval
    /// bookkeeping on collinear segments.
    fn param(&self, p: &[Rat; 2]) -> Rat {
        // direction (-c2, c1)
        -&self.line[1] * &p[0] + &self.line[0] * &p[1]
    }

    /// Axis the segment runs along in local (u, v) coordinates, if any.
    pub fn run_axis_local(&self) -> Option<usize> {
        if self.line[0].is_zero() {
            Some(0) // v = const, runs along u
        } else if self.line[1].is_zero() {
            Some(1) // u = const, runs along v
        } else {
            None
        }
    }
}

fn order_endpoints(a: [Rat; 2], b: [Rat; 2]) -> ([Rat; 2], [Rat; 2]) {
    if (&a[0], &a[1]) <= (&b[0], &b[1]) {
        (a, b)
    } else {
        (b, a)
    }
}

/// Scale to integer, divide by gcd, fix sign of the first nonzero of (c1,c2).
pub(crate) fn normalize_line(c: [Rat; 3]) -> [Rat; 3] {
    let lcm = c
        .iter()
        .fold(num_bigint::BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let mut n: Vec<num_bigint::BigInt> =
        c.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut g = num_bigint::BigInt::zero();
    for x in &n {
        g = g.gcd(x);
    }
    if !g.is_zero() {
        for x in n.iter_mut() {
            *x = &*x / &g;
        }
    }
    let flip = if !n[0].is_zero() {
        n[0].is_negative()
    } else {
        n[1].is_negative()
    };
    if flip {
        for x in n.iter_mut() {
            *x = -&*x;
        }
    }
    [
        Rat::from_integer(n[0].clone()),
        Rat::from_integer(n[1].clone()),
        Rat::from_integer(n[2].clone()),
    ]
}

/// Kind discriminant mirroring the two splitting-edge families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SplittingEdgeKind {
    CubeEdge,
    FaceEdge,
}

/// A singular element of the manifold. Cube edges are unit lattice edges
/// (for 2-dimensional surfaces they degenerate to lattice vertices, reported
/// with run axis Z and zero length). Face edges are gate/barrier polygon
/// boundary lines stamped onto every face of the carrying axis by
/// harmonization.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
#[allow(clippy::large_enum_variant)]
pub enum SplittingEdge {
    CubeEdge {
        /// Lattice anchor; the edge spans one unit from here along `run`.
        anchor: [i64; 3],
        run: Axis,
        /// False for the degenerate 2-dimensional vertex case.
        unit_length: bool,
    },
    FaceEdge {
        /// Normal axis of the carrying face.
        face_axis: Axis,
        /// Ambient plane coordinate along `face_axis`.
        plane: i64,
        /// Lattice anchor of the carrying geometric face (its min corner).
        face_anchor: [i64; 3],
        /// Supporting line in face-local coordinates.
        line: [Rat; 3],
        /// Segment endpoints in face-local coordinates.
        a: [Rat; 2],
        b: [Rat; 2],
    },
}

impl SplittingEdge {
    pub fn kind(&self) -> SplittingEdgeKind {
        match self {
            SplittingEdge::CubeEdge { .. } => SplittingEdgeKind::CubeEdge,
            SplittingEdge::FaceEdge { .. } => SplittingEdgeKind::FaceEdge,
        }
    }

    /// Ambient axis the segment runs along; `None` for slanted face edges.
    pub fn run_axis(&self) -> Option<Axis> {
        match self {
            SplittingEdge::CubeEdge { run, .. } => Some(*run),
            SplittingEdge::FaceEdge { face_axis, line, .. } => {
                let t = face_axis.tangentials();
                if line[0].is_zero() {
                    Some(t[0])
                } else if line[1].is_zero() {
                    Some(t[1])
                } else {
                    None
                }
            }
        }
    }

    /// Ambient endpoints of the supporting segment.
    pub fn support(&self) -> ([Rat; 3], [Rat; 3]) {
        match self {
            SplittingEdge::CubeEdge { anchor, run, unit_length } => {
                let a = [
                    rat_int(anchor[0]),
                    rat_int(anchor[1]),
                    rat_int(anchor[2]),
                ];
                let mut b = a.clone();
                if *unit_length {
                    b[run.index()] += rat_int(1);
                }
                (a, b)
            }
            SplittingEdge::FaceEdge { face_axis, plane, face_anchor, a, b, .. } => {
                let embed = |uv: &[Rat; 2]| {
                    let mut p = [
                        rat_int(face_anchor[0]),
                        rat_int(face_anchor[1]),
                        rat_int(face_anchor[2]),
                    ];
                    let t = face_axis.tangentials();
                    p[face_axis.index()] = rat_int(*plane);
                    p[t[0].index()] += uv[0].clone();
                    p[t[1].index()] += uv[1].clone();
                    p
                };
                (embed(a), embed(b))
            }
        }
    }
}

/// Result of transporting a face point through an identification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transported<S> {
    /// Face of the entered cell through which the point arrives.
    pub enter_face: FaceRef,
    /// Tangential local coordinates on the entered face (preserved exactly).
    pub uv: [S; 2],
    pub passage: Passage,
}

/// What kind of identification carried the point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Passage {
    Interior,
    Gate,
    Pairing,
}

/// Error from [`Manifold::transport`]: the point sits on (or within
/// tolerance of) a singular element, so the transport map is undefined.
#[derive(Clone, Debug, thiserror::Error)]
#[error("point on splitting edge at {face}: {edge:?}")]
pub struct OnSplittingEdge {
    pub face: FaceRef,
    pub edge: SplittingEdge,
}

/// A validated, boundary-free translation manifold.
#[derive(Clone, Debug)]
pub struct Manifold {
    pub name: String,
    pub dim: usize,
    cells: Vec<CellId>,
    cell_set: BTreeSet<CellId>,
    faces: BTreeMap<FaceRef, FaceData>,
    pairings_count: usize,
    /// Harmonized marker lines per face axis, in face-local coordinates.
    markers: [Vec<LocalSegment>; 3],
    /// Full derived splitting-edge listing (cube edges + stamped face edges).
    splitting_edges: Vec<SplittingEdge>,
}

impl Manifold {
    /// Internal constructor used by the description builder; assumes all
    /// validation has already run. Derives splitting edges and harmonizes.
    pub(super) fn assemble(
        name: String,
        dim: usize,
        cells: Vec<CellId>,
        faces: BTreeMap<FaceRef, FaceData>,
        pairings_count: usize,
    ) -> Manifold {
        let cell_set = cells.iter().copied().collect();
        let mut m = Manifold {
            name,
            dim,
            cells,
            cell_set,
            faces,
            pairings_count,
            markers: [Vec::new(), Vec::new(), Vec::new()],
            splitting_edges: Vec::new(),
        };
        m.rederive_edges();
        m
    }

    pub fn cells(&self) -> &[CellId] {
        &self.cells
    }

    /// Number of atomic squares/cubes.
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn contains_cell(&self, c: CellId) -> bool {
        self.cell_set.contains(&c)
    }

    pub fn pairings_count(&self) -> usize {
        self.pairings_count
    }

    /// Total volume (area in dim 2); identifications add nothing, so this is
    /// exactly the cell count.
    pub fn volume(&self) -> Rat {
        rat_int(self.cells.len() as i64)
    }

    pub fn face(&self, f: FaceRef) -> &FaceData {
        self.faces
            .get(&f)
            .unwrap_or_else(|| panic!("face {f} not part of manifold {}", self.name))
    }

    pub fn faces(&self) -> impl Iterator<Item = (&FaceRef, &FaceData)> {
        self.faces.iter()
    }

    /// Harmonized marker segments shared by every face with this normal axis.
    pub fn markers(&self, axis: Axis) -> &[LocalSegment] {
        &self.markers[axis.index()]
    }

    pub fn splitting_edges(&self) -> &[SplittingEdge] {
        &self.splitting_edges
    }

    /// Exhaustive face classification. Every face of every cell appears
    /// exactly once.
    pub fn census(&self) -> FaceCensus {
        let mut classes = BTreeMap::new();
        let (mut interior, mut gated, mut paired) = (0, 0, 0);
        for (f, data) in &self.faces {
            let class = if data.gate.is_some() {
                gated += 1;
                FaceClass::Gated
            } else {
                match data.link {
                    FaceLink::Shared(_) => {
                        interior += 1;
                        FaceClass::Interior
                    }
                    FaceLink::Paired(_) | FaceLink::Sealed => {
                        paired += 1;
                        FaceClass::Paired
                    }
                }
            };
            classes.insert(*f, class);
        }
        FaceCensus {
            classes,
            interior,
            gated,
            paired,
            pairings: self.pairings_count,
        }
    }

    /// Transport a point sitting on `face` (tangential local coordinates
    /// `uv`) to its identified image. Exact in rational mode; float mode
    /// reports singular proximity within the 1e-9 ambient tolerance.
    #[allow(clippy::result_large_err)]
    pub fn transport<S: Scalar>(
        &self,
        face: FaceRef,
        uv: [S; 2],
    ) -> Result<Transported<S>, OnSplittingEdge> {
        let tol = S::edge_tol();
        let data = self.face(face);

        // Cube-edge proximity: the face border (in dim 2 the edge tips).
        if let Some(edge) = self.border_hit(face, &uv, &tol) {
            return Err(OnSplittingEdge { face, edge });
        }

        if let Some(gate) = &data.gate {
            // Gate/barrier boundary proximity, against this face's own panes.
            for seg in gate.interior_edge_segments() {
                if segment_hit(&seg, &uv, &tol) {
                    return Err(OnSplittingEdge {
                        face,
                        edge: self.face_edge_record(face, &seg),
                    });
                }
            }
            if let Some(pane) = gate.red.iter().find(|p| poly_contains(&p.polygon, &uv)) {
                return Ok(Transported {
                    enter_face: pane.target,
                    uv,
                    passage: Passage::Pairing,
                });
            }
            // Not red and not on an edge: must be green.
            return match &data.link {
                FaceLink::Shared(_) => Ok(Transported {
                    enter_face: face.twin(),
                    uv,
                    passage: Passage::Gate,
                }),
                FaceLink::Paired(partner) => Ok(Transported {
                    enter_face: *partner,
                    uv,
                    passage: Passage::Gate,
                }),
                FaceLink::Sealed => unreachable!("sealed face has no green"),
            };
        }

        match &data.link {
            FaceLink::Shared(_) => Ok(Transported {
                enter_face: face.twin(),
                uv,
                passage: Passage::Interior,
            }),
            FaceLink::Paired(partner) => Ok(Transported {
                enter_face: *partner,
                uv,
                passage: Passage::Pairing,
            }),
            FaceLink::Sealed => unreachable!("sealed face must carry a gate"),
        }
    }

    /// Re-derive cube edges, gather per-face gate boundary lines, and stamp
    /// the per-axis union onto every face of that axis. Idempotent: colour
    /// polygons are never touched, only the derived marker sets.
    pub fn harmonize_splitting_edges(&self) -> Manifold {
        let mut out = self.clone();
        out.rederive_edges();
        out
    }

    fn rederive_edges(&mut self) {
        // Per-axis union of gate boundary segments, mod-1 (face-local).
        for axis in &Axis::ALL[..] {
            let mut segs = Vec::new();
            for (f, data) in &self.faces {
                if f.axis != *axis {
                    continue;
                }
                if let Some(gate) = &data.gate {
                    segs.extend(gate.interior_edge_segments());
                }
            }
            self.markers[axis.index()] = merge_segments(segs);
        }

        let mut edges: BTreeSet<SplittingEdge> = BTreeSet::new();
        // Cube edges (dim 3) / lattice vertices (dim 2).
        for cell in &self.cells {
            let [i, j, k] = cell.coords();
            if self.dim == 3 {
                for run in Axis::ALL {
                    let t = run.tangentials();
                    for du in 0..=1i64 {
                        for dv in 0..=1i64 {
                            let mut anchor = [i, j, k];
                            anchor[t[0].index()] += du;
                            anchor[t[1].index()] += dv;
                            edges.insert(SplittingEdge::CubeEdge {
                                anchor,
                                run,
                                unit_length: true,
                            });
                        }
                    }
                }
            } else {
                for du in 0..=1i64 {
                    for dv in 0..=1i64 {
                        edges.insert(SplittingEdge::CubeEdge {
                            anchor: [i + du, j + dv, 0],
                            run: Axis::Z,
                            unit_length: false,
                        });
                    }
                }
            }
        }
        // Stamp the harmonized markers onto every geometric face of the axis.
        for (axis, anchor) in self.geometric_faces() {
            for seg in &self.markers[axis.index()] {
                edges.insert(SplittingEdge::FaceEdge {
                    face_axis: axis,
                    plane: anchor[axis.index()],
                    face_anchor: anchor,
                    line: seg.line.clone(),
                    a: seg.a.clone(),
                    b: seg.b.clone(),
                });
            }
        }
        self.splitting_edges = edges.into_iter().collect();
    }

    /// Distinct geometric faces as (normal axis, min-corner lattice anchor).
    pub fn geometric_faces(&self) -> BTreeSet<(Axis, [i64; 3])> {
        let mut out = BTreeSet::new();
        for cell in &self.cells {
            for axis in &Axis::ALL[..self.dim] {
                let [i, j, k] = cell.coords();
                let mut hi = [i, j, k];
                hi[axis.index()] += 1;
                out.insert((*axis, [i, j, k]));
                out.insert((*axis, hi));
            }
        }
        out
    }

    /// Cube-edge (or 2-dimensional vertex) record for a border hit at `uv`.
    fn border_hit<S: Scalar>(
        &self,
        face: FaceRef,
        uv: &[S; 2],
        tol: &S,
    ) -> Option<SplittingEdge> {
        let one = S::one();
        let near0 = |x: &S| x.within_tol(tol);
        let near1 = |x: &S| (x.clone() - one.clone()).within_tol(tol);
        if self.dim == 2 {
            // Faces are unit edges; uv[0] is the single tangential coord.
            if near0(&uv[0]) || near1(&uv[0]) {
                let mut anchor = self.face_anchor(face);
                if near1(&uv[0]) {
                    anchor[face.axis.tangentials()[0].index()] += 1;
                }
                return Some(SplittingEdge::CubeEdge {
                    anchor,
                    run: Axis::Z,
                    unit_length: false,
                });
            }
            return None;
        }
        let t = face.axis.tangentials();
        for (i, coord) in uv.iter().enumerate() {
            if near0(coord) || near1(coord) {
                // Runs along the other tangential axis.
                let run = t[1 - i];
                let mut anchor = self.face_anchor(face);
                if near1(coord) {
                    anchor[t[i].index()] += 1;
                }
                return Some(SplittingEdge::CubeEdge {
                    anchor,
                    run,
                    unit_length: true,
                });
            }
        }
        None
    }

    /// Marker proximity check used by the tracer: the harmonized set for the
    /// face's axis, evaluated at face-local `uv`.
    pub fn marker_hit<S: Scalar>(&self, face: FaceRef, uv: &[S; 2], tol: &S) -> Option<SplittingEdge> {
        for seg in self.markers(face.axis) {
            if segment_hit(seg, uv, tol) {
                return Some(self.face_edge_record(face, seg));
            }
        }
        None
    }

    fn face_anchor(&self, face: FaceRef) -> [i64; 3] {
        let mut a = face.cell.coords();
        if face.side == Side::Plus {
            a[face.axis.index()] += 1;
        }
        a
    }

    fn face_edge_record(&self, face: FaceRef, seg: &LocalSegment) -> SplittingEdge {
        SplittingEdge::FaceEdge {
            face_axis: face.axis,
            plane: face.plane(),
            face_anchor: self.face_anchor(face),
            line: seg.line.clone(),
            a: seg.a.clone(),
            b: seg.b.clone(),
        }
    }
}

/// Point-in-polygon over scalar `S`, counting the boundary as inside.
/// Callers reject boundary-proximate points beforehand, so the edge case
/// never decides a transport. Exact when `S` is exact.
fn poly_contains<S: Scalar>(poly: &Polygon, uv: &[S; 2]) -> bool {
    let n = poly.vertices().len();
    for i in 0..n {
        let a = &poly.vertices()[i];
        let b = &poly.vertices()[(i + 1) % n];
        let ax = S::from_rat(&a[0]);
        let ay = S::from_rat(&a[1]);
        let bx = S::from_rat(&b[0]);
        let by = S::from_rat(&b[1]);
        let c = (bx - ax.clone()) * (uv[1].clone() - ay.clone())
            - (by - ay) * (uv[0].clone() - ax);
        if c < S::zero() {
            return false;
        }
    }
    true
}

/// Squared distance from `p` to segment `[a, b]` is within `tol^2`.
/// With tol = 0 this is the exact on-segment predicate.
fn segment_hit<S: Scalar>(seg: &LocalSegment, p: &[S; 2], tol: &S) -> bool {
    let ax = S::from_rat(&seg.a[0]);
    let ay = S::from_rat(&seg.a[1]);
    let bx = S::from_rat(&seg.b[0]);
    let by = S::from_rat(&seg.b[1]);
    let dx = bx - ax.clone();
    let dy = by - ay.clone();
    let px = p[0].clone() - ax;
    let py = p[1].clone() - ay;
    let len2 = dx.clone() * dx.clone() + dy.clone() * dy.clone();
    let dot = px.clone() * dx.clone() + py.clone() * dy.clone();
    let tol2 = tol.clone() * tol.clone();
    // Clamp the projection parameter to [0, 1].
    let (cx, cy) = if dot <= S::zero() {
        (S::zero(), S::zero())
    } else if dot >= len2 {
        (dx, dy)
    } else {
        let t = dot / len2;
        (t.clone() * dx, t * dy)
    };
    let rx = px - cx;
    let ry = py - cy;
    rx.clone() * rx + ry.clone() * ry <= tol2
}

/// Canonical merged form: group collinear segments, merge overlapping or
/// touching spans, emit sorted. Running it twice is a no-op.
fn merge_segments(segs: Vec<LocalSegment>) -> Vec<LocalSegment> {
    let mut by_line: BTreeMap<[Rat; 3], Vec<LocalSegment>> = BTreeMap::new();
    for s in segs {
        by_line.entry(s.line.clone()).or_default().push(s);
    }
    let mut out = Vec::new();
    for (line, group) in by_line {
        let mut spans: Vec<(Rat, [Rat; 2], Rat, [Rat; 2])> = group
            .iter()
            .map(|s| (s.param(&s.a), s.a.clone(), s.param(&s.b), s.b.clone()))
            .map(|(ta, pa, tb, pb)| {
                if ta <= tb {
                    (ta, pa, tb, pb)
                } else {
                    (tb, pb, ta, pa)
                }
            })
            .collect();
        spans.sort_by(|x, y| x.0.cmp(&y.0));
        let mut merged: Vec<(Rat, [Rat; 2], Rat, [Rat; 2])> = Vec::new();
        for span in spans {
            match merged.last_mut() {
                Some(last) if span.0 <= last.2 => {
                    if span.2 > last.2 {
                        last.2 = span.2;
                        last.3 = span.3;
                    }
                }
                _ => merged.push(span),
            }
        }
        for (_, pa, _, pb) in merged {
            let (a, b) = order_endpoints(pa, pb);
            out.push(LocalSegment { line: line.clone(), a, b });
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn seg(a: (i64, i64), b: (i64, i64), den: i64) -> LocalSegment {
        LocalSegment::through(
            [rat(a.0, den), rat(a.1, den)],
            [rat(b.0, den), rat(b.1, den)],
        )
    }

    #[test]
    fn line_normalization() {
        let s = seg((0, 1), (4, 1), 4); // v = 1/4 across the face
        assert_eq!(s.line, [rat_int(0), rat_int(4), rat_int(1)]);
        assert!(!s.on_unit_border());
        let border = seg((0, 0), (4, 0), 4); // v = 0
        assert!(border.on_unit_border());
    }

    #[test]
    fn merging_is_canonical_and_idempotent() {
        let parts = vec![seg((0, 2), (2, 2), 4), seg((1, 2), (4, 2), 4), seg((0, 1), (4, 1), 4)];
        let merged = merge_segments(parts);
        assert_eq!(merged.len(), 2);
        let again = merge_segments(merged.clone());
        assert_eq!(merged, again);
        // the v=1/2 span covers the whole face width
        let v_half = merged
            .iter()
            .find(|s| s.line == [rat_int(0), rat_int(2), rat_int(1)])
            .unwrap();
        assert_eq!(v_half.a, [rat_int(0), rat(1, 2)]);
        assert_eq!(v_half.b, [rat_int(1), rat(1, 2)]);
    }

    #[test]
    fn union_of_distinct_lines_is_kept() {
        // Two faces carrying v=1/4 and v=1/2 respectively: union holds both.
        let merged = merge_segments(vec![seg((0, 1), (4, 1), 4), seg((0, 2), (4, 2), 4)]);
        assert_eq!(merged.len(), 2);
    }

    #[test]
    fn segment_hit_exact_and_tolerant() {
        let s = seg((0, 2), (4, 2), 4);
        assert!(segment_hit(&s, &[rat(1, 2), rat(1, 2)], &Rat::zero()));
        assert!(!segment_hit(&s, &[rat(1, 2), rat(1, 3)], &Rat::zero()));
        assert!(segment_hit(&s, &[0.5f64, 0.5 + 5e-10], &1e-9));
        assert!(!segment_hit(&s, &[0.5f64, 0.5 + 5e-9], &1e-9));
        // beyond the endpoint
        assert!(!segment_hit(&s, &[1.1f64, 0.5], &1e-9));
    }
}
