//! Manifold description files: the JSON schema, the wraparound pairing
//! generator, and the validating builder.
//!
//! Schema (all rationals are strings like `"1/2"`, `"3"`):
//!
//! ```json
//! {
//!   "name": "figure2",
//!   "dim": 3,
//!   "cells": [[0,0,0], [1,0,0]],
//!   "wraparound": true,
//!   "pairings": [
//!     {"a": {"cell": [1,0,0], "axis": "X", "side": "+"},
//!      "b": {"cell": [0,0,0], "axis": "X", "side": "-"}}
//!   ],
//!   "gated_faces": [
//!     {"face": {"cell": [0,0,0], "axis": "X", "side": "+"},
//!      "green": [[["0","1/2"], ["1","1/2"], ["1","1"], ["0","1"]]],
//!      "red": [{"polygon": [["0","0"], ["1","0"], ["1","1/2"], ["0","1/2"]],
//!               "target_face": {"cell": [1,0,0], "axis": "X", "side": "-"},
//!               "target_polygon": [["0","0"], ["1","0"], ["1","1/2"], ["0","1/2"]]}]}
//!   ]
//! }
//! ```
//!
//! Conventions enforced by the builder:
//! - gate polygons are convex, with exact rational vertices inside `[0,1]^2`;
//!   describe non-convex regions as unions of convex pieces;
//! - a red pane's target polygon occupies the same local position as the pane
//!   itself (identifications are lattice translations);
//! - on 2-dimensional surfaces gates are whole-edge barriers: `green` empty
//!   and one red pane equal to the full face;
//! - `wraparound` pairs the two end faces of every maximal run of cells along
//!   every lattice line, cyclically, skipping faces already paired explicitly.

use super::manifold::{FaceData, FaceLink, GateSide, RedPane};
use super::polygon::Polygon;
use super::{Axis, CellId, FaceRef, GeometryError, Manifold, Side};
use crate::num::{parse_rat, rat_int, Rat};
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldDescription {
    #[serde(default = "default_name")]
    pub name: String,
    pub dim: usize,
    pub cells: Vec<Vec<i64>>,
    #[serde(default)]
    pub wraparound: bool,
    #[serde(default)]
    pub pairings: Vec<FacePairingDesc>,
    #[serde(default)]
    pub gated_faces: Vec<GatedFaceDesc>,
}

fn default_name() -> String {
    "manifold".into()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacePairingDesc {
    pub a: DescribedFace,
    pub b: DescribedFace,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescribedFace {
    pub cell: Vec<i64>,
    pub axis: String,
    pub side: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatedFaceDesc {
    pub face: DescribedFace,
    #[serde(default)]
    pub green: Vec<PolygonDesc>,
    #[serde(default)]
    pub red: Vec<RedPolygonDesc>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedPolygonDesc {
    pub polygon: PolygonDesc,
    pub target_face: DescribedFace,
    pub target_polygon: PolygonDesc,
}

pub type PolygonDesc = Vec<[String; 2]>;

impl ManifoldDescription {
    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        serde_json::from_str(text)
            .map_err(|e| GeometryError::BadDescription(format!("JSON error: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("description serializes")
    }

    /// Validate every invariant and produce the runtime manifold.
    pub fn build(&self) -> Result<Manifold, GeometryError> {
        let dim = self.dim;
        if dim != 2 && dim != 3 {
            return Err(GeometryError::BadDescription(format!(
                "dim must be 2 or 3, got {dim}"
            )));
        }
        let cells = self.parse_cells()?;
        let cell_set: BTreeSet<CellId> = cells.iter().copied().collect();

        check_region_connected(&cells, dim)?;

        // Explicit pairings, canonicalized to (plus-side, minus-side).
        let mut paired: BTreeMap<FaceRef, FaceRef> = BTreeMap::new();
        let mut pairings_count = 0usize;
        for p in &self.pairings {
            let a = parse_face(&p.a, dim, &cell_set)?;
            let b = parse_face(&p.b, dim, &cell_set)?;
            let (a, b) = match (a.side, b.side) {
                (Side::Plus, Side::Minus) => (a, b),
                (Side::Minus, Side::Plus) => (b, a),
                _ => {
                    return Err(GeometryError::BadDescription(format!(
                        "pairing {a} <-> {b} must join a + side with a - side"
                    )))
                }
            };
            if a.axis != b.axis {
                return Err(GeometryError::BadDescription(format!(
                    "pairing {a} <-> {b} must join faces of the same axis"
                )));
            }
            for f in [a, b] {
                if cell_set.contains(&f.neighbour_cell()) {
                    return Err(GeometryError::BadDescription(format!(
                        "face {f} is shared with cell {} and cannot be paired",
                        f.neighbour_cell()
                    )));
                }
                if paired.contains_key(&f) {
                    return Err(GeometryError::BadDescription(format!(
                        "face {f} appears in more than one pairing"
                    )));
                }
            }
            paired.insert(a, b);
            paired.insert(b, a);
            pairings_count += 1;
        }

        if self.wraparound {
            pairings_count += generate_wraparound(&cells, dim, &mut paired);
        }

        // Gates.
        let mut gates: BTreeMap<FaceRef, GateSide> = BTreeMap::new();
        for g in &self.gated_faces {
            let face = parse_face(&g.face, dim, &cell_set)?;
            if gates.contains_key(&face) {
                return Err(GeometryError::BadDescription(format!(
                    "face {face} gated twice"
                )));
            }
            let green = g
                .green
                .iter()
                .map(|p| parse_polygon(p, face))
                .collect::<Result<Vec<_>, _>>()?;
            let mut red = Vec::new();
            for r in &g.red {
                let polygon = parse_polygon(&r.polygon, face)?;
                let target = parse_face(&r.target_face, dim, &cell_set)?;
                let target_polygon = parse_polygon(&r.target_polygon, face)?;
                if target.axis != face.axis || target.side != face.side.opposite() {
                    return Err(GeometryError::IncongruentRedPairing {
                        face,
                        target,
                        reason: "target face's inward normal is not opposite".into(),
                    });
                }
                if !polygon.congruent_by(&target_polygon, &[Rat::from_integer(0.into()), Rat::from_integer(0.into())]) {
                    return Err(GeometryError::IncongruentRedPairing {
                        face,
                        target,
                        reason: "target polygon must be the same local polygon \
                                 (identifications are lattice translations)"
                            .into(),
                    });
                }
                red.push(RedPane { polygon, target });
            }
            if dim == 2 {
                let whole = green.is_empty()
                    && red.len() == 1
                    && red[0].polygon == Polygon::unit_square();
                if !whole {
                    return Err(GeometryError::BadDescription(format!(
                        "gated face {face}: 2-dimensional gates must be whole-edge \
                         barriers (empty green, one full-face red pane)"
                    )));
                }
            }
            check_tiling(face, &green, &red)?;
            gates.insert(face, GateSide { green, red });
        }

        // Assemble per-face data, classifying every face of every cell.
        let mut faces: BTreeMap<FaceRef, FaceData> = BTreeMap::new();
        for &cell in &cells {
            for axis in &Axis::ALL[..dim] {
                for side in [Side::Minus, Side::Plus] {
                    let f = FaceRef::new(cell, *axis, side);
                    let gate = gates.remove(&f);
                    let link = if cell_set.contains(&f.neighbour_cell()) {
                        FaceLink::Shared(f.neighbour_cell())
                    } else if let Some(partner) = paired.get(&f) {
                        FaceLink::Paired(*partner)
                    } else if gate.as_ref().is_some_and(covers_whole_face) {
                        FaceLink::Sealed
                    } else {
                        return Err(GeometryError::UnpairedBoundaryFace(f));
                    };
                    faces.insert(f, FaceData { link, gate });
                }
            }
        }
        if let Some((f, _)) = gates.first_key_value() {
            return Err(GeometryError::BadDescription(format!(
                "gated face {f} does not belong to any cell"
            )));
        }

        check_gate_symmetry(&faces)?;
        check_red_involution(&faces)?;
        check_traversable(&cells, &faces)?;

        Ok(Manifold::assemble(
            self.name.clone(),
            dim,
            cells,
            faces,
            pairings_count,
        ))
    }

    fn parse_cells(&self) -> Result<Vec<CellId>, GeometryError> {
        if self.cells.is_empty() {
            return Err(GeometryError::BadDescription("cell list is empty".into()));
        }
        let mut out = Vec::with_capacity(self.cells.len());
        let mut seen = BTreeSet::new();
        for raw in &self.cells {
            let id = match (self.dim, raw.len()) {
                (2, 2) => CellId(raw[0], raw[1], 0),
                (2, 3) if raw[2] == 0 => CellId(raw[0], raw[1], 0),
                (3, 3) => CellId(raw[0], raw[1], raw[2]),
                _ => {
                    return Err(GeometryError::BadDescription(format!(
                        "cell {raw:?} does not match dim {}",
                        self.dim
                    )))
                }
            };
            if !seen.insert(id) {
                return Err(GeometryError::OverlappingCells(id));
            }
            out.push(id);
        }
        out.sort();
        Ok(out)
    }
}

fn covers_whole_face(gate: &GateSide) -> bool {
    gate.green.is_empty()
        && gate.red.iter().map(|r| r.polygon.area()).sum::<Rat>() == Rat::one()
}

fn parse_face(
    d: &DescribedFace,
    dim: usize,
    cells: &BTreeSet<CellId>,
) -> Result<FaceRef, GeometryError> {
    let cell = match (dim, d.cell.len()) {
        (2, 2) => CellId(d.cell[0], d.cell[1], 0),
        (2, 3) if d.cell[2] == 0 => CellId(d.cell[0], d.cell[1], 0),
        (3, 3) => CellId(d.cell[0], d.cell[1], d.cell[2]),
        _ => {
            return Err(GeometryError::BadDescription(format!(
                "face cell {:?} does not match dim {dim}",
                d.cell
            )))
        }
    };
    if !cells.contains(&cell) {
        return Err(GeometryError::BadDescription(format!(
            "face references cell {cell} which is not in the region"
        )));
    }
    let axis = match d.axis.to_ascii_uppercase().as_str() {
        "X" => Axis::X,
        "Y" => Axis::Y,
        "Z" if dim == 3 => Axis::Z,
        other => {
            return Err(GeometryError::BadDescription(format!(
                "invalid axis {other:?} for dim {dim}"
            )))
        }
    };
    let side = match d.side.as_str() {
        "+" | "plus" => Side::Plus,
        "-" | "minus" => Side::Minus,
        other => {
            return Err(GeometryError::BadDescription(format!(
                "invalid side {other:?} (use \"+\" or \"-\")"
            )))
        }
    };
    Ok(FaceRef::new(cell, axis, side))
}

fn parse_polygon(desc: &PolygonDesc, face: FaceRef) -> Result<Polygon, GeometryError> {
    let mut vertices = Vec::with_capacity(desc.len());
    for [u, v] in desc {
        let u = parse_rat(u).map_err(GeometryError::BadDescription)?;
        let v = parse_rat(v).map_err(GeometryError::BadDescription)?;
        for c in [&u, &v] {
            if c < &rat_int(0) || c > &rat_int(1) {
                return Err(GeometryError::PolygonTilingGap(
                    face,
                    format!("vertex coordinate {c} outside the unit face"),
                ));
            }
        }
        vertices.push([u, v]);
    }
    Polygon::new(vertices).map_err(|e| GeometryError::PolygonTilingGap(face, e))
}

fn check_tiling(face: FaceRef, green: &[Polygon], red: &[RedPane]) -> Result<(), GeometryError> {
    let all: Vec<&Polygon> = green.iter().chain(red.iter().map(|r| &r.polygon)).collect();
    if all.is_empty() {
        return Err(GeometryError::PolygonTilingGap(
            face,
            "gate has neither green nor red polygons".into(),
        ));
    }
    let total: Rat = all.iter().map(|p| p.area()).sum();
    if total != Rat::one() {
        return Err(GeometryError::PolygonTilingGap(
            face,
            format!("polygon areas sum to {total}, expected 1"),
        ));
    }
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if !all[i].interior_disjoint(all[j]) {
                return Err(GeometryError::PolygonTilingGap(
                    face,
                    format!("polygons {i} and {j} overlap"),
                ));
            }
        }
    }
    Ok(())
}

/// The region itself must be chain-connected through shared
/// faces, before any identification.
fn check_region_connected(cells: &[CellId], dim: usize) -> Result<(), GeometryError> {
    let set: BTreeSet<CellId> = cells.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    queue.push_back(cells[0]);
    seen.insert(cells[0]);
    while let Some(c) = queue.pop_front() {
        for axis in &Axis::ALL[..dim] {
            for delta in [-1, 1] {
                let n = c.shifted(*axis, delta);
                if set.contains(&n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
    }
    if seen.len() != cells.len() {
        let missing = cells.iter().find(|c| !seen.contains(c)).unwrap();
        return Err(GeometryError::DisconnectedRegion(format!(
            "cell {missing} is not reachable from {} through common faces",
            cells[0]
        )));
    }
    Ok(())
}

/// Both sides of a gated geometric face must carry the same green/red
/// partition (their red targets may differ).
fn check_gate_symmetry(faces: &BTreeMap<FaceRef, FaceData>) -> Result<(), GeometryError> {
    for (f, data) in faces {
        let Some(gate) = &data.gate else { continue };
        let other = match &data.link {
            FaceLink::Shared(_) => f.twin(),
            FaceLink::Paired(p) => *p,
            FaceLink::Sealed => continue,
        };
        let Some(other_gate) = faces.get(&other).and_then(|d| d.gate.as_ref()) else {
            return Err(GeometryError::AsymmetricGatedFace(*f, other));
        };
        if !same_polygon_set(
            &gate.green.iter().collect::<Vec<_>>(),
            &other_gate.green.iter().collect::<Vec<_>>(),
        ) || !same_polygon_set(
            &gate.red.iter().map(|r| &r.polygon).collect::<Vec<_>>(),
            &other_gate.red.iter().map(|r| &r.polygon).collect::<Vec<_>>(),
        ) {
            return Err(GeometryError::AsymmetricGatedFace(*f, other));
        }
    }
    Ok(())
}

fn same_polygon_set(a: &[&Polygon], b: &[&Polygon]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let key = |p: &&Polygon| {
        let mut vs = p.vertices().to_vec();
        vs.sort_by(|x, y| (&x[0], &x[1]).cmp(&(&y[0], &y[1])));
        vs
    };
    let mut ka: Vec<_> = a.iter().map(key).collect();
    let mut kb: Vec<_> = b.iter().map(key).collect();
    ka.sort();
    kb.sort();
    ka == kb
}

/// Every red pane must be mirrored by a pane on its target face that points
/// straight back, making the transport an involution.
fn check_red_involution(faces: &BTreeMap<FaceRef, FaceData>) -> Result<(), GeometryError> {
    for (f, data) in faces {
        let Some(gate) = &data.gate else { continue };
        for pane in &gate.red {
            let Some(target_gate) = faces.get(&pane.target).and_then(|d| d.gate.as_ref()) else {
                return Err(GeometryError::NonInvolutiveRedPairing {
                    face: *f,
                    target: pane.target,
                });
            };
            let zero = [Rat::from_integer(0.into()), Rat::from_integer(0.into())];
            let mirrored = target_gate
                .red
                .iter()
                .any(|back| back.target == *f && back.polygon.congruent_by(&pane.polygon, &zero));
            if !mirrored {
                return Err(GeometryError::NonInvolutiveRedPairing {
                    face: *f,
                    target: pane.target,
                });
            }
        }
    }
    Ok(())
}

/// The identified manifold must stay connected through traversable faces:
/// interior faces, green polygons of positive area, pairings, and red panes.
fn check_traversable(
    cells: &[CellId],
    faces: &BTreeMap<FaceRef, FaceData>,
) -> Result<(), GeometryError> {
    let mut adj: BTreeMap<CellId, Vec<CellId>> = BTreeMap::new();
    let mut connect = |a: CellId, b: CellId| {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    };
    for (f, data) in faces {
        match (&data.gate, &data.link) {
            (Some(gate), link) => {
                if !gate.green.is_empty() {
                    let dest = match link {
                        FaceLink::Shared(n) => *n,
                        FaceLink::Paired(p) => p.cell,
                        FaceLink::Sealed => unreachable!("sealed face has no green"),
                    };
                    connect(f.cell, dest);
                }
                for pane in &gate.red {
                    connect(f.cell, pane.target.cell);
                }
            }
            (None, FaceLink::Shared(n)) => connect(f.cell, *n),
            (None, FaceLink::Paired(p)) => connect(f.cell, p.cell),
            (None, FaceLink::Sealed) => unreachable!("sealed face must carry a gate"),
        }
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(cells[0]);
    queue.push_back(cells[0]);
    while let Some(c) = queue.pop_front() {
        for n in adj.get(&c).into_iter().flatten() {
            if seen.insert(*n) {
                queue.push_back(*n);
            }
        }
    }
    if seen.len() != cells.len() {
        let missing = cells.iter().find(|c| !seen.contains(c)).unwrap();
        return Err(GeometryError::DisconnectedRegion(format!(
            "identified manifold is not traversably connected: cell {missing} unreachable"
        )));
    }
    Ok(())
}

/// Wraparound pairing rule: along every lattice line, split the cells into
/// maximal runs of consecutive positions and pair the exit face of each run
/// with the entry face of the next run, cyclically. For a full line this is
/// the usual torus identification; gaps ("holes") are skipped over.
fn generate_wraparound(
    cells: &[CellId],
    dim: usize,
    paired: &mut BTreeMap<FaceRef, FaceRef>,
) -> usize {
    let mut added = 0;
    for axis in &Axis::ALL[..dim] {
        // Group cells by their transverse coordinates.
        let mut lines: BTreeMap<[i64; 2], Vec<CellId>> = BTreeMap::new();
        for &c in cells {
            let coords = c.coords();
            let key = match axis {
                Axis::X => [coords[1], coords[2]],
                Axis::Y => [coords[0], coords[2]],
                Axis::Z => [coords[0], coords[1]],
            };
            lines.entry(key).or_default().push(c);
        }
        for cs in lines.values_mut() {
            cs.sort_by_key(|c| c.coords()[axis.index()]);
            // Maximal runs of consecutive coordinates.
            let mut runs: Vec<(CellId, CellId)> = Vec::new();
            for &c in cs.iter() {
                match runs.last_mut() {
                    Some((_, last)) if last.coords()[axis.index()] + 1 == c.coords()[axis.index()] => {
                        *last = c;
                    }
                    _ => runs.push((c, c)),
                }
            }
            let m = runs.len();
            for i in 0..m {
                let exit = FaceRef::new(runs[i].1, *axis, Side::Plus);
                let entry = FaceRef::new(runs[(i + 1) % m].0, *axis, Side::Minus);
                if paired.contains_key(&exit) || paired.contains_key(&entry) {
                    continue;
                }
                paired.insert(exit, entry);
                paired.insert(entry, exit);
                added += 1;
            }
        }
    }
    added
}
