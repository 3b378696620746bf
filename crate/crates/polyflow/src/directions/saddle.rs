//! Saddle connections on 2-dimensional surfaces: finite geodesic segments
//! joining lattice vertices with no vertex in between.
//!
//! Transversal connections are enumerated by unfolding: every candidate is a
//! primitive integer vector `delta` with `|delta| <= L`, launched from each
//! cell corner compatible with its quadrant and re-traced exactly in
//! rational arithmetic; the candidate is a connection precisely when the
//! trace's first singular hit lands at flow time `|delta_x|`. Axis-aligned
//! connections run along lattice edges and are enumerated combinatorially
//! over edge identification classes (gated edges are slit open and carry no
//! geodesic).

use super::DirectionsError;
use crate::geometry::{Axis, CellId, FaceLink, FaceRef, Manifold, Side};
use crate::num::{rat, rat_int, QuadExt, Rat, Scalar};
use crate::tracer::{launch, Direction, Termination};
use num_traits::{ToPrimitive, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Slope of a connection. Polysquare unfolding vectors are integral, so
/// slopes are rational or vertical.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slope {
    Finite(Rat),
    Vertical,
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(q) => write!(f, "{q}"),
            Slope::Vertical => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SaddleConnection {
    pub slope: Slope,
    /// Euclidean length `|delta|`.
    pub length: f64,
    /// Ambient lattice endpoints (start, end) and the unfolding vector.
    pub start: [i64; 2],
    pub end: [i64; 2],
    pub delta: [i64; 2],
    /// Cell carrying the initial segment.
    pub cell: CellId,
}

impl SaddleConnection {
    fn key(&self) -> ([i64; 2], [i64; 2], [i64; 2]) {
        (self.start, self.end, self.delta)
    }

    pub fn slope_length(&self) -> (Slope, i64) {
        (
            self.slope.clone(),
            self.delta[0] * self.delta[0] + self.delta[1] * self.delta[1],
        )
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Complete list of saddle connections of length at most `max_len`,
/// deduplicated by `(endpoints, unfolding vector)`. Both orientations of a
/// geometric connection are listed.
pub fn saddle_connections(
    surface: &Manifold,
    max_len: f64,
) -> Result<Vec<SaddleConnection>, DirectionsError> {
    if surface.dim != 2 {
        return Err(DirectionsError::NotASurface);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |c: SaddleConnection| {
        if seen.insert(c.key()) {
            out.push(c);
        }
    };

    if max_len >= 1.0 {
        for c in axis_connections(surface) {
            push(c);
        }
    }
    for c in transversal_connections(surface, max_len) {
        push(c);
    }
    out.sort_by_key(|c| c.key());
    Ok(out)
}

/// Length-1 connections along ungated lattice edges, one pair of
/// orientations per edge identification class.
fn axis_connections(surface: &Manifold) -> Vec<SaddleConnection> {
    // An edge is keyed by (min corner, run axis); it is the geometric face
    // of the perpendicular axis.
    type EdgeKey = ([i64; 2], usize);
    type Parents = BTreeMap<EdgeKey, EdgeKey>;
    let mut parent: Parents = BTreeMap::new();
    let mut cells: BTreeMap<EdgeKey, CellId> = BTreeMap::new();
    let mut gated: BTreeSet<EdgeKey> = BTreeSet::new();

    let edge_key = |f: &FaceRef| -> EdgeKey {
        let mut a = f.cell.coords();
        if f.side == Side::Plus {
            a[f.axis.index()] += 1;
        }
        let run = match f.axis {
            Axis::X => 1, // X-faces are vertical edges running along y
            _ => 0,
        };
        ([a[0], a[1]], run)
    };

    #[allow(clippy::type_complexity)]
    fn find(
        parent: &mut BTreeMap<([i64; 2], usize), ([i64; 2], usize)>,
        k: ([i64; 2], usize),
    ) -> ([i64; 2], usize) {
        let p = *parent.get(&k).unwrap_or(&k);
        if p == k {
            return k;
        }
        let root = find(parent, p);
        parent.insert(k, root);
        root
    }

    let mut unions: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for (f, data) in surface.faces() {
        let k = edge_key(f);
        cells.entry(k).or_insert(f.cell);
        if data.gate.is_some() {
            gated.insert(k);
        }
        if let FaceLink::Paired(partner) = &data.link {
            unions.push((k, edge_key(partner)));
        }
    }
    for (a, b) in unions {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent.insert(ra, rb);
        }
    }
    // A class is usable only if none of its member edges is gated.
    let mut class_gated: BTreeSet<EdgeKey> = BTreeSet::new();
    for k in &gated {
        let r = find(&mut parent, *k);
        class_gated.insert(r);
    }
    let mut reps: BTreeMap<EdgeKey, EdgeKey> = BTreeMap::new();
    let keys: Vec<EdgeKey> = cells.keys().copied().collect();
    for k in keys {
        let r = find(&mut parent, k);
        if !class_gated.contains(&r) {
            let entry = reps.entry(r).or_insert(k);
            if k < *entry {
                *entry = k;
            }
        }
    }

    let mut out = Vec::new();
    for (_, k) in reps {
        let (anchor, run) = k;
        let mut end = anchor;
        end[run] += 1;
        let (slope, delta_fwd, delta_bwd) = if run == 0 {
            (Slope::Finite(Rat::zero()), [1, 0], [-1, 0])
        } else {
            (Slope::Vertical, [0, 1], [0, -1])
        };
        let cell = cells[&k];
        out.push(SaddleConnection {
            slope: slope.clone(),
            length: 1.0,
            start: anchor,
            end,
            delta: delta_fwd,
            cell,
        });
        out.push(SaddleConnection {
            slope,
            length: 1.0,
            start: end,
            end: anchor,
            delta: delta_bwd,
            cell,
        });
    }
    out
}

/// Connections with both delta components nonzero, found by exact re-tracing
/// of each primitive candidate vector from each compatible cell corner.
fn transversal_connections(surface: &Manifold, max_len: f64) -> Vec<SaddleConnection> {
    let max2 = (max_len * max_len).floor() as i64;
    let reach = max_len.floor() as i64;
    let mut deltas = Vec::new();
    for dx in -reach..=reach {
        for dy in -reach..=reach {
            if dx != 0 && dy != 0 && dx * dx + dy * dy <= max2 && gcd(dx, dy) == 1 {
                deltas.push([dx, dy]);
            }
        }
    }

    let mut out = Vec::new();
    for &cell in surface.cells() {
        for corner in [[0i64, 0], [1, 0], [1, 1], [0, 1]] {
            for &delta in &deltas {
                // The initial segment must leave the corner into this cell.
                let enters = (delta[0] > 0) == (corner[0] == 0)
                    && (delta[1] > 0) == (corner[1] == 0);
                if !enters {
                    continue;
                }
                if let Some(conn) = retrace_candidate(surface, cell, corner, delta) {
                    out.push(conn);
                }
            }
        }
    }
    out
}

/// Exact oracle: launch from the corner along `delta` and accept iff the
/// first singular hit is a vertex reached exactly at flow time `|delta_x|`.
fn retrace_candidate(
    surface: &Manifold,
    cell: CellId,
    corner: [i64; 2],
    delta: [i64; 2],
) -> Option<SaddleConnection> {
    let [dx, dy] = delta;
    let sign = if dx > 0 { 1 } else { -1 };
    let dir = Direction::from_components(
        [rat_int(sign), rat(dy, dx.abs()), Rat::zero()],
        2,
    )
    .expect("normalized 2-dimensional direction");
    let local = [rat_int(corner[0]), rat_int(corner[1]), Rat::zero()];
    let t_star = rat_int(dx.abs());
    let t_max = t_star.clone() + rat_int(1);
    let tr = launch(surface, cell, local, &dir, &t_max).ok()?;
    match &tr.terminated {
        Termination::SingularHit { time, .. } if *time == t_star => {
            let seg = tr.segments.last().expect("trace has segments");
            let c = seg.cell.coords();
            let end = [
                c[0] + seg.exit[0].to_integer().to_i64()?,
                c[1] + seg.exit[1].to_integer().to_i64()?,
            ];
            debug_assert!(seg.exit[0].is_integer() && seg.exit[1].is_integer());
            let start = [cell.coords()[0] + corner[0], cell.coords()[1] + corner[1]];
            Some(SaddleConnection {
                slope: Slope::Finite(rat(dy, dx)),
                length: ((dx * dx + dy * dy) as f64).sqrt(),
                start,
                end,
                delta,
                cell,
            })
        }
        _ => None,
    }
}

/// True iff `alpha` equals the slope of some saddle connection of length at
/// most `max_len` (exact comparison; symbolic irrationals can never match
/// the rational slopes of a polysquare surface).
pub fn is_bad_slope(
    surface: &Manifold,
    alpha: &QuadExt,
    max_len: f64,
) -> Result<bool, DirectionsError> {
    let conns = saddle_connections(surface, max_len)?;
    let Some(q) = alpha.as_rat() else {
        return Ok(false);
    };
    Ok(conns
        .iter()
        .any(|c| matches!(&c.slope, Slope::Finite(s) if s == q)))
}

/// Float variant with a 1e-12 comparison tolerance.
pub fn is_bad_slope_f64(
    surface: &Manifold,
    alpha: f64,
    max_len: f64,
) -> Result<bool, DirectionsError> {
    let conns = saddle_connections(surface, max_len)?;
    Ok(conns.iter().any(|c| match &c.slope {
        Slope::Finite(s) => (s.as_f64() - alpha).abs() <= 1e-12,
        Slope::Vertical => false,
    }))
}

/// CSV catalog: `slope_num,slope_den,length,v0,v1,dx,dy` with vertical
/// slopes written as `1/0` and vertices as `x:y`.
pub fn connections_csv(conns: &[SaddleConnection]) -> String {
    let mut out = String::from("slope_num,slope_den,length,v0,v1,dx,dy\n");
    for c in conns {
        let (num, den) = match &c.slope {
            Slope::Finite(q) => (q.numer().to_string(), q.denom().to_string()),
            Slope::Vertical => ("1".into(), "0".into()),
        };
        out.push_str(&format!(
            "{},{},{},{}:{},{}:{},{},{}\n",
            num,
            den,
            c.length,
            c.start[0],
            c.start[1],
            c.end[0],
            c.end[1],
            c.delta[0],
            c.delta[1]
        ));
    }
    out
}
