//! Ball-spreading and colour-splitting experiments: flow sample clouds,
//! fragment them by itinerary, track colour censuses per atomic cube,
//! estimate the multiplicity function, and check the no-return property of
//! splitting-edge orbits.
//!
//! Balls are deterministic low-discrepancy sample clouds, not exact
//! polytopes: fragment combinatorics reduce to exact itinerary equality per
//! sample.

use crate::geometry::{Axis, CellId, FaceRef, Manifold, SplittingEdge};
use crate::grid;
use crate::num::{rat, Rat, Scalar};
use num_traits::Zero;
use crate::sampling;
use crate::tracer::{
    launch, trace, Direction, EventKind, ManifoldPoint, Trace, TraceError,
};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Colour {
    White,
    Silver,
    Uncoloured,
}

/// An open ball, contained in a single atomic cube.
#[derive(Clone, Debug)]
pub struct Ball {
    pub center: ManifoldPoint<f64>,
    pub radius: f64,
    pub colour: Colour,
}

impl Ball {
    pub fn new(center: ManifoldPoint<f64>, radius: f64, colour: Colour) -> Self {
        Ball { center, radius, colour }
    }
}

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("ball of radius {radius} at {center:?} does not fit inside its atomic cube")]
    BallOutsideCell { center: [f64; 3], radius: f64 },
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("manifold must have at least 2 cells for the colour experiment")]
    TooFewCells,
    #[error("no-return check requires a y-direction splitting edge")]
    NotAYEdge,
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// The combinatorial part of an event, shared by all samples of a fragment.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ItineraryStep {
    pub face: FaceRef,
    pub kind: EventKind,
}

impl PartialOrd for EventKind {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EventKind {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (*self as u8).cmp(&(*other as u8))
    }
}

/// A connected piece of a flowed ball: the samples sharing one itinerary.
#[derive(Clone, Debug)]
pub struct BallFragment {
    pub colour: Colour,
    pub itinerary: Vec<ItineraryStep>,
    /// Indices into the sample cloud, with each sample's end position.
    pub samples: Vec<(usize, ManifoldPoint<f64>)>,
}

/// Result of flowing one ball.
#[derive(Clone, Debug)]
pub struct Evolution {
    pub fragments: Vec<BallFragment>,
    /// Samples terminated by a singular hit: (index, hit time).
    pub lost: Vec<(usize, f64)>,
    pub n_samples: usize,
}

fn check_ball_fits(m: &Manifold, ball: &Ball) -> Result<(), SplitError> {
    for a in 0..m.dim {
        let x = ball.center.local[a];
        if x - ball.radius <= 0.0 || x + ball.radius >= 1.0 {
            return Err(SplitError::BallOutsideCell {
                center: ball.center.local,
                radius: ball.radius,
            });
        }
    }
    Ok(())
}

/// Flow `n_samples` deterministic points of `ball` for `t_max` and group
/// them by itinerary. Singular-hit samples are reported separately.
pub fn evolve_ball(
    manifold: &Manifold,
    ball: &Ball,
    dir: &Direction<f64>,
    t_max: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Evolution, SplitError> {
    check_ball_fits(manifold, ball)?;
    if n_samples < 100 {
        return Err(SplitError::TooFewSamples { min: 100, got: n_samples });
    }
    let offsets = sampling::ball_points(manifold.dim, ball.radius, n_samples, seed);
    let traces = trace_cloud(manifold, &ball.center, &offsets, dir, t_max)?;
    Ok(group_by_itinerary(ball.colour, &traces))
}

fn trace_cloud(
    manifold: &Manifold,
    center: &ManifoldPoint<f64>,
    offsets: &[[f64; 3]],
    dir: &Direction<f64>,
    t_max: f64,
) -> Result<Vec<Trace<f64>>, SplitError> {
    offsets
        .par_iter()
        .map(|off| {
            let local = [
                center.local[0] + off[0],
                center.local[1] + off[1],
                center.local[2] + off[2],
            ];
            trace(manifold, &ManifoldPoint::new(center.cell, local), dir, &t_max)
                .map_err(SplitError::from)
        })
        .collect()
}

fn itinerary_of(tr: &Trace<f64>) -> Vec<ItineraryStep> {
    tr.events
        .iter()
        .filter(|e| e.kind != EventKind::SingularHit)
        .map(|e| ItineraryStep { face: e.face, kind: e.kind })
        .collect()
}

fn group_by_itinerary(colour: Colour, traces: &[Trace<f64>]) -> Evolution {
    let mut groups: BTreeMap<Vec<ItineraryStep>, Vec<(usize, ManifoldPoint<f64>)>> =
        BTreeMap::new();
    let mut lost = Vec::new();
    for (i, tr) in traces.iter().enumerate() {
        if tr.hit_singularity() {
            lost.push((i, tr.t_end()));
            continue;
        }
        groups
            .entry(itinerary_of(tr))
            .or_default()
            .push((i, tr.end_point()));
    }
    Evolution {
        fragments: groups
            .into_iter()
            .map(|(itinerary, samples)| BallFragment { colour, itinerary, samples })
            .collect(),
        lost,
        n_samples: traces.len(),
    }
}

/// Normal of the plane that cuts a ball at a splitting edge in the given
/// axis direction: `v x e_axis`.
pub fn cut_plane_normal(dir: &Direction<f64>, edge_axis: Axis) -> [f64; 3] {
    let v = dir.components();
    let mut e = [0.0; 3];
    e[edge_axis.index()] = 1.0;
    [
        v[1] * e[2] - v[2] * e[1],
        v[2] * e[0] - v[0] * e[2],
        v[0] * e[1] - v[1] * e[0],
    ]
}

/// Verdict of the colour experiment.
#[derive(Clone, Debug, Serialize)]
pub enum ColourOutcome {
    /// A colour-split ball was observed: both colours make up at least 5%
    /// of one cube's resident cloud at a nice time.
    Case1(SplitWitness),
    /// Every assembled ball stayed monochromatic up to the horizon.
    Case2 { cube_colours: BTreeMap<CellId, Colour> },
    /// Too many samples were lost to singular hits for a clean verdict.
    Inconclusive { lost_fraction: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitWitness {
    pub time: f64,
    pub cube: CellId,
    pub white_fraction: f64,
    pub silver_fraction: f64,
    /// Events so far along the longest member itinerary.
    pub itinerary_length: usize,
}

/// Per-cube colour census experiment. One ball per atomic cube at the same
/// relative position (the cube centre), the `whites` cubes coloured white
/// and the rest silver; balls of radius `radius / 2` are flowed (the
/// half-radius shrink) while nice-time selection keeps the full `radius`
/// clear of every face. At each nice time the samples resident in one cube
/// form one assembled ball; a mixed census is a Case-1 witness.
pub fn colour_experiment(
    manifold: &Manifold,
    dir: &Direction<f64>,
    t_max: f64,
    radius: f64,
    n_samples: usize,
    whites: &BTreeSet<CellId>,
    seed: u64,
) -> Result<ColourOutcome, SplitError> {
    if manifold.cell_count() < 2 {
        return Err(SplitError::TooFewCells);
    }
    if n_samples < 100 {
        return Err(SplitError::TooFewSamples { min: 100, got: n_samples });
    }
    let dim = manifold.dim;
    let mut centre = [0.5, 0.5, 0.5];
    if dim == 2 {
        centre[2] = 0.0;
    }
    let evolve_radius = radius / 2.0;
    // Common offsets: every ball has the same relative position and shape.
    let offsets = sampling::ball_points(dim, evolve_radius, n_samples, seed);

    let mut colours = Vec::new();
    let mut all_traces = Vec::new();
    for &cell in manifold.cells() {
        let center = ManifoldPoint::new(cell, centre);
        check_ball_fits(
            manifold,
            &Ball::new(center.clone(), radius, Colour::Uncoloured),
        )?;
        let colour = if whites.contains(&cell) {
            Colour::White
        } else {
            Colour::Silver
        };
        let traces = trace_cloud(manifold, &center, &offsets, dir, t_max)?;
        colours.push(colour);
        all_traces.push(traces);
    }

    let total = manifold.cell_count() * n_samples;
    let lost: usize = all_traces
        .iter()
        .flatten()
        .filter(|t| t.hit_singularity())
        .count();
    let lost_fraction = lost as f64 / total as f64;

    let times = nice_times(&centre, dir, radius, t_max, dim);

    for &t in &times {
        // Census of live samples per cube at time t.
        let mut census: BTreeMap<CellId, (usize, usize, usize)> = BTreeMap::new();
        for (ball_idx, traces) in all_traces.iter().enumerate() {
            for tr in traces {
                let Some(p) = tr.position_at(&t) else { continue };
                if tr.hit_singularity() && tr.t_end() <= t {
                    continue;
                }
                let slot = census.entry(p.cell).or_insert((0, 0, 0));
                match colours[ball_idx] {
                    Colour::White => slot.0 += 1,
                    _ => slot.1 += 1,
                }
                let events_so_far = tr.events.iter().filter(|e| e.time <= t).count();
                slot.2 = slot.2.max(events_so_far);
            }
        }
        for (cube, (white, silver, itinerary_length)) in census {
            let pop = white + silver;
            if pop == 0 {
                continue;
            }
            let wf = white as f64 / pop as f64;
            let sf = silver as f64 / pop as f64;
            if wf >= 0.05 && sf >= 0.05 {
                return Ok(ColourOutcome::Case1(SplitWitness {
                    time: t,
                    cube,
                    white_fraction: wf,
                    silver_fraction: sf,
                    itinerary_length,
                }));
            }
        }
    }

    if lost_fraction > 0.01 {
        return Ok(ColourOutcome::Inconclusive { lost_fraction });
    }

    // Case 2: majority colour per cube at the last nice time.
    let mut cube_colours: BTreeMap<CellId, Colour> = BTreeMap::new();
    if let Some(&t) = times.last() {
        let mut census: BTreeMap<CellId, (usize, usize)> = BTreeMap::new();
        for (ball_idx, traces) in all_traces.iter().enumerate() {
            for tr in traces {
                let Some(p) = tr.position_at(&t) else { continue };
                let slot = census.entry(p.cell).or_insert((0, 0));
                match colours[ball_idx] {
                    Colour::White => slot.0 += 1,
                    _ => slot.1 += 1,
                }
            }
        }
        for (cube, (w, s)) in census {
            cube_colours.insert(cube, if w >= s { Colour::White } else { Colour::Silver });
        }
    }
    Ok(ColourOutcome::Case2 { cube_colours })
}

/// Times in `(0, t_max]` at which the projected ball of radius `margin`
/// around the flowing centre is strictly inside the unit cell: midpoints of
/// the maximal windows where every coordinate's fractional part stays in
/// `[margin, 1 - margin]`.
fn nice_times(
    centre: &[f64; 3],
    dir: &Direction<f64>,
    margin: f64,
    t_max: f64,
    dim: usize,
) -> Vec<f64> {
    let v = dir.components();
    let mut cuts = vec![0.0, t_max];
    for a in 0..dim {
        let va = v[a];
        if va == 0.0 {
            continue;
        }
        // Solve centre[a] + t*va = k + margin and k + 1 - margin.
        let span = (t_max * va.abs()).ceil() as i64 + 2;
        for k in -span..=span {
            for boundary in [k as f64 + margin, k as f64 + 1.0 - margin] {
                let t = (boundary - centre[a]) / va;
                if t > 0.0 && t < t_max {
                    cuts.push(t);
                }
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let deep = |t: f64| {
        (0..dim).all(|a| {
            let f = (centre[a] + t * v[a]).rem_euclid(1.0);
            f >= margin && f <= 1.0 - margin
        })
    };
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if w[1] > w[0] && deep(mid) {
            out.push(mid);
        }
    }
    out
}

/// Estimated multiplicity function on a torus grid.
#[derive(Clone, Debug, Serialize)]
pub struct MultiplicityReport {
    pub grid_n: usize,
    pub n_samples: usize,
    pub t_max: f64,
    /// Estimated multiplicity per grid cell (row-major, x fastest).
    pub m_hat: Vec<usize>,
    /// Distinct samples that visited each grid cell.
    pub support: Vec<usize>,
    /// Modal multiplicity over grid cells with at least 10 supporting
    /// samples.
    pub m0: usize,
}

impl MultiplicityReport {
    pub fn index(&self, idx: [usize; 3], dim: usize) -> usize {
        if dim == 2 {
            idx[0] + self.grid_n * idx[1]
        } else {
            idx[0] + self.grid_n * (idx[1] + self.grid_n * idx[2])
        }
    }
}

/// Flow a ball and count, per torus grid cell, the number of distinct
/// atomic cubes whose flowed samples cover it.
pub fn estimate_multiplicity(
    manifold: &Manifold,
    ball: &Ball,
    dir: &Direction<f64>,
    t_max: f64,
    grid_n: usize,
    n_samples: usize,
    seed: u64,
) -> Result<MultiplicityReport, SplitError> {
    check_ball_fits(manifold, ball)?;
    assert!(grid_n >= 4, "grid_n must be at least 4");
    let dim = manifold.dim;
    let cells_total = grid_n.pow(dim as u32);
    let offsets = sampling::ball_points(dim, ball.radius, n_samples, seed);

    let mut covered: Vec<BTreeSet<CellId>> = vec![BTreeSet::new(); cells_total];
    let mut support = vec![0usize; cells_total];
    let flat = |idx: [usize; 3]| {
        if dim == 2 {
            idx[0] + grid_n * idx[1]
        } else {
            idx[0] + grid_n * (idx[1] + grid_n * idx[2])
        }
    };

    for off in &offsets {
        let local = [
            ball.center.local[0] + off[0],
            ball.center.local[1] + off[1],
            ball.center.local[2] + off[2],
        ];
        let start = ManifoldPoint::new(ball.center.cell, local);
        let mut visited: BTreeSet<usize> = BTreeSet::new();
        let mut mark = |idx: [usize; 3], cell: CellId| {
            let f = flat(idx);
            covered[f].insert(cell);
            visited.insert(f);
        };
        if t_max <= 0.0 {
            let mut idx = [0usize; 3];
            for a in 0..dim {
                idx[a] = ((local[a] * grid_n as f64).floor() as usize).min(grid_n - 1);
            }
            mark(idx, start.cell);
        } else {
            let tr = trace(manifold, &start, dir, &t_max)?;
            for seg in &tr.segments {
                let dt = seg.t1 - seg.t0;
                grid::march(seg.enter, *dir.components(), dt, grid_n, dim, |idx, _| {
                    mark(idx, seg.cell);
                });
            }
        }
        for f in visited {
            support[f] += 1;
        }
    }

    let m_hat: Vec<usize> = covered.iter().map(|s| s.len()).collect();
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for (m, sup) in m_hat.iter().zip(&support) {
        if *sup >= 10 {
            *freq.entry(*m).or_default() += 1;
        }
    }
    let m0 = freq
        .into_iter()
        .max_by_key(|(m, count)| (*count, *m))
        .map(|(m, _)| m)
        .unwrap_or(0);
    Ok(MultiplicityReport {
        grid_n,
        n_samples,
        t_max,
        m_hat,
        support,
        m0,
    })
}

/// Outcome of the splitting-edge no-return check.
#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum NoReturnOutcome<S> {
    NoReturn {
        samples: usize,
        /// Samples that died on a non-y-direction edge before the horizon.
        other_losses: usize,
    },
    ReturnAt {
        time: S,
        edge: SplittingEdge,
        sample: usize,
    },
}

/// Trace a dense sample of points of a y-direction splitting edge and report
/// the first return of any of them to a y-direction splitting edge.
///
/// The verdict depends only on the modulo-1 projection of the orbit (both
/// the cube edges and the harmonized markers are modulo-1 invariant sets),
/// so points on faces with no directly-entered ambient cell are launched at
/// the same local coordinates in a canonical cell.
pub fn check_no_return<S: Scalar>(
    manifold: &Manifold,
    dir: &Direction<S>,
    edge: &SplittingEdge,
    t_max: &S,
    n_samples: usize,
) -> Result<NoReturnOutcome<S>, SplitError> {
    if edge.run_axis() != Some(Axis::Y) {
        return Err(SplitError::NotAYEdge);
    }
    if *t_max <= S::zero() {
        return Ok(NoReturnOutcome::NoReturn { samples: n_samples, other_losses: 0 });
    }

    let (sup_a, sup_b) = edge.support();
    let v = dir.components();
    let mut best: Option<(S, SplittingEdge, usize)> = None;
    let mut other_losses = 0usize;

    for k in 0..n_samples {
        let f = rat(2 * k as i64 + 1, 2 * n_samples as i64);
        // Ambient sample point on the edge.
        let amb: Vec<Rat> = (0..3)
            .map(|i| sup_a[i].clone() + (sup_b[i].clone() - sup_a[i].clone()) * f.clone())
            .collect();
        let (cell, local) = launch_site(manifold, &amb, v);
        let tr = launch(manifold, cell, local, dir, t_max)?;
        if let crate::tracer::Termination::SingularHit { time, edge: hit } = &tr.terminated {
            if hit.run_axis() == Some(Axis::Y) {
                if best.as_ref().is_none_or(|(t, _, _)| time < t) {
                    best = Some((time.clone(), hit.clone(), k));
                }
            } else {
                other_losses += 1;
            }
        }
    }
    Ok(match best {
        Some((time, edge, sample)) => NoReturnOutcome::ReturnAt { time, edge, sample },
        None => NoReturnOutcome::NoReturn { samples: n_samples, other_losses },
    })
}

/// Split an ambient point into (cell, local) for launching: coordinates on
/// lattice planes enter at 0 or 1 according to the flow sign; the cell is
/// the ambient one when it exists, else the first cell of the manifold (the
/// modulo-1 argument makes the choice immaterial for edge-return verdicts).
fn launch_site<S: Scalar>(
    manifold: &Manifold,
    ambient: &[Rat],
    v: &[S; 3],
) -> (CellId, [S; 3]) {
    let dim = manifold.dim;
    let mut cell = [0i64; 3];
    let mut local = [S::zero(), S::zero(), S::zero()];
    for a in 0..dim {
        let floor = ambient[a].floor();
        let frac = ambient[a].clone() - floor.clone();
        let floor_i = num_traits::ToPrimitive::to_i64(&floor.to_integer()).unwrap();
        if frac.is_zero() {
            // On a lattice plane: enter the cell ahead of the flow.
            if v[a] >= S::zero() {
                cell[a] = floor_i;
                local[a] = S::zero();
            } else {
                cell[a] = floor_i - 1;
                local[a] = S::one();
            }
        } else {
            cell[a] = floor_i;
            local[a] = S::from_rat(&frac);
        }
    }
    let id = CellId(cell[0], cell[1], cell[2]);
    if manifold.contains_cell(id) {
        (id, local)
    } else {
        (manifold.cells()[0], local)
    }
}
