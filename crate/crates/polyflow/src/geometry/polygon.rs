//! Convex polygons with exact rational vertices, in face-local coordinates.
//!
//! Gate and barrier panes are restricted to convex pieces so that tiling and
//! disjointness checks stay exact: non-convex regions are described as a
//! union of convex polygons.

use crate::num::{rat_int, Rat};
use num_traits::{Signed, Zero};

/// Counter-clockwise convex polygon inside the unit face `[0,1]^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    vertices: Vec<[Rat; 2]>,
}

/// Where a point sits relative to a polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointSite {
    Inside,
    Boundary,
    Outside,
}

fn cross(o: &[Rat; 2], a: &[Rat; 2], b: &[Rat; 2]) -> Rat {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

impl Polygon {
    /// Validate convexity and orientation; vertices may arrive in either
    /// winding and are normalized to counter-clockwise.
    pub fn new(mut vertices: Vec<[Rat; 2]>) -> Result<Self, String> {
        if vertices.len() < 3 {
            return Err("polygon needs at least 3 vertices".into());
        }
        let n = vertices.len();
        let mut signed2 = Rat::zero();
        for i in 0..n {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % n];
            signed2 += &a[0] * &b[1] - &a[1] * &b[0];
        }
        if signed2.is_zero() {
            return Err("polygon is degenerate (zero area)".into());
        }
        if signed2.is_negative() {
            vertices.reverse();
        }
        let poly = Polygon { vertices };
        for i in 0..n {
            let o = &poly.vertices[i];
            let a = &poly.vertices[(i + 1) % n];
            let b = &poly.vertices[(i + 2) % n];
            if !cross(o, a, b).is_positive() {
                return Err(format!(
                    "polygon is not strictly convex at vertex {}",
                    (i + 1) % n
                ));
            }
        }
        Ok(poly)
    }

    pub fn rectangle(x0: Rat, y0: Rat, x1: Rat, y1: Rat) -> Self {
        Polygon::new(vec![
            [x0.clone(), y0.clone()],
            [x1.clone(), y0],
            [x1, y1.clone()],
            [x0, y1],
        ])
        .expect("rectangle corners must be distinct")
    }

    pub fn unit_square() -> Self {
        Self::rectangle(rat_int(0), rat_int(0), rat_int(1), rat_int(1))
    }

    pub fn vertices(&self) -> &[[Rat; 2]] {
        &self.vertices
    }

    pub fn area(&self) -> Rat {
        let n = self.vertices.len();
        let mut s = Rat::zero();
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            s += &a[0] * &b[1] - &a[1] * &b[0];
        }
        s / rat_int(2)
    }

    /// Exact point classification.
    pub fn site(&self, p: &[Rat; 2]) -> PointSite {
        let n = self.vertices.len();
        let mut on_boundary = false;
        for i in 0..n {
            let a = &self.vertices[i];
            let b = &self.vertices[(i + 1) % n];
            let c = cross(a, b, p);
            if c.is_negative() {
                return PointSite::Outside;
            }
            if c.is_zero() {
                // On the supporting line; boundary only within the edge span.
                let in_u = a[0].clone().min(b[0].clone()) <= p[0]
                    && p[0] <= a[0].clone().max(b[0].clone());
                let in_v = a[1].clone().min(b[1].clone()) <= p[1]
                    && p[1] <= a[1].clone().max(b[1].clone());
                if in_u && in_v {
                    on_boundary = true;
                } else {
                    return PointSite::Outside;
                }
            }
        }
        if on_boundary {
            PointSite::Boundary
        } else {
            PointSite::Inside
        }
    }

    /// True when the two convex polygons have disjoint interiors, via exact
    /// separating-axis tests over both edge normal sets.
    pub fn interior_disjoint(&self, other: &Polygon) -> bool {
        separated(self, other) || separated(other, self)
    }

    /// Edges as (start, end) vertex pairs.
    pub fn edges(&self) -> impl Iterator<Item = (&[Rat; 2], &[Rat; 2])> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    /// Smallest vertex in lexicographic order; used as the congruence anchor.
    pub fn anchor(&self) -> &[Rat; 2] {
        self.vertices
            .iter()
            .min_by(|a, b| (&a[0], &a[1]).cmp(&(&b[0], &b[1])))
            .expect("polygon has vertices")
    }

    /// True when `other` equals this polygon translated by `delta`.
    pub fn congruent_by(&self, other: &Polygon, delta: &[Rat; 2]) -> bool {
        if self.vertices.len() != other.vertices.len() {
            return false;
        }
        let mut mine: Vec<[Rat; 2]> = self
            .vertices
            .iter()
            .map(|v| [&v[0] + &delta[0], &v[1] + &delta[1]])
            .collect();
        let mut theirs = other.vertices.clone();
        sort_key(&mut mine);
        sort_key(&mut theirs);
        mine == theirs
    }
}

fn sort_key(vs: &mut [[Rat; 2]]) {
    vs.sort_by(|a, b| (&a[0], &a[1]).cmp(&(&b[0], &b[1])));
}

/// True if some edge of `a` strictly separates `b` from `a`'s interior side.
fn separated(a: &Polygon, b: &Polygon) -> bool {
    for (p, q) in a.edges() {
        // All of b on the outer (non-positive) side of edge pq.
        if b.vertices()
            .iter()
            .all(|v| !cross(p, q, v).is_positive())
        {
            return true;
        }
    }
    false
}
