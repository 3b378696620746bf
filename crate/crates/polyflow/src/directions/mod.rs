//! Direction classification: bounded integer-relation (Kronecker) tests,
//! symbolic exact independence for quadratic irrationals, saddle-connection
//! enumeration on surfaces, and the exceptional-direction line families
//! attached to face splitting edges.

mod lll;
mod saddle;

pub use saddle::{
    connections_csv, is_bad_slope, is_bad_slope_f64, saddle_connections, SaddleConnection, Slope,
};

use crate::geometry::SplittingEdge;
use crate::num::{parse_quad, rat_int, QuadExt, Rat};
use crate::tracer::Direction;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DirectionsError {
    #[error("splitting edge has degenerate line coefficients (c1 = c2 = 0)")]
    DegenerateEdge,
    #[error("operation requires a face edge, got a cube edge")]
    NotAFaceEdge,
    #[error("operation requires a 2-dimensional surface")]
    NotASurface,
    #[error("invalid direction spec: {0}")]
    BadSpec(String),
}

/// Outcome of the bounded Kronecker test.
///
/// `NoRelationUpTo` is a bounded certificate, not a proof of independence:
/// it says the search found no integer relation with coefficients of
/// absolute value at most the bound. `IndependentExact` is only produced by
/// the symbolic path, where independence is decided by coefficient
/// comparison inside the quadratic field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KroneckerVerdict {
    RationalRelation { a: i64, b: i64, c: i64 },
    NoRelationUpTo { bound: i64 },
    IndependentExact,
}

impl KroneckerVerdict {
    pub fn relation(&self) -> Option<(i64, i64, i64)> {
        match self {
            KroneckerVerdict::RationalRelation { a, b, c } => Some((*a, *b, *c)),
            _ => None,
        }
    }

    pub fn is_relation(&self) -> bool {
        self.relation().is_some()
    }
}

/// Detection tolerance for float inputs: a true relation of height `h`
/// evaluated in f64 suffers roundoff of order `1e-16 * h`, so `1e-14 * h`
/// accepts every genuine relation while staying far below the approximation
/// floor of independent algebraics at desk-scale bounds.
fn float_detect_tol(h: i64) -> f64 {
    1e-14 * (h.max(1) as f64)
}

fn canonical_sign(mut w: (i64, i64, i64)) -> (i64, i64, i64) {
    let lead = if w.0 != 0 {
        w.0
    } else if w.1 != 0 {
        w.1
    } else {
        w.2
    };
    if lead < 0 {
        w = (-w.0, -w.1, -w.2);
    }
    w
}

fn norm_key(w: (i64, i64, i64)) -> (i64, i128) {
    let mx = w.0.abs().max(w.1.abs()).max(w.2.abs());
    let l2 = (w.0 as i128).pow(2) + (w.1 as i128).pow(2) + (w.2 as i128).pow(2);
    (mx, l2)
}

/// Bounded Kronecker test on float components of `v* = (a1, a2, 1)`:
/// exhaustive scan below 10^3, lattice reduction above. See
/// [`KroneckerVerdict`] for the certificate semantics; float inputs are
/// trusted to about 1e-14 relative, so bounds much beyond 10^4 may surface
/// approximation artifacts of the float values themselves.
pub fn kronecker_test(alpha1: f64, alpha2: f64, bound: i64) -> KroneckerVerdict {
    assert!(bound >= 1, "bound must be at least 1");
    fn consider(
        best: &mut Option<(i64, i64, i64)>,
        alpha1: f64,
        alpha2: f64,
        bound: i64,
        w: (i64, i64, i64),
    ) {
        if w == (0, 0, 0) {
            return;
        }
        let h = w.0.abs().max(w.1.abs()).max(w.2.abs());
        if h > bound {
            return;
        }
        let r = w.0 as f64 * alpha1 + w.1 as f64 * alpha2 + w.2 as f64;
        if r.abs() <= float_detect_tol(h) {
            let w = canonical_sign(w);
            if best.is_none() || norm_key(w) < norm_key(best.unwrap()) {
                *best = Some(w);
            }
        }
    }
    let mut best: Option<(i64, i64, i64)> = None;
    let exhaustive_to = bound.min(999);
    for a in -exhaustive_to..=exhaustive_to {
        for b in -exhaustive_to..=exhaustive_to {
            let c = -(a as f64 * alpha1 + b as f64 * alpha2);
            let c = c.round() as i64;
            consider(&mut best, alpha1, alpha2, bound, (a, b, c));
        }
    }
    if best.is_none() && bound > 999 {
        // Integer-relation lattice with a large scale; short reduced vectors
        // project onto candidate relations.
        let scale: i64 = 1_000_000_000_000_000; // 1e15, exact in f64 products
        let n = scale as f64;
        let rows = vec![
            vec![
                BigInt::from(1),
                BigInt::zero(),
                BigInt::zero(),
                BigInt::from((n * alpha1).round() as i128),
            ],
            vec![
                BigInt::zero(),
                BigInt::from(1),
                BigInt::zero(),
                BigInt::from((n * alpha2).round() as i128),
            ],
            vec![
                BigInt::zero(),
                BigInt::zero(),
                BigInt::from(1),
                BigInt::from(scale),
            ],
        ];
        let reduced = lll::lll(rows);
        for cand in lll::small_combinations(&reduced, 3, 2) {
            let (Some(a), Some(b), Some(c)) =
                (cand[0].to_i64(), cand[1].to_i64(), cand[2].to_i64())
            else {
                continue;
            };
            consider(&mut best, alpha1, alpha2, bound, (a, b, c));
        }
    }
    match best {
        Some((a, b, c)) => KroneckerVerdict::RationalRelation { a, b, c },
        None => KroneckerVerdict::NoRelationUpTo { bound },
    }
}

/// Exact bounded Kronecker test on rational components. Two rationals and 1
/// are always dependent; the reported witness is the smallest one found
/// (provably smallest when the bound is below 10^3 and the scan is
/// exhaustive).
pub fn kronecker_test_exact(alpha1: &Rat, alpha2: &Rat, bound: i64) -> KroneckerVerdict {
    assert!(bound >= 1, "bound must be at least 1");
    let small = (
        alpha1.numer().to_i128(),
        alpha1.denom().to_i128(),
        alpha2.numer().to_i128(),
        alpha2.denom().to_i128(),
    );
    if bound < 1000 {
        if let (Some(p1), Some(q1), Some(p2), Some(q2)) = small {
            // a p1 q2 + b p2 q1 + c q1 q2 = 0 in plain integers.
            let (m1, m2, den) = (p1 * q2, p2 * q1, q1 * q2);
            let mut best: Option<(i64, i64, i64)> = None;
            for a in -bound..=bound {
                for b in -bound..=bound {
                    let num = a as i128 * m1 + b as i128 * m2;
                    if num % den != 0 {
                        continue;
                    }
                    let c = -(num / den);
                    let Ok(c) = i64::try_from(c) else { continue };
                    if c.abs() > bound || (a, b, c) == (0, 0, 0) {
                        continue;
                    }
                    let w = canonical_sign((a, b, c));
                    if best.is_none() || norm_key(w) < norm_key(best.unwrap()) {
                        best = Some(w);
                    }
                }
            }
            return match best {
                Some((a, b, c)) => KroneckerVerdict::RationalRelation { a, b, c },
                None => KroneckerVerdict::NoRelationUpTo { bound },
            };
        }
        // Oversized numerators: fall through to the lattice path.
    }
    match minimal_rational_witness(alpha1, alpha2) {
        Some((a, b, c)) if a.abs().max(b.abs()).max(c.abs()) <= bound => {
            KroneckerVerdict::RationalRelation { a, b, c }
        }
        _ => KroneckerVerdict::NoRelationUpTo { bound },
    }
}

/// Small witness for `a*x + b*y + c = 0` with `x, y` rational, via LLL on
/// the integer kernel of the primitive normal vector.
fn minimal_rational_witness(x: &Rat, y: &Rat) -> Option<(i64, i64, i64)> {
    if x.is_zero() && y.is_zero() {
        return Some((1, 0, 0));
    }
    // a * p1 q2 + b * p2 q1 + c * q1 q2 = 0
    let n1 = x.numer() * y.denom();
    let n2 = y.numer() * x.denom();
    let n3 = x.denom() * y.denom();
    let g = n1.gcd(&n2).gcd(&n3);
    let (n1, n2, n3) = (&n1 / &g, &n2 / &g, &n3 / &g);
    let kernel = integer_kernel_basis(&n1, &n2, &n3);
    let reduced = lll::lll(kernel);
    let mut best: Option<(i64, i64, i64)> = None;
    for cand in lll::small_combinations(&reduced, 3, 8) {
        let (Some(a), Some(b), Some(c)) = (cand[0].to_i64(), cand[1].to_i64(), cand[2].to_i64())
        else {
            continue;
        };
        if (a, b, c) == (0, 0, 0) {
            continue;
        }
        debug_assert!(
            (rat_int(a) * x.clone() + rat_int(b) * y.clone() + rat_int(c)).is_zero(),
            "kernel vectors must satisfy the relation"
        );
        let w = canonical_sign((a, b, c));
        if best.is_none() || norm_key(w) < norm_key(best.unwrap()) {
            best = Some(w);
        }
    }
    best
}

/// Basis of the rank-2 integer kernel of a primitive vector `(n1, n2, n3)`.
fn integer_kernel_basis(n1: &BigInt, n2: &BigInt, n3: &BigInt) -> Vec<Vec<BigInt>> {
    let e = n1.extended_gcd(n2);
    let g1 = e.gcd; // x*n1 + y*n2 = g1
    let (x, y) = (e.x, e.y);
    let k1 = vec![-(n2 / &g1), n1 / &g1, BigInt::zero()];
    let g2 = g1.gcd(n3);
    let k2 = vec![-(&x * (n3 / &g2)), -(&y * (n3 / &g2)), &g1 / &g2];
    debug_assert!((&k1[0] * n1 + &k1[1] * n2 + &k1[2] * n3).is_zero());
    debug_assert!((&k2[0] * n1 + &k2[1] * n2 + &k2[2] * n3).is_zero());
    vec![k1, k2]
}

/// Exact independence test of `(x, y, 1)` over the rationals, for components
/// in (possibly distinct) real quadratic fields. Decided by coefficient
/// comparison in the basis `{1, sqrt(d1), sqrt(d2)}`.
pub fn kronecker_symbolic(x: &QuadExt, y: &QuadExt) -> KroneckerVerdict {
    match quad_relation(x, y) {
        Some((a, b, c)) => {
            let (a, b, c) = reduce_big_witness(a, b, c);
            KroneckerVerdict::RationalRelation { a, b, c }
        }
        None => KroneckerVerdict::IndependentExact,
    }
}

fn reduce_big_witness(a: BigInt, b: BigInt, c: BigInt) -> (i64, i64, i64) {
    let g = a.gcd(&b).gcd(&c);
    let (a, b, c) = if g.is_zero() {
        (a, b, c)
    } else {
        (&a / &g, &b / &g, &c / &g)
    };
    let w = (
        a.to_i64().expect("witness fits in i64"),
        b.to_i64().expect("witness fits in i64"),
        c.to_i64().expect("witness fits in i64"),
    );
    canonical_sign(w)
}

/// The primitive integer relation `a*x + b*y + c = 0`, or `None` when
/// `x, y, 1` are independent over the rationals.
fn quad_relation(x: &QuadExt, y: &QuadExt) -> Option<(BigInt, BigInt, BigInt)> {
    let scale_pair = |p: &Rat, q: &Rat| -> (BigInt, BigInt) {
        let l = p.denom().lcm(q.denom());
        (p.numer() * (&l / p.denom()), q.numer() * (&l / q.denom()))
    };
    match (x.is_rational(), y.is_rational()) {
        (true, true) => {
            // Minimal witness via the kernel lattice.
            let (a, b, c) = minimal_rational_witness(&x.a, &y.a).expect("rationals are dependent");
            Some((BigInt::from(a), BigInt::from(b), BigInt::from(c)))
        }
        (true, false) => {
            // b must vanish: a*x + c = 0.
            Some((x.a.denom().clone(), BigInt::zero(), -x.a.numer().clone()))
        }
        (false, true) => Some((BigInt::zero(), y.a.denom().clone(), -y.a.numer().clone())),
        (false, false) if x.d == y.d => {
            // a*b1 + b*b2 = 0 and a*a1 + b*a2 + c = 0:
            // (a, b) proportional to (b2, -b1).
            let (p, q) = scale_pair(&y.b, &x.b);
            let (p, q) = (p, -q);
            let r = -(Rat::from_integer(p.clone()) * x.a.clone()
                + Rat::from_integer(q.clone()) * y.a.clone());
            let scale = r.denom().clone();
            Some((&p * &scale, &q * &scale, r.numer().clone()))
        }
        // Distinct squarefree radicands: 1, sqrt(d1), sqrt(d2) are
        // independent, so a*b1 = b*b2 = 0 forces a = b = 0, then c = 0.
        (false, false) => None,
    }
}

/// One line of exceptional directions `(alpha1, alpha2)` generated by an
/// integer triple `(m2 - m1, n2, q2)` against a face edge with local line
/// coefficients `(c1, c2, c3)`:
///
/// `c1 (m2-m1) alpha1 + c2 (m2-m1) alpha2 = c1 n2 + c2 q2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalLine {
    pub triple: [i64; 3],
    pub alpha1_coeff: Rat,
    pub alpha2_coeff: Rat,
    pub rhs: Rat,
}

impl ExceptionalLine {
    pub fn contains(&self, alpha1: &Rat, alpha2: &Rat) -> bool {
        self.alpha1_coeff.clone() * alpha1.clone() + self.alpha2_coeff.clone() * alpha2.clone()
            == self.rhs
    }

    /// `n` distinct rational points on the line.
    pub fn sample_points(&self, n: usize) -> Vec<(Rat, Rat)> {
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let t = Rat::new(BigInt::from(2 * k as i64 - n as i64), BigInt::from(2 * n as i64 + 1));
            if !self.alpha2_coeff.is_zero() {
                let a1 = t.clone();
                let a2 = (self.rhs.clone() - self.alpha1_coeff.clone() * a1.clone())
                    / self.alpha2_coeff.clone();
                out.push((a1, a2));
            } else {
                let a1 = self.rhs.clone() / self.alpha1_coeff.clone();
                out.push((a1, t));
            }
        }
        out
    }
}

/// All exceptional-direction lines for a face splitting edge, over integer
/// triples with `|m2 - m1|, |n2|, |q2| <= bound` and `m2 != m1`. Each line
/// carries its generating triple; coincident lines from different triples
/// are kept separate.
pub fn exceptional_lines(
    edge: &SplittingEdge,
    bound: i64,
) -> Result<Vec<ExceptionalLine>, DirectionsError> {
    match edge {
        SplittingEdge::FaceEdge { line, .. } => {
            exceptional_lines_from_coeffs(&[line[0].clone(), line[1].clone(), line[2].clone()], bound)
        }
        SplittingEdge::CubeEdge { .. } => Err(DirectionsError::NotAFaceEdge),
    }
}

/// Same as [`exceptional_lines`], from raw `(c1, c2, c3)` coefficients.
pub fn exceptional_lines_from_coeffs(
    coeffs: &[Rat; 3],
    bound: i64,
) -> Result<Vec<ExceptionalLine>, DirectionsError> {
    let (c1, c2) = (&coeffs[0], &coeffs[1]);
    if c1.is_zero() && c2.is_zero() {
        return Err(DirectionsError::DegenerateEdge);
    }
    let mut out = Vec::new();
    for dm in -bound..=bound {
        if dm == 0 {
            continue;
        }
        for n2 in -bound..=bound {
            for q2 in -bound..=bound {
                out.push(ExceptionalLine {
                    triple: [dm, n2, q2],
                    alpha1_coeff: c1.clone() * rat_int(dm),
                    alpha2_coeff: c2.clone() * rat_int(dm),
                    rhs: c1.clone() * rat_int(n2) + c2.clone() * rat_int(q2),
                });
            }
        }
    }
    Ok(out)
}

/// CSV catalog of exceptional lines:
/// `c1,c2,dm,n2,q2,a1_coeff,a2_coeff,rhs`.
pub fn exceptional_lines_csv(coeffs: &[Rat; 3], lines: &[ExceptionalLine]) -> String {
    let mut out = String::from("c1,c2,dm,n2,q2,alpha1_coeff,alpha2_coeff,rhs\n");
    for l in lines {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            coeffs[0], coeffs[1], l.triple[0], l.triple[1], l.triple[2],
            l.alpha1_coeff, l.alpha2_coeff, l.rhs
        ));
    }
    out
}

/// A user-facing direction: exact rational or quadratic-irrational
/// components, e.g. `sqrt:2,sqrt:3,1` or `1,1/2+1/2*sqrt:5`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSpec {
    components: Vec<QuadExt>,
}

impl DirectionSpec {
    pub fn parse(text: &str) -> Result<Self, DirectionsError> {
        let components: Vec<QuadExt> = text
            .split(',')
            .map(|p| parse_quad(p).map_err(DirectionsError::BadSpec))
            .collect::<Result<_, _>>()?;
        if components.len() != 2 && components.len() != 3 {
            return Err(DirectionsError::BadSpec(format!(
                "expected 2 or 3 components, got {}",
                components.len()
            )));
        }
        let unit = match components.len() {
            3 => &components[2],
            _ => &components[0],
        };
        let ok = unit.is_rational()
            && (unit.a == rat_int(1) || unit.a == rat_int(-1));
        if !ok {
            return Err(DirectionsError::BadSpec(
                "normalized component (last in 3 dimensions, first in 2) must be exactly 1 or -1"
                    .into(),
            ));
        }
        Ok(DirectionSpec { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[QuadExt] {
        &self.components
    }

    /// The two free components `(alpha1, alpha2)` of a 3-dimensional spec.
    pub fn alphas(&self) -> Option<(&QuadExt, &QuadExt)> {
        (self.dim() == 3).then(|| (&self.components[0], &self.components[1]))
    }

    /// The slope of a 2-dimensional spec, normalized for the sign of the
    /// unit component.
    pub fn slope(&self) -> Option<QuadExt> {
        if self.dim() != 2 {
            return None;
        }
        let sigma = self.components[0].a.clone();
        let alpha = &self.components[1];
        Some(QuadExt::new(
            alpha.a.clone() * sigma.clone(),
            alpha.b.clone() * sigma,
            alpha.d,
        ))
    }

    pub fn to_f64(&self) -> Direction<f64> {
        let mut comps = [0.0f64; 3];
        for (i, c) in self.components.iter().enumerate() {
            comps[i] = c.to_f64();
        }
        Direction::from_components(comps, self.dim()).expect("spec is normalized")
    }

    /// Exact direction when every component is rational.
    pub fn to_exact(&self) -> Option<Direction<Rat>> {
        let mut comps = [Rat::zero(), Rat::zero(), Rat::zero()];
        for (i, c) in self.components.iter().enumerate() {
            comps[i] = c.as_rat()?.clone();
        }
        Some(Direction::from_components(comps, self.dim()).expect("spec is normalized"))
    }

    pub fn is_rational(&self) -> bool {
        self.components.iter().all(|c| c.is_rational())
    }

    /// Kronecker classification of a 3-dimensional spec: symbolic exact when
    /// possible (always, since specs are exact by construction).
    pub fn kronecker(&self) -> Option<KroneckerVerdict> {
        let (x, y) = self.alphas()?;
        Some(kronecker_symbolic(x, y))
    }

    pub fn display(&self) -> String {
        self.components
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::num::rat;

    #[test]
    fn exact_witness_for_small_rationals() {
        // (2, 3, -2) satisfies a/2 + b/3 + c = 0, but (2, 0, -1) is the
        // smallest-norm witness and wins.
        let v = kronecker_test_exact(&rat(1, 2), &rat(1, 3), 10);
        assert_eq!(v, KroneckerVerdict::RationalRelation { a: 2, b: 0, c: -1 });
        let (a, b, c) = v.relation().unwrap();
        let sum = rat_int(a) * rat(1, 2) + rat_int(b) * rat(1, 3) + rat_int(c);
        assert!(sum.is_zero());
        // The example witness is itself valid.
        let sum = rat_int(2) * rat(1, 2) + rat_int(3) * rat(1, 3) + rat_int(-2);
        assert!(sum.is_zero());
    }

    #[test]
    fn kernel_route_matches_exhaustive_route() {
        // Same witness through the lattice path (bound >= 1000) and the
        // exhaustive path.
        for (x, y) in [
            (rat(1, 2), rat(1, 3)),
            (rat(1, 2), rat(1, 2)),
            (rat(3, 7), rat(2, 5)),
            (rat(-2, 9), rat(5, 4)),
        ] {
            let exhaustive = kronecker_test_exact(&x, &y, 999);
            let lattice = kronecker_test_exact(&x, &y, 1000);
            let (we, wl) = (exhaustive.relation().unwrap(), lattice.relation().unwrap());
            assert_eq!(norm_key(we), norm_key(wl), "{x},{y}: {we:?} vs {wl:?}");
        }
    }

    #[test]
    fn same_field_symbolic_relation() {
        // alpha1 = sqrt(2), alpha2 = 1 - sqrt(2): witness (1, 1, -1).
        let x = QuadExt::new(Rat::zero(), rat_int(1), 2);
        let y = QuadExt::new(rat_int(1), rat_int(-1), 2);
        let v = kronecker_symbolic(&x, &y);
        assert_eq!(v, KroneckerVerdict::RationalRelation { a: 1, b: 1, c: -1 });
    }

    #[test]
    fn distinct_fields_are_independent() {
        let r2 = QuadExt::new(Rat::zero(), rat_int(1), 2);
        let r3 = QuadExt::new(Rat::zero(), rat_int(1), 3);
        assert_eq!(kronecker_symbolic(&r2, &r3), KroneckerVerdict::IndependentExact);
        // sqrt(8) = 2 sqrt(2) lands in the same field as sqrt(2).
        let r8 = QuadExt::new(Rat::zero(), rat_int(1), 8);
        assert!(kronecker_symbolic(&r2, &r8).is_relation());
    }

    #[test]
    fn one_rational_component_is_always_dependent() {
        let r2 = QuadExt::new(Rat::zero(), rat_int(1), 2);
        let half = QuadExt::rational(rat(1, 2));
        let v = kronecker_symbolic(&half, &r2);
        assert_eq!(v, KroneckerVerdict::RationalRelation { a: 2, b: 0, c: -1 });
        let v = kronecker_symbolic(&r2, &half);
        assert_eq!(v, KroneckerVerdict::RationalRelation { a: 0, b: 2, c: -1 });
    }

    #[test]
    fn float_bounded_search_on_independent_pair() {
        let v = kronecker_test(2f64.sqrt(), 3f64.sqrt(), 10_000);
        assert_eq!(v, KroneckerVerdict::NoRelationUpTo { bound: 10_000 });
    }

    #[test]
    fn float_search_finds_planted_relations() {
        // alpha2 = (-a alpha1 - c) / b for a spread of witnesses.
        for (a, b, c) in [(2i64, 3i64, -2i64), (5, -7, 1), (1, 1, -1), (12, 5, -9)] {
            let alpha1 = 2f64.sqrt() / 3.0;
            let alpha2 = (-(a as f64) * alpha1 - c as f64) / b as f64;
            let v = kronecker_test(alpha1, alpha2, 100);
            let (wa, wb, wc) = v.relation().expect("planted relation found");
            let r = wa as f64 * alpha1 + wb as f64 * alpha2 + wc as f64;
            assert!(r.abs() <= 1e-9 * wa.abs().max(wb.abs()).max(wc.abs()) as f64);
        }
    }

    #[test]
    fn shared_square_factor_witness() {
        // (1/2, 1/2): the minimal witness (1, -1, 0) lies outside the span
        // of the naive kernel pair (2,0,-1), (0,2,-1); the lattice basis
        // must be complete.
        let v = kronecker_test_exact(&rat(1, 2), &rat(1, 2), 1000);
        assert_eq!(v, KroneckerVerdict::RationalRelation { a: 1, b: -1, c: 0 });
    }

    #[test]
    fn exceptional_line_substitutions() {
        // (c1, c2) = (1, 0), triple (1, 1, 0): alpha1 = 1.
        let lines =
            exceptional_lines_from_coeffs(&[rat_int(1), rat_int(0), rat(1, 4)], 1).unwrap();
        let l = lines.iter().find(|l| l.triple == [1, 1, 0]).unwrap();
        assert!(l.contains(&rat_int(1), &rat(7, 3)));
        assert!(!l.contains(&rat(1, 2), &rat(7, 3)));

        // (c1, c2) = (1, 1), triple (2, 1, 1): 2 alpha1 + 2 alpha2 = 2.
        let lines =
            exceptional_lines_from_coeffs(&[rat_int(1), rat_int(1), rat(1, 2)], 2).unwrap();
        let l = lines.iter().find(|l| l.triple == [2, 1, 1]).unwrap();
        for (a1, a2) in l.sample_points(20) {
            assert_eq!(a1.clone() + a2.clone(), rat_int(1));
        }
    }

    #[test]
    fn degenerate_edge_rejected() {
        assert_eq!(
            exceptional_lines_from_coeffs(&[Rat::zero(), Rat::zero(), rat_int(1)], 2),
            Err(DirectionsError::DegenerateEdge)
        );
    }

    #[test]
    fn line_points_fail_the_kronecker_test() {
        // Rational edge coefficients: every sampled point of every line
        // satisfies a bounded rational relation.
        let lines =
            exceptional_lines_from_coeffs(&[rat_int(1), rat_int(2), rat(1, 4)], 2).unwrap();
        for line in lines.iter().take(30) {
            for (a1, a2) in line.sample_points(5) {
                let v = kronecker_test_exact(&a1, &a2, 1000);
                let (a, b, c) = v.relation().unwrap_or_else(|| {
                    panic!("no witness for point ({a1}, {a2}) of line {:?}", line.triple)
                });
                let sum = rat_int(a) * a1.clone() + rat_int(b) * a2.clone() + rat_int(c);
                assert!(sum.is_zero());
            }
        }
    }

    #[test]
    fn real_fixture_edges_generate_lines() {
        use crate::geometry::SplittingEdge;
        let m = fixtures::build(&fixtures::gates4_3d());
        let face_edge = m
            .splitting_edges()
            .iter()
            .find(|e| matches!(e, SplittingEdge::FaceEdge { .. }))
            .unwrap();
        let lines = exceptional_lines(face_edge, 2).unwrap();
        // (2*2+1)^2 * 2*2 = 100 triples.
        assert_eq!(lines.len(), 100);
        let cube_edge = m
            .splitting_edges()
            .iter()
            .find(|e| matches!(e, SplittingEdge::CubeEdge { .. }))
            .unwrap();
        assert_eq!(
            exceptional_lines(cube_edge, 2),
            Err(DirectionsError::NotAFaceEdge)
        );
    }

    #[test]
    fn direction_spec_parsing() {
        let spec = DirectionSpec::parse("sqrt:2,sqrt:3,1").unwrap();
        assert_eq!(spec.dim(), 3);
        assert_eq!(spec.kronecker(), Some(KroneckerVerdict::IndependentExact));
        let d = spec.to_f64();
        assert_eq!(d.components()[2], 1.0);
        assert!(spec.to_exact().is_none());

        let spec = DirectionSpec::parse("1,1/2+1/2*sqrt:5").unwrap();
        assert_eq!(spec.dim(), 2);
        let phi = spec.slope().unwrap();
        assert!((phi.to_f64() - 1.618033988749895).abs() < 1e-12);

        let spec = DirectionSpec::parse("0.5,0.25,1").unwrap();
        assert!(spec.is_rational());
        assert!(spec.to_exact().is_some());
        assert!(spec.kronecker().unwrap().is_relation());

        assert!(DirectionSpec::parse("sqrt:2,sqrt:3,2").is_err());
        assert!(DirectionSpec::parse("1").is_err());
        // Reversed directions carry the -1 unit component.
        let spec = DirectionSpec::parse("-1,-1/2").unwrap();
        assert_eq!(spec.slope().unwrap().as_rat(), Some(&rat(1, 2)));
    }

    mod saddle_tests {
        use super::*;
        use crate::num::QuadExt;

        fn slope_len_set(conns: &[SaddleConnection]) -> std::collections::BTreeSet<(Slope, i64)> {
            conns.iter().map(|c| c.slope_length()).collect()
        }

        #[test]
        fn torus_short_connections() {
            let m = fixtures::build(&fixtures::torus_2d());
            let conns = saddle_connections(&m, 1.5).unwrap();
            // 4 axis orientations + 4 diagonal orientations.
            assert_eq!(conns.len(), 8);
            let set = slope_len_set(&conns);
            let expect: std::collections::BTreeSet<(Slope, i64)> = [
                (Slope::Finite(Rat::zero()), 1),
                (Slope::Vertical, 1),
                (Slope::Finite(rat_int(1)), 2),
                (Slope::Finite(rat_int(-1)), 2),
            ]
            .into_iter()
            .collect();
            assert_eq!(set, expect);
        }

        #[test]
        fn below_shortest_length_is_empty() {
            let m = fixtures::build(&fixtures::torus_2d());
            assert!(saddle_connections(&m, 0.5).unwrap().is_empty());
        }

        #[test]
        fn monotone_in_length() {
            let m = fixtures::build(&fixtures::figure2_surface_2d());
            let small = saddle_connections(&m, 1.5).unwrap();
            let large = saddle_connections(&m, 2.5).unwrap();
            for c in &small {
                assert!(large.iter().any(|d| d == c));
            }
            assert!(large.len() > small.len());
        }

        #[test]
        fn barriered_surface_connections_have_no_interior_vertex() {
            use crate::tracer::{launch, Direction};
            let m = fixtures::build(&fixtures::figure2_surface_2d());
            let conns = saddle_connections(&m, 2.0).unwrap();
            assert!(!conns.is_empty());
            for c in conns.iter().filter(|c| c.delta[0] != 0 && c.delta[1] != 0) {
                // Independent check: interior points of the segment are never
                // lattice points.
                let [dx, dy] = c.delta;
                let sign = if dx > 0 { 1 } else { -1 };
                let dir = Direction::from_components(
                    [rat_int(sign), rat(dy, dx.abs()), Rat::zero()],
                    2,
                )
                .unwrap();
                let corner = [
                    rat_int(c.start[0] - c.cell.coords()[0]),
                    rat_int(c.start[1] - c.cell.coords()[1]),
                    Rat::zero(),
                ];
                let t_star = rat_int(dx.abs());
                let tr = launch(&m, c.cell, corner, &dir, &(t_star.clone() + rat_int(1))).unwrap();
                for j in 1..8 {
                    let t = t_star.clone() * rat(j, 8);
                    let p = tr.position_at(&t).unwrap();
                    let interior_vertex =
                        p.local[0].is_integer() && p.local[1].is_integer();
                    assert!(!interior_vertex, "interior vertex on {:?}", c.delta);
                }
            }
        }

        #[test]
        fn gated_edges_carry_no_connections()
        {
            // The bottom-row walls of the barriered surface are slits: no
            // vertical length-1 connection can run along x = 0..2 at y in
            // [0,1].
            let m = fixtures::build(&fixtures::figure2_surface_2d());
            let conns = saddle_connections(&m, 1.0).unwrap();
            for c in &conns {
                if c.slope == Slope::Vertical {
                    assert!(
                        c.start[1] >= 1,
                        "vertical connection along a wall: {c:?}"
                    );
                }
            }
        }

        #[test]
        fn bad_slopes_are_connection_slopes() {
            let m = fixtures::build(&fixtures::torus_2d());
            assert!(is_bad_slope(&m, &QuadExt::rational(rat_int(1)), 2.0).unwrap());
            let r2 = QuadExt::new(Rat::zero(), rat_int(1), 2);
            assert!(!is_bad_slope(&m, &r2, 10.0).unwrap());
            // Self-consistency: every returned finite slope is bad.
            for c in saddle_connections(&m, 2.5).unwrap() {
                if let Slope::Finite(q) = &c.slope {
                    assert!(is_bad_slope(&m, &QuadExt::rational(q.clone()), 2.5).unwrap());
                }
            }
            assert!(is_bad_slope_f64(&m, 1.0, 2.0).unwrap());
            assert!(!is_bad_slope_f64(&m, 2f64.sqrt(), 2.0).unwrap());
        }
    }
}
