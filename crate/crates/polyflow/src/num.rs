//! Scalar abstraction shared by the float and exact-rational flow engines,
//! plus quadratic-irrational values for symbolically declared directions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

/// Exact rational scalar used for all stored geometry (polygon vertices,
/// line coefficients, edge supports).
pub type Rat = BigRational;

/// Parse a rational literal: `"3"`, `"-2"`, `"1/2"`, `"-7/4"`, or a decimal
/// like `"0.25"` (converted exactly).
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let t = s.trim();
    if let Some((int_part, frac_part)) = t.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("invalid decimal {t:?}"));
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let int_val: BigInt = if int_digits.is_empty() {
            BigInt::from(0)
        } else {
            int_digits
                .parse()
                .map_err(|e| format!("invalid decimal {t:?}: {e}"))?
        };
        let frac_val: BigInt = frac_part
            .parse()
            .map_err(|e| format!("invalid decimal {t:?}: {e}"))?;
        let den = BigInt::from(10).pow(frac_part.len() as u32);
        let num = int_val * &den + frac_val;
        let num = if negative { -num } else { num };
        return Ok(BigRational::new(num, den));
    }
    BigRational::from_str(t).map_err(|e| format!("invalid rational {t:?}: {e}"))
}

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Numeric field the flow engine is generic over. `f64` gives the fast
/// tolerance-based mode, [`Rat`] the exact mode (tolerance zero).
///
/// `Signed` pulls in the full `num_traits` arithmetic surface (zero, one,
/// abs, the ring operations), so this trait only adds conversions and the
/// mode-specific tolerance.
pub trait Scalar:
    Clone
    + PartialOrd
    + fmt::Debug
    + Signed
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;
    fn from_rat(q: &Rat) -> Self;
    fn as_f64(&self) -> f64;

    /// Geometric tolerance for singular-hit detection, in ambient units.
    /// Zero in exact mode, 1e-9 in float mode.
    fn edge_tol() -> Self;

    /// `|self| <= tol` convenience used by the hit tests.
    fn within_tol(&self, tol: &Self) -> bool {
        self.abs() <= tol.abs()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_rat(q: &Rat) -> Self {
        // Safe for the denominators that appear in descriptions; falls back
        // to a quotient of f64 conversions for very large ones.
        q.to_f64().unwrap_or_else(|| {
            let n = q.numer().to_f64().unwrap_or(f64::MAX);
            let d = q.denom().to_f64().unwrap_or(1.0);
            n / d
        })
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn edge_tol() -> Self {
        1e-9
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        rat_int(n)
    }
    fn from_rat(q: &Rat) -> Self {
        q.clone()
    }
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn edge_tol() -> Self {
        <Rat as Zero>::zero()
    }
}

/// A real of the form `a + b*sqrt(d)` with `a, b` rational and `d` a
/// squarefree non-negative integer (`d == 0` or `b == 0` means the value is
/// rational). Used for direction specs like `sqrt:2` or `1/2+1/2*sqrt:5`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadExt {
    pub a: Rat,
    pub b: Rat,
    pub d: u64,
}

impl QuadExt {
    pub fn rational(a: Rat) -> Self {
        QuadExt { a, b: Rat::zero(), d: 0 }
    }

    /// Build `a + b*sqrt(d)`, extracting square factors of `d` into `b` so
    /// that the stored radicand is squarefree.
    pub fn new(a: Rat, b: Rat, d: u64) -> Self {
        if b.is_zero() || d == 0 {
            return Self::rational(a);
        }
        let (sq, rest) = split_square(d);
        if rest == 1 {
            return Self::rational(a + b * rat_int(sq as i64));
        }
        QuadExt { a, b: b * rat_int(sq as i64), d: rest }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Exact rational value when `is_rational`, else `None`.
    pub fn as_rat(&self) -> Option<&Rat> {
        if self.is_rational() {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.a.as_f64() + self.b.as_f64() * (self.d as f64).sqrt()
    }

    pub fn neg(&self) -> Self {
        QuadExt { a: -self.a.clone(), b: -self.b.clone(), d: self.d }
    }
}

impl fmt::Display for QuadExt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() && self.b.is_one() {
            write!(f, "sqrt:{}", self.d)
        } else if self.a.is_zero() {
            write!(f, "{}*sqrt:{}", self.b, self.d)
        } else {
            write!(f, "{}+{}*sqrt:{}", self.a, self.b, self.d)
        }
    }
}

/// Split `d` as `s^2 * r` with `r` squarefree; returns `(s, r)`.
fn split_square(d: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut r = d;
    let mut p = 2u64;
    while p * p <= r {
        while r.is_multiple_of(p * p) {
            r /= p * p;
            s *= p;
        }
        p += 1;
    }
    (s, r)
}

/// Parse one symbolic component: `R`, `sqrt:D`, `R*sqrt:D`, or `R+R*sqrt:D`
/// (also `R-R*sqrt:D`), with `R` a rational literal.
pub fn parse_quad(s: &str) -> Result<QuadExt, String> {
    let t = s.trim();
    // Split an additive tail off at the last top-level '+'/'-' that is not a
    // leading sign. Components never contain parentheses.
    if let Some(idx) = split_point(t) {
        let (head, tail) = t.split_at(idx);
        let sign = &tail[..1];
        let term = parse_sqrt_term(&tail[1..])?;
        let a = parse_rat(head)?;
        let b = if sign == "-" { -term.0 } else { term.0 };
        return Ok(QuadExt::new(a, b, term.1));
    }
    if t.contains("sqrt:") {
        let (b, d) = parse_sqrt_term(t)?;
        return Ok(QuadExt::new(Rat::zero(), b, d));
    }
    Ok(QuadExt::rational(parse_rat(t)?))
}

/// `sqrt:D` or `R*sqrt:D` -> (coefficient, radicand).
fn parse_sqrt_term(s: &str) -> Result<(Rat, u64), String> {
    let t = s.trim();
    let (coeff, rad) = match t.split_once("*sqrt:") {
        Some((c, d)) => (parse_rat(c)?, d),
        None => match t.strip_prefix("sqrt:") {
            Some(d) => (Rat::one(), d),
            None => return Err(format!("expected sqrt term, got {t:?}")),
        },
    };
    let d: u64 = rad
        .trim()
        .parse()
        .map_err(|_| format!("invalid radicand {rad:?}"))?;
    Ok((coeff, d))
}

/// Index of the '+'/'-' separating the rational head from a sqrt tail, if any.
fn split_point(t: &str) -> Option<usize> {
    let tail = t.find("sqrt:")?;
    // Look for the sign immediately preceding the sqrt term's coefficient.
    let head = &t[..tail];
    let mut best = None;
    for (i, c) in head.char_indices() {
        if (c == '+' || c == '-') && i > 0 {
            best = Some(i);
        }
    }
    best
}
