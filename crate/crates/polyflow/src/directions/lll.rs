//! Small LLL lattice reduction over exact rationals, used by the bounded
//! integer-relation search. Dimensions here are tiny (2 or 3 basis vectors),
//! so a textbook implementation with full Gram-Schmidt recomputation is
//! plenty.

use crate::num::{rat, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

type Vector = Vec<BigInt>;

#[cfg(test)]
fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_rat(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Gso {
    /// Orthogonalized vectors.
    star: Vec<Vec<Rat>>,
    /// mu[k][j] for j < k.
    mu: Vec<Vec<Rat>>,
    /// Squared norms of the orthogonalized vectors.
    norm2: Vec<Rat>,
}

fn gram_schmidt(basis: &[Vector]) -> Gso {
    let n = basis.len();
    let m = basis[0].len();
    let mut star: Vec<Vec<Rat>> = Vec::with_capacity(n);
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut norm2: Vec<Rat> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<Rat> = (0..m)
            .map(|i| Rat::from_integer(basis[k][i].clone()))
            .collect();
        for j in 0..k {
            let bk: Vec<Rat> = (0..m)
                .map(|i| Rat::from_integer(basis[k][i].clone()))
                .collect();
            let coeff = if norm2[j] == Rat::zero() {
                Rat::zero()
            } else {
                dot_rat(&bk, &star[j]) / norm2[j].clone()
            };
            for i in 0..m {
                let delta = coeff.clone() * star[j][i].clone();
                v[i] -= delta;
            }
            mu[k][j] = coeff;
        }
        norm2.push(dot_rat(&v, &v));
        star.push(v);
    }
    Gso { star, mu, norm2 }
}

/// In-place LLL reduction with delta = 3/4. Returns the reduced basis.
pub fn lll(mut basis: Vec<Vector>) -> Vec<Vector> {
    let n = basis.len();
    if n <= 1 {
        return basis;
    }
    let delta = rat(3, 4);
    let mut k = 1usize;
    let mut gso = gram_schmidt(&basis);
    let mut rounds = 0usize;
    while k < n {
        rounds += 1;
        assert!(rounds < 100_000, "LLL failed to terminate");
        for j in (0..k).rev() {
            let r = round_rat(&gso.mu[k][j]);
            if !r.is_zero() {
                let (head, tail) = basis.split_at_mut(k);
                for i in 0..tail[0].len() {
                    let d = &r * &head[j][i];
                    tail[0][i] -= d;
                }
                gso = gram_schmidt(&basis);
            }
        }
        let lovasz = (delta.clone() - gso.mu[k][k - 1].clone() * gso.mu[k][k - 1].clone())
            * gso.norm2[k - 1].clone();
        if gso.norm2[k] >= lovasz {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            gso = gram_schmidt(&basis);
            k = k.max(2) - 1;
        }
    }
    let _ = &gso.star;
    basis
}

/// Round to nearest integer, ties away from zero.
fn round_rat(q: &Rat) -> BigInt {
    q.round().to_integer()
}

/// Shortest vectors heuristic: all nonzero combinations `x*u + y*v (+ z*w)`
/// of the reduced basis with small coefficients, sorted by max-norm of the
/// listed coordinate prefix.
pub fn small_combinations(basis: &[Vector], prefix: usize, span: i64) -> Vec<Vec<BigInt>> {
    let n = basis.len();
    let m = basis[0].len();
    let mut out = Vec::new();
    let coeffs: Vec<i64> = (-span..=span).collect();
    let mut stack = vec![0i64; n];
    fn rec(
        basis: &[Vector],
        coeffs: &[i64],
        stack: &mut Vec<i64>,
        depth: usize,
        m: usize,
        out: &mut Vec<Vec<BigInt>>,
    ) {
        if depth == basis.len() {
            if stack.iter().all(|&c| c == 0) {
                return;
            }
            let mut v = vec![BigInt::zero(); m];
            for (c, b) in stack.iter().zip(basis) {
                if *c != 0 {
                    for i in 0..m {
                        v[i] += BigInt::from(*c) * &b[i];
                    }
                }
            }
            out.push(v);
            return;
        }
        for &c in coeffs {
            stack[depth] = c;
            rec(basis, coeffs, stack, depth + 1, m, out);
        }
        stack[depth] = 0;
    }
    rec(basis, &coeffs, &mut stack, 0, m, &mut out);
    out.sort_by_key(|v| {
        v[..prefix]
            .iter()
            .map(|x| x.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vector {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn reduces_a_planted_short_vector() {
        // Lattice with a hidden short vector (1, -1, 2).
        let basis = vec![big(&[1, 0, 10007]), big(&[0, 1, 4999]), big(&[0, 0, 30013])];
        let reduced = lll(basis);
        let shortest = reduced
            .iter()
            .map(|v| dot(v, v))
            .min()
            .unwrap();
        // Far shorter than the original rows.
        assert!(shortest < BigInt::from(10_000_000i64));
    }

    #[test]
    fn reduction_preserves_lattice_dimension() {
        let basis = vec![big(&[7, 2]), big(&[3, 1])];
        let reduced = lll(basis);
        assert_eq!(reduced.len(), 2);
        // Determinant is preserved up to sign (unimodular operations).
        let det = &reduced[0][0] * &reduced[1][1] - &reduced[0][1] * &reduced[1][0];
        assert_eq!(det.abs(), BigInt::from(1));
    }

    #[test]
    fn kernel_basis_finds_small_relation() {
        // Relations of 1/2 and 1/3: kernel basis (2,0,-1), (0,3,-1).
        let basis = vec![big(&[2, 0, -1]), big(&[0, 3, -1])];
        let reduced = lll(basis);
        let combos = small_combinations(&reduced, 3, 3);
        // (2, 3, -2) = (2,0,-1) + (0,3,-1) must be among the small ones.
        assert!(combos.iter().any(|v| {
            v == &big(&[2, 3, -2]) || v == &big(&[-2, -3, 2])
        }));
    }
}
