//! Deterministic low-discrepancy sampling. All experiment randomization goes
//! through these generators so that a (seed, index) pair pins every sample.

/// Van der Corput radical inverse in the given base.
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut x = 0.0;
    let mut f = inv;
    while i > 0 {
        x += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    x
}

const BASES: [u64; 3] = [2, 3, 5];

/// Halton sequence over `[0,1)^dim` with a Cranley-Patterson style rotation
/// derived from `seed`, so distinct seeds give distinct deterministic clouds.
#[derive(Clone, Debug)]
pub struct Halton {
    dim: usize,
    index: u64,
    shift: [f64; 3],
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!((1..=3).contains(&dim), "Halton supports 1..=3 dims");
        let mut shift = [0.0; 3];
        let mut h = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
        for s in shift.iter_mut() {
            h ^= h >> 33;
            h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
            h ^= h >> 33;
            *s = (h >> 11) as f64 / (1u64 << 53) as f64;
        }
        // Index 1-based: index 0 of a Halton sequence is the origin.
        Halton { dim, index: 1, shift }
    }

    pub fn next_point(&mut self) -> [f64; 3] {
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            let u = radical_inverse(self.index, BASES[a]) + self.shift[a];
            p[a] = u - u.floor();
        }
        self.index += 1;
        p
    }

    /// `n` points filling `[0,1)^dim`.
    pub fn take(&mut self, n: usize) -> Vec<[f64; 3]> {
        (0..n).map(|_| self.next_point()).collect()
    }
}

/// `n` deterministic points inside the `dim`-ball of `radius` around the
/// origin (rejection from the bounding cube, which keeps the sequence
/// reproducible for any count).
pub fn ball_points(dim: usize, radius: f64, n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut seq = Halton::new(dim, seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u = seq.next_point();
        let mut p = [0.0; 3];
        let mut norm2 = 0.0;
        for a in 0..dim {
            p[a] = (2.0 * u[a] - 1.0) * radius;
            norm2 += p[a] * p[a];
        }
        if norm2 < radius * radius {
            out.push(p);
        }
    }
    out
}

/// `n` deterministic points along a segment, given as fractions in `(0,1)`;
/// endpoints are avoided (they are typically singular).
pub fn segment_fractions(n: usize, seed: u64) -> Vec<f64> {
    let mut seq = Halton::new(1, seed);
    (0..n)
        .map(|_| {
            let u = seq.next_point()[0];
            // squeeze into (0,1) strictly, away from the tips
            0.5e-3 + u * (1.0 - 1e-3)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a: Vec<_> = Halton::new(3, 7).take(16);
        let b: Vec<_> = Halton::new(3, 7).take(16);
        let c: Vec<_> = Halton::new(3, 8).take(16);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn covers_unit_cube_roughly() {
        let pts = Halton::new(2, 1).take(512);
        let mut hit = [[false; 4]; 4];
        for p in pts {
            hit[(p[0] * 4.0) as usize][(p[1] * 4.0) as usize] = true;
        }
        assert!(hit.iter().flatten().all(|&h| h));
    }

    #[test]
    fn ball_points_stay_inside() {
        for p in ball_points(3, 0.25, 200, 3) {
            let n2: f64 = p.iter().map(|x| x * x).sum();
            assert!(n2 < 0.25 * 0.25);
        }
        assert_eq!(ball_points(2, 0.1, 50, 9).len(), 50);
    }
}
