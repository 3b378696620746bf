//! Subcell grid marching: enumerate the cells of a regular grid over the
//! unit cube visited by a straight segment, with entry times. Shared by the
//! coverage and multiplicity estimators.

/// Index of the grid cell containing `x` on an `n`-fold subdivision of
/// `[0,1)`, clamping boundary points inward.
fn cell_of(x: f64, n: usize) -> usize {
    ((x * n as f64).floor() as isize).clamp(0, n as isize - 1) as usize
}

/// March the segment `p(t) = enter + t * v`, `t in [0, dt]`, across the
/// `n^dim` grid over the unit cube, invoking `visit(idx, t_entry)` for every
/// grid cell touched (the first call is at `t = 0`).
pub fn march<F: FnMut([usize; 3], f64)>(
    enter: [f64; 3],
    v: [f64; 3],
    dt: f64,
    n: usize,
    dim: usize,
    mut visit: F,
) {
    let mut idx = [0usize; 3];
    for a in 0..dim {
        idx[a] = cell_of(enter[a], n);
    }
    visit(idx, 0.0);
    if dt <= 0.0 {
        return;
    }
    let step = 1.0 / n as f64;
    // Guard against pathological float stalls; every iteration advances one
    // index, so this bound is generous.
    let max_steps = 8 + (dt * n as f64 * v.iter().map(|x| x.abs()).sum::<f64>()) as usize;
    for _ in 0..max_steps {
        // Next grid-plane crossing over all axes. Exact ties (a corner
        // transit) resolve as two consecutive index steps at the same time.
        let mut best: Option<(f64, usize, isize)> = None;
        for a in 0..dim {
            if v[a] == 0.0 {
                continue;
            }
            let dir = if v[a] > 0.0 { 1isize } else { -1 };
            let boundary = if dir > 0 {
                (idx[a] + 1) as f64 * step
            } else {
                idx[a] as f64 * step
            };
            let ta = (boundary - enter[a]) / v[a];
            if best.is_none_or(|(b, _, _)| ta < b) {
                best = Some((ta, a, dir));
            }
        }
        let Some((ta, a, dir)) = best else { return };
        if ta >= dt {
            return;
        }
        let next = idx[a] as isize + dir;
        if !(0..n as isize).contains(&next) {
            // Left the unit cube: the caller splits segments at cell faces,
            // so this only happens by a float hair at the boundary.
            return;
        }
        idx[a] = next as usize;
        visit(idx, ta.max(0.0));
    }
}
