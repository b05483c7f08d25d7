//! Supercover grid traversal in cell units.
//!
//! Cell `(i, j)` spans `[i - 0.5, i + 0.5] x [j - 0.5, j + 0.5]`. When a ray
//! crosses a lattice corner exactly, both side cells are reported before the
//! diagonal one so no touched cell is skipped.

const CORNER_EPS: f64 = 1e-9;

/// Unit direction of ray `k` out of `n` evenly spaced angles.
pub(crate) fn ray_direction(k: usize, n: usize) -> (f64, f64) {
    let theta = std::f64::consts::TAU * k as f64 / n as f64;
    (theta.cos(), theta.sin())
}

/// Walk cells from `start`, offset `frac` from that cell's centre, along `dir`.
///
/// `visit(col, row, t)` receives the ray parameter at which the cell is
/// entered (0 for the start cell) and returns `false` to stop.
pub(crate) fn trace_cells(
    start: (i64, i64),
    frac: (f64, f64),
    dir: (f64, f64),
    mut visit: impl FnMut(i64, i64, f64) -> bool,
) {
    let (mut x, mut y) = start;
    if !visit(x, y, 0.0) {
        return;
    }
    let axis = |d: f64, f: f64| -> (i64, f64, f64) {
        if d.abs() < 1e-15 {
            (0, f64::INFINITY, f64::INFINITY)
        } else if d > 0.0 {
            (1, (0.5 - f) / d, 1.0 / d)
        } else {
            (-1, (-0.5 - f) / d, -1.0 / d)
        }
    };
    let (step_x, mut t_max_x, t_delta_x) = axis(dir.0, frac.0);
    let (step_y, mut t_max_y, t_delta_y) = axis(dir.1, frac.1);
    loop {
        if (t_max_x - t_max_y).abs() < CORNER_EPS {
            let t = t_max_x.min(t_max_y);
            if !visit(x + step_x, y, t) || !visit(x, y + step_y, t) {
                return;
            }
            x += step_x;
            y += step_y;
            t_max_x += t_delta_x;
            t_max_y += t_delta_y;
            if !visit(x, y, t) {
                return;
            }
        } else if t_max_x < t_max_y {
            x += step_x;
            let t = t_max_x;
            t_max_x += t_delta_x;
            if !visit(x, y, t) {
                return;
            }
        } else {
            y += step_y;
            let t = t_max_y;
            t_max_y += t_delta_y;
            if !visit(x, y, t) {
                return;
            }
        }
    }
}
