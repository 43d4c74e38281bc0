//! Brute-force cross-checks for the LP kernels.
//!
//! These routines share no code with the simplex: the minimax program is
//! minimized by plain grid search (optionally refined around the best
//! point), and hull membership / envelope values are recovered by
//! enumerating small point subsets and solving the barycentric equations
//! with Gaussian elimination. They ship in the library so the CLI can run
//! `--oracle` audits on any input, and the test suites reuse them as
//! independent references.

use crate::geometry::{MinimaxRow, Point};

/// Minimum of `max_j (offset_j + slope_j . theta)` over a full grid on
/// `[-radius, radius]^dim` with the given step.
pub fn grid_minimax(rows: &[MinimaxRow], dim: usize, radius: f64, step: f64) -> (f64, Point) {
    let per_axis = (2.0 * radius / step).round() as usize + 1;
    let mut best_value = f64::INFINITY;
    let mut best_theta = vec![0.0; dim];
    let mut idx = vec![0usize; dim];
    loop {
        let theta: Vec<f64> = idx.iter().map(|&i| -radius + i as f64 * step).collect();
        let value = eval_rows(rows, &theta);
        if value < best_value {
            best_value = value;
            best_theta = theta;
        }
        if !advance(&mut idx, per_axis) {
            break;
        }
    }
    (best_value, Point::new(best_theta))
}

/// Coarse-to-fine grid minimization: each round lays `points_per_axis`
/// samples per axis over the current box, then recentres a box of twice
/// the sample spacing on the best point. The target is convex piecewise
/// linear, so the value converges geometrically even when the minimizer
/// itself is not unique.
pub fn refined_grid_minimax(
    rows: &[MinimaxRow],
    dim: usize,
    radius: f64,
    rounds: usize,
    points_per_axis: usize,
) -> (f64, Point) {
    let mut center = vec![0.0; dim];
    let mut r = radius.max(1e-6);
    let mut best_value = f64::INFINITY;
    let mut best_theta = center.clone();
    for _ in 0..rounds {
        let step = 2.0 * r / (points_per_axis - 1) as f64;
        let mut idx = vec![0usize; dim];
        let mut round_best = f64::INFINITY;
        let mut round_theta = center.clone();
        loop {
            let theta: Vec<f64> = idx
                .iter()
                .enumerate()
                .map(|(k, &i)| center[k] - r + i as f64 * step)
                .collect();
            let value = eval_rows(rows, &theta);
            if value < round_best {
                round_best = value;
                round_theta = theta;
            }
            if !advance(&mut idx, points_per_axis) {
                break;
            }
        }
        if round_best < best_value {
            best_value = round_best;
            best_theta = round_theta.clone();
        }
        center = round_theta;
        r = 2.0 * step;
    }
    (best_value, Point::new(best_theta))
}

fn eval_rows(rows: &[MinimaxRow], theta: &[f64]) -> f64 {
    rows.iter()
        .map(|row| {
            let dot: f64 = row
                .slope
                .coords()
                .iter()
                .zip(theta)
                .map(|(s, t)| s * t)
                .sum();
            row.offset + dot
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn advance(idx: &mut [usize], per_axis: usize) -> bool {
    for slot in idx.iter_mut() {
        *slot += 1;
        if *slot < per_axis {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Exact minimax value by enumeration of the dual program: the value of
/// `min_theta max_j (offset_j + slope_j . theta)` equals the largest
/// convex combination of offsets whose slopes combine to zero, and that
/// optimum is found among subsets of at most dim+1 rows. Returns
/// `NEG_INFINITY` when no such combination exists, i.e. the program is
/// unbounded below.
pub fn minimax_by_enumeration(rows: &[MinimaxRow], dim: usize, tol: f64) -> f64 {
    let samples: Vec<(Point, f64)> = rows
        .iter()
        .map(|r| (r.slope.clone(), r.offset))
        .collect();
    envelope_by_enumeration(&samples, &Point::zero(dim), tol)
}

/// Concave-envelope value at `query` by Caratheodory enumeration: the LP
/// optimum sits on a basic solution with at most d+1 positive weights, so
/// scanning all subsets of size <= d+1 and solving the barycentric system
/// exactly recovers it. Returns `NEG_INFINITY` when no subset reproduces
/// the query with nonnegative weights.
pub fn envelope_by_enumeration(samples: &[(Point, f64)], query: &Point, tol: f64) -> f64 {
    let dim = query.dim();
    let mut best = f64::NEG_INFINITY;
    for subset in subsets_up_to(samples.len(), dim + 1) {
        if let Some(weights) = barycentric_weights(samples, &subset, query, tol) {
            let value: f64 = subset
                .iter()
                .zip(&weights)
                .map(|(&i, w)| samples[i].1 * w)
                .sum();
            best = best.max(value);
        }
    }
    best
}

/// Hull membership by the same enumeration.
pub fn hull_contains_by_enumeration(points: &[Point], query: &Point, tol: f64) -> bool {
    let dim = query.dim();
    let samples: Vec<(Point, f64)> = points.iter().map(|p| (p.clone(), 0.0)).collect();
    subsets_up_to(points.len(), dim + 1)
        .into_iter()
        .any(|subset| barycentric_weights(&samples, &subset, query, tol).is_some())
}

/// Nonnegative weights on the subset solving `sum w = 1`,
/// `sum w z_i = query`, via least squares on the stacked system; `None`
/// when the residual or a weight violates the tolerance.
fn barycentric_weights(
    samples: &[(Point, f64)],
    subset: &[usize],
    query: &Point,
    tol: f64,
) -> Option<Vec<f64>> {
    let dim = query.dim();
    let k = subset.len();
    let rows = dim + 1;
    // Stacked system A w = b with the affinity row on top.
    let mut a = vec![vec![0.0; k]; rows];
    let mut b = vec![0.0; rows];
    for (col, &i) in subset.iter().enumerate() {
        a[0][col] = 1.0;
        for r in 0..dim {
            a[r + 1][col] = samples[i].0.coord(r);
        }
    }
    b[0] = 1.0;
    for r in 0..dim {
        b[r + 1] = query.coord(r);
    }

    // Normal equations: (A^T A) w = A^T b.
    let mut ata = vec![vec![0.0; k]; k];
    let mut atb = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            ata[i][j] = (0..rows).map(|r| a[r][i] * a[r][j]).sum();
        }
        atb[i] = (0..rows).map(|r| a[r][i] * b[r]).sum();
    }
    let w = gaussian_solve(&mut ata, &mut atb)?;

    let scale = 1.0 + query.linf_norm();
    for (r, brow) in b.iter().enumerate() {
        let reproduced: f64 = (0..k).map(|c| a[r][c] * w[c]).sum();
        if (reproduced - brow).abs() > 1e-8 * scale {
            return None;
        }
    }
    if w.iter().any(|&wi| wi < -tol) {
        return None;
    }
    Some(w)
}

#[allow(clippy::needless_range_loop)]
fn gaussian_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for i in 0..n {
            if i == col {
                continue;
            }
            let factor = a[i][col] / a[col][col];
            if factor != 0.0 {
                for j in col..n {
                    let delta = factor * a[col][j];
                    a[i][j] -= delta;
                }
                b[i] -= factor * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn subsets_up_to(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn recurse(
        start: usize,
        n: usize,
        max_size: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        if current.len() == max_size {
            return;
        }
        for i in start..n {
            current.push(i);
            recurse(i + 1, n, max_size, current, out);
            current.pop();
        }
    }
    recurse(0, n, max_size, &mut current, &mut out);
    out
}
