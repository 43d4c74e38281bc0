//! Convex-geometry and linear-programming kernels.
//!
//! Everything downstream — pricing, arbitrage checks, tree recursions —
//! reduces to four operations on finite point sets: a minimax program over
//! hedge vectors, convex-hull membership with certificates, the support
//! function in the sign convention sigma_D(z) = max_{x in D} (-x.z), and
//! evaluation of the concave envelope of sampled values. All of them are
//! solved exactly by a small dense simplex.
//!
//! The functions here are pure; inputs are borrowed immutably and no state
//! is shared, so concurrent calls from multiple threads are safe.

mod simplex;

use crate::{Error, Result};
use simplex::{solve, Program, Solved};
use std::fmt;

/// Default feasibility/optimality tolerance of the LP kernels.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// L-infinity tolerance under which two points count as the same point.
pub const DEDUP_TOLERANCE: f64 = 1e-12;

/// A point of R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty(), "points need at least one coordinate");
        Point { coords }
    }

    /// One-dimensional point.
    pub fn scalar(value: f64) -> Self {
        Point::new(vec![value])
    }

    pub fn zero(dim: usize) -> Self {
        Point::new(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coord(&self, k: usize) -> f64 {
        self.coords[k]
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn minus(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    pub fn linf_norm(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn linf_dist(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Lexicographic order on coordinates; total for finite points.
    pub fn lex_cmp(&self, other: &Point) -> std::cmp::Ordering {
        for (a, b) in self.coords.iter().zip(&other.coords) {
            match a.total_cmp(b) {
                std::cmp::Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.dim().cmp(&other.dim())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim() == 1 {
            return write!(f, "{}", self.coords[0]);
        }
        write!(f, "(")?;
        for (k, c) in self.coords.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// One row of the minimax program: the affine function
/// `theta -> offset + slope . theta`.
#[derive(Debug, Clone)]
pub struct MinimaxRow {
    pub offset: f64,
    pub slope: Point,
}

impl MinimaxRow {
    pub fn new(offset: f64, slope: Point) -> Self {
        MinimaxRow { offset, slope }
    }

    pub fn eval(&self, theta: &Point) -> f64 {
        self.offset + self.slope.dot(theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    UnboundedBelow,
}

/// Outcome of the minimax program.
#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    /// Optimal value; `f64::NEG_INFINITY` when unbounded below.
    pub value: f64,
    pub minimizer: Option<Point>,
    /// Indices of input rows with zero slack at the optimum.
    pub active_rows: Vec<usize>,
    /// True when the optimal face holds more than one minimizer.
    pub multiple_optima: bool,
}

/// Minimizes `max_j (offset_j + slope_j . theta)` over theta in R^dim.
///
/// Solved in epigraph form: minimize u subject to
/// u >= offset_j + slope_j . theta. A program whose rows all have zero
/// slope degenerates to the plain maximum of the offsets.
pub fn solve_minimax(rows: &[MinimaxRow], dim: usize, tol: f64) -> Result<LpResult> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    for row in rows {
        if row.slope.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.slope.dim(),
            });
        }
    }

    if rows.iter().all(|r| r.slope.linf_norm() == 0.0) {
        let value = rows.iter().map(|r| r.offset).fold(f64::NEG_INFINITY, f64::max);
        let theta = Point::zero(dim);
        let active = active_rows(rows, &theta, value, tol);
        return Ok(LpResult {
            status: LpStatus::Optimal,
            value,
            minimizer: Some(theta),
            active_rows: active,
            // Every theta attains the same maximum, so the hedge is never
            // unique in the degenerate program.
            multiple_optima: true,
        });
    }

    let work = dedup_rows(rows);
    let m = work.len();
    // Columns: u+, u-, theta+ (dim), theta- (dim), slack per row.
    let cols = 2 + 2 * dim + m;
    let mut p = Program::new(cols);
    p.objective[0] = 1.0;
    p.objective[1] = -1.0;
    p.mark_twins(0, 1);
    for k in 0..dim {
        p.mark_twins(2 + k, 2 + dim + k);
    }
    for (i, row) in work.iter().enumerate() {
        let mut coeffs = vec![0.0; cols];
        coeffs[0] = 1.0;
        coeffs[1] = -1.0;
        for k in 0..dim {
            coeffs[2 + k] = -row.slope.coord(k);
            coeffs[2 + dim + k] = row.slope.coord(k);
        }
        coeffs[2 + 2 * dim + i] = -1.0;
        p.push_row(coeffs, row.offset);
    }

    match solve(&p, tol) {
        Solved::Unbounded => Ok(LpResult {
            status: LpStatus::UnboundedBelow,
            value: f64::NEG_INFINITY,
            minimizer: None,
            active_rows: Vec::new(),
            multiple_optima: false,
        }),
        Solved::Infeasible => unreachable!("epigraph form is always feasible"),
        Solved::Optimal(s) => {
            let theta = Point::new((0..dim).map(|k| s.x[2 + k] - s.x[2 + dim + k]).collect());
            let value = rows
                .iter()
                .map(|r| r.eval(&theta))
                .fold(f64::NEG_INFINITY, f64::max);
            let active = active_rows(rows, &theta, value, tol);
            Ok(LpResult {
                status: LpStatus::Optimal,
                value,
                minimizer: Some(theta),
                active_rows: active,
                multiple_optima: s.alternative_optimum,
            })
        }
    }
}

fn active_rows(rows: &[MinimaxRow], theta: &Point, value: f64, tol: f64) -> Vec<usize> {
    let atol = tol * (1.0 + value.abs());
    rows.iter()
        .enumerate()
        .filter(|(_, r)| (r.eval(theta) - value).abs() <= atol)
        .map(|(i, _)| i)
        .collect()
}

fn dedup_rows(rows: &[MinimaxRow]) -> Vec<MinimaxRow> {
    let mut out: Vec<MinimaxRow> = Vec::with_capacity(rows.len());
    for row in rows {
        let dup = out.iter().any(|r| {
            (r.offset - row.offset).abs() <= DEDUP_TOLERANCE
                && r.slope.linf_dist(&row.slope) <= DEDUP_TOLERANCE
        });
        if !dup {
            out.push(row.clone());
        }
    }
    out
}

/// Convex-hull membership report for a query point.
#[derive(Debug, Clone)]
pub struct MembershipResult {
    pub in_hull: bool,
    pub in_relative_interior: bool,
    /// Nonnegative weights over the input points reproducing the query;
    /// present exactly when `in_hull`.
    pub barycentric_weights: Option<Vec<f64>>,
    /// Strictly separating direction theta with
    /// `max_i (-theta . (p_i - query)) < 0`; present when outside.
    pub separator: Option<Point>,
}

/// Tests `query in conv(points)` and `query in ri conv(points)`.
///
/// The relative interior is decided by maximizing the minimum barycentric
/// weight: for a finite point set, the relative interior of the hull is
/// exactly the set of strictly-positive-weight combinations, so the
/// auxiliary optimum t* being above tolerance is both necessary and
/// sufficient.
pub fn hull_membership(points: &[Point], query: &Point, tol: f64) -> Result<MembershipResult> {
    if points.is_empty() {
        return Err(Error::EmptySupport);
    }
    let dim = query.dim();
    for pt in points {
        if pt.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: pt.dim(),
            });
        }
    }

    let (reps, origin) = dedup_points(points);
    let n = reps.len();

    // Variables: t+, t-, mu_i; lambda_i = t + mu_i.
    let cols = 2 + n;
    let mut p = Program::new(cols);
    p.objective[0] = -1.0;
    p.objective[1] = 1.0;
    p.mark_twins(0, 1);
    let mut row0 = vec![0.0; cols];
    row0[0] = n as f64;
    row0[1] = -(n as f64);
    for i in 0..n {
        row0[2 + i] = 1.0;
    }
    p.push_row(row0, 1.0);
    for k in 0..dim {
        let mut row = vec![0.0; cols];
        let total: f64 = reps.iter().map(|pt| pt.coord(k)).sum();
        row[0] = total;
        row[1] = -total;
        for (i, pt) in reps.iter().enumerate() {
            row[2 + i] = pt.coord(k);
        }
        p.push_row(row, query.coord(k));
    }

    match solve(&p, tol) {
        Solved::Infeasible => {
            // Outside even the affine hull.
            let separator = separating_direction(&reps, query, tol);
            Ok(MembershipResult {
                in_hull: false,
                in_relative_interior: false,
                barycentric_weights: None,
                separator,
            })
        }
        Solved::Unbounded => unreachable!("min weight is bounded above by 1/n"),
        Solved::Optimal(s) => {
            let t_star = s.x[0] - s.x[1];
            if t_star < -tol {
                let separator = separating_direction(&reps, query, tol);
                return Ok(MembershipResult {
                    in_hull: false,
                    in_relative_interior: false,
                    barycentric_weights: None,
                    separator,
                });
            }
            let mut reps_weights: Vec<f64> =
                (0..n).map(|i| (t_star + s.x[2 + i]).max(0.0)).collect();
            let total: f64 = reps_weights.iter().sum();
            if (total - 1.0).abs() > 1e-12 && total > 0.0 {
                for w in reps_weights.iter_mut() {
                    *w /= total;
                }
            }
            let mut weights = vec![0.0; points.len()];
            for (rep_idx, &orig_idx) in origin.iter().enumerate() {
                weights[orig_idx] = reps_weights[rep_idx];
            }
            Ok(MembershipResult {
                in_hull: true,
                in_relative_interior: t_star > tol,
                barycentric_weights: Some(weights),
                separator: None,
            })
        }
    }
}

/// Finds theta, box-normalized to |theta|_inf <= 1, achieving
/// `max_i (-theta . (p_i - query)) < 0`. Exists iff the query lies outside
/// the hull; returns `None` when the separation value does not clear the
/// tolerance.
fn separating_direction(points: &[Point], query: &Point, tol: f64) -> Option<Point> {
    let dim = query.dim();
    let n = points.len();
    // Columns: u+, u-, theta+ (dim), theta- (dim), row slack (n), box slack (2*dim).
    let cols = 2 + 2 * dim + n + 2 * dim;
    let mut p = Program::new(cols);
    p.objective[0] = 1.0;
    p.objective[1] = -1.0;
    p.mark_twins(0, 1);
    for k in 0..dim {
        p.mark_twins(2 + k, 2 + dim + k);
    }
    for (i, pt) in points.iter().enumerate() {
        let mut row = vec![0.0; cols];
        row[0] = 1.0;
        row[1] = -1.0;
        for k in 0..dim {
            let delta = pt.coord(k) - query.coord(k);
            row[2 + k] = delta;
            row[2 + dim + k] = -delta;
        }
        row[2 + 2 * dim + i] = -1.0;
        p.push_row(row, 0.0);
    }
    for k in 0..dim {
        let mut row = vec![0.0; cols];
        row[2 + k] = 1.0;
        row[2 + 2 * dim + n + k] = 1.0;
        p.push_row(row, 1.0);
        let mut row = vec![0.0; cols];
        row[2 + dim + k] = 1.0;
        row[2 + 2 * dim + n + dim + k] = 1.0;
        p.push_row(row, 1.0);
    }

    match solve(&p, tol) {
        Solved::Optimal(s) if s.value < -tol => Some(Point::new(
            (0..dim).map(|k| s.x[2 + k] - s.x[2 + dim + k]).collect(),
        )),
        Solved::Optimal(_) => None,
        _ => unreachable!("separator program is feasible and box-bounded"),
    }
}

/// Direction h with `h . x >= 0` for every point and `h . x > 0` for at
/// least one; `None` when 0 lies in the relative interior of the hull
/// (every such h must then vanish on all points).
pub fn supporting_direction(points: &[Point], tol: f64) -> Result<Option<Point>> {
    if points.is_empty() {
        return Err(Error::EmptySupport);
    }
    let dim = points[0].dim();
    for pt in points {
        if pt.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: pt.dim(),
            });
        }
    }
    let n = points.len();
    // Columns: h+ (dim), h- (dim), row slack (n), box slack (2*dim).
    let cols = 2 * dim + n + 2 * dim;
    let mut p = Program::new(cols);
    for k in 0..dim {
        p.mark_twins(k, dim + k);
        let total: f64 = points.iter().map(|pt| pt.coord(k)).sum();
        // maximize sum_i h . x_i
        p.objective[k] = -total;
        p.objective[dim + k] = total;
    }
    for (i, pt) in points.iter().enumerate() {
        let mut row = vec![0.0; cols];
        for k in 0..dim {
            row[k] = pt.coord(k);
            row[dim + k] = -pt.coord(k);
        }
        row[2 * dim + i] = -1.0;
        p.push_row(row, 0.0);
    }
    for k in 0..dim {
        let mut row = vec![0.0; cols];
        row[k] = 1.0;
        row[2 * dim + n + k] = 1.0;
        p.push_row(row, 1.0);
        let mut row = vec![0.0; cols];
        row[dim + k] = 1.0;
        row[2 * dim + n + dim + k] = 1.0;
        p.push_row(row, 1.0);
    }

    match solve(&p, tol) {
        Solved::Optimal(s) => {
            if -s.value > tol {
                Ok(Some(Point::new(
                    (0..dim).map(|k| s.x[k] - s.x[dim + k]).collect(),
                )))
            } else {
                Ok(None)
            }
        }
        _ => unreachable!("supporting-direction program is feasible and box-bounded"),
    }
}

/// Support function in the convention sigma_D(z) = max_{x in D} (-x . z).
pub fn support_function(points: &[Point], z: &Point) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut best = f64::NEG_INFINITY;
    for pt in points {
        if pt.dim() != z.dim() {
            return Err(Error::DimensionMismatch {
                expected: z.dim(),
                found: pt.dim(),
            });
        }
        best = best.max(-pt.dot(z));
    }
    Ok(best)
}

/// Evaluates the concave envelope of the samples at `query`:
/// the LP maximum of `sum lambda_i g_i` over nonnegative weights with
/// `sum lambda_i = 1` and `sum lambda_i z_i = query`. Returns
/// `f64::NEG_INFINITY` when the query lies outside the hull of the sample
/// sites.
pub fn concave_envelope_eval(samples: &[(Point, f64)], query: &Point, tol: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySupport);
    }
    let dim = query.dim();
    for (pt, _) in samples {
        if pt.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: pt.dim(),
            });
        }
    }
    let work = dedup_samples(samples);
    let n = work.len();
    let mut p = Program::new(n);
    for (i, (_, g)) in work.iter().enumerate() {
        p.objective[i] = -g;
    }
    let row0 = vec![1.0; n];
    p.push_row(row0, 1.0);
    for k in 0..dim {
        let row: Vec<f64> = work.iter().map(|(pt, _)| pt.coord(k)).collect();
        p.push_row(row, query.coord(k));
    }
    match solve(&p, tol) {
        Solved::Infeasible => Ok(f64::NEG_INFINITY),
        Solved::Unbounded => unreachable!("envelope weights live on the simplex"),
        Solved::Optimal(s) => Ok(-s.value),
    }
}

/// Dimension of the affine hull of the points.
#[allow(clippy::needless_range_loop)]
pub fn affine_rank(points: &[Point], tol: f64) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let dim = points[0].dim();
    let base = &points[0];
    let mut rows: Vec<Vec<f64>> = points[1..]
        .iter()
        .map(|pt| pt.minus(base).coords().to_vec())
        .collect();
    let scale = rows
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = tol * scale.max(1.0);

    // Gaussian elimination with partial pivoting.
    let mut rank = 0;
    for col in 0..dim {
        let Some(pivot_row) = (rank..rows.len())
            .filter(|&i| rows[i][col].abs() > threshold)
            .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
        else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let piv = rows[rank][col];
        for i in 0..rows.len() {
            if i == rank {
                continue;
            }
            let factor = rows[i][col] / piv;
            if factor != 0.0 {
                for k in col..dim {
                    let delta = factor * rows[rank][k];
                    rows[i][k] -= delta;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

fn dedup_points(points: &[Point]) -> (Vec<Point>, Vec<usize>) {
    let mut reps: Vec<Point> = Vec::new();
    let mut origin: Vec<usize> = Vec::new();
    for (idx, pt) in points.iter().enumerate() {
        if !reps.iter().any(|r| r.linf_dist(pt) <= DEDUP_TOLERANCE) {
            reps.push(pt.clone());
            origin.push(idx);
        }
    }
    (reps, origin)
}

fn dedup_samples(samples: &[(Point, f64)]) -> Vec<(Point, f64)> {
    let mut out: Vec<(Point, f64)> = Vec::new();
    for (pt, g) in samples {
        match out.iter_mut().find(|(r, _)| r.linf_dist(pt) <= DEDUP_TOLERANCE) {
            // Duplicate sites collapse to their best value: the envelope
            // only sees the largest g at a site.
            Some((_, held)) => *held = held.max(*g),
            None => out.push((pt.clone(), *g)),
        }
    }
    out
}
