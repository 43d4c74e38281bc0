//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! Every linear program in this crate has at most a few dozen rows and
//! columns, so a plain tableau beats a factorized basis both in code size
//! and in determinism. Reduced costs are recomputed from the basis at each
//! iteration; with problems this small the extra arithmetic is free and
//! removes a whole class of stale-cost bugs.

/// Equality-form program: minimize `objective . x` subject to
/// `coeffs x = rhs`, `x >= 0`.
pub(crate) struct Program {
    pub cols: usize,
    pub coeffs: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub objective: Vec<f64>,
    /// Columns introduced as plus/minus splits of a free variable point at
    /// each other here. Entering one while the other is basic is a ray of
    /// the encoding, not of the underlying program, so the pair is ignored
    /// by the alternative-optimum scan.
    pub twins: Vec<Option<usize>>,
}

impl Program {
    pub fn new(cols: usize) -> Self {
        Program {
            cols,
            coeffs: Vec::new(),
            rhs: Vec::new(),
            objective: vec![0.0; cols],
            twins: vec![None; cols],
        }
    }

    pub fn push_row(&mut self, coeffs: Vec<f64>, rhs: f64) {
        debug_assert_eq!(coeffs.len(), self.cols);
        self.coeffs.push(coeffs);
        self.rhs.push(rhs);
    }

    pub fn mark_twins(&mut self, a: usize, b: usize) {
        self.twins[a] = Some(b);
        self.twins[b] = Some(a);
    }
}

pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub value: f64,
    /// True when a zero-reduced-cost nonbasic column admits a positive
    /// step, i.e. the optimal face contains more than one point.
    pub alternative_optimum: bool,
}

pub(crate) enum Solved {
    Optimal(Solution),
    Infeasible,
    Unbounded,
}

const MAX_ITERATIONS: usize = 20_000;

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width - 1]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= piv;
        }
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.width {
                self.rows[i][j] -= factor * self.rows[row][j];
            }
            self.rows[i][col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn reduced_cost(&self, cost: &dyn Fn(usize) -> f64, col: usize) -> f64 {
        let mut rc = cost(col);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost(b);
            if cb != 0.0 {
                rc -= cb * self.rows[i][col];
            }
        }
        rc
    }

    /// Runs Bland-rule iterations until optimal or unbounded.
    fn iterate(&mut self, cost: &dyn Fn(usize) -> f64, entering_cols: usize, tol: f64) -> bool {
        for _ in 0..MAX_ITERATIONS {
            let mut entering = None;
            for j in 0..entering_cols {
                if self.reduced_cost(cost, j) < -tol {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let Some(row) = self.leaving_row(col, tol) else {
                return false;
            };
            self.pivot(row, col);
        }
        panic!("simplex iteration limit reached; Bland's rule should terminate");
    }

    /// Minimum-ratio row for `col`, ties broken by smallest basis index.
    fn leaving_row(&self, col: usize, tol: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.rows.len() {
            let a = self.rows[i][col];
            if a <= tol {
                continue;
            }
            let ratio = self.rhs(i) / a;
            match best {
                None => best = Some((i, ratio)),
                Some((bi, br)) => {
                    if ratio < br || (ratio == br && self.basis[i] < self.basis[bi]) {
                        best = Some((i, ratio));
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    /// Longest feasible step when `col` enters; `None` means unbounded.
    fn max_step(&self, col: usize, tol: f64) -> Option<f64> {
        let mut step: Option<f64> = None;
        for i in 0..self.rows.len() {
            let a = self.rows[i][col];
            if a <= tol {
                continue;
            }
            let ratio = self.rhs(i) / a;
            step = Some(match step {
                None => ratio,
                Some(s) => s.min(ratio),
            });
        }
        step
    }
}

pub(crate) fn solve(program: &Program, tol: f64) -> Solved {
    let m = program.rhs.len();
    let n = program.cols;
    let width = n + m + 1;

    let mut t = Tableau {
        rows: vec![vec![0.0; width]; m],
        basis: (n..n + m).collect(),
        width,
    };
    for i in 0..m {
        let flip = if program.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t.rows[i][j] = flip * program.coeffs[i][j];
        }
        t.rows[i][n + i] = 1.0;
        t.rows[i][width - 1] = flip * program.rhs[i];
    }

    // Phase 1: minimize the sum of artificials.
    let phase1 = move |j: usize| if j >= n { 1.0 } else { 0.0 };
    if !t.iterate(&phase1, n + m, tol) {
        unreachable!("phase-1 objective is bounded below by zero");
    }
    let residual: f64 = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n)
        .map(|(i, _)| t.rhs(i))
        .sum();
    if residual > tol {
        return Solved::Infeasible;
    }

    // Drive leftover artificials out of the basis; rows that cannot host a
    // structural pivot are redundant and get dropped.
    let mut drop_rows = Vec::new();
    for i in 0..m {
        if t.basis[i] < n {
            continue;
        }
        let col = (0..n).find(|&j| t.rows[i][j].abs() > tol);
        match col {
            Some(j) => t.pivot(i, j),
            None => drop_rows.push(i),
        }
    }
    for &i in drop_rows.iter().rev() {
        t.rows.remove(i);
        t.basis.remove(i);
    }

    // Phase 2: only structural columns may enter.
    let objective = program.objective.clone();
    let cost = move |j: usize| if j < n { objective[j] } else { 0.0 };
    if !t.iterate(&cost, n, tol) {
        return Solved::Unbounded;
    }

    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rhs(i);
        }
    }
    let value = program
        .objective
        .iter()
        .zip(&x)
        .map(|(c, v)| c * v)
        .sum::<f64>();

    let mut alternative = false;
    for j in 0..n {
        if t.basis.contains(&j) {
            continue;
        }
        if t.reduced_cost(&cost, j).abs() > tol {
            continue;
        }
        if let Some(twin) = program.twins[j] {
            if t.basis.contains(&twin) {
                continue;
            }
        }
        // A missing blocking row is an unbounded ray along the optimal
        // face, which is also an alternative optimum.
        if t.max_step(j, tol).is_none_or(|s| s > tol) {
            alternative = true;
            break;
        }
    }

    Solved::Optimal(Solution {
        x,
        value,
        alternative_optimum: alternative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    #[test]
    fn solves_small_standard_form() {
        // min -x0 - 2 x1  s.t.  x0 + x1 + s0 = 4, x1 + s1 = 3, x >= 0
        let mut p = Program::new(4);
        p.objective = vec![-1.0, -2.0, 0.0, 0.0];
        p.push_row(vec![1.0, 1.0, 1.0, 0.0], 4.0);
        p.push_row(vec![0.0, 1.0, 0.0, 1.0], 3.0);
        match solve(&p, TOL) {
            Solved::Optimal(s) => {
                assert!((s.value + 7.0).abs() < 1e-12);
                assert!((s.x[0] - 1.0).abs() < 1e-12);
                assert!((s.x[1] - 3.0).abs() < 1e-12);
            }
            _ => panic!("expected optimum"),
        }
    }

    #[test]
    fn detects_infeasible_system() {
        // x0 = 1 and x0 = 2 cannot both hold.
        let mut p = Program::new(1);
        p.push_row(vec![1.0], 1.0);
        p.push_row(vec![1.0], 2.0);
        assert!(matches!(solve(&p, TOL), Solved::Infeasible));
    }

    #[test]
    fn detects_unbounded_objective() {
        // min -(x0 - x1) with x0 - x1 free via split and one loose row.
        let mut p = Program::new(3);
        p.objective = vec![-1.0, 1.0, 0.0];
        p.mark_twins(0, 1);
        p.push_row(vec![1.0, -1.0, -1.0], 0.0); // x0 - x1 - s = 0
        assert!(matches!(solve(&p, TOL), Solved::Unbounded));
    }

    #[test]
    fn handles_redundant_rows() {
        let mut p = Program::new(2);
        p.objective = vec![1.0, 0.0];
        p.push_row(vec![1.0, 1.0], 2.0);
        p.push_row(vec![2.0, 2.0], 4.0); // duplicate of the first
        match solve(&p, TOL) {
            Solved::Optimal(s) => assert!(s.value.abs() < 1e-12),
            _ => panic!("expected optimum"),
        }
    }

    #[test]
    fn negative_rhs_rows_are_normalized() {
        // -x0 = -3  =>  x0 = 3
        let mut p = Program::new(1);
        p.objective = vec![1.0];
        p.push_row(vec![-1.0], -3.0);
        match solve(&p, TOL) {
            Solved::Optimal(s) => assert!((s.x[0] - 3.0).abs() < 1e-12),
            _ => panic!("expected optimum"),
        }
    }
}
