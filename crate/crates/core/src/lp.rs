//! Revised simplex for maximization problems with few rows and (possibly
//! very) many columns.
//!
//! Columns are never stored by the solver: a [`ColumnSource`] materializes a
//! column on request and prices all columns against the current duals, which
//! lets structured problems generate their best column without a full scan.
//!
//! Pivoting rules: the entering column has the largest reduced cost (ties go
//! to the smallest column index; slack columns come after structural ones);
//! the leaving row is chosen by the lexicographic minimum-ratio rule on
//! `[x_B | B^-1] / alpha`, which rules out cycling. Phase one drives
//! artificial variables out; artificials left basic at zero are pinned at
//! zero in phase two.

use alloc::vec;
use alloc::vec::Vec;

/// Tied leaving rows must pivot on at least this fraction of the largest
/// tied pivot element.
const STABLE_PIVOT_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn le(rhs: f64) -> Self {
        Constraint {
            sense: Sense::Le,
            rhs,
        }
    }

    pub fn ge(rhs: f64) -> Self {
        Constraint {
            sense: Sense::Ge,
            rhs,
        }
    }

    pub fn eq(rhs: f64) -> Self {
        Constraint {
            sense: Sense::Eq,
            rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("pivot cap of {cap} reached without convergence")]
    PivotCap { cap: usize },
    #[error(
        "basis became numerically singular after {pivots} pivots; perturb the problem and retry"
    )]
    Singular { pivots: usize },
    #[error("problem is infeasible (phase-one residual {residual:e})")]
    Infeasible { residual: f64 },
    #[error("objective is unbounded")]
    Unbounded,
    #[error("final solution violates a constraint by {residual:e}")]
    Residual { residual: f64 },
    #[error("column source reports {found} rows, constraints list {expected}")]
    RowMismatch { expected: usize, found: usize },
}

/// Supplies the columns of `max c.x  s.t.  A x (sense) rhs, x >= 0`.
pub trait ColumnSource {
    fn num_rows(&self) -> usize;

    fn num_columns(&self) -> usize;

    /// Writes column `j` of `A` into `coeffs` and returns `c_j`.
    fn column(&self, j: usize, coeffs: &mut [f64]) -> f64;

    /// Column maximizing `objective_weight * c_j - duals . a_j`, ties broken
    /// towards the smallest index. The default scans every column.
    fn price(&self, duals: &[f64], objective_weight: f64) -> Option<(usize, f64)> {
        let mut buf = vec![0.0; self.num_rows()];
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.num_columns() {
            let c = self.column(j, &mut buf);
            let d = objective_weight * c - dot(duals, &buf);
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((j, d));
            }
        }
        best
    }
}

/// Explicit columns, for small problems.
#[derive(Debug, Clone, Default)]
pub struct DenseColumns {
    rows: usize,
    costs: Vec<f64>,
    columns: Vec<Vec<f64>>,
}

impl DenseColumns {
    pub fn new(rows: usize) -> Self {
        DenseColumns {
            rows,
            ..Default::default()
        }
    }

    pub fn push(&mut self, cost: f64, coeffs: Vec<f64>) -> usize {
        assert_eq!(coeffs.len(), self.rows, "column length");
        self.costs.push(cost);
        self.columns.push(coeffs);
        self.costs.len() - 1
    }
}

impl ColumnSource for DenseColumns {
    fn num_rows(&self) -> usize {
        self.rows
    }

    fn num_columns(&self) -> usize {
        self.costs.len()
    }

    fn column(&self, j: usize, coeffs: &mut [f64]) -> f64 {
        coeffs.copy_from_slice(&self.columns[j]);
        self.costs[j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOptions {
    pub pivot_cap: usize,
    pub feasibility_tol: f64,
    /// Reduced costs at or below this are treated as non-improving.
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub refactor_every: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            pivot_cap: 1_000_000,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-10,
            refactor_every: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub optimum: f64,
    /// Nonzero structural variables `(column, value)`, by column index.
    pub solution: Vec<(usize, f64)>,
    pub pivots: usize,
    pub phase_one_pivots: usize,
    /// Dual value of each constraint (sign convention of the input rows).
    pub duals: Vec<f64>,
    /// `A x` for each constraint.
    pub row_activity: Vec<f64>,
    /// Largest constraint violation of the returned point.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Col(usize),
    Slack(usize),
    Art(usize),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Simplex<'a, S: ColumnSource + ?Sized> {
    src: &'a S,
    opts: LpOptions,
    m: usize,
    // +1 or -1 so that the normalized rhs is nonnegative
    sign: Vec<f64>,
    // coefficient of the slack in its (normalized) row; 0 for equalities
    slack_coef: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<Var>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    pivots: usize,
    since_refactor: usize,
    col_buf: Vec<f64>,
}

impl<'a, S: ColumnSource + ?Sized> Simplex<'a, S> {
    fn new(rows: &[Constraint], src: &'a S, opts: LpOptions) -> Self {
        let m = rows.len();
        let mut sign = vec![1.0; m];
        let mut slack_coef = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        let mut basis = Vec::with_capacity(m);
        for (r, row) in rows.iter().enumerate() {
            let s = if row.rhs < 0.0 { -1.0 } else { 1.0 };
            sign[r] = s;
            rhs[r] = s * row.rhs;
            let sense = match (row.sense, s < 0.0) {
                (Sense::Le, true) => Sense::Ge,
                (Sense::Ge, true) => Sense::Le,
                (sense, _) => sense,
            };
            match sense {
                Sense::Le => {
                    slack_coef[r] = 1.0;
                    basis.push(Var::Slack(r));
                }
                Sense::Ge => {
                    slack_coef[r] = -1.0;
                    basis.push(Var::Art(r));
                }
                Sense::Eq => basis.push(Var::Art(r)),
            }
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        Simplex {
            src,
            opts,
            m,
            sign,
            slack_coef,
            xb: rhs.clone(),
            rhs,
            basis,
            binv,
            pivots: 0,
            since_refactor: 0,
            col_buf: vec![0.0; m],
        }
    }

    /// Normalized column of `v` into `out`; returns its phase-two cost.
    fn column_of(&mut self, v: Var, out: &mut [f64]) -> f64 {
        match v {
            Var::Col(j) => {
                let c = self.src.column(j, &mut self.col_buf);
                for r in 0..self.m {
                    out[r] = self.sign[r] * self.col_buf[r];
                }
                c
            }
            Var::Slack(r) | Var::Art(r) => {
                out.iter_mut().for_each(|o| *o = 0.0);
                out[r] = if let Var::Slack(_) = v {
                    self.slack_coef[r]
                } else {
                    1.0
                };
                0.0
            }
        }
    }

    fn cost(&mut self, v: Var, phase_one: bool) -> f64 {
        match (v, phase_one) {
            (Var::Art(_), true) => -1.0,
            (Var::Art(_), false) | (Var::Slack(_), _) | (Var::Col(_), true) => 0.0,
            (Var::Col(j), false) => self.src.column(j, &mut self.col_buf),
        }
    }

    /// Normalized-row duals `y = c_B^T B^-1`.
    fn duals(&mut self, phase_one: bool) -> Vec<f64> {
        let m = self.m;
        let cb: Vec<f64> = (0..m)
            .map(|k| self.cost(self.basis[k], phase_one))
            .collect();
        let mut y = vec![0.0; m];
        for (k, &c) in cb.iter().enumerate() {
            if c != 0.0 {
                for i in 0..m {
                    y[i] += c * self.binv[k * m + i];
                }
            }
        }
        y
    }

    fn entering(&mut self, phase_one: bool) -> Option<(Var, f64)> {
        let y = self.duals(phase_one);
        let duals_in: Vec<f64> = y.iter().zip(&self.sign).map(|(a, s)| a * s).collect();
        let weight = if phase_one { 0.0 } else { 1.0 };
        let mut best: Option<(Var, f64)> = self
            .src
            .price(&duals_in, weight)
            .map(|(j, d)| (Var::Col(j), d));
        for r in 0..self.m {
            if self.slack_coef[r] == 0.0 || self.basis.contains(&Var::Slack(r)) {
                continue;
            }
            let d = -y[r] * self.slack_coef[r];
            if best.is_none_or(|(_, b)| d > b) {
                best = Some((Var::Slack(r), d));
            }
        }
        best.filter(|&(v, d)| d > self.opts.optimality_tol && !self.basis.contains(&v))
    }

    fn leaving(&self, alpha: &[f64], phase_one: bool) -> Option<usize> {
        let m = self.m;
        let tol = self.opts.pivot_tol;
        let mut candidates: Vec<(usize, f64)> = Vec::new();
        for i in 0..m {
            if alpha[i] > tol {
                candidates.push((i, self.xb[i].max(0.0) / alpha[i]));
            } else if !phase_one && alpha[i] < -tol && matches!(self.basis[i], Var::Art(_)) {
                candidates.push((i, 0.0));
            }
        }
        let min = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        if !min.is_finite() {
            return None;
        }
        let ties: Vec<usize> = candidates
            .iter()
            .filter(|c| c.1 <= min + 1e-12 * (1.0 + min))
            .map(|c| c.0)
            .collect();
        // small pivots among tied rows breed ill-conditioned bases
        let largest = ties.iter().map(|&i| alpha[i].abs()).fold(0.0, f64::max);
        let ties = ties
            .into_iter()
            .filter(|&i| alpha[i].abs() >= STABLE_PIVOT_RATIO * largest);
        // lexicographic rule on rows of B^-1 scaled by 1/|alpha|
        ties.reduce(|best, i| {
            for k in 0..m {
                let u = self.binv[best * m + k] / alpha[best].abs();
                let v = self.binv[i * m + k] / alpha[i].abs();
                if (u - v).abs() > 1e-12 {
                    return if v < u { i } else { best };
                }
            }
            best.min(i)
        })
    }

    fn pivot(&mut self, r: usize, alpha: &[f64], entering: Var) -> Result<(), LpError> {
        let m = self.m;
        let p = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] /= p;
        }
        self.xb[r] /= p;
        for i in 0..m {
            if i == r || alpha[i] == 0.0 {
                continue;
            }
            let f = alpha[i];
            for k in 0..m {
                self.binv[i * m + k] -= f * self.binv[r * m + k];
            }
            self.xb[i] -= f * self.xb[r];
        }
        for v in self.xb.iter_mut() {
            if *v < 0.0 && *v > -self.opts.feasibility_tol {
                *v = 0.0;
            }
        }
        self.basis[r] = entering;
        self.pivots += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.opts.refactor_every {
            self.refactor()?;
        }
        Ok(())
    }

    /// Recomputes `B^-1` and `x_B` from scratch (Gauss-Jordan, partial pivoting).
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for k in 0..m {
            self.column_of(self.basis[k], &mut col);
            for i in 0..m {
                a[i * m + k] = col[i];
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let piv = (c..m)
                .max_by(|&i, &j| a[i * m + c].abs().total_cmp(&a[j * m + c].abs()))
                .expect("nonempty range");
            if a[piv * m + c].abs() < 1e-12 {
                return Err(LpError::Singular {
                    pivots: self.pivots,
                });
            }
            if piv != c {
                for k in 0..m {
                    a.swap(piv * m + k, c * m + k);
                    inv.swap(piv * m + k, c * m + k);
                }
            }
            let p = a[c * m + c];
            for k in 0..m {
                a[c * m + k] /= p;
                inv[c * m + k] /= p;
            }
            for i in 0..m {
                if i != c {
                    let f = a[i * m + c];
                    if f != 0.0 {
                        for k in 0..m {
                            a[i * m + k] -= f * a[c * m + k];
                            inv[i * m + k] -= f * inv[c * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        for i in 0..m {
            let v = dot(&self.binv[i * m..(i + 1) * m], &self.rhs);
            self.xb[i] = if v < 0.0 && v > -self.opts.feasibility_tol {
                0.0
            } else {
                v
            };
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn run(&mut self, phase_one: bool) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m];
        let mut alpha = vec![0.0; m];
        while let Some((entering, _)) = self.entering(phase_one) {
            if self.pivots >= self.opts.pivot_cap {
                return Err(LpError::PivotCap {
                    cap: self.opts.pivot_cap,
                });
            }
            self.column_of(entering, &mut a);
            for i in 0..m {
                alpha[i] = dot(&self.binv[i * m..(i + 1) * m], &a);
            }
            let r = self.leaving(&alpha, phase_one).ok_or(LpError::Unbounded)?;
            self.pivot(r, &alpha, entering)?;
        }
        Ok(())
    }

    fn artificial_sum(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.xb)
            .filter(|(v, _)| matches!(v, Var::Art(_)))
            .map(|(_, x)| x.abs())
            .sum()
    }
}

/// Solves `max c.x  s.t.  A x (sense) rhs, x >= 0` for the columns of `src`.
///
/// The returned point is a basic solution, so at most `rows.len()`
/// structural variables are nonzero. If rounding drift leaves a singular or
/// infeasible basis, the solve is repeated once with `B^-1` rebuilt after
/// every pivot.
pub fn lp_solve<S: ColumnSource + ?Sized>(
    rows: &[Constraint],
    src: &S,
    opts: LpOptions,
) -> Result<LpSolution, LpError> {
    if src.num_rows() != rows.len() {
        return Err(LpError::RowMismatch {
            expected: rows.len(),
            found: src.num_rows(),
        });
    }
    match solve_once(rows, src, opts) {
        Err(LpError::Singular { .. } | LpError::Residual { .. }) if opts.refactor_every > 1 => {
            let strict = LpOptions {
                refactor_every: 1,
                ..opts
            };
            solve_once(rows, src, strict)
        }
        r => r,
    }
}

fn solve_once<S: ColumnSource + ?Sized>(
    rows: &[Constraint],
    src: &S,
    opts: LpOptions,
) -> Result<LpSolution, LpError> {
    let mut sx = Simplex::new(rows, src, opts);
    let needs_phase_one = sx.basis.iter().any(|v| matches!(v, Var::Art(_)));
    if needs_phase_one {
        sx.run(true)?;
        sx.refactor()?;
        let residual = sx.artificial_sum();
        if residual > opts.feasibility_tol {
            return Err(LpError::Infeasible { residual });
        }
    }
    let phase_one_pivots = sx.pivots;
    sx.run(false)?;
    sx.refactor()?;

    let m = sx.m;
    let mut solution: Vec<(usize, f64)> = sx
        .basis
        .iter()
        .zip(&sx.xb)
        .filter_map(|(v, &x)| match v {
            Var::Col(j) if x > 0.0 => Some((*j, x)),
            _ => None,
        })
        .collect();
    solution.sort_by_key(|s| s.0);

    let mut optimum = 0.0;
    let mut activity = vec![0.0; m];
    let mut buf = vec![0.0; m];
    for &(j, x) in &solution {
        optimum += x * src.column(j, &mut buf);
        for (act, a) in activity.iter_mut().zip(&buf) {
            *act += a * x;
        }
    }
    let residual = rows
        .iter()
        .zip(&activity)
        .map(|(row, &act)| match row.sense {
            Sense::Eq => (act - row.rhs).abs(),
            Sense::Le => (act - row.rhs).max(0.0),
            Sense::Ge => (row.rhs - act).max(0.0),
        })
        .fold(0.0, f64::max);
    if residual > opts.feasibility_tol {
        return Err(LpError::Residual { residual });
    }
    let y = sx.duals(false);
    let duals = y.iter().zip(&sx.sign).map(|(a, s)| a * s).collect();
    Ok(LpSolution {
        optimum,
        solution,
        pivots: sx.pivots,
        phase_one_pivots,
        duals,
        row_activity: activity,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: usize, cols: &[(f64, &[f64])]) -> DenseColumns {
        let mut d = DenseColumns::new(rows);
        for (c, a) in cols {
            d.push(*c, a.to_vec());
        }
        d
    }

    #[test]
    fn one_dimensional() {
        let src = dense(1, &[(1.0, &[1.0])]);
        let s = lp_solve(&[Constraint::le(3.0)], &src, LpOptions::default()).unwrap();
        assert_eq!(s.optimum, 3.0);
        assert_eq!(s.solution, vec![(0, 3.0)]);
    }

    #[test]
    fn two_by_two_assignment() {
        // x_ij for (0,0), (0,1), (1,0), (1,1); rows: worker 0, worker 1, job 0, job 1.
        let profit = [4.0, 1.0, 2.0, 3.0];
        let mut d = DenseColumns::new(4);
        for (k, &p) in profit.iter().enumerate() {
            let (i, j) = (k / 2, k % 2);
            let mut a = vec![0.0; 4];
            a[i] = 1.0;
            a[2 + j] = 1.0;
            d.push(p, a);
        }
        let rows = [Constraint::eq(1.0); 4];
        let s = lp_solve(&rows, &d, LpOptions::default()).unwrap();
        assert!((s.optimum - 7.0).abs() < 1e-12);
        let x: Vec<usize> = s
            .solution
            .iter()
            .filter(|(_, v)| *v > 0.5)
            .map(|(j, _)| *j)
            .collect();
        assert_eq!(x, vec![0, 3]);
        assert!(s.solution.len() <= rows.len());
    }

    #[test]
    fn mixed_senses_and_negative_rhs() {
        // max x + y, x + y <= 4, x - y >= -2 (i.e. y <= x + 2), x >= 1, y <= 3
        let src = dense(
            4,
            &[(1.0, &[1.0, 1.0, 1.0, 0.0]), (1.0, &[1.0, -1.0, 0.0, 1.0])],
        );
        let rows = [
            Constraint::le(4.0),
            Constraint::ge(-2.0),
            Constraint::ge(1.0),
            Constraint::le(3.0),
        ];
        let s = lp_solve(&rows, &src, LpOptions::default()).unwrap();
        assert!((s.optimum - 4.0).abs() < 1e-12);
        assert!(s.residual <= 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let src = dense(2, &[(1.0, &[1.0, 1.0])]);
        let err = lp_solve(
            &[Constraint::le(1.0), Constraint::ge(2.0)],
            &src,
            LpOptions::default(),
        );
        assert!(matches!(err, Err(LpError::Infeasible { .. })));
        let src = dense(1, &[(1.0, &[-1.0])]);
        assert_eq!(
            lp_solve(&[Constraint::le(1.0)], &src, LpOptions::default()),
            Err(LpError::Unbounded)
        );
    }

    #[test]
    fn pivot_cap_is_reported() {
        let src = dense(1, &[(1.0, &[1.0])]);
        let opts = LpOptions {
            pivot_cap: 0,
            ..LpOptions::default()
        };
        assert_eq!(
            lp_solve(&[Constraint::le(3.0)], &src, opts),
            Err(LpError::PivotCap { cap: 0 })
        );
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's classic cycling example under the textbook rule.
        let src = dense(
            3,
            &[
                (0.75, &[0.25, 0.5, 0.0]),
                (-150.0, &[-60.0, -90.0, 0.0]),
                (0.02, &[-0.04, -0.02, 1.0]),
                (-6.0, &[9.0, 3.0, 0.0]),
            ],
        );
        let rows = [
            Constraint::le(0.0),
            Constraint::le(0.0),
            Constraint::le(1.0),
        ];
        let s = lp_solve(&rows, &src, LpOptions::default()).unwrap();
        assert!((s.optimum - 0.05).abs() < 1e-12, "{}", s.optimum);
    }

    #[test]
    fn redundant_equalities() {
        // Same row twice; one artificial stays basic at zero.
        let src = dense(2, &[(1.0, &[1.0, 1.0]), (2.0, &[1.0, 1.0])]);
        let s = lp_solve(
            &[Constraint::eq(1.0), Constraint::eq(1.0)],
            &src,
            LpOptions::default(),
        )
        .unwrap();
        assert!((s.optimum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn duals_price_the_rhs() {
        let src = dense(2, &[(3.0, &[1.0, 0.0]), (2.0, &[0.0, 1.0])]);
        let s = lp_solve(
            &[Constraint::le(1.0), Constraint::le(5.0)],
            &src,
            LpOptions::default(),
        )
        .unwrap();
        assert_eq!(s.duals, vec![3.0, 2.0]);
        assert_eq!(s.row_activity, vec![1.0, 5.0]);
    }
}
