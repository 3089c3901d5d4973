//! Dense bounded primal simplex for restricted master problems.
//!
//! Every row becomes an equality with a slack (`>=`: `a x - s = b`,
//! `<=`: `a x + s = b`, `=`: slack fixed at 0). Phase 1 starts from an
//! all-artificial basis and minimizes the artificial sum; phase 2 fixes the
//! artificials at zero and minimizes the true objective. The basis inverse is
//! kept explicitly, updated by row operations and recomputed every
//! [`REFACTOR_INTERVAL`] pivots.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_INTERVAL: usize = 100;
const BLAND_AFTER: usize = 5_000;
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Ge,
    Eq,
    Le,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Ge => ">=",
            Sense::Eq => "=",
            Sense::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("row index {0} out of range")]
    DimensionMismatch(usize),
    #[error("column index {0} out of range")]
    InvalidIndex(usize),
    #[error("invalid bound {0}")]
    InvalidBound(f64),
    #[error("numerical failure: {0}")]
    NumericalFailure(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    sense: Sense,
    rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Col {
    cost: f64,
    coeffs: Vec<(usize, f64)>,
    upper: f64,
}

/// `min c x` subject to sensed rows and `0 <= x <= u`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    rows: Vec<Row>,
    cols: Vec<Col>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Column values (empty unless optimal).
    pub primal: Vec<f64>,
    /// One dual per row (empty unless optimal).
    pub duals: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum VarId {
    Col(usize),
    Slack(usize),
    Art(usize),
}

/// A basis that can warm start a later solve, also after columns were added.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    rows: usize,
    basic: Vec<VarId>,
    at_upper: Vec<usize>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_row(&mut self, sense: Sense, rhs: f64) -> usize {
        self.rows.push(Row { sense, rhs });
        self.rows.len() - 1
    }

    /// Appends a column with lower bound 0 and no upper bound.
    pub fn add_column(&mut self, cost: f64, coeffs: &[(usize, f64)]) -> Result<usize, LpError> {
        if let Some(&(r, _)) = coeffs.iter().find(|(r, _)| *r >= self.rows.len()) {
            return Err(LpError::DimensionMismatch(r));
        }
        let mut coeffs: Vec<(usize, f64)> = coeffs.iter().copied().filter(|c| c.1 != 0.0).collect();
        coeffs.sort_by_key(|c| c.0);
        self.cols.push(Col {
            cost,
            coeffs,
            upper: f64::INFINITY,
        });
        Ok(self.cols.len() - 1)
    }

    pub fn set_column_upper_bound(&mut self, index: usize, ub: f64) -> Result<(), LpError> {
        if ub.is_nan() || ub < 0.0 {
            return Err(LpError::InvalidBound(ub));
        }
        self.cols
            .get_mut(index)
            .ok_or(LpError::InvalidIndex(index))?
            .upper = ub;
        Ok(())
    }

    pub fn column_upper_bound(&self, index: usize) -> f64 {
        self.cols[index].upper
    }

    pub fn column_cost(&self, index: usize) -> f64 {
        self.cols[index].cost
    }

    pub fn column_coeffs(&self, index: usize) -> &[(usize, f64)] {
        &self.cols[index].coeffs
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row_sense(&self, row: usize) -> Sense {
        self.rows[row].sense
    }

    pub fn row_rhs(&self, row: usize) -> f64 {
        self.rows[row].rhs
    }

    /// Plain-text dump: the objective line, then one line per row with its
    /// dense coefficients, sense and right-hand side.
    pub fn dump(&self) -> String {
        let mut out = String::from("min");
        for c in &self.cols {
            let _ = write!(out, " {}", c.cost);
        }
        out.push('\n');
        let mut dense = vec![vec![0.0; self.cols.len()]; self.rows.len()];
        for (j, c) in self.cols.iter().enumerate() {
            for &(i, a) in &c.coeffs {
                dense[i][j] = a;
            }
        }
        for (row, coeffs) in self.rows.iter().zip(dense) {
            for a in coeffs {
                let _ = write!(out, "{a} ");
            }
            let _ = writeln!(out, "{} {}", row.sense.symbol(), row.rhs);
        }
        out
    }

    /// Solves the LP, warm starting from `warm` when it is still primal
    /// feasible for the current data.
    pub fn solve(&self, warm: Option<&Basis>) -> Result<(LpSolution, Basis), LpError> {
        if let Some(basis) = warm {
            if basis.rows == self.rows.len() {
                let mut s = Simplex::new(self);
                if s.load(basis) {
                    if let Ok(out) = s.run_phase2() {
                        return Ok(out);
                    }
                }
            }
        }
        Simplex::new(self).cold()
    }

    /// Objective value `c x`.
    pub fn objective_of(&self, x: &[f64]) -> f64 {
        self.cols.iter().zip(x).map(|(c, v)| c.cost * v).sum()
    }

    /// Row activities `A x`.
    pub fn activities(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.rows.len()];
        for (c, v) in self.cols.iter().zip(x) {
            for &(i, a) in &c.coeffs {
                act[i] += a * v;
            }
        }
        act
    }

    /// Reduced cost `c_j - a_j . y`.
    pub fn reduced_cost(&self, j: usize, duals: &[f64]) -> f64 {
        let c = &self.cols[j];
        c.cost - c.coeffs.iter().map(|&(i, a)| a * duals[i]).sum::<f64>()
    }
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    n: usize,
    cost: Vec<f64>,
    upper: Vec<f64>,
    basis: Vec<usize>,
    pos: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    art_sign: Vec<f64>,
    since_refactor: usize,
    degenerate_run: usize,
    iterations: usize,
    phase1: bool,
}

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let m = lp.rows.len();
        let n = lp.cols.len();
        let total = n + 2 * m;
        let mut upper = Vec::with_capacity(total);
        upper.extend(lp.cols.iter().map(|c| c.upper));
        upper.extend(lp.rows.iter().map(|r| {
            if r.sense == Sense::Eq {
                0.0
            } else {
                f64::INFINITY
            }
        }));
        upper.extend(std::iter::repeat(0.0).take(m));
        let art_sign = lp
            .rows
            .iter()
            .map(|r| if r.rhs < 0.0 { -1.0 } else { 1.0 })
            .collect();
        Simplex {
            lp,
            m,
            n,
            cost: vec![0.0; total],
            upper,
            basis: Vec::new(),
            pos: vec![None; total],
            at_upper: vec![false; total],
            binv: Vec::new(),
            xb: vec![0.0; m],
            art_sign,
            since_refactor: 0,
            degenerate_run: 0,
            iterations: 0,
            phase1: false,
        }
    }

    fn index(&self, v: VarId) -> usize {
        match v {
            VarId::Col(j) => j,
            VarId::Slack(i) => self.n + i,
            VarId::Art(i) => self.n + self.m + i,
        }
    }

    fn var(&self, j: usize) -> VarId {
        if j < self.n {
            VarId::Col(j)
        } else if j < self.n + self.m {
            VarId::Slack(j - self.n)
        } else {
            VarId::Art(j - self.n - self.m)
        }
    }

    /// Calls `f(row, coeff)` for every nonzero of variable `j`.
    fn for_each_coeff(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        match self.var(j) {
            VarId::Col(c) => {
                for &(i, a) in &self.lp.cols[c].coeffs {
                    f(i, a);
                }
            }
            VarId::Slack(i) => f(i, if self.lp.rows[i].sense == Sense::Ge { -1.0 } else { 1.0 }),
            VarId::Art(i) => f(i, self.art_sign[i]),
        }
    }

    fn value_nonbasic(&self, j: usize) -> f64 {
        if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }

    fn set_phase2_costs(&mut self) {
        self.phase1 = false;
        for c in self.cost.iter_mut() {
            *c = 0.0;
        }
        for (j, col) in self.lp.cols.iter().enumerate() {
            self.cost[j] = col.cost;
        }
    }

    fn cold(mut self) -> Result<(LpSolution, Basis), LpError> {
        let (m, n) = (self.m, self.n);
        self.phase1 = true;
        for i in 0..m {
            self.cost[n + m + i] = 1.0;
            self.upper[n + m + i] = f64::INFINITY;
        }
        self.basis = (0..m).map(|i| n + m + i).collect();
        for (i, &j) in self.basis.iter().enumerate() {
            self.pos[j] = Some(i);
        }
        self.refactor()?;
        loop {
            match self.iterate()? {
                Step::Continue => {}
                Step::Optimal => break,
                Step::Unbounded => return Err(LpError::NumericalFailure("phase 1 unbounded")),
            }
        }
        let infeasibility: f64 = (0..m)
            .filter_map(|i| self.pos[n + m + i].map(|r| self.xb[r]))
            .sum();
        let scale = 1.0 + self.lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > 1e-8 * scale {
            let basis = self.basis_snapshot();
            return Ok((
                LpSolution {
                    status: LpStatus::Infeasible,
                    primal: Vec::new(),
                    duals: Vec::new(),
                    objective: f64::INFINITY,
                    iterations: self.iterations,
                },
                basis,
            ));
        }
        for i in 0..m {
            self.upper[n + m + i] = 0.0;
            self.at_upper[n + m + i] = false;
        }
        self.run_phase2()
    }

    /// Installs a warm basis; returns `false` when it is unusable.
    fn load(&mut self, basis: &Basis) -> bool {
        let mut seen = vec![false; self.pos.len()];
        self.basis.clear();
        for &v in &basis.basic {
            let j = self.index(v);
            let valid = match v {
                VarId::Col(c) => c < self.n,
                VarId::Slack(i) | VarId::Art(i) => i < self.m,
            };
            if !valid || seen[j] {
                return false;
            }
            seen[j] = true;
            self.pos[j] = Some(self.basis.len());
            self.basis.push(j);
        }
        for &c in &basis.at_upper {
            if c < self.n && self.pos[c].is_none() && self.upper[c].is_finite() && self.upper[c] > 0.0 {
                self.at_upper[c] = true;
            }
        }
        if self.refactor().is_err() {
            return false;
        }
        self.basis.iter().zip(&self.xb).all(|(&j, &x)| {
            x >= -FEASIBILITY_TOL && x <= self.upper[j] + FEASIBILITY_TOL
        })
    }

    fn run_phase2(mut self) -> Result<(LpSolution, Basis), LpError> {
        self.set_phase2_costs();
        self.degenerate_run = 0;
        loop {
            match self.iterate()? {
                Step::Continue => {}
                Step::Optimal => break,
                Step::Unbounded => {
                    let basis = self.basis_snapshot();
                    return Ok((
                        LpSolution {
                            status: LpStatus::Unbounded,
                            primal: Vec::new(),
                            duals: Vec::new(),
                            objective: f64::NEG_INFINITY,
                            iterations: self.iterations,
                        },
                        basis,
                    ));
                }
            }
        }
        // a final refactorization keeps the reported values clean
        self.refactor()?;
        let mut primal = vec![0.0; self.n];
        for (j, x) in primal.iter_mut().enumerate() {
            *x = match self.pos[j] {
                Some(r) => self.xb[r].clamp(0.0, self.upper[j]),
                None => self.value_nonbasic(j),
            };
        }
        let duals = self.duals();
        let objective = self.lp.objective_of(&primal);
        let basis = self.basis_snapshot();
        Ok((
            LpSolution {
                status: LpStatus::Optimal,
                primal,
                duals,
                objective,
                iterations: self.iterations,
            },
            basis,
        ))
    }

    fn basis_snapshot(&self) -> Basis {
        Basis {
            rows: self.m,
            basic: self.basis.iter().map(|&j| self.var(j)).collect(),
            at_upper: (0..self.n).filter(|&j| self.at_upper[j]).collect(),
        }
    }

    /// Recomputes the basis inverse and basic values from scratch.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (r, &j) in self.basis.iter().enumerate() {
            self.for_each_coeff(j, |i, v| a[i * m + r] = v);
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
                .expect("nonempty range");
            if a[piv * m + col].abs() < SINGULAR_TOL {
                return Err(LpError::NumericalFailure("singular basis"));
            }
            if piv != col {
                for k in 0..m {
                    a.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let p = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= p;
                inv[col * m + k] /= p;
            }
            for i in 0..m {
                if i != col {
                    let f = a[i * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            a[i * m + k] -= f * a[col * m + k];
                            inv[i * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        self.compute_xb();
        Ok(())
    }

    fn compute_xb(&mut self) {
        let m = self.m;
        let mut rhs: Vec<f64> = self.lp.rows.iter().map(|r| r.rhs).collect();
        for j in 0..self.pos.len() {
            if self.pos[j].is_none() && self.at_upper[j] {
                let u = self.upper[j];
                self.for_each_coeff(j, |i, a| rhs[i] -= a * u);
            }
        }
        for r in 0..m {
            let row = &self.binv[r * m..(r + 1) * m];
            self.xb[r] = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
        }
    }

    fn duals(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &j) in self.basis.iter().enumerate() {
            let c = self.cost[j];
            if c != 0.0 {
                for (k, yk) in y.iter_mut().enumerate() {
                    *yk += c * self.binv[r * m + k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost[j];
        self.for_each_coeff(j, |i, a| d -= a * y[i]);
        d
    }

    fn iterate(&mut self) -> Result<Step, LpError> {
        self.iterations += 1;
        if self.iterations > 200_000 + 50 * (self.n + 2 * self.m) {
            return Err(LpError::NumericalFailure("iteration limit"));
        }
        let bland = self.degenerate_run >= BLAND_AFTER;
        let y = self.duals();
        let mut entering: Option<(usize, f64)> = None;
        let art_start = self.n + self.m;
        for j in 0..self.pos.len() {
            if self.pos[j].is_some() || (j >= art_start) || self.upper[j] == 0.0 {
                continue;
            }
            let d = self.reduced_cost(j, &y);
            let gain = if self.at_upper[j] { d } else { -d };
            if gain > OPTIMALITY_TOL {
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| gain > best.abs()) {
                    entering = Some((j, d));
                }
            }
        }
        let Some((q, _)) = entering else {
            return Ok(Step::Optimal);
        };
        let dir = if self.at_upper[q] { -1.0 } else { 1.0 };

        let m = self.m;
        let mut col = vec![0.0; m];
        self.for_each_coeff(q, |i, a| col[i] = a);
        let alpha: Vec<f64> = (0..m)
            .map(|r| {
                self.binv[r * m..(r + 1) * m]
                    .iter()
                    .zip(&col)
                    .map(|(b, a)| b * a)
                    .sum()
            })
            .collect();

        // ratio test: x_B changes by -dir * theta * alpha
        let mut theta = self.upper[q];
        let mut leave: Option<(usize, bool)> = None;
        let mut leave_mag = 0.0;
        for r in 0..m {
            let rate = dir * alpha[r];
            let j = self.basis[r];
            let (limit, to_upper) = if rate > PIVOT_TOL {
                ((self.xb[r]).max(0.0) / rate, false)
            } else if rate < -PIVOT_TOL && self.upper[j].is_finite() {
                ((self.upper[j] - self.xb[r]).max(0.0) / -rate, true)
            } else {
                continue;
            };
            let better = match leave {
                None => limit < theta,
                Some((lr, _)) => {
                    if limit < theta - 1e-12 {
                        true
                    } else if limit <= theta + 1e-12 {
                        if bland {
                            self.basis[r] < self.basis[lr]
                        } else {
                            rate.abs() > leave_mag
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                theta = limit;
                leave = Some((r, to_upper));
                leave_mag = rate.abs();
            }
        }
        if theta == f64::INFINITY {
            return Ok(Step::Unbounded);
        }
        if theta <= 1e-12 {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
        for r in 0..m {
            self.xb[r] -= dir * theta * alpha[r];
        }
        let entering_value = self.value_nonbasic(q) + dir * theta;
        match leave {
            None => {
                self.at_upper[q] = !self.at_upper[q];
            }
            Some((r, to_upper)) => {
                let out = self.basis[r];
                self.pos[out] = None;
                self.at_upper[out] = to_upper && self.upper[out] > 0.0;
                if self.phase1 && out >= art_start {
                    // artificials never re-enter
                    self.upper[out] = 0.0;
                    self.at_upper[out] = false;
                }
                self.basis[r] = q;
                self.pos[q] = Some(r);
                self.at_upper[q] = false;
                self.xb[r] = entering_value;
                let p = alpha[r];
                for k in 0..m {
                    self.binv[r * m + k] /= p;
                }
                for i in 0..m {
                    if i != r && alpha[i] != 0.0 {
                        let f = alpha[i];
                        for k in 0..m {
                            self.binv[i * m + k] -= f * self.binv[r * m + k];
                        }
                    }
                }
                self.since_refactor += 1;
                if self.since_refactor >= REFACTOR_INTERVAL {
                    self.refactor()?;
                }
            }
        }
        Ok(Step::Continue)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_covering_row() {
        let mut lp = LinearProgram::new();
        lp.add_row(Sense::Ge, 1.0);
        lp.add_column(1.0, &[(0, 1.0)]).unwrap();
        let (sol, _) = lp.solve(None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.primal[0] - 1.0).abs() < 1e-12);
        assert!((sol.duals[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        lp.add_row(Sense::Ge, 1.0);
        lp.add_column(0.0, &[(0, -1.0)]).unwrap();
        assert_eq!(lp.solve(None).unwrap().0.status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new();
        lp.add_column(-1.0, &[]).unwrap();
        assert_eq!(lp.solve(None).unwrap().0.status, LpStatus::Unbounded);
    }

    #[test]
    fn columns_and_bounds() {
        let mut lp = LinearProgram::new();
        lp.add_row(Sense::Ge, 1.0);
        lp.add_row(Sense::Ge, 1.0);
        lp.add_column(1.0, &[(0, 1.0)]).unwrap();
        lp.add_column(1.0, &[(1, 1.0)]).unwrap();
        let (sol, basis) = lp.solve(None).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        // a column covering both rows has reduced cost 1.5 - 2 < 0
        let both = lp.add_column(1.5, &[(0, 1.0), (1, 1.0)]).unwrap();
        let (sol, basis) = lp.solve(Some(&basis)).unwrap();
        assert!((sol.objective - 1.5).abs() < 1e-9);
        // a duplicate column changes nothing
        lp.add_column(1.5, &[(0, 1.0), (1, 1.0)]).unwrap();
        let (dup, _) = lp.solve(Some(&basis)).unwrap();
        assert!((dup.objective - 1.5).abs() < 1e-9);
        lp.set_column_upper_bound(both, 0.0).unwrap();
        lp.set_column_upper_bound(both + 1, 0.0).unwrap();
        let (sol, basis) = lp.solve(Some(&basis)).unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-9);
        assert_eq!(sol.primal[both], 0.0);
        lp.set_column_upper_bound(0, 0.0).unwrap();
        assert_eq!(lp.solve(Some(&basis)).unwrap().0.status, LpStatus::Infeasible);
        lp.set_column_upper_bound(0, f64::INFINITY).unwrap();
        assert!((lp.solve(None).unwrap().0.objective - 2.0).abs() < 1e-9);
        assert!(lp.set_column_upper_bound(99, 0.0).is_err());
        assert!(lp.add_column(1.0, &[(5, 1.0)]).is_err());
    }

    #[test]
    fn equality_and_less_equal_rows() {
        // min x + 2y  s.t. x + y = 3, x <= 2  -> x = 2, y = 1, obj 4
        let mut lp = LinearProgram::new();
        lp.add_row(Sense::Eq, 3.0);
        lp.add_row(Sense::Le, 2.0);
        lp.add_column(1.0, &[(0, 1.0), (1, 1.0)]).unwrap();
        lp.add_column(2.0, &[(0, 1.0)]).unwrap();
        let (sol, _) = lp.solve(None).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 4.0).abs() < 1e-9);
        assert!((sol.duals[0] - 2.0).abs() < 1e-9);
        assert!((sol.duals[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn dump_has_one_line_per_row() {
        let mut lp = LinearProgram::new();
        lp.add_row(Sense::Ge, 1.0);
        lp.add_row(Sense::Le, 4.0);
        lp.add_column(3.0, &[(0, 1.0), (1, 2.0)]).unwrap();
        let text = lp.dump();
        assert_eq!(text, "min 3\n1 >= 1\n2 <= 4\n");
    }
}
