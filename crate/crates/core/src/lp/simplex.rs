//! Dense bounded-variable primal simplex.
//!
//! Two phases over a full tableau, with nonbasic variables resting at either
//! bound. Pricing is Dantzig's rule until too many degenerate pivots pile up,
//! after which Bland's rule takes over for the rest of the phase. The final
//! basis is refactored with an LU decomposition to clean up primal values
//! and to read off row duals. Returned points are always basic.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A maximization problem `max c'x  s.t.  rows, lo <= x <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    /// `n_vars` variables with zero objective and bounds `[0, inf)`.
    pub fn new(n_vars: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n_vars],
            constraints: Vec::new(),
            lower: vec![0.0; n_vars],
            upper: vec![f64::INFINITY; n_vars],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn set_objective(&mut self, j: usize, c: f64) {
        self.objective[j] = c;
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lower[j] = lo;
        self.upper[j] = hi;
    }

    /// Adds a row; repeated indices are summed. Returns the row index.
    pub fn add_constraint(&mut self, coeffs: &[(usize, f64)], relation: Relation, rhs: f64) -> usize {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        let mut sorted = coeffs.to_vec();
        sorted.sort_by_key(|&(j, _)| j);
        for (j, a) in sorted {
            assert!(j < self.n_vars(), "variable {j} out of range");
            match merged.last_mut() {
                Some((last, acc)) if *last == j => *acc += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.constraints.push(Constraint { coeffs: merged, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: &f64| x.is_finite();
        if !self.objective.iter().all(finite) {
            return Err(Error::InvalidInput("non-finite objective coefficient".into()));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() || !row.coeffs.iter().all(|(_, a)| a.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite data in row {i}")));
            }
        }
        for j in 0..self.n_vars() {
            if !self.lower[j].is_finite() {
                return Err(Error::InvalidInput(format!("variable {j} needs a finite lower bound")));
            }
            if self.upper[j] < self.lower[j] {
                return Err(Error::Infeasible);
            }
        }
        Ok(())
    }

    pub fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        self.constraints[i].coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.constraints.iter().enumerate() {
            let lhs = self.row_activity(i, x);
            let v = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &v) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        worst
    }

    /// Plain-text dump in a fixed layout:
    ///
    /// ```text
    /// MAXIMIZE <n_vars> <n_rows>
    /// OBJ <c_0> ... <c_{n-1}>
    /// ROW <i> <relation> <rhs> <j>:<a_ij> ...
    /// BOUND <j> <lo> <hi>
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "MAXIMIZE {} {}", self.n_vars(), self.n_constraints());
        out.push_str("OBJ");
        for c in &self.objective {
            let _ = write!(out, " {c:e}");
        }
        out.push('\n');
        for (i, row) in self.constraints.iter().enumerate() {
            let _ = write!(out, "ROW {i} {} {:e}", row.relation.symbol(), row.rhs);
            for (j, a) in &row.coeffs {
                let _ = write!(out, " {j}:{a:e}");
            }
            out.push('\n');
        }
        for j in 0..self.n_vars() {
            let _ = writeln!(out, "BOUND {j} {:e} {:e}", self.lower[j], self.upper[j]);
        }
        out
    }

    pub fn solve(&self) -> Result<LpSolution> {
        self.solve_with(&SimplexSettings::default())
    }

    pub fn solve_with(&self, settings: &SimplexSettings) -> Result<LpSolution> {
        self.validate()?;
        solve(self, settings)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSettings {
    /// Smallest tableau entry accepted as a pivot.
    pub pivot_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub opt_tol: f64,
    /// Phase-one infeasibility threshold (scaled by the rhs magnitude).
    pub feas_tol: f64,
    pub max_iter: usize,
    /// Fix columns that can never help and drop rows implied by bounds.
    pub presolve: bool,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        SimplexSettings { pivot_tol: 1e-9, opt_tol: 1e-10, feas_tol: 1e-8, max_iter: 200_000, presolve: true }
    }
}

/// A basic optimal solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One dual value per row (sign convention of a maximization problem:
    /// `<=` rows have non-negative duals). Rows removed by presolve get 0.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau {
    m: usize,
    cols: usize,
    t: Vec<f64>,
    x_b: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    upper: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.cols + j]
    }

    fn price(&mut self, cost: &[f64]) {
        for j in 0..self.cols {
            let mut dj = cost[j];
            for i in 0..self.m {
                let a = self.at(i, j);
                if a != 0.0 {
                    dj -= cost[self.basis[i]] * a;
                }
            }
            self.d[j] = dj;
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let p = self.t[r * cols + q];
        for v in &mut self.t[r * cols..(r + 1) * cols] {
            *v /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * cols);
        let (prow, after) = rest.split_at_mut(cols);
        for row in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = row[q];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for (dj, &pv) in self.d.iter_mut().zip(prow.iter()) {
                *dj -= f * pv;
            }
        }
        self.d[q] = 0.0;
    }

    fn run(&mut self, settings: &SimplexSettings, eligible: &[bool]) -> Result<PhaseEnd> {
        let mut degenerate = 0usize;
        let degenerate_limit = 10 * (self.m + self.cols);
        let mut bland = false;
        loop {
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..self.cols {
                if !eligible[j] || self.upper[j] <= 0.0 {
                    continue;
                }
                let gain = match self.status[j] {
                    Status::AtLower => self.d[j],
                    Status::AtUpper => -self.d[j],
                    Status::Basic => continue,
                };
                if gain > settings.opt_tol {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if gain > best {
                        best = gain;
                        entering = Some(j);
                    }
                }
            }
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            if self.iterations >= settings.max_iter {
                return Err(Error::IterationLimit(settings.max_iter));
            }
            self.iterations += 1;

            let s = if self.status[q] == Status::AtLower { 1.0 } else { -1.0 };
            let mut step = self.upper[q];
            let mut leave: Option<(usize, Status)> = None;
            let mut leave_alpha = 0.0;
            for i in 0..self.m {
                let alpha = s * self.at(i, q);
                let b = self.basis[i];
                let (ratio, to) = if alpha > settings.pivot_tol {
                    (self.x_b[i].max(0.0) / alpha, Status::AtLower)
                } else if alpha < -settings.pivot_tol && self.upper[b].is_finite() {
                    ((self.upper[b] - self.x_b[i]).max(0.0) / -alpha, Status::AtUpper)
                } else {
                    continue;
                };
                let take = match leave {
                    None => ratio < step,
                    Some((li, _)) => {
                        ratio < step - 1e-12
                            || (ratio <= step + 1e-12
                                && if bland { b < self.basis[li] } else { alpha.abs() > leave_alpha })
                    }
                };
                if take {
                    step = step.min(ratio);
                    leave = Some((i, to));
                    leave_alpha = alpha.abs();
                }
            }
            if !step.is_finite() {
                return Ok(PhaseEnd::Unbounded);
            }

            if step <= 1e-12 {
                degenerate += 1;
                if degenerate > degenerate_limit {
                    bland = true;
                }
            }

            match leave {
                None => {
                    // bound flip of the entering variable
                    let u = self.upper[q];
                    for i in 0..self.m {
                        let a = self.at(i, q);
                        self.x_b[i] -= s * a * u;
                    }
                    self.status[q] = if s > 0.0 { Status::AtUpper } else { Status::AtLower };
                }
                Some((r, to)) => {
                    for i in 0..self.m {
                        let a = self.at(i, q);
                        self.x_b[i] -= s * a * step;
                    }
                    let start = if s > 0.0 { 0.0 } else { self.upper[q] };
                    let old = self.basis[r];
                    self.status[old] = to;
                    self.pivot(r, q);
                    self.basis[r] = q;
                    self.status[q] = Status::Basic;
                    self.x_b[r] = start + s * step;
                }
            }
        }
    }
}

fn solve(lp: &LinearProgram, settings: &SimplexSettings) -> Result<LpSolution> {
    let n = lp.n_vars();
    let rows = lp.n_constraints();

    // shift lower bounds to zero
    let shift: Vec<f64> = lp.lower.clone();
    let upper: Vec<f64> = (0..n).map(|j| lp.upper[j] - lp.lower[j]).collect();
    let rhs: Vec<f64> = lp
        .constraints
        .iter()
        .map(|row| row.rhs - row.coeffs.iter().map(|&(j, a)| a * shift[j]).sum::<f64>())
        .collect();

    let mut col_active = vec![true; n];
    let mut row_active = vec![true; rows];
    if settings.presolve {
        presolve(lp, &rhs, &mut col_active, &mut row_active)?;
    } else {
        for (i, row) in lp.constraints.iter().enumerate() {
            if row.coeffs.is_empty() {
                check_empty_row(row.relation, rhs[i])?;
                row_active[i] = false;
            }
        }
    }

    let cols_kept: Vec<usize> = (0..n).filter(|&j| col_active[j]).collect();
    let rows_kept: Vec<usize> = (0..rows).filter(|&i| row_active[i]).collect();
    let mut col_pos = vec![usize::MAX; n];
    for (p, &j) in cols_kept.iter().enumerate() {
        col_pos[j] = p;
    }

    let m = rows_kept.len();
    let ns = cols_kept.len();

    // normalize rows to non-negative rhs
    let mut sign = vec![1.0; m];
    let mut rel = Vec::with_capacity(m);
    let mut b = vec![0.0; m];
    for (r, &i) in rows_kept.iter().enumerate() {
        let row = &lp.constraints[i];
        let mut relation = row.relation;
        if rhs[i] < 0.0 {
            sign[r] = -1.0;
            relation = match relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        b[r] = sign[r] * rhs[i];
        rel.push(relation);
    }

    // column layout: structural | slack or surplus per inequality | artificial per >= or = row
    let mut slack_col = vec![None; m];
    let mut art_col = vec![None; m];
    let mut next = ns;
    for r in 0..m {
        if rel[r] != Relation::Eq {
            slack_col[r] = Some(next);
            next += 1;
        }
    }
    let first_art = next;
    for r in 0..m {
        if rel[r] != Relation::Le {
            art_col[r] = Some(next);
            next += 1;
        }
    }
    let cols = next;

    // dense column data of the normalized problem, kept for the final refactorization
    let mut a_dense = vec![0.0; m * cols];
    for (r, &i) in rows_kept.iter().enumerate() {
        for &(j, a) in &lp.constraints[i].coeffs {
            if col_active[j] {
                a_dense[r * cols + col_pos[j]] = sign[r] * a;
            }
        }
        if let Some(c) = slack_col[r] {
            a_dense[r * cols + c] = if rel[r] == Relation::Le { 1.0 } else { -1.0 };
        }
        if let Some(c) = art_col[r] {
            a_dense[r * cols + c] = 1.0;
        }
    }

    let mut col_upper = vec![f64::INFINITY; cols];
    for (p, &j) in cols_kept.iter().enumerate() {
        col_upper[p] = upper[j];
    }
    let mut basis = vec![0; m];
    let mut status = vec![Status::AtLower; cols];
    for r in 0..m {
        let bc = if rel[r] == Relation::Le { slack_col[r].unwrap() } else { art_col[r].unwrap() };
        basis[r] = bc;
        status[bc] = Status::Basic;
    }

    let mut tab = Tableau {
        m,
        cols,
        t: a_dense.clone(),
        x_b: b.clone(),
        basis,
        status,
        upper: col_upper,
        d: vec![0.0; cols],
        iterations: 0,
    };

    // phase one
    let eligible_all = vec![true; cols];
    if first_art < cols {
        let mut cost = vec![0.0; cols];
        for c in cost.iter_mut().skip(first_art) {
            *c = -1.0;
        }
        tab.price(&cost);
        if let PhaseEnd::Unbounded = tab.run(settings, &eligible_all)? {
            return Err(Error::Unbounded);
        }
        let infeas: f64 = (0..m).filter(|&r| tab.basis[r] >= first_art).map(|r| tab.x_b[r].max(0.0)).sum();
        let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if infeas > settings.feas_tol * scale {
            return Err(Error::Infeasible);
        }
        for c in first_art..cols {
            tab.upper[c] = 0.0;
        }
        for r in 0..m {
            if tab.basis[r] >= first_art {
                tab.x_b[r] = 0.0;
            }
        }
    }

    // phase two
    let mut cost = vec![0.0; cols];
    for (p, &j) in cols_kept.iter().enumerate() {
        cost[p] = lp.objective[j];
    }
    let eligible: Vec<bool> = (0..cols).map(|c| c < first_art).collect();
    tab.price(&cost);
    if let PhaseEnd::Unbounded = tab.run(settings, &eligible)? {
        return Err(Error::Unbounded);
    }

    // refactor the final basis for clean primal values and duals
    let mut xs = vec![0.0; cols];
    for c in 0..cols {
        if tab.status[c] == Status::AtUpper {
            xs[c] = tab.upper[c];
        }
    }
    for r in 0..m {
        xs[tab.basis[r]] = tab.x_b[r];
    }
    let mut duals_norm = vec![0.0; m];
    if m > 0 {
        let bmat = DMatrix::from_fn(m, m, |i, k| a_dense[i * cols + tab.basis[k]]);
        let mut rhs_eff = DVector::from_vec(b.clone());
        for c in 0..cols {
            if tab.status[c] == Status::AtUpper {
                for i in 0..m {
                    rhs_eff[i] -= a_dense[i * cols + c] * tab.upper[c];
                }
            }
        }
        let lu = bmat.clone().lu();
        if let Some(xb) = lu.solve(&rhs_eff) {
            let agrees = (0..m).all(|r| (xb[r] - tab.x_b[r]).abs() <= 1e-6 * (1.0 + tab.x_b[r].abs()));
            if agrees {
                for r in 0..m {
                    xs[tab.basis[r]] = xb[r];
                }
            }
        }
        let cb = DVector::from_fn(m, |k, _| cost[tab.basis[k]]);
        if let Some(pi) = bmat.transpose().lu().solve(&cb) {
            duals_norm.copy_from_slice(pi.as_slice());
        }
    }
    // clip round-off at the bounds
    for c in 0..cols {
        let u = tab.upper[c];
        if xs[c] < 0.0 && xs[c] > -1e-9 {
            xs[c] = 0.0;
        }
        if u.is_finite() && xs[c] > u && xs[c] < u + 1e-9 {
            xs[c] = u;
        }
    }

    let mut x = shift;
    for (p, &j) in cols_kept.iter().enumerate() {
        x[j] += xs[p];
    }
    let mut duals = vec![0.0; rows];
    for (r, &i) in rows_kept.iter().enumerate() {
        duals[i] = sign[r] * duals_norm[r];
    }
    Ok(LpSolution { objective: lp.objective_value(&x), x, duals, iterations: tab.iterations })
}

fn check_empty_row(relation: Relation, rhs: f64) -> Result<()> {
    let ok = match relation {
        Relation::Le => rhs >= -1e-12,
        Relation::Ge => rhs <= 1e-12,
        Relation::Eq => rhs.abs() <= 1e-12,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Infeasible)
    }
}

/// Fixes at their lower bound the columns that cannot improve the objective
/// and only tighten rows when increased, then drops rows that the
/// non-negativity of the remaining columns already implies.
fn presolve(lp: &LinearProgram, rhs: &[f64], col_active: &mut [bool], row_active: &mut [bool]) -> Result<()> {
    let n = lp.n_vars();
    let mut col_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, row) in lp.constraints.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            col_rows[j].push((i, a));
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for j in 0..n {
            if !col_active[j] || lp.objective[j] > 0.0 {
                continue;
            }
            let harmless = col_rows[j].iter().filter(|(i, _)| row_active[*i]).all(|&(i, a)| {
                match lp.constraints[i].relation {
                    Relation::Le => a >= 0.0,
                    Relation::Ge => a <= 0.0,
                    Relation::Eq => a == 0.0,
                }
            });
            if harmless {
                col_active[j] = false;
                changed = true;
            }
        }
        for (i, row) in lp.constraints.iter().enumerate() {
            if !row_active[i] {
                continue;
            }
            let live = row.coeffs.iter().filter(|(j, _)| col_active[*j]);
            let (mut any, mut all_nonpos, mut all_nonneg) = (false, true, true);
            for &(_, a) in live {
                any = true;
                all_nonpos &= a <= 0.0;
                all_nonneg &= a >= 0.0;
            }
            let implied = if !any {
                check_empty_row(row.relation, rhs[i])?;
                true
            } else {
                match row.relation {
                    Relation::Le => all_nonpos && rhs[i] >= 0.0,
                    Relation::Ge => all_nonneg && rhs[i] <= 0.0,
                    Relation::Eq => false,
                }
            };
            if implied {
                row_active[i] = false;
                changed = true;
            }
        }
    }
    Ok(())
}
