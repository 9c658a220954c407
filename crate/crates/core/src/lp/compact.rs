//! Quadratic-size reformulation of the optimistic assortment LP.
//!
//! Variables are `x0`, one `x_i` per product and one `y_ij` per ordered
//! pair. A point `(x0, x, y)` describes a randomized assortment through
//! `x_i = E[1(i in S) / (1 + V(S))]` and `y_ij = E[1(i, j in S) / (1 + V(S))]`,
//! which turns the per-assortment revenue and consumption into linear
//! functions. Nested assortments are recovered from any optimal `x` by
//! sorting it.

use crate::error::{Error, Result};
use crate::mnl::{Assortment, PreferenceVector, ProblemInstance};

use super::enumerate::AssortmentDistribution;
use super::simplex::{LinearProgram, Relation};
use super::UcbTerms;

/// Variable and row numbering of the compact LP for `n` products and `k`
/// resources. Rows are: `k` resource rows, the normalization row, `n` rows
/// `x_i <= x0`, then for each `(i, j)` the pair `y_ij <= x_i`, `y_ij <= x_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompactLayout {
    pub n: usize,
    pub k: usize,
}

impl CompactLayout {
    pub fn n_vars(&self) -> usize {
        self.n * self.n + self.n + 1
    }

    pub fn n_rows(&self) -> usize {
        2 * self.n * self.n + self.n + self.k + 1
    }

    pub fn x0(&self) -> usize {
        0
    }

    pub fn x(&self, i: usize) -> usize {
        1 + i
    }

    pub fn y(&self, i: usize, j: usize) -> usize {
        1 + self.n + i * self.n + j
    }

    pub fn normalization_row(&self) -> usize {
        self.k
    }

    /// Recovers the layout from the shape of a compact LP.
    pub fn infer(lp: &LinearProgram) -> Result<Self> {
        let nv = lp.n_vars();
        let n = ((((4 * nv - 3) as f64).sqrt() - 1.0) / 2.0).round() as usize;
        if n == 0 || n * n + n + 1 != nv {
            return Err(Error::InvalidInput(format!("{nv} variables is not a compact LP shape")));
        }
        let base = 2 * n * n + n + 1;
        if lp.n_constraints() < base {
            return Err(Error::InvalidInput("too few rows for a compact LP".into()));
        }
        Ok(CompactLayout { n, k: lp.n_constraints() - base })
    }
}

/// A basic optimal point of the compact LP.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactSolution {
    pub x0: f64,
    pub x: Vec<f64>,
    /// `y[i][j]`
    pub y: Vec<Vec<f64>>,
    pub objective: f64,
    /// Dual value of each resource row.
    pub duals_resource: Vec<f64>,
    pub is_vertex: bool,
}

pub fn build_compact_lp(v_hat: &PreferenceVector, terms: &UcbTerms, inst: &ProblemInstance) -> Result<LinearProgram> {
    let n = inst.n_products;
    let k = inst.n_resources;
    if v_hat.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: v_hat.len() });
    }
    terms.validate(n)?;
    let layout = CompactLayout { n, k };
    let v = v_hat.values();
    let eps = &terms.eps;

    let mut lp = LinearProgram::new(layout.n_vars());
    for i in 0..n {
        lp.set_objective(layout.x(i), inst.revenue[i] * (v[i] + eps[i]));
        for j in 0..n {
            lp.set_objective(layout.y(i, j), inst.revenue[i] * eps[i] * v[j]);
        }
    }

    let mut row = Vec::with_capacity(layout.n_vars());
    for kk in 0..k {
        row.clear();
        for i in 0..n {
            let a = inst.consumption[i][kk];
            row.push((layout.x(i), a * (v[i] - eps[i])));
            for j in 0..n {
                row.push((layout.y(i, j), -a * eps[i] * v[j]));
            }
        }
        lp.add_constraint(&row, Relation::Le, (1.0 - terms.omega) * inst.capacity_rate[kk]);
    }

    row.clear();
    row.push((layout.x0(), 1.0));
    row.extend((0..n).map(|i| (layout.x(i), v[i])));
    lp.add_constraint(&row, Relation::Eq, 1.0);

    for i in 0..n {
        lp.add_constraint(&[(layout.x(i), 1.0), (layout.x0(), -1.0)], Relation::Le, 0.0);
    }
    for i in 0..n {
        for j in 0..n {
            lp.add_constraint(&[(layout.y(i, j), 1.0), (layout.x(i), -1.0)], Relation::Le, 0.0);
            lp.add_constraint(&[(layout.y(i, j), 1.0), (layout.x(j), -1.0)], Relation::Le, 0.0);
        }
    }
    Ok(lp)
}

/// Solves a compact LP to a vertex. Among optimal vertices the one with the
/// largest `x0` is kept (a second solve maximizes `x0` over the optimal
/// face); resource duals come from the first solve.
pub fn solve_lp_basic(lp: &LinearProgram) -> Result<CompactSolution> {
    let layout = CompactLayout::infer(lp)?;
    let first = lp.solve()?;
    let z_star = first.objective;

    let mut tie_break = lp.clone();
    let coeffs: Vec<(usize, f64)> =
        lp.objective().iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(j, &c)| (j, c)).collect();
    tie_break.add_constraint(&coeffs, Relation::Ge, z_star);
    for j in 0..lp.n_vars() {
        tie_break.set_objective(j, 0.0);
    }
    tie_break.set_objective(layout.x0(), 1.0);
    let x = match tie_break.solve() {
        Ok(sol) if lp.objective_value(&sol.x) >= z_star - 1e-9 * (1.0 + z_star.abs()) => sol.x,
        _ => first.x,
    };

    let n = layout.n;
    Ok(CompactSolution {
        x0: x[layout.x0()],
        x: (0..n).map(|i| x[layout.x(i)]).collect(),
        y: (0..n).map(|i| (0..n).map(|j| x[layout.y(i, j)]).collect()).collect(),
        objective: lp.objective_value(&x),
        duals_resource: first.duals[..layout.k].to_vec(),
        is_vertex: true,
    })
}

/// Builds and solves in one go.
pub fn solve_compact(v_hat: &PreferenceVector, terms: &UcbTerms, inst: &ProblemInstance) -> Result<CompactSolution> {
    solve_lp_basic(&build_compact_lp(v_hat, terms, inst)?)
}

/// Weight below which a recovered atom is treated as round-off.
const ATOM_DUST: f64 = 1e-12;

/// Maps a vertex of the compact LP to nested assortments
/// `{} = S_0 < S_1 < ... < S_n` (products ordered by decreasing `x`, ties by
/// index) with weight `(x_(m) - x_(m+1)) (1 + V(S_m))`, `x_(0) = x0` and
/// `x_(n+1) = 0`.
pub fn recover_distribution(sol: &CompactSolution, v_hat: &PreferenceVector) -> Result<AssortmentDistribution> {
    if !sol.is_vertex {
        return Err(Error::Precondition("recovery needs a basic (vertex) solution".into()));
    }
    let n = sol.x.len();
    if v_hat.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: v_hat.len() });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sol.x[b].total_cmp(&sol.x[a]).then(a.cmp(&b)));

    let mut atoms = Vec::new();
    let mut level = sol.x0;
    let mut pref_sum = 0.0;
    for m in 0..=n {
        let next = if m < n { sol.x[order[m]] } else { 0.0 };
        let weight = (level - next) * (1.0 + pref_sum);
        if weight >= ATOM_DUST {
            atoms.push((Assortment::new(order[..m].to_vec()), weight));
        }
        if m < n {
            pref_sum += v_hat[order[m]];
            level = next;
        }
    }
    let total: f64 = atoms.iter().map(|(_, w)| w).sum();
    if !(total > 0.0) {
        return Err(Error::Precondition("recovered weights vanish".into()));
    }
    for (_, w) in &mut atoms {
        *w /= total;
    }
    AssortmentDistribution::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_product() -> ProblemInstance {
        ProblemInstance::new(
            vec![1.0],
            vec![vec![1.0]],
            vec![0.5],
            100,
            PreferenceVector::new(vec![1.0]).unwrap(),
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn shape_counts() {
        let inst = one_product();
        let lp = build_compact_lp(&inst.true_pref, &UcbTerms::none(1), &inst).unwrap();
        assert_eq!(lp.n_vars(), 3);
        assert_eq!(lp.n_constraints(), 5);
        for (n, k) in [(3, 2), (7, 4), (10, 5)] {
            let l = CompactLayout { n, k };
            assert_eq!(l.n_vars(), n * n + n + 1);
            assert_eq!(l.n_rows(), 2 * n * n + n + k + 1);
        }
    }

    #[test]
    fn zero_radius_objective_ignores_y() {
        let inst = one_product();
        let lp = build_compact_lp(&inst.true_pref, &UcbTerms::none(1), &inst).unwrap();
        let l = CompactLayout { n: 1, k: 1 };
        assert_eq!(lp.objective()[l.x(0)], 1.0);
        assert_eq!(lp.objective()[l.y(0, 0)], 0.0);
        assert_eq!(lp.objective()[l.x0()], 0.0);
    }

    #[test]
    fn single_product_vertex() {
        let inst = one_product();
        let sol = solve_compact(&inst.true_pref, &UcbTerms::none(1), &inst).unwrap();
        assert!((sol.x0 - 0.5).abs() < 1e-12);
        assert!((sol.x[0] - 0.5).abs() < 1e-12);
        assert!((sol.objective - 0.5).abs() < 1e-12);
        let dist = recover_distribution(&sol, &inst.true_pref).unwrap();
        assert_eq!(dist.atoms().len(), 1);
        assert_eq!(dist.atoms()[0].0, Assortment::singleton(0));
        assert!((dist.atoms()[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nested_weights_for_two_products() {
        let v = PreferenceVector::new(vec![0.5, 2.0]).unwrap();
        // x0 + 0.5 x1 + 2 x2 = 1 with x0 > x1 > x2 > 0
        let (x1, x2) = (0.3, 0.1);
        let x0 = 1.0 - 0.5 * x1 - 2.0 * x2;
        let sol = CompactSolution {
            x0,
            x: vec![x1, x2],
            y: vec![vec![0.0; 2]; 2],
            objective: 0.0,
            duals_resource: vec![],
            is_vertex: true,
        };
        let dist = recover_distribution(&sol, &v).unwrap();
        let atoms = dist.atoms();
        assert_eq!(atoms.len(), 3);
        assert_eq!(atoms[0].0, Assortment::empty());
        assert!((atoms[0].1 - (x0 - x1)).abs() < 1e-12);
        assert_eq!(atoms[1].0, Assortment::singleton(0));
        assert!((atoms[1].1 - (x1 - x2) * 1.5).abs() < 1e-12);
        assert_eq!(atoms[2].0, Assortment::new(vec![0, 1]));
        assert!((atoms[2].1 - x2 * 3.5).abs() < 1e-12);
    }

    #[test]
    fn recovery_needs_a_vertex() {
        let sol = CompactSolution {
            x0: 1.0,
            x: vec![0.0],
            y: vec![vec![0.0]],
            objective: 0.0,
            duals_resource: vec![0.0],
            is_vertex: false,
        };
        let v = PreferenceVector::new(vec![1.0]).unwrap();
        assert!(matches!(recover_distribution(&sol, &v), Err(Error::Precondition(_))));
    }

    #[test]
    fn layout_inference() {
        let lp = LinearProgram::new(13);
        assert!(CompactLayout::infer(&lp).is_err());
        let inst = one_product();
        let lp = build_compact_lp(&inst.true_pref, &UcbTerms::none(1), &inst).unwrap();
        assert_eq!(CompactLayout::infer(&lp).unwrap(), CompactLayout { n: 1, k: 1 });
    }
}
