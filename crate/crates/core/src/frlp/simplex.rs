//! Dense two-phase tableau simplex over any [`Scalar`].

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::model::Sense;

/// `max c·x` subject to sparse rows `a·x (sense) b` and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct StandardLp<S> {
    pub num_vars: usize,
    pub objective: Vec<S>,
    pub rows: Vec<StandardRow<S>>,
}

#[derive(Debug, Clone)]
pub struct StandardRow<S> {
    pub coeffs: Vec<(usize, S)>,
    pub sense: Sense,
    pub rhs: S,
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome<S> {
    pub x: Vec<S>,
    /// Shadow price of each row, in the row's original orientation.
    pub duals: Vec<S>,
    pub objective: S,
    pub pivots: usize,
}

/// Consecutive zero-length steps before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 64;

struct Tableau<S> {
    rows: usize,
    /// Row stride; the last column holds the right-hand side.
    width: usize,
    cells: Vec<S>,
    obj: Vec<S>,
    basis: Vec<usize>,
    barred: Vec<bool>,
    tol: S,
    pivots: usize,
    max_pivots: usize,
    scratch: Vec<usize>,
}

impl<S: Scalar> Tableau<S> {
    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn at(&self, r: usize, c: usize) -> &S {
        &self.cells[r * self.width + c]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = S::one() / self.cells[pr * w + pc].clone();
        self.scratch.clear();
        {
            let prow = &mut self.cells[pr * w..(pr + 1) * w];
            for (j, v) in prow.iter_mut().enumerate() {
                if !v.is_zero() {
                    *v = v.clone() * inv.clone();
                    if v.abs() < self.tol.clone() * S::ratio(1, 1000) {
                        *v = S::zero();
                    } else {
                        self.scratch.push(j);
                    }
                }
            }
            prow[pc] = S::one();
        }
        let (before, rest) = self.cells.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        let nz = &self.scratch;
        let eliminate = |row: &mut [S]| {
            let f = row[pc].clone();
            if f.is_zero() {
                return;
            }
            for &j in nz {
                row[j] = row[j].clone() - f.clone() * prow[j].clone();
            }
            row[pc] = S::zero();
        };
        before.chunks_mut(w).for_each(eliminate);
        after.chunks_mut(w).for_each(eliminate);
        eliminate(&mut self.obj);
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let neg_tol = -self.tol.clone();
        let mut best: Option<(usize, &S)> = None;
        for j in 0..self.rhs_col() {
            if self.barred[j] || self.obj[j] >= neg_tol {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.is_none_or(|(_, v)| self.obj[j] < *v) {
                best = Some((j, &self.obj[j]));
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, pc: usize, bland: bool) -> Option<usize> {
        let rhs = self.rhs_col();
        let mut best: Option<(usize, S)> = None;
        for r in 0..self.rows {
            let a = self.at(r, pc);
            if *a <= self.tol {
                continue;
            }
            let ratio = self.at(r, rhs).clone() / a.clone();
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie = (ratio.clone() - bratio.clone()).abs() <= self.tol;
                    let better = if tie {
                        if bland {
                            self.basis[r] < self.basis[br]
                        } else {
                            *a > *self.at(br, pc)
                        }
                    } else {
                        ratio < bratio
                    };
                    if better {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best.map(|(r, _)| r)
    }

    fn optimize(&mut self) -> Result<()> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_LIMIT;
            let Some(pc) = self.entering(bland) else { return Ok(()) };
            let Some(pr) = self.leaving(pc, bland) else { return Err(Error::Unbounded) };
            if self.at(pr, self.rhs_col()).abs() <= self.tol {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            if self.pivots >= self.max_pivots {
                return Err(Error::IterationLimit(self.pivots));
            }
            self.pivot(pr, pc);
        }
    }
}

/// Solves `lp` with the tableau simplex. `tol` bounds reduced costs, pivot
/// magnitudes and ratio ties; pass zero for exact scalars.
pub fn solve_standard<S: Scalar>(lp: &StandardLp<S>, tol: S) -> Result<SimplexOutcome<S>> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    // Orient each row so its right-hand side is non-negative.
    let mut flip = Vec::with_capacity(m);
    let mut senses = Vec::with_capacity(m);
    for row in &lp.rows {
        let neg = row.rhs < S::zero();
        flip.push(neg);
        senses.push(match (row.sense, neg) {
            (Sense::Le, true) => Sense::Ge,
            (Sense::Ge, true) => Sense::Le,
            (s, _) => s,
        });
    }
    let num_slack = senses.iter().filter(|s| **s != Sense::Eq).count();
    let num_art = senses.iter().filter(|s| **s != Sense::Le).count();
    let width = n + num_slack + num_art + 1;
    let mut t = Tableau {
        rows: m,
        width,
        cells: vec![S::zero(); m * width],
        obj: vec![S::zero(); width],
        basis: vec![0; m],
        barred: vec![false; width - 1],
        tol: tol.clone(),
        pivots: 0,
        max_pivots: 50 * (m + width) + 1000,
        scratch: Vec::with_capacity(width),
    };
    let rhs = width - 1;
    let mut initial_col = vec![0; m];
    let mut art_rows = Vec::new();
    let (mut next_slack, mut next_art) = (n, n + num_slack);
    for (i, row) in lp.rows.iter().enumerate() {
        let base = i * width;
        let sign = if flip[i] { -S::one() } else { S::one() };
        for (j, v) in &row.coeffs {
            t.cells[base + j] = t.cells[base + j].clone() + sign.clone() * v.clone();
        }
        t.cells[base + rhs] = sign * row.rhs.clone();
        match senses[i] {
            Sense::Le => {
                t.cells[base + next_slack] = S::one();
                t.basis[i] = next_slack;
                initial_col[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge | Sense::Eq => {
                if senses[i] == Sense::Ge {
                    t.cells[base + next_slack] = -S::one();
                    next_slack += 1;
                }
                t.cells[base + next_art] = S::one();
                t.basis[i] = next_art;
                initial_col[i] = next_art;
                art_rows.push(i);
                next_art += 1;
            }
        }
    }

    // Phase 1: maximize minus the sum of artificials.
    if !art_rows.is_empty() {
        for &i in &art_rows {
            for j in 0..n + num_slack {
                let v = t.cells[i * width + j].clone();
                if !v.is_zero() {
                    t.obj[j] = t.obj[j].clone() - v;
                }
            }
            t.obj[rhs] = t.obj[rhs].clone() - t.cells[i * width + rhs].clone();
        }
        t.optimize()?;
        if t.obj[rhs] < -tol.clone() * S::from_usize(m.max(1)).unwrap() {
            return Err(Error::Infeasible);
        }
        // Pivot zero-valued artificials out where a real column allows it.
        for r in 0..m {
            if t.basis[r] >= n + num_slack {
                if let Some(c) = (0..n + num_slack).find(|&c| t.at(r, c).abs() > tol) {
                    t.pivot(r, c);
                }
            }
        }
        for c in n + num_slack..rhs {
            t.barred[c] = true;
        }
    }

    // Phase 2: reduced costs for the true objective.
    let cost = |j: usize| if j < n { lp.objective[j].clone() } else { S::zero() };
    t.obj = vec![S::zero(); width];
    for j in 0..width {
        t.obj[j] = if j < rhs { -cost(j) } else { S::zero() };
    }
    for r in 0..m {
        let cb = cost(t.basis[r]);
        if cb.is_zero() {
            continue;
        }
        for j in 0..width {
            let v = t.cells[r * width + j].clone();
            if !v.is_zero() {
                t.obj[j] = t.obj[j].clone() + cb.clone() * v;
            }
        }
    }
    t.optimize()?;

    let mut x = vec![S::zero(); n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.at(r, rhs).clone();
        }
    }
    let duals = (0..m)
        .map(|i| {
            let y = t.obj[initial_col[i]].clone();
            if flip[i] {
                -y
            } else {
                y
            }
        })
        .collect();
    Ok(SimplexOutcome { x, duals, objective: t.obj[rhs].clone(), pivots: t.pivots })
}

/// Solves `lp` through its dual `min b·y, Aᵀy ≥ c, y ≥ 0` and reads the
/// primal solution off the dual's shadow prices. Equality rows are split.
pub fn solve_via_dual<S: Scalar>(lp: &StandardLp<S>, tol: S) -> Result<SimplexOutcome<S>> {
    // Every row in `≤` form.
    let mut le_rows: Vec<(Vec<(usize, S)>, S)> = Vec::new();
    for row in &lp.rows {
        let neg = || (row.coeffs.iter().map(|(j, v)| (*j, -v.clone())).collect(), -row.rhs.clone());
        match row.sense {
            Sense::Le => le_rows.push((row.coeffs.clone(), row.rhs.clone())),
            Sense::Ge => le_rows.push(neg()),
            Sense::Eq => {
                le_rows.push((row.coeffs.clone(), row.rhs.clone()));
                le_rows.push(neg());
            }
        }
    }
    // Dual: max −b·y subject to −Aᵀy ≤ −c. Row j collects column j of A.
    let mut columns: Vec<Vec<(usize, S)>> = vec![Vec::new(); lp.num_vars];
    for (i, (coeffs, _)) in le_rows.iter().enumerate() {
        for (j, v) in coeffs {
            columns[*j].push((i, -v.clone()));
        }
    }
    let dual = StandardLp {
        num_vars: le_rows.len(),
        objective: le_rows.iter().map(|(_, b)| -b.clone()).collect(),
        rows: columns
            .into_iter()
            .enumerate()
            .map(|(j, coeffs)| StandardRow { coeffs, sense: Sense::Le, rhs: -lp.objective[j].clone() })
            .collect(),
    };
    let out = solve_standard(&dual, tol)?;
    let x = out.duals;
    let objective = lp.objective.iter().zip(&x).fold(S::zero(), |acc, (c, v)| acc + c.clone() * v.clone());
    // Row duals of the original problem are the dual solution itself.
    let mut duals = Vec::with_capacity(lp.rows.len());
    let mut k = 0;
    for row in &lp.rows {
        match row.sense {
            Sense::Le => duals.push(out.x[k].clone()),
            Sense::Ge => duals.push(-out.x[k].clone()),
            Sense::Eq => {
                duals.push(out.x[k].clone() - out.x[k + 1].clone());
                k += 1;
            }
        }
        k += 1;
    }
    Ok(SimplexOutcome { x, duals, objective, pivots: out.pivots })
}

/// Runs whichever of the primal or dual tableau is smaller.
pub fn solve_auto<S: Scalar>(lp: &StandardLp<S>, tol: S) -> Result<SimplexOutcome<S>> {
    let m = lp.rows.len();
    let n = lp.num_vars;
    let m_split = m + lp.rows.iter().filter(|r| r.sense == Sense::Eq).count();
    let primal_cells = m * (n + 2 * m);
    let dual_cells = n * (m_split + 2 * n);
    if dual_cells < primal_cells {
        solve_via_dual(lp, tol)
    } else {
        solve_standard(lp, tol)
    }
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;

    fn row<S: Scalar>(coeffs: &[(usize, S)], sense: Sense, rhs: S) -> StandardRow<S> {
        StandardRow { coeffs: coeffs.to_vec(), sense, rhs }
    }

    fn textbook<S: Scalar>() -> StandardLp<S> {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18: optimum 36 at (2, 6).
        let r = |n| S::ratio(n, 1);
        StandardLp {
            num_vars: 2,
            objective: vec![r(3), r(5)],
            rows: vec![
                row(&[(0, r(1))], Sense::Le, r(4)),
                row(&[(1, r(2))], Sense::Le, r(12)),
                row(&[(0, r(3)), (1, r(2))], Sense::Le, r(18)),
            ],
        }
    }

    #[test]
    fn textbook_problem_both_routes() {
        for solve in [solve_standard::<f64>, solve_via_dual::<f64>] {
            let out = solve(&textbook(), 1e-9).unwrap();
            assert!((out.objective - 36.0).abs() < 1e-9);
            assert!((out.x[0] - 2.0).abs() < 1e-9 && (out.x[1] - 6.0).abs() < 1e-9);
            assert!(out.duals[0].abs() < 1e-9);
            assert!((out.duals[1] - 1.5).abs() < 1e-9 && (out.duals[2] - 1.0).abs() < 1e-9);
        }
        let exact = solve_standard::<BigRational>(&textbook(), BigRational::ratio(0, 1)).unwrap();
        assert_eq!(exact.objective, BigRational::ratio(36, 1));
        let exact = solve_via_dual::<BigRational>(&textbook(), BigRational::ratio(0, 1)).unwrap();
        assert_eq!(exact.x, vec![BigRational::ratio(2, 1), BigRational::ratio(6, 1)]);
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x + y, x + y ≥ 1, x − y = 0, x ≤ 3: optimum 6.
        let lp = StandardLp {
            num_vars: 2,
            objective: vec![1.0, 1.0],
            rows: vec![
                row(&[(0, 1.0), (1, 1.0)], Sense::Ge, 1.0),
                row(&[(0, 1.0), (1, -1.0)], Sense::Eq, 0.0),
                row(&[(0, 1.0)], Sense::Le, 3.0),
            ],
        };
        for solve in [solve_standard::<f64>, solve_via_dual::<f64>] {
            let out = solve(&lp, 1e-9).unwrap();
            assert!((out.objective - 6.0).abs() < 1e-9, "{out:?}");
            assert!((out.x[0] - 3.0).abs() < 1e-9 && (out.x[1] - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let infeasible = StandardLp {
            num_vars: 1,
            objective: vec![1.0],
            rows: vec![row(&[(0, 1.0)], Sense::Le, 1.0), row(&[(0, 1.0)], Sense::Ge, 2.0)],
        };
        assert_eq!(solve_standard(&infeasible, 1e-9).unwrap_err(), Error::Infeasible);
        let unbounded = StandardLp { num_vars: 2, objective: vec![1.0, 0.0], rows: vec![row(&[(1, 1.0)], Sense::Le, 1.0)] };
        assert_eq!(solve_standard(&unbounded, 1e-9).unwrap_err(), Error::Unbounded);
        // Primal unbounded means dual infeasible.
        assert_eq!(solve_via_dual(&unbounded, 1e-9).unwrap_err(), Error::Infeasible);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under pure Dantzig pricing with lowest-index ties.
        let lp = StandardLp {
            num_vars: 4,
            objective: vec![0.75, -150.0, 0.02, -6.0],
            rows: vec![
                row(&[(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Sense::Le, 0.0),
                row(&[(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Sense::Le, 0.0),
                row(&[(2, 1.0)], Sense::Le, 1.0),
            ],
        };
        let out = solve_standard::<f64>(&lp, 1e-9).unwrap();
        assert!((out.objective - 0.05).abs() < 1e-9);
    }
}
