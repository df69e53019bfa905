//! Bounded-variable primal simplex on a dense tableau.
//!
//! Two phases: infeasible rows get an artificial variable driven to zero
//! first, then the real objective takes over. Nonbasic variables rest at
//! either bound; the ratio test allows bound flips. Dantzig pricing with a
//! switch to Bland's rule after a degenerate streak guarantees termination.
//! Equality rows are split into two opposing inequalities at construction.

use thiserror::Error;

use crate::ilp::{IlpProblem, Sense};

/// Default feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STREAK_LIMIT: u32 = 64;

#[derive(Debug, Clone)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize c·x` subject to rows and box bounds.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// LP relaxation of a 0-1 program with per-variable bounds inside `[0,1]`.
    pub fn from_ilp(problem: &IlpProblem, bounds: &[(f64, f64)]) -> Self {
        debug_assert_eq!(bounds.len(), problem.n_vars());
        LinearProgram {
            objective: problem.objective.clone(),
            rows: problem
                .constraints
                .iter()
                .map(|c| LpRow { terms: c.terms.clone(), sense: c.sense, rhs: c.rhs })
                .collect(),
            bounds: bounds.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64, iterations: u64 },
    Infeasible,
    Unbounded,
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("numerical breakdown: {detail}")]
    NumericalBreakdown { detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
}

struct Tableau {
    /// m x total dense rows, kept in B⁻¹·A form.
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row for the active objective.
    obj_row: Vec<f64>,
    /// Current value of every variable.
    values: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    n_structural: usize,
    iterations: u64,
    degenerate_streak: u32,
    tol: f64,
}

impl Tableau {
    fn compute_obj_row(&mut self, costs: &[f64]) {
        let total = self.obj_row.len();
        for j in 0..total {
            self.obj_row[j] = costs[j];
        }
        for (r, &basic) in self.basis.iter().enumerate() {
            let cb = costs[basic];
            if cb != 0.0 {
                for j in 0..total {
                    self.obj_row[j] -= cb * self.rows[r][j];
                }
            }
        }
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.obj_row.len() {
            let room = self.upper[j] - self.lower[j];
            if room <= self.tol {
                continue;
            }
            let d = self.obj_row[j];
            let eligible = match self.state[j] {
                VarState::AtLower => d > self.tol,
                VarState::AtUpper => d < -self.tol,
                VarState::Basic(_) => false,
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some(j);
            }
            match best {
                Some((_, score)) if d.abs() <= score => {}
                _ => best = Some((j, d.abs())),
            }
        }
        best.map(|(j, _)| j)
    }

    /// One simplex step: returns true when progress is still possible.
    fn step(&mut self) -> Result<bool, StepOutcome> {
        let bland = self.degenerate_streak >= DEGENERATE_STREAK_LIMIT;
        let entering = match self.entering(bland) {
            Some(j) => j,
            None => return Err(StepOutcome::Optimal),
        };
        let dir: f64 = match self.state[entering] {
            VarState::AtLower => 1.0,
            VarState::AtUpper => -1.0,
            VarState::Basic(_) => unreachable!("basic variable cannot enter"),
        };

        // Ratio test: smallest movement that sends the entering variable or
        // some basic variable to one of its bounds.
        let own_limit = self.upper[entering] - self.lower[entering];
        let mut t_min = own_limit;
        let mut leaving: Option<(usize, bool)> = None; // (row, leaves-to-lower)
        for r in 0..self.rows.len() {
            let rate = dir * self.rows[r][entering]; // basic value changes by -rate * t
            let basic = self.basis[r];
            if rate > PIVOT_TOL {
                let slack = self.values[basic] - self.lower[basic];
                let t = slack / rate;
                if t < t_min - PIVOT_TOL || (t < t_min + PIVOT_TOL && better_leaver(&leaving, r, basic, &self.basis)) {
                    t_min = t.max(0.0);
                    leaving = Some((r, true));
                }
            } else if rate < -PIVOT_TOL && self.upper[basic].is_finite() {
                let slack = self.upper[basic] - self.values[basic];
                let t = slack / -rate;
                if t < t_min - PIVOT_TOL || (t < t_min + PIVOT_TOL && better_leaver(&leaving, r, basic, &self.basis)) {
                    t_min = t.max(0.0);
                    leaving = Some((r, false));
                }
            }
        }

        if leaving.is_none() && !t_min.is_finite() {
            return Err(StepOutcome::Unbounded);
        }

        // Apply the movement to all variable values.
        let t = t_min;
        for r in 0..self.rows.len() {
            let basic = self.basis[r];
            self.values[basic] -= dir * self.rows[r][entering] * t;
        }
        self.values[entering] += dir * t;

        self.iterations += 1;
        if t <= PIVOT_TOL {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }

        match leaving {
            None => {
                // Bound flip, no basis change.
                self.state[entering] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                Ok(true)
            }
            Some((row, to_lower)) => {
                let old_basic = self.basis[row];
                self.pivot(row, entering);
                self.state[old_basic] = if to_lower { VarState::AtLower } else { VarState::AtUpper };
                self.values[old_basic] = if to_lower { self.lower[old_basic] } else { self.upper[old_basic] };
                self.state[entering] = VarState::Basic(row);
                self.basis[row] = entering;
                Ok(true)
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let pivot = self.rows[row][col];
        debug_assert!(pivot.abs() > PIVOT_TOL);
        let inv = 1.0 / pivot;
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[row].clone();
        for (r, current) in self.rows.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let factor = current[col];
            if factor != 0.0 {
                for (v, p) in current.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
            }
        }
        let factor = self.obj_row[col];
        if factor != 0.0 {
            for (v, p) in self.obj_row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
        }
    }

    fn run(&mut self, limit: u64) -> Result<(), LpError> {
        loop {
            if self.iterations > limit {
                return Err(LpError::NumericalBreakdown {
                    detail: format!("iteration limit {limit} exceeded"),
                });
            }
            match self.step() {
                Ok(_) => {}
                Err(StepOutcome::Optimal) => return Ok(()),
                Err(StepOutcome::Unbounded) => return Err(LpError::NumericalBreakdown {
                    detail: "unbounded direction in bounded problem".to_string(),
                }),
            }
        }
    }
}

enum StepOutcome {
    Optimal,
    Unbounded,
}

fn better_leaver(current: &Option<(usize, bool)>, _row: usize, basic: usize, basis: &[usize]) -> bool {
    match current {
        None => true,
        Some((r, _)) => basic < basis[*r],
    }
}

/// Solves the LP to optimality within `tol`, or reports infeasibility.
pub fn solve_lp(lp: &LinearProgram, tol: f64) -> Result<LpOutcome, LpError> {
    let n = lp.objective.len();

    // Normalize every row to `<=` form; equalities become two rows.
    let mut le_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    for row in &lp.rows {
        match row.sense {
            Sense::Le => le_rows.push((row.terms.clone(), row.rhs)),
            Sense::Ge => le_rows.push((negate(&row.terms), -row.rhs)),
            Sense::Eq => {
                le_rows.push((row.terms.clone(), row.rhs));
                le_rows.push((negate(&row.terms), -row.rhs));
            }
        }
    }
    let m = le_rows.len();

    if m == 0 {
        // Pure box problem: each variable sits at whichever bound pays.
        let x: Vec<f64> = (0..n)
            .map(|j| if lp.objective[j] > 0.0 { lp.bounds[j].1 } else { lp.bounds[j].0 })
            .collect();
        let objective = dot(&lp.objective, &x);
        return Ok(LpOutcome::Optimal { x, objective, iterations: 0 });
    }

    // Start with structural variables at their lower bounds.
    let mut values = vec![0.0; n + m];
    let mut lower = vec![0.0; n + m];
    let mut upper = vec![f64::INFINITY; n + m];
    let mut state = vec![VarState::AtLower; n + m];
    for j in 0..n {
        let (lo, hi) = lp.bounds[j];
        lower[j] = lo;
        upper[j] = hi;
        values[j] = lo;
        state[j] = VarState::AtLower;
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut artificial_rows = Vec::new();
    for (r, (terms, rhs)) in le_rows.iter().enumerate() {
        let mut dense = vec![0.0; n + m];
        for (j, c) in terms {
            dense[*j] += *c;
        }
        dense[n + r] = 1.0; // slack
        let slack_value = rhs - terms.iter().map(|(j, c)| c * values[*j]).sum::<f64>();
        values[n + r] = slack_value.max(0.0);
        if slack_value >= -tol {
            values[n + r] = slack_value;
            basis.push(n + r);
            state[n + r] = VarState::Basic(r);
        } else {
            artificial_rows.push((r, -slack_value));
            basis.push(usize::MAX); // patched below
            state[n + r] = VarState::AtLower;
            values[n + r] = 0.0;
        }
        rows.push(dense);
    }

    // Append one artificial column per infeasible row.
    let n_art = artificial_rows.len();
    let total = n + m + n_art;
    for row in rows.iter_mut() {
        row.resize(total, 0.0);
    }
    values.resize(total, 0.0);
    lower.resize(total, 0.0);
    upper.resize(total, f64::INFINITY);
    state.resize(total, VarState::AtLower);
    for (k, (r, value)) in artificial_rows.iter().enumerate() {
        let col = n + m + k;
        rows[*r][col] = -1.0;
        // Normalize so the basic column is +1.
        for v in rows[*r].iter_mut() {
            *v = -*v;
        }
        values[col] = *value;
        basis[*r] = col;
        state[col] = VarState::Basic(*r);
    }

    let mut tab = Tableau {
        rows,
        obj_row: vec![0.0; total],
        values,
        lower,
        upper,
        state,
        basis,
        n_structural: n,
        iterations: 0,
        degenerate_streak: 0,
        tol,
    };
    let limit = 20_000 + 200 * (m as u64 + n as u64);

    if n_art > 0 {
        let mut phase1_costs = vec![0.0; total];
        for k in 0..n_art {
            phase1_costs[n + m + k] = -1.0;
        }
        tab.compute_obj_row(&phase1_costs);
        tab.run(limit)?;
        let infeasibility: f64 = (0..n_art).map(|k| tab.values[n + m + k]).sum();
        if infeasibility > tol {
            return Ok(LpOutcome::Infeasible);
        }
        // Lock artificials at zero for phase 2.
        for k in 0..n_art {
            let col = n + m + k;
            tab.upper[col] = 0.0;
            tab.values[col] = 0.0;
        }
        tab.degenerate_streak = 0;
    }

    let mut phase2_costs = vec![0.0; total];
    phase2_costs[..n].copy_from_slice(&lp.objective);
    tab.compute_obj_row(&phase2_costs);
    tab.run(limit)?;

    let x: Vec<f64> = tab.values[..tab.n_structural].to_vec();
    // Sanity: the reported point must satisfy the original rows.
    for row in &lp.rows {
        let lhs: f64 = row.terms.iter().map(|(j, c)| c * x[*j]).sum();
        let ok = match row.sense {
            Sense::Le => lhs <= row.rhs + 1e-6,
            Sense::Ge => lhs >= row.rhs - 1e-6,
            Sense::Eq => (lhs - row.rhs).abs() <= 1e-6,
        };
        if !ok {
            return Err(LpError::NumericalBreakdown {
                detail: format!("final point violates a row by {:+e}", lhs - row.rhs),
            });
        }
    }
    let objective = dot(&lp.objective, &x);
    Ok(LpOutcome::Optimal { x, objective, iterations: tab.iterations })
}

fn negate(terms: &[(usize, f64)]) -> Vec<(usize, f64)> {
    terms.iter().map(|(j, c)| (*j, -c)).collect()
}

fn dot(c: &[f64], x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(objective: Vec<f64>, rows: Vec<(Vec<(usize, f64)>, Sense, f64)>, bounds: Vec<(f64, f64)>) -> LinearProgram {
        LinearProgram {
            objective,
            rows: rows
                .into_iter()
                .map(|(terms, sense, rhs)| LpRow { terms, sense, rhs })
                .collect(),
            bounds,
        }
    }

    fn optimal(lp: &LinearProgram) -> (Vec<f64>, f64) {
        match solve_lp(lp, FEASIBILITY_TOL).unwrap() {
            LpOutcome::Optimal { x, objective, .. } => (x, objective),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn single_variable_cap() {
        let p = lp(vec![1.0], vec![(vec![(0, 1.0)], Sense::Le, 0.5)], vec![(0.0, 1.0)]);
        let (x, obj) = optimal(&p);
        assert!((x[0] - 0.5).abs() < 1e-9);
        assert!((obj - 0.5).abs() < 1e-9);
    }

    #[test]
    fn two_variable_face() {
        let p = lp(
            vec![1.0, 1.0],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0)],
            vec![(0.0, 1.0), (0.0, 1.0)],
        );
        let (x, obj) = optimal(&p);
        assert!((obj - 1.0).abs() < 1e-9);
        assert!((x[0] + x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn equality_row_binds() {
        let p = lp(
            vec![1.0, -1.0],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Eq, 1.0)],
            vec![(0.0, 1.0), (0.0, 1.0)],
        );
        let (x, obj) = optimal(&p);
        assert!((x[0] - 1.0).abs() < 1e-9);
        assert!((x[1]).abs() < 1e-9);
        assert!((obj - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasibility() {
        // x >= 0.8 and x <= 0.2 cannot both hold.
        let p = lp(
            vec![1.0],
            vec![
                (vec![(0, 1.0)], Sense::Ge, 0.8),
                (vec![(0, 1.0)], Sense::Le, 0.2),
            ],
            vec![(0.0, 1.0)],
        );
        assert_eq!(solve_lp(&p, FEASIBILITY_TOL).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn fixed_bound_via_branching() {
        // Variable fixed to 1 by bounds; constraint forces the other to 0.
        let p = lp(
            vec![1.0, 2.0],
            vec![(vec![(0, 1.0), (1, 1.0)], Sense::Le, 1.0)],
            vec![(1.0, 1.0), (0.0, 1.0)],
        );
        let (x, obj) = optimal(&p);
        assert!((x[0] - 1.0).abs() < 1e-9);
        assert!(x[1].abs() < 1e-9);
        assert!((obj - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_after_fixing() {
        // gamma fixed at 1 but gamma <= alpha and alpha fixed at 0.
        let p = lp(
            vec![0.0, 0.0],
            vec![(vec![(0, 1.0), (1, -1.0)], Sense::Le, 0.0)],
            vec![(1.0, 1.0), (0.0, 0.0)],
        );
        assert_eq!(solve_lp(&p, FEASIBILITY_TOL).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn relaxation_of_three_variable_model_is_integral() {
        use crate::ilp::tests_support::tiny_problem_public as tiny;
        let problem = tiny(10);
        let bounds = vec![(0.0, 1.0); problem.n_vars()];
        let relax = LinearProgram::from_ilp(&problem, &bounds);
        let (x, obj) = optimal(&relax);
        assert!((obj - 5.0).abs() < 1e-9);
        for v in x {
            assert!(v.abs() < 1e-9 || (v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn no_rows_means_bound_selection() {
        let p = lp(vec![2.0, -3.0], vec![], vec![(0.0, 1.0), (0.0, 1.0)]);
        let (x, obj) = optimal(&p);
        assert_eq!(x, vec![1.0, 0.0]);
        assert_eq!(obj, 2.0);
    }
}
