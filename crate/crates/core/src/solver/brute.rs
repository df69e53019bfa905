//! Exhaustive 0-1 enumeration, the verification oracle for the exact solver.

use thiserror::Error;

use crate::ilp::IlpProblem;

use super::{IlpSolution, SolveStatus};

/// Largest variable count the oracle will enumerate.
pub const DEFAULT_BRUTE_CAP: usize = 25;

const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BruteError {
    #[error("problem has {got} variables, oracle cap is {cap}")]
    TooLarge { got: usize, cap: usize },
}

/// Enumerates every assignment in lexicographic order (variable 0 is the
/// most significant bit) and returns the best feasible one; ties keep the
/// lexicographically smallest assignment.
pub fn solve_brute(problem: &IlpProblem, cap: usize) -> Result<IlpSolution, BruteError> {
    let n = problem.n_vars();
    if n > cap {
        return Err(BruteError::TooLarge { got: n, cap });
    }
    if n == 0 {
        return Ok(IlpSolution {
            assignment: Vec::new(),
            objective_value: 0.0,
            status: SolveStatus::Optimal,
        });
    }

    let mut best: Option<(Vec<bool>, f64)> = None;
    let mut assignment = vec![false; n];
    'outer: for bits in 0u64..(1u64 << n) {
        for (k, slot) in assignment.iter_mut().enumerate() {
            *slot = bits >> (n - 1 - k) & 1 == 1;
        }
        for c in &problem.constraints {
            if !c.holds(&assignment, FEAS_TOL) {
                continue 'outer;
            }
        }
        let objective = problem.objective_value(&assignment);
        match &best {
            Some((_, incumbent)) if objective <= *incumbent => {}
            _ => best = Some((assignment.clone(), objective)),
        }
    }

    Ok(match best {
        Some((assignment, objective_value)) => IlpSolution {
            assignment,
            objective_value,
            status: SolveStatus::Optimal,
        },
        None => IlpSolution {
            assignment: Vec::new(),
            objective_value: f64::NEG_INFINITY,
            status: SolveStatus::Infeasible,
        },
    })
}
