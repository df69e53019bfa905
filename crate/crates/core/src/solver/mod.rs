//! Exact solving of the 0-1 phrase-selection programs.

pub mod branch_bound;
pub mod brute;
pub mod simplex;

pub use branch_bound::{solve_ilp, SolveError, SolverLimits, SolverStats, GAP_TOL, INTEGRALITY_TOL};
pub use brute::{solve_brute, BruteError, DEFAULT_BRUTE_CAP};
pub use simplex::{solve_lp, LinearProgram, LpError, LpOutcome, LpRow, FEASIBILITY_TOL};

/// Outcome status of an exact solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

/// An assignment together with its exact objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct IlpSolution {
    pub assignment: Vec<bool>,
    pub objective_value: f64,
    pub status: SolveStatus,
}

impl IlpSolution {
    /// Parses the [`IlpSolution::to_tsv`] body back against its problem.
    pub fn from_tsv(problem: &crate::ilp::IlpProblem, text: &str) -> Option<IlpSolution> {
        let mut assignment = vec![false; problem.n_vars()];
        let mut status = SolveStatus::Optimal;
        let mut objective = 0.0f64;
        for line in text.lines() {
            let (key, value) = line.split_once('\t')?;
            match key {
                "# status" => {
                    status = match value {
                        "optimal" => SolveStatus::Optimal,
                        "infeasible" => SolveStatus::Infeasible,
                        _ => return None,
                    }
                }
                "# objective" => objective = value.parse().ok()?,
                _ if key.starts_with('#') => {}
                name => {
                    let idx = problem.var_index(name)?;
                    assignment[idx] = value.trim() == "1";
                }
            }
        }
        Some(IlpSolution { assignment, objective_value: objective, status })
    }

    /// Solution file body: `var\tvalue` per line plus a deterministic stats
    /// footer (wall time deliberately excluded so outputs are byte-stable).
    pub fn to_tsv(&self, problem: &crate::ilp::IlpProblem, stats: Option<&SolverStats>) -> String {
        let mut out = String::new();
        out.push_str(&format!("# status\t{}\n", match self.status {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
        }));
        out.push_str(&format!("# objective\t{}\n", self.objective_value));
        for (idx, var) in problem.vars.iter().enumerate() {
            let value = if *self.assignment.get(idx).unwrap_or(&false) { 1 } else { 0 };
            out.push_str(&format!("{}\t{}\n", var.name, value));
        }
        if let Some(stats) = stats {
            out.push_str(&format!("# nodes_explored\t{}\n", stats.nodes_explored));
            out.push_str(&format!("# lp_iterations\t{}\n", stats.lp_iterations));
            out.push_str(&format!("# best_bound\t{}\n", stats.best_bound));
            out.push_str(&format!("# incumbent\t{}\n", stats.incumbent_value));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::random_problem;
    use rand::SeedableRng;

    #[test]
    fn lp_relaxation_dominates_ilp_optimum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let p = random_problem(&mut rng, 14);
            let bounds = vec![(0.0, 1.0); p.n_vars()];
            let lp = LinearProgram::from_ilp(&p, &bounds);
            let lp_obj = match solve_lp(&lp, FEASIBILITY_TOL).unwrap() {
                LpOutcome::Optimal { objective, .. } => objective,
                other => panic!("relaxation should be feasible, got {other:?}"),
            };
            let brute = solve_brute(&p, DEFAULT_BRUTE_CAP).unwrap();
            if brute.status == SolveStatus::Optimal {
                assert!(
                    lp_obj >= brute.objective_value - 1e-7,
                    "LP {lp_obj} < ILP {}",
                    brute.objective_value
                );
            }
        }
    }

    #[test]
    fn solution_tsv_round_trips() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let p = random_problem(&mut rng, 12);
        let (sol, stats) = solve_ilp(&p, &SolverLimits::default()).unwrap();
        let text = sol.to_tsv(&p, Some(&stats));
        assert_eq!(text, sol.to_tsv(&p, Some(&stats)));
        let back = IlpSolution::from_tsv(&p, &text).unwrap();
        assert_eq!(back.assignment, sol.assignment);
        assert_eq!(back.objective_value, sol.objective_value);
        assert_eq!(back.status, sol.status);
    }

    #[test]
    fn solving_a_serialized_problem_matches_the_original() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let p = random_problem(&mut rng, 14);
            let reread = crate::ilp::IlpProblem::from_lp_text(&p.to_lp_text()).unwrap();
            let (a, _) = solve_ilp(&p, &SolverLimits::default()).unwrap();
            let (b, _) = solve_ilp(&reread, &SolverLimits::default()).unwrap();
            assert_eq!(a.assignment, b.assignment);
            assert_eq!(a.objective_value, b.objective_value);
        }
    }

    #[test]
    fn optimal_solutions_keep_selection_coherence() {
        // In an optimum: a selected VP has exactly one anchor, a selected NP
        // anchors at least one VP, and pair indicators equal the product of
        // their members.
        use crate::ilp::VarRole;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let p = random_problem(&mut rng, 16);
            let (sol, _) = solve_ilp(&p, &SolverLimits::default()).unwrap();
            if sol.status != SolveStatus::Optimal {
                continue;
            }
            let value = |role: VarRole| -> Option<bool> {
                p.vars
                    .iter()
                    .position(|v| v.role == role)
                    .map(|i| sol.assignment[i])
            };
            for (idx, var) in p.vars.iter().enumerate() {
                match var.role {
                    VarRole::VpSelect { vp } if sol.assignment[idx] => {
                        let anchors = p
                            .vars
                            .iter()
                            .zip(&sol.assignment)
                            .filter(|(v, set)| {
                                **set && matches!(v.role, VarRole::SentenceGen { vp: j, .. } if j == vp)
                            })
                            .count();
                        assert_eq!(anchors, 1, "selected VP must have exactly one anchor");
                    }
                    VarRole::NpSelect { np } if sol.assignment[idx] => {
                        let anchored = p
                            .vars
                            .iter()
                            .zip(&sol.assignment)
                            .filter(|(v, set)| {
                                **set && matches!(v.role, VarRole::SentenceGen { np: i, .. } if i == np)
                            })
                            .count();
                        assert!(anchored >= 1, "selected NP must anchor a VP");
                    }
                    VarRole::NpPair { a, b } => {
                        let want = value(VarRole::NpSelect { np: a }).unwrap()
                            && value(VarRole::NpSelect { np: b }).unwrap();
                        assert_eq!(sol.assignment[idx], want, "NP pair coherence");
                    }
                    VarRole::VpPair { a, b } => {
                        let want = value(VarRole::VpSelect { vp: a }).unwrap()
                            && value(VarRole::VpSelect { vp: b }).unwrap();
                        assert_eq!(sol.assignment[idx], want, "VP pair coherence");
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn zero_similarity_pairs_do_not_change_the_optimum() {
        use crate::ilp::{Constraint, ConstraintTag, Sense, VarRole};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let p = random_problem(&mut rng, 12);
            let (base, _) = solve_ilp(&p, &SolverLimits::default()).unwrap();
            // Append a pair variable with zero coefficient plus its three
            // coupling rows; the optimum value must not move.
            let mut extended = p.clone();
            let a = extended
                .vars
                .iter()
                .position(|v| matches!(v.role, VarRole::NpSelect { .. }))
                .unwrap();
            let pair = extended.add_var(VarRole::NpPair { a: 900, b: 901 }, 0.0);
            extended.constraints.push(Constraint {
                tag: ConstraintTag::CoOccurrence,
                terms: vec![(a, -1.0), (pair, 1.0)],
                sense: Sense::Le,
                rhs: 0.0,
            });
            extended.constraints.push(Constraint {
                tag: ConstraintTag::CoOccurrence,
                terms: vec![(a, -1.0), (pair, 1.0)],
                sense: Sense::Le,
                rhs: 0.0,
            });
            extended.constraints.push(Constraint {
                tag: ConstraintTag::CoOccurrence,
                terms: vec![(a, 2.0), (pair, -1.0)],
                sense: Sense::Le,
                rhs: 1.0,
            });
            let (ext, _) = solve_ilp(&extended, &SolverLimits::default()).unwrap();
            assert_eq!(ext.status, base.status);
            if base.status == SolveStatus::Optimal {
                assert!((ext.objective_value - base.objective_value).abs() <= 1e-9);
            }
        }
    }
}
