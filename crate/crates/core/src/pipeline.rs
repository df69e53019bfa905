//! End-to-end wiring: topic → phrases → salience → compatibility → program
//! → exact solve → summary, plus the on-disk artifact formats.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::compat::{build_compatibility, build_similarity, CompatibilityMatrix, CorefCluster, DanglingMention, SimilarityMatrix};
use crate::generate::{assemble, provenance_lines, Summary};
use crate::ilp::{build_problem, validate_solution, BuildError, GenerationConfig, IlpProblem};
use crate::phrase::{extract_phrases, ExtractWarning, PhraseSet};
use crate::salience::{build_concept_table, score_phrases, Concept, ConceptTable, SalienceConfig, SalienceError, Stopwords};
use crate::solver::{solve_ilp, IlpSolution, SolveError, SolveStatus, SolverLimits, SolverStats};
use crate::treebank::Topic;

/// Default similarity threshold for alternative VPs.
pub const DEFAULT_JACCARD_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub salience: SalienceConfig,
    pub generation: GenerationConfig,
    /// Strict lower bound for treating two VPs as alternatives.
    pub jaccard_threshold: f64,
    pub limits: SolverLimits,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            salience: SalienceConfig::default(),
            generation: GenerationConfig::default(),
            jaccard_threshold: DEFAULT_JACCARD_THRESHOLD,
            limits: SolverLimits::default(),
        }
    }
}

/// Everything a run produces, kept for auditing and tests.
pub struct PipelineArtifacts {
    pub phrases: PhraseSet,
    pub concept_sets: Vec<BTreeSet<Concept>>,
    pub table: ConceptTable,
    pub clusters: Vec<CorefCluster>,
    pub compat: CompatibilityMatrix,
    pub sims: SimilarityMatrix,
    pub problem: IlpProblem,
    pub solution: IlpSolution,
    pub stats: SolverStats,
    pub summary: Summary,
    pub warnings: Vec<String>,
    /// True when a solver limit stopped the search and the summary comes
    /// from the incumbent.
    pub limit_hit: bool,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Salience(#[from] SalienceError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("optimal assignment violates constraints: {0:?}")]
    InvalidSolution(Vec<crate::ilp::ConstraintTag>),
}

/// Runs the full pipeline on one topic.
pub fn summarize_topic(
    topic: &Topic,
    cfg: &PipelineConfig,
    stopwords: &Stopwords,
) -> Result<PipelineArtifacts, PipelineError> {
    let mut warnings: Vec<String> = Vec::new();

    let (mut phrases, extract_warnings) = extract_phrases(topic);
    for ExtractWarning { doc_id, sent_idx, reason } in extract_warnings {
        warnings.push(format!("{doc_id}:{sent_idx}: {reason}"));
    }

    let table = build_concept_table(topic, &cfg.salience, stopwords)?;
    let concept_sets = score_phrases(&mut phrases, topic, &table, stopwords, cfg.salience.use_ne);

    let (compat, clusters, dangling) =
        build_compatibility(topic, &phrases, &concept_sets, cfg.jaccard_threshold);
    for DanglingMention { doc_id, sent_idx, span } in dangling {
        warnings.push(format!(
            "{doc_id}:{sent_idx}:{span}: coref mention is not an extracted NP, dropped"
        ));
    }
    let sims = build_similarity(&phrases, &clusters, &concept_sets, cfg.jaccard_threshold);

    let problem = build_problem(&phrases, &compat, &sims, &cfg.generation)?;

    let (solution, stats, limit_hit) = match solve_ilp(&problem, &cfg.limits) {
        Ok((solution, stats)) => (solution, stats, false),
        Err(SolveError::LimitExceeded { incumbent, stats }) => {
            warnings.push(format!(
                "solver limit reached after {} nodes; using incumbent",
                stats.nodes_explored
            ));
            match incumbent {
                Some(solution) => (solution, stats, true),
                None => (
                    IlpSolution {
                        assignment: vec![false; problem.n_vars()],
                        objective_value: 0.0,
                        status: SolveStatus::Optimal,
                    },
                    stats,
                    true,
                ),
            }
        }
        Err(other) => return Err(PipelineError::Solver(other.to_string())),
    };

    if solution.status == SolveStatus::Optimal {
        let report = validate_solution(&problem, &solution.assignment)
            .expect("solution arity matches its problem");
        if !report.ok() {
            return Err(PipelineError::InvalidSolution(report.tags()));
        }
    }

    let summary = assemble(
        &solution,
        &problem,
        &phrases,
        topic,
        cfg.generation.mode,
        cfg.generation.length_budget,
    );

    Ok(PipelineArtifacts {
        phrases,
        concept_sets,
        table,
        clusters,
        compat,
        sims,
        problem,
        solution,
        stats,
        summary,
        warnings,
        limit_hit,
    })
}

/// Writes the per-topic artifact files into `out_dir`:
/// `<topic>.summary.txt`, `<topic>.provenance.txt`, `<topic>.problem.lp`,
/// `<topic>.solution.tsv`. Output bytes are deterministic for identical
/// inputs and configuration (timing never reaches the files).
pub fn write_artifacts(
    out_dir: &Path,
    topic_id: &str,
    artifacts: &PipelineArtifacts,
) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    let mut summary_text = artifacts.summary.text();
    if !summary_text.is_empty() {
        summary_text.push('\n');
    }
    fs::write(out_dir.join(format!("{topic_id}.summary.txt")), summary_text)?;
    fs::write(
        out_dir.join(format!("{topic_id}.provenance.txt")),
        provenance_lines(&artifacts.summary, &artifacts.phrases),
    )?;
    fs::write(
        out_dir.join(format!("{topic_id}.problem.lp")),
        artifacts.problem.to_lp_text(),
    )?;
    fs::write(
        out_dir.join(format!("{topic_id}.solution.tsv")),
        artifacts.solution.to_tsv(&artifacts.problem, Some(&artifacts.stats)),
    )?;
    Ok(())
}

/// Optional audit dumps for the compatibility and similarity matrices.
pub fn write_matrix_dumps(
    out_dir: &Path,
    topic_id: &str,
    artifacts: &PipelineArtifacts,
) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::write(out_dir.join(format!("{topic_id}.gamma.tsv")), artifacts.compat.gamma.dump_tsv())?;
    fs::write(
        out_dir.join(format!("{topic_id}.gamma_tilde.tsv")),
        artifacts.compat.gamma_tilde.dump_tsv(),
    )?;
    fs::write(out_dir.join(format!("{topic_id}.r_np.tsv")), artifacts.sims.r_np.dump_tsv())?;
    fs::write(out_dir.join(format!("{topic_id}.r_vp.tsv")), artifacts.sims.r_vp.dump_tsv())?;
    Ok(())
}

/// Runs `count` random oracle-equivalence checks: branch-and-bound must
/// match exhaustive enumeration exactly. Returns the deterministic report,
/// or the serialized counterexample on the first mismatch.
pub fn solver_check(count: usize, size: usize, seed: u64) -> Result<String, SolverCheckFailure> {
    use rand::SeedableRng;
    if size > crate::solver::DEFAULT_BRUTE_CAP {
        return Err(SolverCheckFailure::TooLarge {
            size,
            cap: crate::solver::DEFAULT_BRUTE_CAP,
        });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = String::new();
    for instance in 0..count {
        let problem = crate::ilp::random_problem(&mut rng, size);
        let brute = crate::solver::solve_brute(&problem, crate::solver::DEFAULT_BRUTE_CAP)
            .expect("generator respects the oracle cap");
        let solved = solve_ilp(&problem, &SolverLimits::default()).map_err(|e| {
            SolverCheckFailure::Mismatch {
                instance,
                detail: format!("solver error: {e}"),
                problem_text: problem.to_lp_text(),
            }
        })?;
        let (solution, stats) = solved;
        if solution.status != brute.status {
            return Err(SolverCheckFailure::Mismatch {
                instance,
                detail: format!("status {:?} vs oracle {:?}", solution.status, brute.status),
                problem_text: problem.to_lp_text(),
            });
        }
        if solution.status == SolveStatus::Optimal
            && (solution.objective_value - brute.objective_value).abs() > 1e-9
        {
            return Err(SolverCheckFailure::Mismatch {
                instance,
                detail: format!(
                    "objective {} vs oracle {}",
                    solution.objective_value, brute.objective_value
                ),
                problem_text: problem.to_lp_text(),
            });
        }
        report.push_str(&format!(
            "instance {instance}: vars={} status={} objective={} nodes={} ok\n",
            problem.n_vars(),
            match solution.status {
                SolveStatus::Optimal => "optimal",
                SolveStatus::Infeasible => "infeasible",
            },
            solution.objective_value,
            stats.nodes_explored,
        ));
    }
    report.push_str(&format!("{count}/{count} instances matched the oracle\n"));
    Ok(report)
}

#[derive(Debug, Error)]
pub enum SolverCheckFailure {
    #[error("instance size {size} exceeds the oracle cap {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("instance {instance} mismatch: {detail}")]
    Mismatch {
        instance: usize,
        detail: String,
        problem_text: String,
    },
}
