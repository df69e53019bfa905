//! Multi-document summarization by phrase selection and merging.
//!
//! The pipeline ingests pre-parsed constituency trees, decomposes sentences
//! into candidate noun and verb phrases, scores them with position-weighted
//! concept salience, builds NP/VP compatibility and similarity matrices,
//! and solves a 0-1 integer linear program exactly (own simplex inside
//! branch-and-bound) to pick and merge phrases into new sentences. ROUGE-2
//! and ROUGE-SU4 scoring close the loop.
//!
//! Entry points: [`treebank::load_topic`] for ingestion,
//! [`pipeline::summarize_topic`] for the full run, and the modules below for
//! the individual stages.

pub mod compat;
pub mod generate;
pub mod ilp;
pub mod phrase;
pub mod pipeline;
pub mod rouge;
pub mod salience;
pub mod solver;
pub mod treebank;

pub use compat::{
    build_compatibility, build_similarity, jaccard, CompatibilityMatrix, CorefCluster,
    SimilarityMatrix,
};
pub use generate::{
    assemble, classify_sentence, type_distribution, SentenceKind, Summary, SummarySentence,
};
pub use ilp::{
    build_problem, validate_solution, ConstraintTag, GenerationConfig, IlpProblem, Mode,
};
pub use phrase::{extract_phrases, same_path, Phrase, PhraseId, PhraseKind, PhraseSet};
pub use pipeline::{summarize_topic, PipelineArtifacts, PipelineConfig};
pub use rouge::{rouge2, rouge_su4, RougeScore};
pub use salience::{
    build_concept_table, paragraph_weight, phrase_salience, Concept, ConceptTable, SalienceConfig,
    Stopwords,
};
pub use solver::{solve_brute, solve_ilp, solve_lp, IlpSolution, SolveStatus, SolverLimits, SolverStats};
pub use treebank::{
    load_topic, parse_tree, ConstituencyTree, Document, Sentence, Span, Topic, TreeNode,
};
