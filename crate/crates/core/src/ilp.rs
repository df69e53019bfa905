//! The 0-1 program that selects and merges phrases.
//!
//! Objective: maximize summed salience of selected NPs and VPs, minus
//! redundancy penalties on similar selected pairs. Constraint families:
//!
//! * `np_validity`   — α_i ≥ γ̃_ij and Σ_j γ̃_ij ≥ α_i
//! * `vp_legality`   — Σ_i γ̃_ij = β_j
//! * `not_i_within_i`— phrases on one tree path are mutually exclusive
//! * `co_occurrence` — pair indicators track products of selections
//! * `sentence_number` — Σ α_i ≤ K
//! * `short_sentence`  — no VP from a sentence shorter than M
//! * `pronoun`         — no pronoun NP as a subject
//! * `length`          — Σ l(N_i)α_i + Σ l(V_j)β_j ≤ L
//!
//! Pair variables are only instantiated where the similarity coefficient is
//! nonzero; omitted pairs have objective coefficient 0 and cannot change the
//! optimum. Extractive and compressive modes restrict the sentence-generation
//! pairs to the base Γ; extractive mode additionally drops level-2 phrases
//! and ties each top VP to its same-sentence NP.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::compat::{CompatibilityMatrix, SimilarityMatrix};
use crate::phrase::{same_path, PhraseSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Abstractive,
    Compressive,
    Extractive,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Abstractive => write!(f, "abstractive"),
            Mode::Compressive => write!(f, "compressive"),
            Mode::Extractive => write!(f, "extractive"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abstractive" => Ok(Mode::Abstractive),
            "compressive" => Ok(Mode::Compressive),
            "extractive" => Ok(Mode::Extractive),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

/// Summary generation parameters.
#[derive(Debug, Clone, Copy)]
pub struct GenerationConfig {
    /// Word budget L for the whole summary.
    pub length_budget: usize,
    /// Maximum number of generated sentences K.
    pub max_sentences: usize,
    /// Minimum source-sentence length M for VP eligibility.
    pub min_sentence_len: usize,
    pub mode: Mode,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            length_budget: 100,
            max_sentences: 10,
            min_sentence_len: 10,
            mode: Mode::Abstractive,
        }
    }
}

/// What a decision variable stands for. NP/VP indices are positions in the
/// phrase set's NP/VP lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    /// α_i — NP i is selected.
    NpSelect { np: usize },
    /// β_j — VP j is selected.
    VpSelect { vp: usize },
    /// α_ij — NPs i and j co-occur.
    NpPair { a: usize, b: usize },
    /// β_ij — VPs i and j co-occur.
    VpPair { a: usize, b: usize },
    /// γ̃_ij — NP i and VP j form a sentence.
    SentenceGen { np: usize, vp: usize },
}

impl VarRole {
    pub fn name(&self) -> String {
        match self {
            VarRole::NpSelect { np } => format!("a{np}"),
            VarRole::VpSelect { vp } => format!("b{vp}"),
            VarRole::NpPair { a, b } => format!("aa{a}_{b}"),
            VarRole::VpPair { a, b } => format!("bb{a}_{b}"),
            VarRole::SentenceGen { np, vp } => format!("g{np}_{vp}"),
        }
    }

    fn parse(name: &str) -> Option<VarRole> {
        fn split_pair(rest: &str) -> Option<(usize, usize)> {
            let (a, b) = rest.split_once('_')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        }
        if let Some(rest) = name.strip_prefix("aa") {
            let (a, b) = split_pair(rest)?;
            return Some(VarRole::NpPair { a, b });
        }
        if let Some(rest) = name.strip_prefix("bb") {
            let (a, b) = split_pair(rest)?;
            return Some(VarRole::VpPair { a, b });
        }
        if let Some(rest) = name.strip_prefix('g') {
            let (np, vp) = split_pair(rest)?;
            return Some(VarRole::SentenceGen { np, vp });
        }
        if let Some(rest) = name.strip_prefix('a') {
            return Some(VarRole::NpSelect { np: rest.parse().ok()? });
        }
        if let Some(rest) = name.strip_prefix('b') {
            return Some(VarRole::VpSelect { vp: rest.parse().ok()? });
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IlpVar {
    pub name: String,
    pub role: VarRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Eq => write!(f, "="),
            Sense::Ge => write!(f, ">="),
        }
    }
}

/// Provenance of a constraint; one tag per constraint family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintTag {
    NpValidity,
    VpLegality,
    NotIWithinI,
    CoOccurrence,
    SentenceNumber,
    ShortSentence,
    Pronoun,
    Length,
    ModeTie,
}

impl ConstraintTag {
    pub const ALL: [ConstraintTag; 9] = [
        ConstraintTag::NpValidity,
        ConstraintTag::VpLegality,
        ConstraintTag::NotIWithinI,
        ConstraintTag::CoOccurrence,
        ConstraintTag::SentenceNumber,
        ConstraintTag::ShortSentence,
        ConstraintTag::Pronoun,
        ConstraintTag::Length,
        ConstraintTag::ModeTie,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstraintTag::NpValidity => "np_validity",
            ConstraintTag::VpLegality => "vp_legality",
            ConstraintTag::NotIWithinI => "not_i_within_i",
            ConstraintTag::CoOccurrence => "co_occurrence",
            ConstraintTag::SentenceNumber => "sentence_number",
            ConstraintTag::ShortSentence => "short_sentence",
            ConstraintTag::Pronoun => "pronoun",
            ConstraintTag::Length => "length",
            ConstraintTag::ModeTie => "mode_tie",
        }
    }

    fn parse(s: &str) -> Option<ConstraintTag> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub tag: ConstraintTag,
    /// `(variable index, coefficient)` pairs, index ascending.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, assignment: &[bool]) -> f64 {
        self.terms
            .iter()
            .map(|(v, c)| if assignment[*v] { *c } else { 0.0 })
            .sum()
    }

    pub fn holds(&self, assignment: &[bool], tol: f64) -> bool {
        let lhs = self.lhs(assignment);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
            Sense::Ge => lhs >= self.rhs - tol,
        }
    }
}

/// A 0-1 integer linear program over binary variables.
#[derive(Debug, Clone, Default)]
pub struct IlpProblem {
    pub vars: Vec<IlpVar>,
    /// Objective coefficient per variable (maximize).
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl IlpProblem {
    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn add_var(&mut self, role: VarRole, objective: f64) -> usize {
        let idx = self.vars.len();
        self.vars.push(IlpVar { name: role.name(), role });
        self.objective.push(objective);
        idx
    }

    /// Objective value of an assignment, accumulated in ascending variable
    /// index order so repeated evaluations are bit-identical.
    pub fn objective_value(&self, assignment: &[bool]) -> f64 {
        debug_assert_eq!(assignment.len(), self.objective.len());
        let mut total = 0.0;
        for (idx, coef) in self.objective.iter().enumerate() {
            if assignment[idx] {
                total += coef;
            }
        }
        total
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    fn format_terms(&self, terms: &[(usize, f64)]) -> String {
        if terms.is_empty() {
            return "0".to_string();
        }
        terms
            .iter()
            .map(|(v, c)| format!("{c} {}", self.vars[*v].name))
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Plain-text serialization, bit-exact across platforms (shortest
    /// round-trip float formatting).
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        out.push_str("vars:");
        for v in &self.vars {
            out.push(' ');
            out.push_str(&v.name);
        }
        out.push('\n');
        let obj_terms: Vec<(usize, f64)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (i, *c))
            .collect();
        out.push_str(&format!("max: {}\n", self.format_terms(&obj_terms)));
        for c in &self.constraints {
            out.push_str(&format!(
                "{} {} {} # {}\n",
                self.format_terms(&c.terms),
                c.sense,
                c.rhs,
                c.tag
            ));
        }
        out
    }

    /// Parses the [`IlpProblem::to_lp_text`] format.
    pub fn from_lp_text(text: &str) -> Result<IlpProblem, LpFormatError> {
        let mut problem = IlpProblem::default();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut lines = text.lines().enumerate();

        let (_, vars_line) = lines.next().ok_or(LpFormatError::Truncated)?;
        let body = vars_line
            .strip_prefix("vars:")
            .ok_or_else(|| LpFormatError::BadLine { line: 1 })?;
        for name in body.split_whitespace() {
            let role = VarRole::parse(name).ok_or_else(|| LpFormatError::BadVariable {
                name: name.to_string(),
            })?;
            index.insert(name.to_string(), problem.vars.len());
            problem.vars.push(IlpVar { name: name.to_string(), role });
            problem.objective.push(0.0);
        }

        let parse_terms = |text: &str,
                           index: &BTreeMap<String, usize>,
                           line: usize|
         -> Result<Vec<(usize, f64)>, LpFormatError> {
            let text = text.trim();
            if text.is_empty() || text == "0" {
                return Ok(Vec::new());
            }
            let mut terms = Vec::new();
            for piece in text.split(" + ") {
                let (coef, name) = piece
                    .trim()
                    .split_once(' ')
                    .ok_or(LpFormatError::BadLine { line })?;
                let coef: f64 = coef.parse().map_err(|_| LpFormatError::BadLine { line })?;
                let var = *index
                    .get(name.trim())
                    .ok_or_else(|| LpFormatError::BadVariable { name: name.to_string() })?;
                terms.push((var, coef));
            }
            Ok(terms)
        };

        let (obj_no, obj_line) = lines.next().ok_or(LpFormatError::Truncated)?;
        let obj_body = obj_line
            .strip_prefix("max:")
            .ok_or(LpFormatError::BadLine { line: obj_no + 1 })?;
        for (var, coef) in parse_terms(obj_body, &index, obj_no + 1)? {
            problem.objective[var] = coef;
        }

        for (line_no, line) in lines {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let (body, tag_text) = trimmed
                .split_once('#')
                .ok_or(LpFormatError::BadLine { line: line_no + 1 })?;
            let tag = ConstraintTag::parse(tag_text.trim())
                .ok_or(LpFormatError::BadLine { line: line_no + 1 })?;
            let (sense, sep) = if body.contains("<=") {
                (Sense::Le, "<=")
            } else if body.contains(">=") {
                (Sense::Ge, ">=")
            } else {
                (Sense::Eq, "=")
            };
            let (lhs, rhs) = body
                .split_once(sep)
                .ok_or(LpFormatError::BadLine { line: line_no + 1 })?;
            let rhs: f64 = rhs
                .trim()
                .parse()
                .map_err(|_| LpFormatError::BadLine { line: line_no + 1 })?;
            problem.constraints.push(Constraint {
                tag,
                terms: parse_terms(lhs, &index, line_no + 1)?,
                sense,
                rhs,
            });
        }
        Ok(problem)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LpFormatError {
    #[error("truncated problem text")]
    Truncated,
    #[error("malformed line {line}")]
    BadLine { line: usize },
    #[error("unknown variable {name}")]
    BadVariable { name: String },
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("no selectable candidates: {reason}")]
    NoCandidates { reason: String },
    #[error("phrase/matrix index mismatch: {detail}")]
    IndexMismatch { detail: String },
}

/// Everything the constraint emitter needs, independent of where the data
/// came from. Indices are local (0-based over included phrases); `np_global`
/// and `vp_global` map them back to phrase-set positions.
pub(crate) struct ModelInputs {
    pub np_global: Vec<usize>,
    pub vp_global: Vec<usize>,
    pub np_salience: Vec<f64>,
    pub vp_salience: Vec<f64>,
    pub np_length: Vec<usize>,
    pub vp_length: Vec<usize>,
    pub np_pronoun: Vec<bool>,
    pub vp_sentence_len: Vec<usize>,
    /// Allowed sentence-generation pairs, already mode-restricted.
    pub gen_pairs: Vec<(usize, usize)>,
    pub np_paths: Vec<(usize, usize)>,
    pub vp_paths: Vec<(usize, usize)>,
    /// Nonzero similarity entries, local i < j.
    pub r_np: Vec<(usize, usize, f64)>,
    pub r_vp: Vec<(usize, usize, f64)>,
    /// Extractive-mode equalities α_i = β_j.
    pub ties: Vec<(usize, usize)>,
    pub cfg: GenerationConfig,
}

pub(crate) fn emit_problem(inputs: &ModelInputs) -> IlpProblem {
    let cfg = &inputs.cfg;
    let n_np = inputs.np_global.len();
    let n_vp = inputs.vp_global.len();
    let mut problem = IlpProblem::default();

    let alpha: Vec<usize> = (0..n_np)
        .map(|i| problem.add_var(VarRole::NpSelect { np: inputs.np_global[i] }, inputs.np_salience[i]))
        .collect();
    let beta: Vec<usize> = (0..n_vp)
        .map(|j| problem.add_var(VarRole::VpSelect { vp: inputs.vp_global[j] }, inputs.vp_salience[j]))
        .collect();

    let mut gamma_sel: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (i, j) in &inputs.gen_pairs {
        let idx = problem.add_var(
            VarRole::SentenceGen {
                np: inputs.np_global[*i],
                vp: inputs.vp_global[*j],
            },
            0.0,
        );
        gamma_sel.insert((*i, *j), idx);
    }

    let mut np_pair: Vec<(usize, usize, usize)> = Vec::new();
    for (i, j, r) in &inputs.r_np {
        let coef = -(inputs.np_salience[*i] + inputs.np_salience[*j]) * r;
        let idx = problem.add_var(
            VarRole::NpPair { a: inputs.np_global[*i], b: inputs.np_global[*j] },
            coef,
        );
        np_pair.push((*i, *j, idx));
    }
    let mut vp_pair: Vec<(usize, usize, usize)> = Vec::new();
    for (i, j, r) in &inputs.r_vp {
        let coef = -(inputs.vp_salience[*i] + inputs.vp_salience[*j]) * r;
        let idx = problem.add_var(
            VarRole::VpPair { a: inputs.vp_global[*i], b: inputs.vp_global[*j] },
            coef,
        );
        vp_pair.push((*i, *j, idx));
    }

    let mut push = |tag, terms: Vec<(usize, f64)>, sense, rhs: f64| {
        let mut sorted = terms;
        sorted.sort_by_key(|(v, _)| *v);
        problem.constraints.push(Constraint { tag, terms: sorted, sense, rhs });
    };

    // NP validity: α_i ≥ γ̃_ij for every pair, and Σ_j γ̃_ij ≥ α_i.
    for ((i, _j), g) in &gamma_sel {
        push(
            ConstraintTag::NpValidity,
            vec![(*g, 1.0), (alpha[*i], -1.0)],
            Sense::Le,
            0.0,
        );
    }
    for i in 0..n_np {
        let mut terms = vec![(alpha[i], 1.0)];
        for ((pi, _), g) in &gamma_sel {
            if *pi == i {
                terms.push((*g, -1.0));
            }
        }
        push(ConstraintTag::NpValidity, terms, Sense::Le, 0.0);
    }

    // VP legality: Σ_i γ̃_ij = β_j.
    for j in 0..n_vp {
        let mut terms = vec![(beta[j], -1.0)];
        for ((_, pj), g) in &gamma_sel {
            if *pj == j {
                terms.push((*g, 1.0));
            }
        }
        push(ConstraintTag::VpLegality, terms, Sense::Eq, 0.0);
    }

    // Not i-within-i.
    for (i, j) in &inputs.np_paths {
        push(
            ConstraintTag::NotIWithinI,
            vec![(alpha[*i], 1.0), (alpha[*j], 1.0)],
            Sense::Le,
            1.0,
        );
    }
    for (i, j) in &inputs.vp_paths {
        push(
            ConstraintTag::NotIWithinI,
            vec![(beta[*i], 1.0), (beta[*j], 1.0)],
            Sense::Le,
            1.0,
        );
    }

    // Phrase co-occurrence triples.
    for (i, j, pair) in &np_pair {
        push(ConstraintTag::CoOccurrence, vec![(*pair, 1.0), (alpha[*i], -1.0)], Sense::Le, 0.0);
        push(ConstraintTag::CoOccurrence, vec![(*pair, 1.0), (alpha[*j], -1.0)], Sense::Le, 0.0);
        push(
            ConstraintTag::CoOccurrence,
            vec![(alpha[*i], 1.0), (alpha[*j], 1.0), (*pair, -1.0)],
            Sense::Le,
            1.0,
        );
    }
    for (i, j, pair) in &vp_pair {
        push(ConstraintTag::CoOccurrence, vec![(*pair, 1.0), (beta[*i], -1.0)], Sense::Le, 0.0);
        push(ConstraintTag::CoOccurrence, vec![(*pair, 1.0), (beta[*j], -1.0)], Sense::Le, 0.0);
        push(
            ConstraintTag::CoOccurrence,
            vec![(beta[*i], 1.0), (beta[*j], 1.0), (*pair, -1.0)],
            Sense::Le,
            1.0,
        );
    }

    // Sentence number: Σ α_i ≤ K.
    push(
        ConstraintTag::SentenceNumber,
        alpha.iter().map(|a| (*a, 1.0)).collect(),
        Sense::Le,
        cfg.max_sentences as f64,
    );

    // Short sentence avoidance: β_j = 0 when l(S) < M.
    for j in 0..n_vp {
        if inputs.vp_sentence_len[j] < cfg.min_sentence_len {
            push(ConstraintTag::ShortSentence, vec![(beta[j], 1.0)], Sense::Eq, 0.0);
        }
    }

    // Pronoun avoidance: α_i = 0 for pronoun NPs.
    for i in 0..n_np {
        if inputs.np_pronoun[i] {
            push(ConstraintTag::Pronoun, vec![(alpha[i], 1.0)], Sense::Eq, 0.0);
        }
    }

    // Length: Σ l(N_i) α_i + Σ l(V_j) β_j ≤ L.
    let mut length_terms: Vec<(usize, f64)> = Vec::new();
    for i in 0..n_np {
        length_terms.push((alpha[i], inputs.np_length[i] as f64));
    }
    for j in 0..n_vp {
        length_terms.push((beta[j], inputs.vp_length[j] as f64));
    }
    push(ConstraintTag::Length, length_terms, Sense::Le, cfg.length_budget as f64);

    // Extractive-mode ties α_i = β_j.
    for (i, j) in &inputs.ties {
        push(
            ConstraintTag::ModeTie,
            vec![(alpha[*i], 1.0), (beta[*j], -1.0)],
            Sense::Eq,
            0.0,
        );
    }

    problem
}

/// Translates phrases, compatibility, and similarities into the program.
pub fn build_problem(
    phrases: &PhraseSet,
    compat: &CompatibilityMatrix,
    sims: &SimilarityMatrix,
    cfg: &GenerationConfig,
) -> Result<IlpProblem, BuildError> {
    let all_np = phrases.np_ids();
    let all_vp = phrases.vp_ids();
    if compat.gamma_tilde.rows != all_np.len() || compat.gamma_tilde.cols != all_vp.len() {
        return Err(BuildError::IndexMismatch {
            detail: format!(
                "gamma is {}x{}, phrases have {} NPs and {} VPs",
                compat.gamma_tilde.rows,
                compat.gamma_tilde.cols,
                all_np.len(),
                all_vp.len()
            ),
        });
    }
    if sims.r_np.n != all_np.len() || sims.r_vp.n != all_vp.len() {
        return Err(BuildError::IndexMismatch {
            detail: "similarity matrix dimensions do not match phrase counts".to_string(),
        });
    }

    let level_ok = |level: u8| cfg.mode != Mode::Extractive || level == 1;
    let np_global: Vec<usize> = (0..all_np.len())
        .filter(|i| level_ok(phrases.np(*i).level))
        .collect();
    let vp_global: Vec<usize> = (0..all_vp.len())
        .filter(|j| level_ok(phrases.vp(*j).level))
        .collect();

    let np_local: BTreeMap<usize, usize> =
        np_global.iter().enumerate().map(|(l, g)| (*g, l)).collect();
    let vp_local: BTreeMap<usize, usize> =
        vp_global.iter().enumerate().map(|(l, g)| (*g, l)).collect();

    // Eq. 14 exclusions must leave something selectable.
    if !np_global.is_empty() && np_global.iter().all(|i| phrases.np(*i).is_pronoun) {
        return Err(BuildError::NoCandidates {
            reason: "every candidate NP is a pronoun".to_string(),
        });
    }
    let sent_len = |doc: &str, idx: usize| phrases.sentence_length(doc, idx).unwrap_or(0);
    if !vp_global.is_empty()
        && vp_global.iter().all(|j| {
            let vp = phrases.vp(*j);
            sent_len(&vp.doc_id, vp.sent_idx) < cfg.min_sentence_len
        })
    {
        return Err(BuildError::NoCandidates {
            reason: "every candidate VP comes from a sentence shorter than M".to_string(),
        });
    }

    let use_tilde = cfg.mode == Mode::Abstractive;
    let mut gen_pairs = Vec::new();
    for (li, gi) in np_global.iter().enumerate() {
        for (lj, gj) in vp_global.iter().enumerate() {
            let allowed = if use_tilde {
                compat.gamma_tilde.get(*gi, *gj)
            } else {
                compat.gamma.get(*gi, *gj)
            };
            if allowed {
                gen_pairs.push((li, lj));
            }
        }
    }

    let mut np_paths = Vec::new();
    for a in 0..np_global.len() {
        for b in (a + 1)..np_global.len() {
            let pa = phrases.np(np_global[a]);
            let pb = phrases.np(np_global[b]);
            if same_path(pa, pb).unwrap_or(false) {
                np_paths.push((a, b));
            }
        }
    }
    let mut vp_paths = Vec::new();
    for a in 0..vp_global.len() {
        for b in (a + 1)..vp_global.len() {
            let pa = phrases.vp(vp_global[a]);
            let pb = phrases.vp(vp_global[b]);
            if same_path(pa, pb).unwrap_or(false) {
                vp_paths.push((a, b));
            }
        }
    }

    let mut r_np = Vec::new();
    for a in 0..np_global.len() {
        for b in (a + 1)..np_global.len() {
            let r = sims.r_np.get(np_global[a], np_global[b]);
            if r > 0.0 {
                r_np.push((a, b, r));
            }
        }
    }
    let mut r_vp = Vec::new();
    for a in 0..vp_global.len() {
        for b in (a + 1)..vp_global.len() {
            let r = sims.r_vp.get(vp_global[a], vp_global[b]);
            if r > 0.0 {
                r_vp.push((a, b, r));
            }
        }
    }

    // Extractive mode: tie each top VP to its own same-sentence NP — the
    // nearest preceding one, falling back to the first.
    let mut ties = Vec::new();
    if cfg.mode == Mode::Extractive {
        for (lj, gj) in vp_global.iter().enumerate() {
            let vp = phrases.vp(*gj);
            let mut candidates: Vec<usize> = np_global
                .iter()
                .copied()
                .filter(|gi| phrases.np(*gi).parent_s == vp.parent_s)
                .collect();
            candidates.sort_by_key(|gi| phrases.np(*gi).span.start);
            let own = candidates
                .iter()
                .rev()
                .find(|gi| phrases.np(**gi).span.start <= vp.span.start)
                .or_else(|| candidates.first())
                .copied();
            if let Some(gi) = own {
                ties.push((np_local[&gi], lj));
            }
        }
        let _ = &vp_local;
    }

    let inputs = ModelInputs {
        np_salience: np_global.iter().map(|i| phrases.np(*i).salience).collect(),
        vp_salience: vp_global.iter().map(|j| phrases.vp(*j).salience).collect(),
        np_length: np_global.iter().map(|i| phrases.np(*i).length).collect(),
        vp_length: vp_global.iter().map(|j| phrases.vp(*j).length).collect(),
        np_pronoun: np_global.iter().map(|i| phrases.np(*i).is_pronoun).collect(),
        vp_sentence_len: vp_global
            .iter()
            .map(|j| {
                let vp = phrases.vp(*j);
                sent_len(&vp.doc_id, vp.sent_idx)
            })
            .collect(),
        np_global,
        vp_global,
        gen_pairs,
        np_paths,
        vp_paths,
        r_np,
        r_vp,
        ties,
        cfg: *cfg,
    };
    Ok(emit_problem(&inputs))
}

/// One constraint violation found by [`validate_solution`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub tag: ConstraintTag,
    pub constraint_index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub sense: Sense,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn tags(&self) -> Vec<ConstraintTag> {
        self.violations.iter().map(|v| v.tag).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ValidateError {
    #[error("assignment covers {got} variables, problem has {want}")]
    UnknownVariable { got: usize, want: usize },
}

/// Checks an assignment against every constraint, reporting violations by
/// provenance tag.
pub fn validate_solution(
    problem: &IlpProblem,
    assignment: &[bool],
) -> Result<ValidationReport, ValidateError> {
    if assignment.len() != problem.n_vars() {
        return Err(ValidateError::UnknownVariable {
            got: assignment.len(),
            want: problem.n_vars(),
        });
    }
    let tol = 1e-9;
    let mut report = ValidationReport::default();
    for (idx, c) in problem.constraints.iter().enumerate() {
        if !c.holds(assignment, tol) {
            report.violations.push(Violation {
                tag: c.tag,
                constraint_index: idx,
                lhs: c.lhs(assignment),
                rhs: c.rhs,
                sense: c.sense,
            });
        }
    }
    Ok(report)
}

/// Draws a random problem shaped like [`build_problem`] output: random Γ̃
/// density, dyadic saliences and similarities, random path pairs and Eq. 14
/// exclusions. Guaranteed to keep at least one selectable NP and VP and at
/// most `max_vars` variables.
pub fn random_problem<R: Rng>(rng: &mut R, max_vars: usize) -> IlpProblem {
    loop {
        let n_np = rng.gen_range(1..=4usize);
        let n_vp = rng.gen_range(1..=5usize);

        let dyadic = |rng: &mut R| rng.gen_range(1..=60) as f64 / 4.0;
        let np_salience: Vec<f64> = (0..n_np).map(|_| dyadic(rng)).collect();
        let vp_salience: Vec<f64> = (0..n_vp).map(|_| dyadic(rng)).collect();
        let np_length: Vec<usize> = (0..n_np).map(|_| rng.gen_range(1..=6)).collect();
        let vp_length: Vec<usize> = (0..n_vp).map(|_| rng.gen_range(1..=8)).collect();
        let mut np_pronoun: Vec<bool> = (0..n_np).map(|_| rng.gen_bool(0.2)).collect();
        np_pronoun[0] = false;
        let min_sentence_len = rng.gen_range(0..=6usize);
        let mut vp_sentence_len: Vec<usize> = (0..n_vp).map(|_| rng.gen_range(1..=12)).collect();
        vp_sentence_len[0] = vp_sentence_len[0].max(min_sentence_len);

        let mut gen_pairs = Vec::new();
        for i in 0..n_np {
            for j in 0..n_vp {
                if rng.gen_bool(0.45) {
                    gen_pairs.push((i, j));
                }
            }
        }
        if gen_pairs.is_empty() {
            gen_pairs.push((0, 0));
        }

        let mut np_paths = Vec::new();
        for a in 0..n_np {
            for b in (a + 1)..n_np {
                if rng.gen_bool(0.15) {
                    np_paths.push((a, b));
                }
            }
        }
        let mut vp_paths = Vec::new();
        for a in 0..n_vp {
            for b in (a + 1)..n_vp {
                if rng.gen_bool(0.2) {
                    vp_paths.push((a, b));
                }
            }
        }

        let mut r_np = Vec::new();
        for a in 0..n_np {
            for b in (a + 1)..n_np {
                if rng.gen_bool(0.5) {
                    r_np.push((a, b, rng.gen_range(1..=64) as f64 / 64.0));
                }
            }
        }
        let mut r_vp = Vec::new();
        for a in 0..n_vp {
            for b in (a + 1)..n_vp {
                if rng.gen_bool(0.5) {
                    r_vp.push((a, b, rng.gen_range(1..=64) as f64 / 64.0));
                }
            }
        }

        let total = n_np + n_vp + gen_pairs.len() + r_np.len() + r_vp.len();
        if total > max_vars {
            continue;
        }

        // Occasional extractive-style ties so that family is exercised too.
        let mut ties = Vec::new();
        if rng.gen_bool(0.25) {
            ties.push((rng.gen_range(0..n_np), rng.gen_range(0..n_vp)));
        }

        let cfg = GenerationConfig {
            length_budget: rng.gen_range(4..=30),
            max_sentences: rng.gen_range(1..=3),
            min_sentence_len,
            mode: Mode::Abstractive,
        };
        let inputs = ModelInputs {
            np_global: (0..n_np).collect(),
            vp_global: (0..n_vp).collect(),
            np_salience,
            vp_salience,
            np_length,
            vp_length,
            np_pronoun,
            vp_sentence_len,
            gen_pairs,
            np_paths,
            vp_paths,
            r_np,
            r_vp,
            ties,
            cfg,
        };
        return emit_problem(&inputs);
    }
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;

    /// One NP (salience 2, length 2), one VP (salience 3, length 3), one
    /// compatible pair.
    pub(crate) fn tiny_problem_public(budget: usize) -> IlpProblem {
        let inputs = ModelInputs {
            np_global: vec![0],
            vp_global: vec![0],
            np_salience: vec![2.0],
            vp_salience: vec![3.0],
            np_length: vec![2],
            vp_length: vec![3],
            np_pronoun: vec![false],
            vp_sentence_len: vec![5],
            gen_pairs: vec![(0, 0)],
            np_paths: vec![],
            vp_paths: vec![],
            r_np: vec![],
            r_vp: vec![],
            ties: vec![],
            cfg: GenerationConfig {
                length_budget: budget,
                max_sentences: 1,
                min_sentence_len: 0,
                mode: Mode::Abstractive,
            },
        };
        emit_problem(&inputs)
    }
}

#[cfg(test)]
mod tests {
    use super::tests_support::tiny_problem_public as tiny_problem;
    use super::*;

    #[test]
    fn tiny_problem_has_three_variables() {
        let p = tiny_problem(10);
        assert_eq!(p.n_vars(), 3);
        let names: Vec<&str> = p.vars.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, vec!["a0", "b0", "g0_0"]);
        // Exhaustive check over the 8 assignments: optimum selects all three.
        let mut best = f64::NEG_INFINITY;
        let mut best_assign = vec![];
        for bits in 0..8u32 {
            let assignment: Vec<bool> = (0..3).map(|k| bits >> (2 - k) & 1 == 1).collect();
            let report = validate_solution(&p, &assignment).unwrap();
            if report.ok() {
                let obj = p.objective_value(&assignment);
                if obj > best {
                    best = obj;
                    best_assign = assignment;
                }
            }
        }
        assert_eq!(best, 5.0);
        assert_eq!(best_assign, vec![true, true, true]);
    }

    #[test]
    fn validate_flags_each_family() {
        let p = tiny_problem(10);
        // β set without its γ̃: vp_legality (and the np side stays fine).
        let report = validate_solution(&p, &[false, true, false]).unwrap();
        assert!(report.tags().contains(&ConstraintTag::VpLegality));
        // γ̃ set without α: np_validity.
        let report = validate_solution(&p, &[false, false, true]).unwrap();
        assert!(report.tags().contains(&ConstraintTag::NpValidity));
        // α set without any γ̃: np_validity (second form).
        let report = validate_solution(&p, &[true, false, false]).unwrap();
        assert!(report.tags().contains(&ConstraintTag::NpValidity));
        // Optimal assignment: clean report.
        let report = validate_solution(&p, &[true, true, true]).unwrap();
        assert!(report.ok());
    }

    #[test]
    fn validate_rejects_wrong_arity() {
        let p = tiny_problem(10);
        assert_eq!(
            validate_solution(&p, &[true]),
            Err(ValidateError::UnknownVariable { got: 1, want: 3 })
        );
    }

    #[test]
    fn length_constraint_binds() {
        // Budget below l(N)+l(V): nothing fits, optimum is empty.
        let p = tiny_problem(4);
        let mut best = f64::NEG_INFINITY;
        for bits in 0..8u32 {
            let assignment: Vec<bool> = (0..3).map(|k| bits >> (2 - k) & 1 == 1).collect();
            if validate_solution(&p, &assignment).unwrap().ok() {
                best = best.max(p.objective_value(&assignment));
            }
        }
        assert_eq!(best, 0.0);
    }

    #[test]
    fn lp_text_round_trips() {
        let p = tiny_problem(10);
        let text = p.to_lp_text();
        let back = IlpProblem::from_lp_text(&text).unwrap();
        assert_eq!(back.to_lp_text(), text);
        assert_eq!(back.n_vars(), p.n_vars());
        assert_eq!(back.constraints.len(), p.constraints.len());
        assert_eq!(back.objective, p.objective);
        assert_eq!(back.vars[2].role, VarRole::SentenceGen { np: 0, vp: 0 });
    }

    #[test]
    fn random_problems_round_trip_and_stay_bounded() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = random_problem(&mut rng, 18);
            assert!(p.n_vars() <= 18);
            let text = p.to_lp_text();
            let back = IlpProblem::from_lp_text(&text).unwrap();
            assert_eq!(back.to_lp_text(), text);
        }
    }
}
