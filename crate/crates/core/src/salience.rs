//! Concept weighting and phrase salience.
//!
//! Concepts are the union of unigrams, bigrams, and named entities found in
//! the topic, with stopwords removed and tokens lemmatized. Each occurrence
//! is weighted by the position of its paragraph: the first paragraph gets
//! weight B, decaying geometrically by rho until the weight floors at 1.
//! A phrase's salience is the summed table weight of its distinct concepts.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::phrase::PhraseSet;
use crate::treebank::{is_punctuation, lemmatize, NeMention, Sentence, Span, Topic};

/// Stopword list; one lowercase token per line in the file form.
#[derive(Debug, Clone, Default)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn from_text(text: &str) -> Self {
        Stopwords(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .collect(),
        )
    }

    pub fn from_path(path: &std::path::Path) -> std::io::Result<Self> {
        Ok(Self::from_text(&std::fs::read_to_string(path)?))
    }

    /// The list bundled with the crate.
    pub fn builtin() -> Self {
        Self::from_text(include_str!("../data/stopwords.txt"))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(&token.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SalienceConfigError {
    #[error("first-paragraph weight B must be > 1")]
    BadB,
    #[error("decay rho must lie in (0, 1)")]
    BadRho,
}

/// Parameters of the paragraph-position weighting.
#[derive(Debug, Clone, Copy)]
pub struct SalienceConfig {
    /// Weight of the first paragraph (B > 1).
    pub b: f64,
    /// Geometric decay per paragraph (0 < rho < 1).
    pub rho: f64,
    /// Include named-entity concepts.
    pub use_ne: bool,
}

impl SalienceConfig {
    pub fn new(b: f64, rho: f64, use_ne: bool) -> Result<Self, SalienceConfigError> {
        if !(b > 1.0) {
            return Err(SalienceConfigError::BadB);
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(SalienceConfigError::BadRho);
        }
        Ok(SalienceConfig { b, rho, use_ne })
    }
}

impl Default for SalienceConfig {
    /// B = 6, rho = 0.5.
    fn default() -> Self {
        SalienceConfig {
            b: 6.0,
            rho: 0.5,
            use_ne: true,
        }
    }
}

/// Weight of paragraph position `p` (0-based): rho^p * B while that stays
/// above 1, i.e. while p < -(log B / log rho), and 1 afterwards.
pub fn paragraph_weight(p: usize, cfg: &SalienceConfig) -> f64 {
    let threshold = -(cfg.b.ln() / cfg.rho.ln());
    if (p as f64) < threshold {
        cfg.rho.powi(p as i32) * cfg.b
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConceptKind {
    Unigram,
    Bigram,
    NamedEntity,
}

impl fmt::Display for ConceptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConceptKind::Unigram => write!(f, "unigram"),
            ConceptKind::Bigram => write!(f, "bigram"),
            ConceptKind::NamedEntity => write!(f, "ne"),
        }
    }
}

/// A salience-carrying unit: a lemma, an adjacent lemma pair, or a
/// named-entity surface string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Concept {
    pub kind: ConceptKind,
    pub key: String,
}

impl Concept {
    pub fn unigram(key: impl Into<String>) -> Self {
        Concept { kind: ConceptKind::Unigram, key: key.into() }
    }

    pub fn bigram(a: &str, b: &str) -> Self {
        Concept { kind: ConceptKind::Bigram, key: format!("{a}_{b}") }
    }

    pub fn named_entity(key: impl Into<String>) -> Self {
        Concept { kind: ConceptKind::NamedEntity, key: key.into() }
    }
}

/// Concept -> positive weight. Zero-weight concepts are never stored.
#[derive(Debug, Clone, Default)]
pub struct ConceptTable {
    weights: BTreeMap<Concept, f64>,
}

impl ConceptTable {
    pub fn weight(&self, concept: &Concept) -> f64 {
        self.weights.get(concept).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, concept: &Concept) -> bool {
        self.weights.contains_key(concept)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn add(&mut self, concept: Concept, weight: f64) {
        if weight > 0.0 {
            *self.weights.entry(concept).or_insert(0.0) += weight;
        }
    }

    /// TSV dump `kind\tkey\tweight`, heaviest first, key ascending on ties.
    pub fn dump_tsv(&self) -> String {
        let mut rows: Vec<(&Concept, f64)> = self.weights.iter().map(|(c, w)| (c, *w)).collect();
        rows.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(b.0))
        });
        let mut out = String::new();
        for (concept, weight) in rows {
            out.push_str(&format!("{}\t{}\t{}\n", concept.kind, concept.key, weight));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum SalienceError {
    #[error("topic has no documents")]
    EmptyTopic,
}

/// Extracts concept occurrences and concept sets from sentence slices.
///
/// Named entities come from the topic's annotation file when present;
/// otherwise maximal runs of capitalized tokens not at sentence start
/// stand in for them.
pub struct ConceptExtractor<'a> {
    stopwords: &'a Stopwords,
    use_ne: bool,
    annotated: bool,
    ne_index: BTreeMap<(String, usize), Vec<(Span, String)>>,
}

impl<'a> ConceptExtractor<'a> {
    pub fn new(topic: &Topic, stopwords: &'a Stopwords, use_ne: bool) -> Self {
        let mut ne_index: BTreeMap<(String, usize), Vec<(Span, String)>> = BTreeMap::new();
        let annotated = topic.ne_annotations.is_some();
        if let Some(mentions) = &topic.ne_annotations {
            for NeMention { doc_id, sent_idx, span, surface } in mentions {
                ne_index
                    .entry((doc_id.clone(), *sent_idx))
                    .or_default()
                    .push((*span, surface.to_lowercase()));
            }
        }
        ConceptExtractor { stopwords, use_ne, annotated, ne_index }
    }

    /// Extractor with no topic context (annotation-free heuristics only).
    pub fn bare(stopwords: &'a Stopwords, use_ne: bool) -> Self {
        ConceptExtractor {
            stopwords,
            use_ne,
            annotated: false,
            ne_index: BTreeMap::new(),
        }
    }

    fn token_ok(&self, token: &str) -> bool {
        !is_punctuation(token) && !self.stopwords.contains(token)
    }

    fn ne_spans_for(&self, sentence: &Sentence) -> Vec<(Span, String)> {
        if self.annotated {
            return self
                .ne_index
                .get(&(sentence.doc_id.clone(), sentence.sent_idx))
                .cloned()
                .unwrap_or_default();
        }
        // Fallback: maximal capitalized runs not anchored at sentence start.
        let mut runs = Vec::new();
        let mut start: Option<usize> = None;
        for (i, token) in sentence.tokens.iter().enumerate() {
            let capitalized = token.chars().next().map(|c| c.is_uppercase()).unwrap_or(false);
            if capitalized {
                if start.is_none() {
                    start = Some(i);
                }
            } else if let Some(s) = start.take() {
                if s != 0 {
                    runs.push((s, i));
                }
            }
        }
        if let Some(s) = start {
            if s != 0 {
                runs.push((s, sentence.tokens.len()));
            }
        }
        runs.into_iter()
            .map(|(s, e)| {
                let surface = sentence.tokens[s..e].join(" ").to_lowercase();
                (Span::new(s, e), surface)
            })
            .collect()
    }

    /// Concept occurrences (with duplicates) inside `range` of a sentence.
    pub fn occurrences(&self, sentence: &Sentence, range: Span) -> Vec<Concept> {
        let tagged = sentence.tagged_tokens();
        let mut out = Vec::new();

        let lemma_at = |i: usize| lemmatize(tagged[i].0, tagged[i].1);
        for i in range.start..range.end {
            let (token, _) = tagged[i];
            if self.token_ok(token) {
                out.push(Concept::unigram(lemma_at(i)));
            }
        }
        for i in range.start..range.end.saturating_sub(1) {
            let (ta, _) = tagged[i];
            let (tb, _) = tagged[i + 1];
            if self.token_ok(ta) && self.token_ok(tb) {
                out.push(Concept::bigram(&lemma_at(i), &lemma_at(i + 1)));
            }
        }
        if self.use_ne {
            for (span, surface) in self.ne_spans_for(sentence) {
                if span.intersects(&range) {
                    out.push(Concept::named_entity(surface));
                }
            }
        }
        out
    }

    /// Distinct concepts inside `range` of a sentence.
    pub fn concept_set(&self, sentence: &Sentence, range: Span) -> BTreeSet<Concept> {
        self.occurrences(sentence, range).into_iter().collect()
    }

    fn full_span(sentence: &Sentence) -> Span {
        Span::new(0, sentence.tokens.len().max(1))
    }

    pub fn sentence_concepts(&self, sentence: &Sentence) -> Vec<Concept> {
        if sentence.tokens.is_empty() {
            return Vec::new();
        }
        self.occurrences(sentence, Self::full_span(sentence))
    }
}

/// Accumulates the topic-wide concept table: each occurrence adds the weight
/// of the paragraph it appears in.
pub fn build_concept_table(
    topic: &Topic,
    cfg: &SalienceConfig,
    stopwords: &Stopwords,
) -> Result<ConceptTable, SalienceError> {
    if topic.documents.is_empty() {
        return Err(SalienceError::EmptyTopic);
    }
    let extractor = ConceptExtractor::new(topic, stopwords, cfg.use_ne);
    let mut table = ConceptTable::default();
    for doc in &topic.documents {
        for sentence in &doc.sentences {
            let w = paragraph_weight(sentence.paragraph_idx, cfg);
            for concept in extractor.sentence_concepts(sentence) {
                table.add(concept, w);
            }
        }
    }
    Ok(table)
}

/// Salience of one phrase: summed weights of its distinct concepts.
/// Concepts absent from the table contribute 0.
pub fn phrase_salience(
    concepts: &BTreeSet<Concept>,
    table: &ConceptTable,
) -> f64 {
    concepts.iter().map(|c| table.weight(c)).sum()
}

/// Fills the salience field of every phrase and returns the per-phrase
/// concept sets (indexed by phrase id) for reuse by the compatibility stage.
pub fn score_phrases(
    phrases: &mut PhraseSet,
    topic: &Topic,
    table: &ConceptTable,
    stopwords: &Stopwords,
    use_ne: bool,
) -> Vec<BTreeSet<Concept>> {
    let extractor = ConceptExtractor::new(topic, stopwords, use_ne);
    let mut sets = vec![BTreeSet::new(); phrases.len()];
    let ids: Vec<_> = phrases.iter().map(|p| p.id).collect();
    for id in ids {
        let (doc_id, sent_idx, span) = {
            let p = phrases.phrase(id);
            (p.doc_id.clone(), p.sent_idx, p.span)
        };
        let sentence = topic
            .sentence(&doc_id, sent_idx)
            .expect("phrase refers to a sentence of its topic");
        let set = extractor.concept_set(sentence, span);
        let salience = phrase_salience(&set, table);
        phrases.phrase_mut(id).salience = salience;
        sets[id.0] = set;
    }
    sets
}
