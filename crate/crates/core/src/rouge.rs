//! ROUGE-2 and ROUGE-SU4 with clipped counts and micro-averaged
//! multi-reference aggregation.
//!
//! Inputs are expected pre-normalized (lowercased, stemmed); see
//! [`normalize_text`]. Recall sums clipped overlaps over all references and
//! divides by the total reference unit count; precision divides the same
//! overlap sum by the candidate unit count taken once per reference. SU4
//! units are unigrams plus ordered skip-bigrams whose positions are at most
//! four apart.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::treebank::stem;

/// Precision / recall / F1 triple in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    fn from_counts(overlap: f64, cand_total: f64, ref_total: f64) -> RougeScore {
        let precision = if cand_total > 0.0 { overlap / cand_total } else { 0.0 };
        let recall = if ref_total > 0.0 { overlap / ref_total } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        RougeScore { precision, recall, f1 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RougeError {
    #[error("empty reference set")]
    EmptyReferenceSet,
}

type Counts = BTreeMap<(String, Option<String>), usize>;

fn bigram_counts(tokens: &[String]) -> Counts {
    let mut counts = Counts::new();
    for pair in tokens.windows(2) {
        *counts
            .entry((pair[0].clone(), Some(pair[1].clone())))
            .or_insert(0) += 1;
    }
    counts
}

/// Unigrams plus skip-bigrams with positions at most `max_skip` apart.
fn su_counts(tokens: &[String], max_skip: usize) -> Counts {
    let mut counts = Counts::new();
    for token in tokens {
        *counts.entry((token.clone(), None)).or_insert(0) += 1;
    }
    for i in 0..tokens.len() {
        for j in (i + 1)..tokens.len().min(i + max_skip + 1) {
            *counts
                .entry((tokens[i].clone(), Some(tokens[j].clone())))
                .or_insert(0) += 1;
        }
    }
    counts
}

fn clipped_overlap(cand: &Counts, reference: &Counts) -> usize {
    cand.iter()
        .map(|(unit, count)| (*count).min(reference.get(unit).copied().unwrap_or(0)))
        .sum()
}

fn score_with<F>(candidate: &[String], references: &[Vec<String>], make: F) -> Result<RougeScore, RougeError>
where
    F: Fn(&[String]) -> Counts,
{
    if references.is_empty() {
        return Err(RougeError::EmptyReferenceSet);
    }
    let cand = make(candidate);
    let cand_total: usize = cand.values().sum();
    let mut overlap = 0usize;
    let mut ref_total = 0usize;
    for reference in references {
        let ref_counts = make(reference);
        overlap += clipped_overlap(&cand, &ref_counts);
        ref_total += ref_counts.values().sum::<usize>();
    }
    Ok(RougeScore::from_counts(
        overlap as f64,
        (cand_total * references.len()) as f64,
        ref_total as f64,
    ))
}

/// Bigram overlap score.
pub fn rouge2(candidate: &[String], references: &[Vec<String>]) -> Result<RougeScore, RougeError> {
    score_with(candidate, references, bigram_counts)
}

/// Skip-bigram (max distance 4) plus unigram overlap score.
pub fn rouge_su4(candidate: &[String], references: &[Vec<String>]) -> Result<RougeScore, RougeError> {
    score_with(candidate, references, |tokens| su_counts(tokens, 4))
}

/// Evaluation-time normalization: split on non-alphanumeric boundaries,
/// lowercase, stem.
pub fn normalize_text(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == ':'))
        .filter(|t| t.chars().any(char::is_alphanumeric))
        .map(|t| stem(t.trim_matches('\'')))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<String> {
        text.split_whitespace().map(|t| t.to_string()).collect()
    }

    #[test]
    fn identity_scores_one() {
        let s = rouge2(&toks("the cat sat"), &[toks("the cat sat")]).unwrap();
        assert_eq!(s, RougeScore { precision: 1.0, recall: 1.0, f1: 1.0 });
        let s = rouge_su4(&toks("the cat sat"), &[toks("the cat sat")]).unwrap();
        assert_eq!(s, RougeScore { precision: 1.0, recall: 1.0, f1: 1.0 });
    }

    #[test]
    fn one_of_two_bigrams_overlap() {
        let s = rouge2(&toks("the cat sat"), &[toks("the cat ran")]).unwrap();
        assert_eq!(s.precision, 0.5);
        assert_eq!(s.recall, 0.5);
        assert_eq!(s.f1, 0.5);
    }

    #[test]
    fn short_candidate_scores_zero() {
        let s = rouge2(&toks("cat"), &[toks("the cat ran")]).unwrap();
        assert_eq!(s, RougeScore { precision: 0.0, recall: 0.0, f1: 0.0 });
    }

    #[test]
    fn su4_counts_reordered_tokens() {
        // cand a b c: units {a,b,c} + {ab, ac, bc}; ref a c b: {a,c,b} +
        // {ac, ab, cb}. Overlap: a, b, c, ab, ac = 5 of 6.
        let s = rouge_su4(&toks("a b c"), &[toks("a c b")]).unwrap();
        assert!((s.recall - 5.0 / 6.0).abs() < 1e-15);
        assert!((s.precision - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn disjoint_vocabulary_scores_zero() {
        let s = rouge_su4(&toks("a b c"), &[toks("x y z")]).unwrap();
        assert_eq!(s, RougeScore { precision: 0.0, recall: 0.0, f1: 0.0 });
    }

    #[test]
    fn skip_distance_is_bounded() {
        // "a w x y z b": a..b are five apart, too far for a skip pair.
        let counts = su_counts(&toks("a w x y z b"), 4);
        assert!(!counts.contains_key(&("a".to_string(), Some("b".to_string()))));
        assert!(counts.contains_key(&("a".to_string(), Some("z".to_string()))));
    }

    #[test]
    fn empty_reference_set_is_an_error() {
        assert_eq!(rouge2(&toks("a b"), &[]), Err(RougeError::EmptyReferenceSet));
    }

    #[test]
    fn multi_reference_micro_average() {
        // cand "a b c" (bigrams ab, bc); refs "a b" (ab) and "b c d" (bc, cd).
        // overlap = 1 + 1 = 2; ref total = 1 + 2 = 3; cand total = 2 * 2 = 4.
        let s = rouge2(&toks("a b c"), &[toks("a b"), toks("b c d")]).unwrap();
        assert!((s.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.precision - 0.5).abs() < 1e-15);
    }

    #[test]
    fn appending_matching_bigram_never_lowers_recall() {
        let reference = toks("a b c d");
        let base = rouge2(&toks("x a b"), &[reference.clone()]).unwrap();
        let extended = rouge2(&toks("x a b c d"), &[reference]).unwrap();
        assert!(extended.recall >= base.recall);
    }

    #[test]
    fn normalization_lowercases_and_stems() {
        assert_eq!(
            normalize_text("Police said the Killings occurred."),
            vec!["police", "say", "the", "killing", "occur"]
        );
    }
}
