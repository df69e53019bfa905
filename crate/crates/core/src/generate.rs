//! Summary assembly from an optimal selection.
//!
//! Each selected NP heads one sentence, followed by the VPs its sentence
//! generation indicators picked. VPs from one document keep their natural
//! order; across documents they follow document timestamps. While the word
//! budget allows, a conjunction joins the final VP ("then" when the VPs
//! march strictly forward in time across documents, "and" otherwise).
//! Sentences are ordered by pseudo-timestamp: the earliest document
//! timestamp among their VPs.
//!
//! In extractive mode the selection ties whole source sentences together,
//! so assembly groups phrases by source sentence and reproduces the
//! original token sequence verbatim.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::ilp::{IlpProblem, Mode, VarRole};
use crate::phrase::{PhraseId, PhraseSet};
use crate::solver::IlpSolution;
use crate::treebank::{is_punctuation, Topic};

/// Provenance class of a generated sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceKind {
    /// Phrases merged from two or more source sentences.
    New,
    /// A proper subset of one source sentence's phrases.
    Compressed,
    /// One source sentence reproduced whole.
    Original,
}

impl std::fmt::Display for SentenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SentenceKind::New => write!(f, "N"),
            SentenceKind::Compressed => write!(f, "C"),
            SentenceKind::Original => write!(f, "O"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SummarySentence {
    pub np: PhraseId,
    /// At least one VP, in rendered order.
    pub vps: Vec<PhraseId>,
    pub text: String,
    pub pseudo_timestamp: DateTime<Utc>,
    pub kind: SentenceKind,
    /// Word count per l() including any inserted conjunction.
    pub word_count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub sentences: Vec<SummarySentence>,
    pub word_count: usize,
}

impl Summary {
    pub fn text(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Fractions of sentence kinds in a summary; all zero for an empty one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KindFractions {
    pub new: f64,
    pub compressed: f64,
    pub original: f64,
}

pub fn type_distribution(summary: &Summary) -> KindFractions {
    let n = summary.sentences.len();
    if n == 0 {
        return KindFractions { new: 0.0, compressed: 0.0, original: 0.0 };
    }
    let count = |kind: SentenceKind| {
        summary.sentences.iter().filter(|s| s.kind == kind).count() as f64 / n as f64
    };
    KindFractions {
        new: count(SentenceKind::New),
        compressed: count(SentenceKind::Compressed),
        original: count(SentenceKind::Original),
    }
}

const NO_SPACE_BEFORE: &[&str] = &[",", ".", ";", ":", "!", "?", ")", "''", "'", "'s", "n't", "%"];
const NO_SPACE_AFTER: &[&str] = &["(", "``", "$"];

/// Space-joins tokens with punctuation attachment. A bare period after an
/// abbreviation that already ends with one is absorbed.
pub fn detokenize(tokens: &[String]) -> String {
    let mut out = String::new();
    for (i, token) in tokens.iter().enumerate() {
        if token == "." && out.ends_with('.') {
            continue;
        }
        if i > 0
            && !NO_SPACE_BEFORE.contains(&token.as_str())
            && !NO_SPACE_AFTER.contains(&tokens[i - 1].as_str())
        {
            out.push(' ');
        }
        out.push_str(token);
    }
    out
}

fn ends_sentence(token: &str) -> bool {
    token.ends_with('.') || token.ends_with('!') || token.ends_with('?')
}

/// Classifies one assembled sentence from the provenance of its phrases.
///
/// New: NP and VPs from at least two source sentences. Original: a single
/// source whose level-1 NP and VP spans are jointly covered by the selected
/// spans. Compressed: anything else from a single source.
pub fn classify_sentence(np: PhraseId, vps: &[PhraseId], phrases: &PhraseSet) -> SentenceKind {
    let head = phrases.phrase(np);
    let mut sources: Vec<(String, usize)> = vec![(head.doc_id.clone(), head.sent_idx)];
    for vp in vps {
        let p = phrases.phrase(*vp);
        sources.push((p.doc_id.clone(), p.sent_idx));
    }
    sources.sort();
    sources.dedup();
    if sources.len() >= 2 {
        return SentenceKind::New;
    }

    let (doc_id, sent_idx) = &sources[0];
    let level1 = phrases.level1_of_sentence(doc_id, *sent_idx);
    let max_end = level1.iter().map(|p| p.span.end).max().unwrap_or(0);
    let mut covered = vec![false; max_end];
    let mut mark = |id: PhraseId| {
        let span = phrases.phrase(id).span;
        for slot in covered[span.start..span.end.min(max_end)].iter_mut() {
            *slot = true;
        }
    };
    mark(np);
    for vp in vps {
        mark(*vp);
    }
    let full = level1
        .iter()
        .all(|p| (p.span.start..p.span.end).all(|i| covered[i]));
    if full {
        SentenceKind::Original
    } else {
        SentenceKind::Compressed
    }
}

struct DraftSentence {
    np: PhraseId,
    vps: Vec<PhraseId>,
    pseudo_timestamp: DateTime<Utc>,
    sort_key: (DateTime<Utc>, String, usize),
}

fn vp_sort_key(
    phrases: &PhraseSet,
    topic: &Topic,
    id: PhraseId,
) -> (DateTime<Utc>, String, usize, usize) {
    let p = phrases.phrase(id);
    let ts = topic
        .timestamp_of(&p.doc_id)
        .unwrap_or(DateTime::<Utc>::MIN_UTC);
    (ts, p.doc_id.clone(), p.sent_idx, p.span.start)
}

/// Builds the summary from an optimal solution. An empty selection yields an
/// empty summary rather than an error.
pub fn assemble(
    solution: &IlpSolution,
    problem: &IlpProblem,
    phrases: &PhraseSet,
    topic: &Topic,
    mode: Mode,
    length_budget: usize,
) -> Summary {
    let mut selected_nps: Vec<usize> = Vec::new();
    let mut gen_pairs: Vec<(usize, usize)> = Vec::new();
    for (idx, var) in problem.vars.iter().enumerate() {
        if !*solution.assignment.get(idx).unwrap_or(&false) {
            continue;
        }
        match var.role {
            VarRole::NpSelect { np } => selected_nps.push(np),
            VarRole::SentenceGen { np, vp } => gen_pairs.push((np, vp)),
            _ => {}
        }
    }
    if selected_nps.is_empty() {
        return Summary::default();
    }

    let mut drafts: Vec<DraftSentence> = Vec::new();
    if mode == Mode::Extractive {
        // Whole-sentence extraction: group selected phrases by source
        // sentence and render each source verbatim.
        let mut by_sentence: BTreeMap<(String, usize), (Vec<PhraseId>, Vec<PhraseId>)> =
            BTreeMap::new();
        for np_pos in &selected_nps {
            let p = phrases.np(*np_pos);
            by_sentence
                .entry((p.doc_id.clone(), p.sent_idx))
                .or_default()
                .0
                .push(p.id);
        }
        for (_, vp_pos) in &gen_pairs {
            let p = phrases.vp(*vp_pos);
            let entry = by_sentence.entry((p.doc_id.clone(), p.sent_idx)).or_default();
            if !entry.1.contains(&p.id) {
                entry.1.push(p.id);
            }
        }
        for ((doc_id, _), (nps, mut vps)) in by_sentence {
            if nps.is_empty() || vps.is_empty() {
                continue;
            }
            vps.sort_by_key(|id| phrases.phrase(*id).span.start);
            let ts = topic.timestamp_of(&doc_id).unwrap_or(DateTime::<Utc>::MIN_UTC);
            let head = phrases.phrase(vps[0]);
            drafts.push(DraftSentence {
                np: *nps
                    .iter()
                    .min_by_key(|id| phrases.phrase(**id).span.start)
                    .unwrap(),
                sort_key: (ts, head.doc_id.clone(), head.sent_idx),
                vps,
                pseudo_timestamp: ts,
            });
        }
    } else {
        for np_pos in &selected_nps {
            let np = phrases.np(*np_pos);
            let mut vps: Vec<PhraseId> = gen_pairs
                .iter()
                .filter(|(n, _)| n == np_pos)
                .map(|(_, v)| phrases.vp(*v).id)
                .collect();
            if vps.is_empty() {
                continue;
            }
            let same_doc = vps
                .iter()
                .all(|id| phrases.phrase(*id).doc_id == phrases.phrase(vps[0]).doc_id);
            if same_doc {
                vps.sort_by_key(|id| {
                    let p = phrases.phrase(*id);
                    (p.sent_idx, p.span.start)
                });
            } else {
                vps.sort_by(|a, b| vp_sort_key(phrases, topic, *a).cmp(&vp_sort_key(phrases, topic, *b)));
            }
            let pseudo_timestamp = vps
                .iter()
                .map(|id| {
                    topic
                        .timestamp_of(&phrases.phrase(*id).doc_id)
                        .unwrap_or(DateTime::<Utc>::MIN_UTC)
                })
                .min()
                .unwrap();
            let head = phrases.phrase(vps[0]);
            drafts.push(DraftSentence {
                np: np.id,
                sort_key: (pseudo_timestamp, head.doc_id.clone(), head.sent_idx),
                vps,
                pseudo_timestamp,
            });
        }
    }

    // Stable order by pseudo-timestamp, then source coordinates.
    drafts.sort_by(|a, b| a.sort_key.cmp(&b.sort_key));

    // Base word count before conjunction insertion.
    let mut word_count: usize = if mode == Mode::Extractive {
        drafts
            .iter()
            .map(|d| {
                let head = phrases.phrase(d.vps[0]);
                phrases
                    .sentence_length(&head.doc_id, head.sent_idx)
                    .unwrap_or_else(|| {
                        phrases.phrase(d.np).length
                            + d.vps.iter().map(|v| phrases.phrase(*v).length).sum::<usize>()
                    })
            })
            .sum()
    } else {
        drafts
            .iter()
            .map(|d| {
                phrases.phrase(d.np).length
                    + d.vps.iter().map(|v| phrases.phrase(*v).length).sum::<usize>()
            })
            .sum()
    };

    let mut sentences = Vec::new();
    for draft in drafts {
        let kind = classify_sentence(draft.np, &draft.vps, phrases);
        let (text, words) = if mode == Mode::Extractive {
            let head = phrases.phrase(draft.vps[0]);
            let sentence = topic
                .sentence(&head.doc_id, head.sent_idx)
                .expect("selected phrase has a source sentence");
            (render_verbatim(&sentence.tokens), sentence.length)
        } else {
            // A conjunction costs one word; insert it only within budget.
            let want_conjunction = draft.vps.len() >= 2 && word_count + 1 <= length_budget;
            let conjunction = if want_conjunction {
                word_count += 1;
                Some(pick_conjunction(phrases, topic, &draft.vps))
            } else {
                None
            };
            let base: usize = phrases.phrase(draft.np).length
                + draft.vps.iter().map(|v| phrases.phrase(*v).length).sum::<usize>();
            (
                render_fused(phrases, draft.np, &draft.vps, conjunction),
                base + conjunction.is_some() as usize,
            )
        };
        sentences.push(SummarySentence {
            np: draft.np,
            vps: draft.vps,
            text,
            pseudo_timestamp: draft.pseudo_timestamp,
            kind,
            word_count: words,
        });
    }

    let word_count = sentences.iter().map(|s| s.word_count).sum();
    Summary { sentences, word_count }
}

/// "and" joins the final VP; a run of three or more VPs marching strictly
/// forward in time through distinct documents reads as a temporal chain and
/// takes "then" instead.
fn pick_conjunction(phrases: &PhraseSet, topic: &Topic, vps: &[PhraseId]) -> &'static str {
    let timestamps: Vec<DateTime<Utc>> = vps
        .iter()
        .map(|id| {
            topic
                .timestamp_of(&phrases.phrase(*id).doc_id)
                .unwrap_or(DateTime::<Utc>::MIN_UTC)
        })
        .collect();
    let strictly_increasing = timestamps.windows(2).all(|w| w[0] < w[1]);
    if strictly_increasing && timestamps.len() >= 3 {
        "then"
    } else {
        "and"
    }
}

fn render_fused(
    phrases: &PhraseSet,
    np: PhraseId,
    vps: &[PhraseId],
    conjunction: Option<&'static str>,
) -> String {
    let mut tokens: Vec<String> = phrases.phrase(np).tokens.clone();
    let last = vps.len() - 1;
    for (k, vp) in vps.iter().enumerate() {
        if k > 0 {
            tokens.push(",".to_string());
        }
        if k == last {
            if let Some(conj) = conjunction {
                tokens.push(conj.to_string());
            }
        }
        tokens.extend(phrases.phrase(*vp).tokens.iter().cloned());
    }
    finish_sentence(tokens)
}

fn render_verbatim(source_tokens: &[String]) -> String {
    finish_sentence(source_tokens.to_vec())
}

fn finish_sentence(mut tokens: Vec<String>) -> String {
    // Drop a trailing comma left by a truncated coordination.
    while tokens.last().map(|t| t == ",").unwrap_or(false) {
        tokens.pop();
    }
    if !tokens.last().map(|t| ends_sentence(t)).unwrap_or(false) {
        tokens.push(".".to_string());
    }
    debug_assert!(tokens.iter().filter(|t| !is_punctuation(t)).count() > 0);
    detokenize(&tokens)
}

/// Provenance sidecar: `[<n>:<kind>] {<phrase> (<doc>:<sent>)} ...` per line.
pub fn provenance_lines(summary: &Summary, phrases: &PhraseSet) -> String {
    let mut out = String::new();
    for (n, sentence) in summary.sentences.iter().enumerate() {
        out.push_str(&format!("[{}:{}]", n + 1, sentence.kind));
        let mut write_phrase = |id: PhraseId| {
            let p = phrases.phrase(id);
            out.push_str(&format!(" {{{} ({}:{})}}", p.text(), p.doc_id, p.sent_idx));
        };
        write_phrase(sentence.np);
        for vp in &sentence.vps {
            write_phrase(*vp);
        }
        out.push('\n');
    }
    out
}

/// Parses a provenance sidecar back into (kind, phrase text, doc, sent)
/// tuples per sentence; the round-trip check for written artifacts.
pub fn parse_provenance(text: &str) -> Option<Vec<(SentenceKind, Vec<(String, String, usize)>)>> {
    let mut out = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let rest = line.strip_prefix('[')?;
        let (header, body) = rest.split_once(']')?;
        let (_, kind) = header.split_once(':')?;
        let kind = match kind {
            "N" => SentenceKind::New,
            "C" => SentenceKind::Compressed,
            "O" => SentenceKind::Original,
            _ => return None,
        };
        let mut items = Vec::new();
        for chunk in body.split('{').skip(1) {
            let inner = chunk.split('}').next()?;
            let open = inner.rfind('(')?;
            let text = inner[..open].trim().to_string();
            let coords = inner[open + 1..].trim_end_matches(')');
            let (doc, sent) = coords.split_once(':')?;
            items.push((text, doc.to_string(), sent.parse().ok()?));
        }
        out.push((kind, items));
    }
    Some(out)
}
