//! Candidate phrase extraction from constituency trees.
//!
//! Each sentence is decomposed into noun phrases and verb phrases:
//!
//! 1. NPs and VPs that are direct children of a sentence (`S`) node come out
//!    at level 1. Clauses (`SBAR`/`S`) sitting in subject position, before the
//!    first VP sibling, are emitted as NPs.
//! 2. One recursive step: within a level-1 VP that has more than one parallel
//!    sub-VP, each sub-VP comes out at level 2 — unless the sub-VPs follow a
//!    modal, link, or auxiliary head. The symmetric rule applies to NPs.
//!    Level-2 phrases are treated as children of the same governing S node.
//!
//! Recursion never goes deeper: fragments below level 2 rarely carry a
//! complete fact on their own.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::treebank::{is_punctuation, lemmatize, Sentence, Span, Topic, TreeNode};

/// Globally unique phrase identifier within a topic extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhraseId(pub usize);

impl fmt::Display for PhraseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhraseKind {
    Np,
    Vp,
}

impl fmt::Display for PhraseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhraseKind::Np => write!(f, "NP"),
            PhraseKind::Vp => write!(f, "VP"),
        }
    }
}

/// Identity of the governing sentence node an extracted phrase hangs off.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SNodeKey {
    pub doc_id: String,
    pub sent_idx: usize,
    pub span: Span,
}

/// An extracted NP or VP candidate.
#[derive(Debug, Clone)]
pub struct Phrase {
    pub id: PhraseId,
    pub kind: PhraseKind,
    pub doc_id: String,
    pub sent_idx: usize,
    pub span: Span,
    /// 1 for direct children of the sentence node, 2 for the recursive step.
    pub level: u8,
    pub parent_s: SNodeKey,
    pub tokens: Vec<String>,
    /// Word count excluding punctuation-only tokens.
    pub length: usize,
    /// Filled by the salience pass; 0 until then.
    pub salience: f64,
    /// NPs only: true when every non-punctuation leaf is a pronoun tag.
    pub is_pronoun: bool,
}

impl Phrase {
    pub fn text(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Extraction produced no phrases for a sentence (no `S` node, say); this is
/// a warning, not a failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractWarning {
    pub doc_id: String,
    pub sent_idx: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("phrases {a} and {b} have different kinds")]
pub struct KindMismatch {
    pub a: PhraseId,
    pub b: PhraseId,
}

/// All phrases of a topic plus the lookup tables the later stages need.
#[derive(Debug, Clone, Default)]
pub struct PhraseSet {
    phrases: Vec<Phrase>,
    nps: Vec<PhraseId>,
    vps: Vec<PhraseId>,
    sentence_lengths: BTreeMap<(String, usize), usize>,
}

impl PhraseSet {
    pub fn phrase(&self, id: PhraseId) -> &Phrase {
        &self.phrases[id.0]
    }

    pub fn phrase_mut(&mut self, id: PhraseId) -> &mut Phrase {
        &mut self.phrases[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Phrase> {
        self.phrases.iter()
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// NP phrase ids in id order; positions in this list index the Γ rows.
    pub fn np_ids(&self) -> &[PhraseId] {
        &self.nps
    }

    /// VP phrase ids in id order; positions in this list index the Γ columns.
    pub fn vp_ids(&self) -> &[PhraseId] {
        &self.vps
    }

    pub fn np(&self, pos: usize) -> &Phrase {
        self.phrase(self.nps[pos])
    }

    pub fn vp(&self, pos: usize) -> &Phrase {
        self.phrase(self.vps[pos])
    }

    pub fn np_pos(&self, id: PhraseId) -> Option<usize> {
        self.nps.iter().position(|p| *p == id)
    }

    pub fn vp_pos(&self, id: PhraseId) -> Option<usize> {
        self.vps.iter().position(|p| *p == id)
    }

    /// Word-based length of a source sentence (symbol l(S)).
    pub fn sentence_length(&self, doc_id: &str, sent_idx: usize) -> Option<usize> {
        self.sentence_lengths.get(&(doc_id.to_string(), sent_idx)).copied()
    }

    /// Level-1 phrases of one source sentence.
    pub fn level1_of_sentence(&self, doc_id: &str, sent_idx: usize) -> Vec<&Phrase> {
        self.phrases
            .iter()
            .filter(|p| p.level == 1 && p.doc_id == doc_id && p.sent_idx == sent_idx)
            .collect()
    }

    /// Finds the phrase covering exact source coordinates, if any.
    pub fn find(&self, kind: PhraseKind, doc_id: &str, sent_idx: usize, span: Span) -> Option<&Phrase> {
        self.phrases
            .iter()
            .find(|p| p.kind == kind && p.doc_id == doc_id && p.sent_idx == sent_idx && p.span == span)
    }

    /// Debug dump, one line per phrase.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for p in &self.phrases {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}:{}:{}\t{}\n",
                p.id,
                p.kind,
                p.level,
                p.doc_id,
                p.sent_idx,
                p.span,
                p.text()
            ));
        }
        out
    }
}

const PRONOUN_TAGS: &[&str] = &["PRP", "PRP$", "WP", "WDT"];
const LINK_VERB_LEMMAS: &[&str] = &["be", "have", "do", "seem", "appear", "become"];

fn is_pronoun_np(node: &TreeNode) -> bool {
    let mut saw_word = false;
    for leaf in node.leaves() {
        let token = leaf.token.as_deref().unwrap_or("");
        if is_punctuation(token) {
            continue;
        }
        saw_word = true;
        let tag = leaf.pos.as_deref().unwrap_or("");
        if !PRONOUN_TAGS.contains(&tag) {
            return false;
        }
    }
    saw_word
}

/// True when the VP's own head, scanned among children before the first
/// sub-VP, is a modal, link, or auxiliary verb.
fn has_aux_head(vp: &TreeNode) -> bool {
    for child in &vp.children {
        if child.label == "VP" {
            return false;
        }
        if child.is_leaf() {
            let tag = child.pos.as_deref().unwrap_or("");
            if tag == "MD" {
                return true;
            }
            if tag.starts_with("VB") {
                let lemma = lemmatize(child.token.as_deref().unwrap_or(""), tag);
                return LINK_VERB_LEMMAS.contains(&lemma.as_str());
            }
        }
    }
    false
}

/// Sentence nodes: nodes labeled `S` with no `S` ancestor.
fn sentence_nodes(root: &TreeNode) -> Vec<&TreeNode> {
    let mut out = Vec::new();
    fn walk<'a>(node: &'a TreeNode, out: &mut Vec<&'a TreeNode>) {
        if node.label == "S" {
            out.push(node);
            return;
        }
        for child in &node.children {
            walk(child, out);
        }
    }
    walk(root, &mut out);
    out
}

struct Draft<'a> {
    kind: PhraseKind,
    node: &'a TreeNode,
    level: u8,
    s_span: Span,
}

fn extract_drafts<'a>(s_node: &'a TreeNode) -> Vec<Draft<'a>> {
    let mut drafts = Vec::new();
    let s_span = s_node.span;
    let first_vp_idx = s_node.children.iter().position(|c| c.label == "VP");
    let has_vp = first_vp_idx.is_some();

    for (idx, child) in s_node.children.iter().enumerate() {
        match child.label.as_str() {
            "NP" => {
                drafts.push(Draft { kind: PhraseKind::Np, node: child, level: 1, s_span });
                let sub_nps: Vec<&TreeNode> =
                    child.children.iter().filter(|c| c.label == "NP").collect();
                if sub_nps.len() > 1 {
                    for sub in sub_nps {
                        drafts.push(Draft { kind: PhraseKind::Np, node: sub, level: 2, s_span });
                    }
                }
            }
            "VP" => {
                drafts.push(Draft { kind: PhraseKind::Vp, node: child, level: 1, s_span });
                let sub_vps: Vec<&TreeNode> =
                    child.children.iter().filter(|c| c.label == "VP").collect();
                if sub_vps.len() > 1 && !has_aux_head(child) {
                    for sub in sub_vps {
                        drafts.push(Draft { kind: PhraseKind::Vp, node: sub, level: 2, s_span });
                    }
                }
            }
            "SBAR" | "S" => {
                // A clause before the first VP sibling functions as subject.
                if has_vp && idx < first_vp_idx.unwrap() {
                    drafts.push(Draft { kind: PhraseKind::Np, node: child, level: 1, s_span });
                }
            }
            _ => {}
        }
    }
    drafts
}

/// Decomposes one sentence into candidate phrases. Returns the drafts in
/// extraction order and a warning when the tree has no sentence node.
pub fn extract_sentence_phrases(
    sentence: &Sentence,
    next_id: &mut usize,
) -> (Vec<Phrase>, Option<ExtractWarning>) {
    let s_nodes = sentence_nodes(&sentence.tree.root);
    if s_nodes.is_empty() {
        return (
            Vec::new(),
            Some(ExtractWarning {
                doc_id: sentence.doc_id.clone(),
                sent_idx: sentence.sent_idx,
                reason: "no S node in tree".to_string(),
            }),
        );
    }

    let mut phrases = Vec::new();
    let mut seen: BTreeSet<(PhraseKind, Span)> = BTreeSet::new();
    for s_node in s_nodes {
        for draft in extract_drafts(s_node) {
            if !seen.insert((draft.kind, draft.node.span)) {
                continue;
            }
            let tokens = sentence.span_text(draft.node.span);
            let length = sentence.span_length(draft.node.span);
            if length == 0 {
                continue;
            }
            let id = PhraseId(*next_id);
            *next_id += 1;
            phrases.push(Phrase {
                id,
                kind: draft.kind,
                doc_id: sentence.doc_id.clone(),
                sent_idx: sentence.sent_idx,
                span: draft.node.span,
                level: draft.level,
                parent_s: SNodeKey {
                    doc_id: sentence.doc_id.clone(),
                    sent_idx: sentence.sent_idx,
                    span: draft.s_span,
                },
                is_pronoun: draft.kind == PhraseKind::Np && is_pronoun_np(draft.node),
                tokens,
                length,
                salience: 0.0,
            });
        }
    }
    (phrases, None)
}

/// Extracts phrases for a whole topic, assigning globally unique ids in
/// document, sentence, extraction order.
pub fn extract_phrases(topic: &Topic) -> (PhraseSet, Vec<ExtractWarning>) {
    let mut set = PhraseSet::default();
    let mut warnings = Vec::new();
    let mut next_id = 0usize;
    for doc in &topic.documents {
        for sentence in &doc.sentences {
            set.sentence_lengths
                .insert((doc.doc_id.clone(), sentence.sent_idx), sentence.length);
            let (phrases, warning) = extract_sentence_phrases(sentence, &mut next_id);
            if let Some(w) = warning {
                warnings.push(w);
            }
            for phrase in phrases {
                match phrase.kind {
                    PhraseKind::Np => set.nps.push(phrase.id),
                    PhraseKind::Vp => set.vps.push(phrase.id),
                }
                set.phrases.push(phrase);
            }
        }
    }
    (set, warnings)
}

/// True when two same-kind phrases lie on one ancestor-descendant chain of
/// their tree: same sentence and nested spans. Tree spans are laminar, so
/// nesting implies a chain.
pub fn same_path(a: &Phrase, b: &Phrase) -> Result<bool, KindMismatch> {
    if a.kind != b.kind {
        return Err(KindMismatch { a: a.id, b: b.id });
    }
    Ok(a.doc_id == b.doc_id
        && a.sent_idx == b.sent_idx
        && (a.span.contains(&b.span) || b.span.contains(&a.span)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::parse_tree;

    pub(crate) const FIGURE_TREE: &str = "(S (NP (DT An) (JJ armed) (NN man)) (VP (VP (VBD walked) (PP (IN into) (NP (DT an) (NNP Amish) (NN school)))) (, ,) (VP (VBD sent) (NP (DT the) (NNS boys)) (ADVP (RB outside))) (CC and) (VP (VP (VBD tied) (PRT (RP up))) (CC and) (VP (VBD shot) (NP (DT the) (NNS girls))) (, ,) (S (VP (VBG killing) (NP (NP (CD three)) (PP (IN of) (NP (PRP them)))))))) (. .))";

    fn sentence_from(text: &str) -> Sentence {
        Sentence::new("d1".into(), 0, 0, parse_tree(text).unwrap())
    }

    fn extract(text: &str) -> Vec<Phrase> {
        let mut next = 0;
        extract_sentence_phrases(&sentence_from(text), &mut next).0
    }

    #[test]
    fn figure_tree_yields_exactly_five_phrases() {
        let phrases = extract(FIGURE_TREE);
        let rendered: Vec<(PhraseKind, u8, String)> = phrases
            .iter()
            .map(|p| (p.kind, p.level, p.text()))
            .collect();
        assert_eq!(
            rendered,
            vec![
                (PhraseKind::Np, 1, "An armed man".to_string()),
                (
                    PhraseKind::Vp,
                    1,
                    "walked into an Amish school , sent the boys outside and tied up and shot the girls , killing three of them"
                        .to_string()
                ),
                (PhraseKind::Vp, 2, "walked into an Amish school".to_string()),
                (PhraseKind::Vp, 2, "sent the boys outside".to_string()),
                (
                    PhraseKind::Vp,
                    2,
                    "tied up and shot the girls , killing three of them".to_string()
                ),
            ]
        );
    }

    #[test]
    fn single_vp_has_no_recursion() {
        let phrases = extract("(S (NP (NNP Police)) (VP (VBD said)) (. .))");
        assert_eq!(phrases.len(), 2);
        assert!(phrases.iter().all(|p| p.level == 1));
    }

    #[test]
    fn modal_head_blocks_sub_vps() {
        let phrases = extract("(S (NP (PRP He)) (VP (MD may) (VP (VB leave))))");
        let texts: Vec<String> = phrases.iter().map(|p| p.text()).collect();
        assert_eq!(texts, vec!["He".to_string(), "may leave".to_string()]);
    }

    #[test]
    fn aux_head_blocks_parallel_sub_vps() {
        let phrases =
            extract("(S (NP (PRP He)) (VP (VBD was) (VP (VBN shot)) (CC and) (VP (VBN killed))))");
        assert_eq!(phrases.len(), 2);
        assert!(phrases.iter().all(|p| p.level == 1));
    }

    #[test]
    fn subject_clause_becomes_np() {
        let phrases = extract(
            "(S (SBAR (IN That) (S (NP (PRP he)) (VP (VBD lied)))) (VP (VBD angered) (NP (NNS voters))) (. .))",
        );
        assert_eq!(phrases[0].kind, PhraseKind::Np);
        assert_eq!(phrases[0].text(), "That he lied");
        assert_eq!(phrases.len(), 2);
    }

    #[test]
    fn parallel_sub_nps_are_extracted() {
        let phrases = extract(
            "(S (NP (NP (DT The) (NNS victims)) (CC and) (NP (PRP$ their) (NNS families))) (VP (VBD received) (NP (NN support))) (. .))",
        );
        let nps: Vec<(u8, String)> = phrases
            .iter()
            .filter(|p| p.kind == PhraseKind::Np)
            .map(|p| (p.level, p.text()))
            .collect();
        assert_eq!(
            nps,
            vec![
                (1, "The victims and their families".to_string()),
                (2, "The victims".to_string()),
                (2, "their families".to_string()),
            ]
        );
    }

    #[test]
    fn single_sub_np_is_not_extracted() {
        let phrases = extract(
            "(S (NP (NP (DT A) (NN man)) (SBAR (WHNP (WP who)) (S (VP (VBD ran))))) (VP (VBD spoke)) (. .))",
        );
        let nps: Vec<&Phrase> = phrases.iter().filter(|p| p.kind == PhraseKind::Np).collect();
        assert_eq!(nps.len(), 1);
        assert_eq!(nps[0].level, 1);
    }

    #[test]
    fn pronoun_flag_follows_tags() {
        let phrases = extract("(S (NP (PRP He)) (VP (VBD ran)))");
        assert!(phrases[0].is_pronoun);
        let phrases = extract("(S (NP (PRP$ their) (NNS families)) (VP (VBD ran)))");
        assert!(!phrases[0].is_pronoun);
    }

    #[test]
    fn level2_phrases_share_the_governing_s() {
        let phrases = extract(FIGURE_TREE);
        let parent = phrases[0].parent_s.clone();
        assert!(phrases.iter().all(|p| p.parent_s == parent));
    }

    #[test]
    fn same_path_examples() {
        let phrases = extract(FIGURE_TREE);
        let level1_vp = &phrases[1];
        let walked = &phrases[2];
        let sent = &phrases[3];
        let tied = &phrases[4];
        assert!(same_path(level1_vp, walked).unwrap());
        assert!(same_path(walked, level1_vp).unwrap());
        assert!(!same_path(sent, tied).unwrap());
        assert!(same_path(walked, walked).unwrap());
        assert!(same_path(&phrases[0], walked).is_err());
    }

    #[test]
    fn no_s_node_warns_instead_of_failing() {
        let sentence = sentence_from("(FRAG (NP (NN Chaos)))");
        let mut next = 0;
        let (phrases, warning) = extract_sentence_phrases(&sentence, &mut next);
        assert!(phrases.is_empty());
        assert!(warning.is_some());
    }

    #[test]
    fn every_level2_phrase_has_a_level1_witness() {
        let phrases = extract(FIGURE_TREE);
        for p in phrases.iter().filter(|p| p.level == 2) {
            assert!(phrases
                .iter()
                .any(|q| q.level == 1 && q.kind == p.kind && q.span.strictly_contains(&p.span)));
        }
    }
}
