//! Bracketed constituency trees and topic ingestion.
//!
//! Trees arrive pre-parsed in a strict bracketed format, one sentence per
//! line. A document file carries an `#id` header, an `#timestamp` header and
//! a sequence of trees; blank lines mark paragraph breaks. A topic is a
//! directory of document files plus optional coreference and named-entity
//! annotation files.

mod lemma;
mod load;

pub use lemma::{lemmatize, stem};
pub use load::{
    load_topic, parse_coref_file, parse_document_file, parse_ne_file, LoadError, NeMention,
    RawCluster, RawMention,
};

use std::fmt;

use chrono::{DateTime, Utc};
use thiserror::Error;

/// Half-open token-index interval `[start, end)` within a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start < end, "empty span");
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// True when `other` lies inside `self` (equality allowed).
    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// True when `other` lies strictly inside `self`.
    pub fn strictly_contains(&self, other: &Span) -> bool {
        self.contains(other) && self.len() > other.len()
    }

    pub fn intersects(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// A node of a constituency tree.
///
/// Leaves carry the surface token and the part-of-speech tag (the node label
/// doubles as the tag); internal nodes carry a syntactic-category label and
/// one or more children. A node has a token iff it has zero children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub label: String,
    pub children: Vec<TreeNode>,
    pub token: Option<String>,
    pub pos: Option<String>,
    pub span: Span,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// In-order leaf nodes.
    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a TreeNode>) {
        if self.is_leaf() {
            out.push(self);
        } else {
            for child in &self.children {
                child.collect_leaves(out);
            }
        }
    }

    fn write_bracketed(&self, out: &mut String) {
        out.push('(');
        out.push_str(&self.label);
        if let Some(token) = &self.token {
            out.push(' ');
            out.push_str(token);
        } else {
            for child in &self.children {
                out.push(' ');
                child.write_bracketed(out);
            }
        }
        out.push(')');
    }
}

/// A parsed sentence tree; the root is usually labeled `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstituencyTree {
    pub root: TreeNode,
}

impl ConstituencyTree {
    /// Surface tokens in leaf order.
    pub fn tokens(&self) -> Vec<String> {
        self.root
            .leaves()
            .iter()
            .map(|leaf| leaf.token.clone().expect("leaf without token"))
            .collect()
    }

    /// Serializes back to the bracketed format accepted by [`parse_tree`].
    pub fn to_bracketed(&self) -> String {
        let mut out = String::new();
        self.root.write_bracketed(&mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeParseError {
    #[error("unbalanced or malformed parentheses at byte {pos}")]
    UnbalancedParens { pos: usize },
    #[error("empty node label at byte {pos}")]
    EmptyLabel { pos: usize },
    #[error("tree contains no tokens")]
    NoTokens,
}

/// Parses a bracketed constituency tree such as
/// `(S (NP (DT An) (JJ armed) (NN man)) (VP (VBD walked)))`.
///
/// Leaf spans are assigned left to right starting at 0; internal spans are
/// the union of child spans.
pub fn parse_tree(text: &str) -> Result<ConstituencyTree, TreeParseError> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let mut next_leaf = 0usize;
    skip_ws(bytes, &mut pos);
    if pos >= bytes.len() || bytes[pos] != b'(' {
        return Err(TreeParseError::UnbalancedParens { pos });
    }
    let root = parse_node(bytes, &mut pos, &mut next_leaf)?;
    skip_ws(bytes, &mut pos);
    if pos != bytes.len() {
        return Err(TreeParseError::UnbalancedParens { pos });
    }
    if next_leaf == 0 {
        return Err(TreeParseError::NoTokens);
    }
    Ok(ConstituencyTree { root })
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
}

fn read_atom(bytes: &[u8], pos: &mut usize) -> String {
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'(' && bytes[*pos] != b')' {
        *pos += 1;
    }
    String::from_utf8_lossy(&bytes[start..*pos]).into_owned()
}

fn parse_node(bytes: &[u8], pos: &mut usize, next_leaf: &mut usize) -> Result<TreeNode, TreeParseError> {
    debug_assert_eq!(bytes[*pos], b'(');
    *pos += 1; // consume '('
    skip_ws(bytes, pos);
    let label_pos = *pos;
    let label = read_atom(bytes, pos);
    if label.is_empty() {
        return Err(TreeParseError::EmptyLabel { pos: label_pos });
    }
    skip_ws(bytes, pos);

    let mut children = Vec::new();
    let mut token: Option<String> = None;
    loop {
        if *pos >= bytes.len() {
            return Err(TreeParseError::UnbalancedParens { pos: *pos });
        }
        match bytes[*pos] {
            b')' => {
                *pos += 1;
                break;
            }
            b'(' => {
                if token.is_some() {
                    // Mixed leaf/child content is not part of the grammar.
                    return Err(TreeParseError::UnbalancedParens { pos: *pos });
                }
                let child = parse_node(bytes, pos, next_leaf)?;
                children.push(child);
                skip_ws(bytes, pos);
            }
            _ => {
                if token.is_some() || !children.is_empty() {
                    return Err(TreeParseError::UnbalancedParens { pos: *pos });
                }
                token = Some(read_atom(bytes, pos));
                skip_ws(bytes, pos);
            }
        }
    }

    match token {
        Some(word) => {
            let span = Span::new(*next_leaf, *next_leaf + 1);
            *next_leaf += 1;
            Ok(TreeNode {
                pos: Some(label.clone()),
                label,
                children: Vec::new(),
                token: Some(word),
                span,
            })
        }
        None => {
            if children.is_empty() {
                return Err(TreeParseError::NoTokens);
            }
            let span = Span {
                start: children.first().unwrap().span.start,
                end: children.last().unwrap().span.end,
            };
            Ok(TreeNode {
                label,
                children,
                token: None,
                pos: None,
                span,
            })
        }
    }
}

/// True when a token consists solely of punctuation characters
/// (no alphanumeric content); such tokens do not count toward l().
pub fn is_punctuation(token: &str) -> bool {
    !token.chars().any(|c| c.is_alphanumeric())
}

/// A sentence of a source document.
#[derive(Debug, Clone)]
pub struct Sentence {
    pub doc_id: String,
    /// 0-based index within the document.
    pub sent_idx: usize,
    /// 0-based paragraph position within the document.
    pub paragraph_idx: usize,
    pub tree: ConstituencyTree,
    pub tokens: Vec<String>,
    /// Word-token count excluding punctuation-only tokens.
    pub length: usize,
}

impl Sentence {
    pub fn new(doc_id: String, sent_idx: usize, paragraph_idx: usize, tree: ConstituencyTree) -> Self {
        let tokens = tree.tokens();
        let length = tokens.iter().filter(|t| !is_punctuation(t)).count();
        Sentence {
            doc_id,
            sent_idx,
            paragraph_idx,
            tree,
            tokens,
            length,
        }
    }

    /// `(token, pos)` pairs in leaf order.
    pub fn tagged_tokens(&self) -> Vec<(&str, &str)> {
        self.tree
            .root
            .leaves()
            .iter()
            .map(|leaf| {
                (
                    leaf.token.as_deref().expect("leaf without token"),
                    leaf.pos.as_deref().expect("leaf without pos"),
                )
            })
            .collect()
    }

    /// Word-token count of a span, per the same rule as [`Sentence::length`].
    pub fn span_length(&self, span: Span) -> usize {
        self.tokens[span.start..span.end]
            .iter()
            .filter(|t| !is_punctuation(t))
            .count()
    }

    pub fn span_text(&self, span: Span) -> Vec<String> {
        self.tokens[span.start..span.end].to_vec()
    }
}

/// A source document: ordered sentences plus a publication timestamp.
#[derive(Debug, Clone)]
pub struct Document {
    pub doc_id: String,
    pub timestamp: DateTime<Utc>,
    pub sentences: Vec<Sentence>,
}

/// A set of related documents with optional annotations.
#[derive(Debug, Clone)]
pub struct Topic {
    pub topic_id: String,
    pub documents: Vec<Document>,
    /// Ingested coreference clusters, one inner vec per cluster.
    pub coref_clusters: Option<Vec<RawCluster>>,
    /// Ingested named-entity mentions.
    pub ne_annotations: Option<Vec<NeMention>>,
}

impl Topic {
    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.doc_id == doc_id)
    }

    pub fn sentence(&self, doc_id: &str, sent_idx: usize) -> Option<&Sentence> {
        self.document(doc_id)?.sentences.get(sent_idx)
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn timestamp_of(&self, doc_id: &str) -> Option<DateTime<Utc>> {
        self.document(doc_id).map(|d| d.timestamp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_level_sentence() {
        let tree = parse_tree("(S (NP (DT An) (JJ armed) (NN man)) (VP (VBD walked)))").unwrap();
        assert_eq!(tree.root.label, "S");
        assert_eq!(tree.root.children.len(), 2);
        assert_eq!(tree.root.leaves().len(), 4);
        assert_eq!(tree.root.children[0].span, Span::new(0, 3));
        assert_eq!(tree.root.children[1].span, Span::new(3, 4));
        assert_eq!(tree.tokens(), vec!["An", "armed", "man", "walked"]);
    }

    #[test]
    fn parses_single_preterminal() {
        let tree = parse_tree("(NN dog)").unwrap();
        assert!(tree.root.is_leaf());
        assert_eq!(tree.root.span, Span::new(0, 1));
        assert_eq!(tree.root.pos.as_deref(), Some("NN"));
        assert_eq!(tree.root.token.as_deref(), Some("dog"));
    }

    #[test]
    fn reports_unbalanced_parens() {
        match parse_tree("(S (NP (DT A)") {
            Err(TreeParseError::UnbalancedParens { .. }) => {}
            other => panic!("expected UnbalancedParens, got {other:?}"),
        }
    }

    #[test]
    fn reports_empty_label() {
        match parse_tree("(S () (NN x))") {
            Err(TreeParseError::EmptyLabel { .. }) => {}
            other => panic!("expected EmptyLabel, got {other:?}"),
        }
    }

    #[test]
    fn reports_no_tokens() {
        assert_eq!(parse_tree("(S (NP))"), Err(TreeParseError::NoTokens));
        assert_eq!(parse_tree("(S)"), Err(TreeParseError::NoTokens));
    }

    #[test]
    fn rejects_trailing_garbage() {
        match parse_tree("(NN dog) extra") {
            Err(TreeParseError::UnbalancedParens { .. }) => {}
            other => panic!("expected UnbalancedParens, got {other:?}"),
        }
    }

    #[test]
    fn round_trips_bracketed_text() {
        let text = "(S (NP (DT The) (NNS shootings)) (VP (VBD occurred) (PP (IN about) (NP (CD 10:45) (NN a.m.)))) (. .))";
        let tree = parse_tree(text).unwrap();
        let again = parse_tree(&tree.to_bracketed()).unwrap();
        assert_eq!(tree, again);
        assert_eq!(tree.to_bracketed(), text);
    }

    #[test]
    fn sentence_length_skips_punctuation() {
        let tree = parse_tree("(S (NP (NNP Police)) (VP (VBD said)) (. .))").unwrap();
        let sentence = Sentence::new("d".into(), 0, 0, tree);
        assert_eq!(sentence.tokens.len(), 3);
        assert_eq!(sentence.length, 2);
    }

    #[test]
    fn parent_span_is_union_of_children() {
        let tree = parse_tree("(X (A (B b) (C c)) (D d))").unwrap();
        fn check(node: &TreeNode) {
            if node.is_leaf() {
                assert_eq!(node.span.len(), 1);
                return;
            }
            assert_eq!(node.span.start, node.children.first().unwrap().span.start);
            assert_eq!(node.span.end, node.children.last().unwrap().span.end);
            for pair in node.children.windows(2) {
                assert_eq!(pair[0].span.end, pair[1].span.start);
            }
            for child in &node.children {
                check(child);
            }
        }
        check(&tree.root);
    }
}
