//! Topic ingestion from a directory of annotated document files.
//!
//! Layout understood by [`load_topic`]:
//! * `*.doc` — one source document: `#id` line, `#timestamp` line, then one
//!   bracketed tree per line; a blank line starts a new paragraph.
//! * `*.coref` — one cluster per line; mentions are `doc:sent:start-end`
//!   token spans separated by spaces.
//! * `*.ne` — one named-entity mention per line: a span followed by the
//!   surface string.

use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use thiserror::Error;

use super::{parse_tree, Document, Sentence, Span, Topic, TreeParseError};

/// A coreference mention located by document, sentence and token span.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawMention {
    pub doc_id: String,
    pub sent_idx: usize,
    pub span: Span,
}

/// One ingested coreference cluster (a set of mentions).
pub type RawCluster = Vec<RawMention>;

/// A named-entity annotation with its surface string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeMention {
    pub doc_id: String,
    pub sent_idx: usize,
    pub span: Span,
    pub surface: String,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing #id or #timestamp header")]
    MissingMetadata { path: String },
    #[error("{doc_id} line {line}: {source}")]
    Parse {
        doc_id: String,
        line: usize,
        #[source]
        source: TreeParseError,
    },
    #[error("duplicate document id {doc_id}")]
    DuplicateDocId { doc_id: String },
    #[error("{path} line {line}: bad timestamp {value}")]
    BadTimestamp {
        path: String,
        line: usize,
        value: String,
    },
    #[error("{path} line {line}: malformed span {value}")]
    BadSpan {
        path: String,
        line: usize,
        value: String,
    },
    #[error("{path}: no document files found")]
    EmptyTopic { path: String },
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a document file body into a [`Document`].
pub fn parse_document_file(path_label: &str, text: &str) -> Result<Document, LoadError> {
    let mut lines = text.lines().enumerate();
    let missing = || LoadError::MissingMetadata {
        path: path_label.to_string(),
    };

    let (_, id_line) = lines.next().ok_or_else(missing)?;
    let doc_id = id_line.strip_prefix("#id ").ok_or_else(missing)?.trim().to_string();
    if doc_id.is_empty() {
        return Err(missing());
    }
    let (ts_no, ts_line) = lines.next().ok_or_else(missing)?;
    let ts_text = ts_line.strip_prefix("#timestamp ").ok_or_else(missing)?.trim();
    let timestamp: DateTime<Utc> = ts_text
        .parse()
        .map_err(|_| LoadError::BadTimestamp {
            path: path_label.to_string(),
            line: ts_no + 1,
            value: ts_text.to_string(),
        })?;

    let mut sentences = Vec::new();
    let mut paragraph_idx = 0usize;
    let mut saw_sentence_in_paragraph = false;
    for (line_no, line) in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            if saw_sentence_in_paragraph {
                paragraph_idx += 1;
                saw_sentence_in_paragraph = false;
            }
            continue;
        }
        let tree = parse_tree(trimmed).map_err(|source| LoadError::Parse {
            doc_id: doc_id.clone(),
            line: line_no + 1,
            source,
        })?;
        sentences.push(Sentence::new(doc_id.clone(), sentences.len(), paragraph_idx, tree));
        saw_sentence_in_paragraph = true;
    }

    Ok(Document {
        doc_id,
        timestamp,
        sentences,
    })
}

fn parse_span_ref(path: &str, line_no: usize, text: &str) -> Result<RawMention, LoadError> {
    let bad = || LoadError::BadSpan {
        path: path.to_string(),
        line: line_no + 1,
        value: text.to_string(),
    };
    let mut parts = text.split(':');
    let doc_id = parts.next().ok_or_else(bad)?.to_string();
    let sent_idx: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let span_text = parts.next().ok_or_else(bad)?;
    if parts.next().is_some() || doc_id.is_empty() {
        return Err(bad());
    }
    let (start, end) = span_text.split_once('-').ok_or_else(bad)?;
    let start: usize = start.parse().map_err(|_| bad())?;
    let end: usize = end.parse().map_err(|_| bad())?;
    if start >= end {
        return Err(bad());
    }
    Ok(RawMention {
        doc_id,
        sent_idx,
        span: Span::new(start, end),
    })
}

/// Parses a coreference annotation file: one cluster per line.
pub fn parse_coref_file(path_label: &str, text: &str) -> Result<Vec<RawCluster>, LoadError> {
    let mut clusters = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut cluster = Vec::new();
        for piece in trimmed.split_whitespace() {
            cluster.push(parse_span_ref(path_label, line_no, piece)?);
        }
        if !cluster.is_empty() {
            clusters.push(cluster);
        }
    }
    Ok(clusters)
}

/// Parses a named-entity annotation file: `doc:sent:start-end surface...`.
pub fn parse_ne_file(path_label: &str, text: &str) -> Result<Vec<NeMention>, LoadError> {
    let mut mentions = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (span_part, surface) = match trimmed.split_once(char::is_whitespace) {
            Some(pair) => pair,
            None => {
                return Err(LoadError::BadSpan {
                    path: path_label.to_string(),
                    line: line_no + 1,
                    value: trimmed.to_string(),
                })
            }
        };
        let mention = parse_span_ref(path_label, line_no, span_part)?;
        mentions.push(NeMention {
            doc_id: mention.doc_id,
            sent_idx: mention.sent_idx,
            span: mention.span,
            surface: surface.trim().to_string(),
        });
    }
    Ok(mentions)
}

/// Loads a topic from a directory. The directory name becomes the topic id;
/// document files are read in sorted filename order.
pub fn load_topic(dir: &Path) -> Result<Topic, LoadError> {
    let topic_id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "topic".to_string());

    let mut entries: Vec<_> = fs::read_dir(dir)
        .map_err(|source| LoadError::Io {
            path: dir.display().to_string(),
            source,
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();

    let mut documents: Vec<Document> = Vec::new();
    let mut coref: Option<Vec<RawCluster>> = None;
    let mut ne: Option<Vec<NeMention>> = None;

    for path in entries {
        let label = path.display().to_string();
        match path.extension().and_then(|e| e.to_str()) {
            Some("doc") => {
                let doc = parse_document_file(&label, &read(&path)?)?;
                if documents.iter().any(|d| d.doc_id == doc.doc_id) {
                    return Err(LoadError::DuplicateDocId { doc_id: doc.doc_id });
                }
                documents.push(doc);
            }
            Some("coref") => {
                let mut clusters = parse_coref_file(&label, &read(&path)?)?;
                coref.get_or_insert_with(Vec::new).append(&mut clusters);
            }
            Some("ne") => {
                let mut mentions = parse_ne_file(&label, &read(&path)?)?;
                ne.get_or_insert_with(Vec::new).append(&mut mentions);
            }
            _ => {}
        }
    }

    if documents.is_empty() {
        return Err(LoadError::EmptyTopic {
            path: dir.display().to_string(),
        });
    }

    Ok(Topic {
        topic_id,
        documents,
        coref_clusters: coref,
        ne_annotations: ne,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    const DOC_A: &str = "#id a1\n#timestamp 2006-10-02T14:00:00Z\n(S (NP (NNP Police)) (VP (VBD said)) (. .))\n\n(S (NP (PRP He)) (VP (VBD ran)) (. .))\n";

    #[test]
    fn parses_document_with_paragraph_break() {
        let doc = parse_document_file("a1.doc", DOC_A).unwrap();
        assert_eq!(doc.doc_id, "a1");
        assert_eq!(doc.sentences.len(), 2);
        assert_eq!(doc.sentences[0].paragraph_idx, 0);
        assert_eq!(doc.sentences[1].paragraph_idx, 1);
        assert_eq!(doc.sentences[1].sent_idx, 1);
    }

    #[test]
    fn missing_timestamp_is_an_error() {
        let text = "#id a1\n(S (NN x))\n";
        match parse_document_file("a1.doc", text) {
            Err(LoadError::MissingMetadata { .. }) => {}
            other => panic!("expected MissingMetadata, got {other:?}"),
        }
    }

    #[test]
    fn parse_error_carries_doc_and_line() {
        let text = "#id a1\n#timestamp 2006-10-02T14:00:00Z\n(S (NP (DT A)\n";
        match parse_document_file("a1.doc", text) {
            Err(LoadError::Parse { doc_id, line, .. }) => {
                assert_eq!(doc_id, "a1");
                assert_eq!(line, 3);
            }
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn loads_directory_and_rejects_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.doc"), DOC_A).unwrap();
        fs::write(
            dir.path().join("b.doc"),
            "#id b1\n#timestamp 2006-10-02T15:00:00Z\n(S (NP (NN dog)) (VP (VBD ran)) (. .))\n",
        )
        .unwrap();
        let topic = load_topic(dir.path()).unwrap();
        assert_eq!(topic.documents.len(), 2);
        assert_eq!(topic.documents[0].doc_id, "a1");
        assert!(topic.documents[0].timestamp < topic.documents[1].timestamp);

        fs::write(dir.path().join("c.doc"), DOC_A).unwrap();
        match load_topic(dir.path()) {
            Err(LoadError::DuplicateDocId { doc_id }) => assert_eq!(doc_id, "a1"),
            other => panic!("expected DuplicateDocId, got {other:?}"),
        }
    }

    #[test]
    fn parses_annotation_files() {
        let clusters = parse_coref_file("t.coref", "a1:0:0-1 a1:1:0-1\n\nb1:0:0-2\n").unwrap();
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].len(), 2);
        assert_eq!(clusters[0][1].sent_idx, 1);

        let ne = parse_ne_file("t.ne", "a1:0:0-2 Charles Roberts\n").unwrap();
        assert_eq!(ne.len(), 1);
        assert_eq!(ne[0].surface, "Charles Roberts");
        assert_eq!(ne[0].span, Span::new(0, 2));

        match parse_ne_file("t.ne", "a1:0:3-1 X\n") {
            Err(LoadError::BadSpan { .. }) => {}
            other => panic!("expected BadSpan, got {other:?}"),
        }
    }
}
