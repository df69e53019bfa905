//! Shared fixtures for the criterion benchmarks.

use std::path::PathBuf;

use phrasal::treebank::{load_topic, Topic};

/// The bundled five-document corpus.
pub fn amish() -> Topic {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/amish");
    load_topic(&dir).expect("bundled corpus loads")
}

/// A two-document slice of the corpus for solver-speed benchmarks.
pub fn amish_pair() -> Topic {
    let base = amish();
    Topic {
        topic_id: base.topic_id.clone(),
        documents: vec![base.documents[0].clone(), base.documents[2].clone()],
        coref_clusters: base.coref_clusters.clone(),
        ne_annotations: base.ne_annotations.clone(),
    }
}
