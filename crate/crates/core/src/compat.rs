//! Compatibility between NPs and VPs.
//!
//! `Γ[i,j] = 1` when NP i and VP j hang off the same sentence node. The
//! expanded matrix Γ̃ additionally permits an NP to replace a coreferent NP
//! as the subject of its VP, and a VP to be concatenated to the NP of a
//! sufficiently similar VP. Alternative NPs come from coreference clusters;
//! alternative VPs from a Jaccard test over concept sets.

use std::collections::{BTreeMap, BTreeSet};

use crate::phrase::{PhraseId, PhraseKind, PhraseSet};
use crate::salience::Concept;
use crate::treebank::Topic;

/// Dense boolean matrix, rows = NPs, cols = VPs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<bool>,
}

impl BoolMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        BoolMatrix { rows, cols, data: vec![false; rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.data[r * self.cols + c] = v;
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|b| **b).count()
    }

    /// Elementwise superset test.
    pub fn dominates(&self, other: &BoolMatrix) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| *a || !*b)
    }

    /// Sparse TSV dump `i\tj\t1` for set entries.
    pub fn dump_tsv(&self) -> String {
        let mut out = String::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.push_str(&format!("{r}\t{c}\t1\n"));
                }
            }
        }
        out
    }
}

/// Dense symmetric matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    pub n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix { n, data: vec![0.0; n * n] };
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn dump_tsv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.get(i, j);
                if v != 0.0 {
                    out.push_str(&format!("{i}\t{j}\t{v}\n"));
                }
            }
        }
        out
    }
}

/// Symmetric alternative-phrase relation keyed by phrase id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AltMap(BTreeMap<PhraseId, BTreeSet<PhraseId>>);

impl AltMap {
    pub fn link(&mut self, a: PhraseId, b: PhraseId) {
        if a == b {
            return;
        }
        self.0.entry(a).or_default().insert(b);
        self.0.entry(b).or_default().insert(a);
    }

    pub fn alternatives(&self, id: PhraseId) -> impl Iterator<Item = PhraseId> + '_ {
        self.0.get(&id).into_iter().flatten().copied()
    }

    pub fn are_alternatives(&self, a: PhraseId, b: PhraseId) -> bool {
        self.0.get(&a).map(|s| s.contains(&b)).unwrap_or(false)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A merged coreference cluster over extracted NPs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorefCluster {
    pub cluster_id: usize,
    pub mentions: BTreeSet<PhraseId>,
}

/// An ingested mention that matched no extracted NP; dropped with a warning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DanglingMention {
    pub doc_id: String,
    pub sent_idx: usize,
    pub span: crate::treebank::Span,
}

/// Γ, Γ̃ and the alternative-phrase relations behind the expansion.
#[derive(Debug, Clone)]
pub struct CompatibilityMatrix {
    pub gamma: BoolMatrix,
    pub gamma_tilde: BoolMatrix,
    pub alt_np: AltMap,
    pub alt_vp: AltMap,
}

/// Pairwise similarities used by the objective's redundancy penalties.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    /// NP x NP; 1 for coreferent pairs, Jaccard otherwise.
    pub r_np: SymMatrix,
    /// VP x VP Jaccard.
    pub r_vp: SymMatrix,
    pub jaccard_threshold: f64,
}

/// |a ∩ b| / |a ∪ b|, with 0 for two empty sets.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Lower root wins, keeping merge order-independent.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Named-entity surface keys intersecting a phrase span; used both to merge
/// clusters across documents and to form fallback clusters.
fn ne_keys_of_span(topic: &Topic, doc_id: &str, sent_idx: usize, span: crate::treebank::Span) -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    if let Some(mentions) = &topic.ne_annotations {
        for m in mentions {
            if m.doc_id == doc_id && m.sent_idx == sent_idx && m.span.intersects(&span) {
                keys.insert(m.surface.to_lowercase());
            }
        }
    } else if let Some(sentence) = topic.sentence(doc_id, sent_idx) {
        // No annotations: capitalized runs fully inside the span.
        let mut start: Option<usize> = None;
        for i in span.start..=span.end {
            let capitalized = i < span.end
                && sentence.tokens[i]
                    .chars()
                    .next()
                    .map(|c| c.is_uppercase())
                    .unwrap_or(false);
            if capitalized {
                start.get_or_insert(i);
            } else if let Some(s) = start.take() {
                keys.insert(sentence.tokens[s..i].join(" ").to_lowercase());
            }
        }
    }
    keys
}

/// Builds merged coreference clusters over the extracted NPs.
///
/// Per-document clusters come from the annotation file when present;
/// otherwise NPs whose surface is a named entity are grouped by identical
/// surface string. Clusters sharing a named-entity key (case-insensitive)
/// are merged across documents; mentions that are not extracted NPs are
/// dropped, then empty (or singleton) clusters are discarded.
pub fn build_clusters(
    topic: &Topic,
    phrases: &PhraseSet,
) -> (Vec<CorefCluster>, Vec<DanglingMention>) {
    let mut dangling = Vec::new();
    let mut raw: Vec<BTreeSet<PhraseId>> = Vec::new();

    if let Some(annotated) = &topic.coref_clusters {
        for cluster in annotated {
            let mut mentions = BTreeSet::new();
            for m in cluster {
                match phrases.find(PhraseKind::Np, &m.doc_id, m.sent_idx, m.span) {
                    Some(p) => {
                        mentions.insert(p.id);
                    }
                    None => dangling.push(DanglingMention {
                        doc_id: m.doc_id.clone(),
                        sent_idx: m.sent_idx,
                        span: m.span,
                    }),
                }
            }
            if !mentions.is_empty() {
                raw.push(mentions);
            }
        }
    } else {
        // Fallback: exact-string named-entity clusters over NPs.
        let mut by_surface: BTreeMap<String, BTreeSet<PhraseId>> = BTreeMap::new();
        for id in phrases.np_ids() {
            let p = phrases.phrase(*id);
            if p.is_pronoun {
                continue;
            }
            let keys = ne_keys_of_span(topic, &p.doc_id, p.sent_idx, p.span);
            let surface = p.text().to_lowercase();
            if keys.contains(&surface) || all_capitalized(p) {
                by_surface.entry(surface).or_default().insert(p.id);
            }
        }
        raw.extend(by_surface.into_values());
    }

    // Merge clusters sharing a named-entity surface key.
    let mut uf = UnionFind::new(raw.len());
    let mut key_owner: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, cluster) in raw.iter().enumerate() {
        for id in cluster {
            let p = phrases.phrase(*id);
            for key in ne_keys_of_span(topic, &p.doc_id, p.sent_idx, p.span) {
                match key_owner.get(&key) {
                    Some(owner) => uf.union(*owner, idx),
                    None => {
                        key_owner.insert(key, idx);
                    }
                }
            }
        }
    }

    let mut merged: BTreeMap<usize, BTreeSet<PhraseId>> = BTreeMap::new();
    for (idx, cluster) in raw.iter().enumerate() {
        merged.entry(uf.find(idx)).or_default().extend(cluster.iter().copied());
    }

    let clusters = merged
        .into_values()
        .filter(|mentions| mentions.len() >= 2)
        .enumerate()
        .map(|(cluster_id, mentions)| CorefCluster { cluster_id, mentions })
        .collect();
    (clusters, dangling)
}

fn all_capitalized(p: &crate::phrase::Phrase) -> bool {
    let mut saw = false;
    for t in &p.tokens {
        if crate::treebank::is_punctuation(t) {
            continue;
        }
        saw = true;
        if !t.chars().next().map(|c| c.is_uppercase()).unwrap_or(false) {
            return false;
        }
    }
    saw
}

/// NP alternatives: two NPs in the same cluster.
pub fn np_alternatives(clusters: &[CorefCluster]) -> AltMap {
    let mut alt = AltMap::default();
    for cluster in clusters {
        let ids: Vec<PhraseId> = cluster.mentions.iter().copied().collect();
        for (i, a) in ids.iter().enumerate() {
            for b in &ids[i + 1..] {
                alt.link(*a, *b);
            }
        }
    }
    alt
}

/// VP alternatives: concept-set Jaccard strictly above the threshold.
pub fn vp_alternatives(
    phrases: &PhraseSet,
    concept_sets: &[BTreeSet<Concept>],
    threshold: f64,
) -> AltMap {
    let mut alt = AltMap::default();
    let vps = phrases.vp_ids();
    for (i, a) in vps.iter().enumerate() {
        for b in &vps[i + 1..] {
            if jaccard(&concept_sets[a.0], &concept_sets[b.0]) > threshold {
                alt.link(*a, *b);
            }
        }
    }
    alt
}

/// `Γ[i,j] = 1` iff NP i and VP j come from the same sentence node.
pub fn build_gamma(phrases: &PhraseSet) -> BoolMatrix {
    let nps = phrases.np_ids();
    let vps = phrases.vp_ids();
    let mut gamma = BoolMatrix::new(nps.len(), vps.len());
    for (i, np) in nps.iter().enumerate() {
        for (j, vp) in vps.iter().enumerate() {
            if phrases.phrase(*np).parent_s == phrases.phrase(*vp).parent_s {
                gamma.set(i, j, true);
            }
        }
    }
    gamma
}

/// One-step expansion of Γ through the alternative relations:
/// `Γ̃[p,q] = Γ[p,q] ∨ (∃i: N_p ∈ Ñ_i ∧ Γ[i,q]) ∨ (∃j: V_q ∈ Ṽ_j ∧ Γ[p,j])`.
pub fn expand_gamma(
    gamma: &BoolMatrix,
    alt_np: &AltMap,
    alt_vp: &AltMap,
    phrases: &PhraseSet,
) -> BoolMatrix {
    let nps = phrases.np_ids();
    let vps = phrases.vp_ids();
    let mut tilde = gamma.clone();
    for (p, np) in nps.iter().enumerate() {
        for alt in alt_np.alternatives(*np) {
            if let Some(i) = phrases.np_pos(alt) {
                for q in 0..vps.len() {
                    if gamma.get(i, q) {
                        tilde.set(p, q, true);
                    }
                }
            }
        }
    }
    for (q, vp) in vps.iter().enumerate() {
        for alt in alt_vp.alternatives(*vp) {
            if let Some(j) = phrases.vp_pos(alt) {
                for p in 0..nps.len() {
                    if gamma.get(p, j) {
                        tilde.set(p, q, true);
                    }
                }
            }
        }
    }
    tilde
}

/// Builds both matrices plus the alternative relations in one pass.
pub fn build_compatibility(
    topic: &Topic,
    phrases: &PhraseSet,
    concept_sets: &[BTreeSet<Concept>],
    jaccard_threshold: f64,
) -> (CompatibilityMatrix, Vec<CorefCluster>, Vec<DanglingMention>) {
    let (clusters, dangling) = build_clusters(topic, phrases);
    let alt_np = np_alternatives(&clusters);
    let alt_vp = vp_alternatives(phrases, concept_sets, jaccard_threshold);
    let gamma = build_gamma(phrases);
    let gamma_tilde = expand_gamma(&gamma, &alt_np, &alt_vp, phrases);
    (
        CompatibilityMatrix { gamma, gamma_tilde, alt_np, alt_vp },
        clusters,
        dangling,
    )
}

/// Pairwise similarity matrices: coreferent NP pairs score 1, everything
/// else scores the Jaccard of concept sets.
pub fn build_similarity(
    phrases: &PhraseSet,
    clusters: &[CorefCluster],
    concept_sets: &[BTreeSet<Concept>],
    jaccard_threshold: f64,
) -> SimilarityMatrix {
    let mut cluster_of: BTreeMap<PhraseId, usize> = BTreeMap::new();
    for cluster in clusters {
        for id in &cluster.mentions {
            cluster_of.insert(*id, cluster.cluster_id);
        }
    }

    let nps = phrases.np_ids();
    let mut r_np = SymMatrix::identity(nps.len());
    for i in 0..nps.len() {
        for j in (i + 1)..nps.len() {
            let coreferent = match (cluster_of.get(&nps[i]), cluster_of.get(&nps[j])) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            };
            let v = if coreferent {
                1.0
            } else {
                jaccard(&concept_sets[nps[i].0], &concept_sets[nps[j].0])
            };
            r_np.set(i, j, v);
        }
    }

    let vps = phrases.vp_ids();
    let mut r_vp = SymMatrix::identity(vps.len());
    for i in 0..vps.len() {
        for j in (i + 1)..vps.len() {
            r_vp.set(i, j, jaccard(&concept_sets[vps[i].0], &concept_sets[vps[j].0]));
        }
    }

    SimilarityMatrix { r_np, r_vp, jaccard_threshold }
}
