//! Corpus data model: tokens, chunks, attachment hints and named
//! annotation sets of grammatical-relation arcs.
//!
//! Every arc endpoint is a single token index. Arcs drawn to a chunk are
//! stored against the chunk's head token, so two annotations of the same
//! relation compare equal no matter which token of the chunk the
//! annotator pointed at.

mod format;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::{IndexMap, IndexSet};

use crate::error::{Error, Result};

pub use format::{parse_corpus, read_corpus, write_corpus};

/// The annotation set holding the gold-standard arcs.
pub const KEY_SET: &str = "key";

/// Reserved first field of attachment-hint lines.
pub(crate) const HINT_TAG: &str = "PP";

/// Second field marking an n-ary relation line.
pub(crate) const NARY_TAG: &str = "NARY";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub index: usize,
    pub word: String,
    pub pos: String,
}

/// A base phrase over the inclusive token range `start..=end`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chunk {
    pub start: usize,
    pub end: usize,
    pub kind: String,
    pub head: usize,
}

impl Chunk {
    pub fn contains(&self, token: usize) -> bool {
        (self.start..=self.end).contains(&token)
    }
}

/// An externally supplied (possibly wrong) guess of where a preposition
/// attaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AttachmentHint {
    pub source: usize,
    pub target: usize,
}

/// A directed labelled arc between two token positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GrArc {
    pub source: usize,
    pub target: usize,
    pub label: String,
}

impl GrArc {
    pub fn new(source: usize, target: usize, label: impl Into<String>) -> Self {
        GrArc {
            source,
            target,
            label: label.into(),
        }
    }
}

impl fmt::Display for GrArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.source, self.label, self.target)
    }
}

/// One sentence's arcs for one annotation layer. Sorted, duplicate-free.
pub type ArcSet = BTreeSet<GrArc>;

/// A relation over three or four elements, as produced by some external
/// annotators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NaryRelation {
    pub label: String,
    pub elements: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationSet {
    pub arcs: ArcSet,
    pub nary: Vec<NaryRelation>,
}

impl AnnotationSet {
    /// Insert an arc, rejecting an exact duplicate.
    pub fn insert(&mut self, arc: GrArc) -> Result<()> {
        if self.arcs.contains(&arc) {
            return Err(Error::Invariant(format!("duplicate arc {arc}")));
        }
        self.arcs.insert(arc);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty() && self.nary.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub chunks: Vec<Chunk>,
    pub hints: Vec<AttachmentHint>,
    pub annotations: BTreeMap<String, AnnotationSet>,
}

// Absent and empty annotation sets are the same thing on disk.
impl PartialEq for Sentence {
    fn eq(&self, other: &Self) -> bool {
        let non_empty = |s: &Sentence| {
            s.annotations
                .iter()
                .filter(|(_, set)| !set.is_empty())
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect::<Vec<_>>()
        };
        self.tokens == other.tokens
            && self.chunks == other.chunks
            && self.hints == other.hints
            && non_empty(self) == non_empty(other)
    }
}

impl Eq for Sentence {}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.word.as_str())
    }

    pub fn chunk_of(&self, token: usize) -> Option<&Chunk> {
        self.chunks.iter().find(|c| c.contains(token))
    }

    /// Resolve a token to the element it stands for: the head of its
    /// chunk, or the token itself when it is outside every chunk.
    pub fn element_of(&self, token: usize) -> usize {
        self.chunk_of(token).map_or(token, |c| c.head)
    }

    /// Chunk heads and unchunked tokens, in sentence order.
    pub fn elements(&self) -> Vec<usize> {
        (0..self.tokens.len())
            .filter(|&i| match self.chunk_of(i) {
                Some(c) => c.head == i,
                None => true,
            })
            .collect()
    }

    pub fn set(&self, set_id: &str) -> Option<&AnnotationSet> {
        self.annotations.get(set_id)
    }

    pub fn arcs(&self, set_id: &str) -> ArcSet {
        self.set(set_id).map(|s| s.arcs.clone()).unwrap_or_default()
    }

    /// Check the structural invariants that do not depend on a header.
    pub fn validate_structure(&self) -> Result<()> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(Error::Invariant("sentence without tokens".into()));
        }
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.index != i {
                return Err(Error::Invariant(format!("token index {} at position {i}", tok.index)));
            }
            if tok.word.is_empty() {
                return Err(Error::Invariant(format!("empty word at token {i}")));
            }
        }
        let mut covered = vec![false; n];
        for c in &self.chunks {
            if c.start > c.end || c.end >= n {
                return Err(Error::Invariant(format!(
                    "chunk span {}..={} outside sentence of {n} tokens",
                    c.start, c.end
                )));
            }
            if !c.contains(c.head) {
                return Err(Error::Invariant(format!(
                    "chunk head {} outside span {}..={}",
                    c.head, c.start, c.end
                )));
            }
            for slot in &mut covered[c.start..=c.end] {
                if *slot {
                    return Err(Error::Invariant("overlapping chunks".into()));
                }
                *slot = true;
            }
        }
        for h in &self.hints {
            if h.source >= n || h.target >= n {
                return Err(Error::Invariant(format!(
                    "attachment hint {}->{} outside sentence of {n} tokens",
                    h.source, h.target
                )));
            }
        }
        for (set_id, set) in &self.annotations {
            for arc in &set.arcs {
                check_arc(arc, n).map_err(|e| Error::Invariant(format!("set {set_id}: {e}")))?;
            }
            for rel in &set.nary {
                if !(3..=4).contains(&rel.elements.len()) {
                    return Err(Error::Invariant(format!(
                        "set {set_id}: n-ary relation {} has {} elements",
                        rel.label,
                        rel.elements.len()
                    )));
                }
                if let Some(bad) = rel.elements.iter().find(|&&e| e >= n) {
                    return Err(Error::Invariant(format!(
                        "set {set_id}: n-ary element {bad} outside sentence of {n} tokens"
                    )));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn check_arc(arc: &GrArc, n_tokens: usize) -> std::result::Result<(), String> {
    if arc.source >= n_tokens || arc.target >= n_tokens {
        return Err(format!(
            "arc {arc} has an endpoint outside sentence of {n_tokens} tokens"
        ));
    }
    if arc.source == arc.target {
        return Err(format!("arc {arc} is a self-loop"));
    }
    Ok(())
}

/// Declared inventories: POS tags, chunk kinds, and the label scheme of
/// every annotation set, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Header {
    pub pos_tags: IndexSet<String>,
    pub chunk_types: IndexSet<String>,
    pub schemes: IndexMap<String, IndexSet<String>>,
}

impl Header {
    pub fn scheme(&self, set_id: &str) -> Option<&IndexSet<String>> {
        self.schemes.get(set_id)
    }

    /// Declare (or redeclare) the label scheme of a set. Redeclaring keeps
    /// the set's position in the header.
    pub fn declare_scheme<I, S>(&mut self, set_id: &str, labels: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        validate_set_id(set_id)?;
        let labels: IndexSet<String> = labels.into_iter().map(Into::into).collect();
        for l in &labels {
            validate_symbol(l, "label")?;
            if l == crate::mapping::NULL_TARGET {
                return Err(Error::Invariant(format!("`{l}` is reserved and cannot be a label")));
            }
        }
        self.schemes.insert(set_id.to_string(), labels);
        Ok(())
    }
}

pub(crate) fn validate_set_id(set_id: &str) -> Result<()> {
    validate_symbol(set_id, "set id")?;
    if set_id == HINT_TAG || set_id.parse::<usize>().is_ok() {
        return Err(Error::Invariant(format!("`{set_id}` cannot be used as a set id")));
    }
    Ok(())
}

/// Header symbols are space separated and every field is tab separated, so
/// neither may contain whitespace.
pub(crate) fn validate_symbol(s: &str, what: &str) -> Result<()> {
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(Error::Invariant(format!("invalid {what} `{s}`")));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pub header: Header,
    pub sentences: Vec<Sentence>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn scheme(&self, set_id: &str) -> Option<&IndexSet<String>> {
        self.header.scheme(set_id)
    }

    pub fn require_scheme(&self, set_id: &str) -> Result<&IndexSet<String>> {
        self.scheme(set_id)
            .ok_or_else(|| Error::Invariant(format!("annotation set `{set_id}` is not declared")))
    }

    /// Binary arcs of one set, one entry per sentence.
    pub fn layer(&self, set_id: &str) -> Vec<ArcSet> {
        self.sentences.iter().map(|s| s.arcs(set_id)).collect()
    }

    pub fn nary_layer(&self, set_id: &str) -> Vec<Vec<NaryRelation>> {
        self.sentences
            .iter()
            .map(|s| s.set(set_id).map(|a| a.nary.clone()).unwrap_or_default())
            .collect()
    }

    /// Replace one annotation layer, declaring its scheme. Arcs are checked
    /// against the sentence and the scheme.
    pub fn put_layer<I, S>(&mut self, set_id: &str, labels: I, layer: Vec<ArcSet>) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if layer.len() != self.sentences.len() {
            return Err(Error::Misaligned(format!(
                "layer `{set_id}` has {} sentences, corpus has {}",
                layer.len(),
                self.sentences.len()
            )));
        }
        self.header.declare_scheme(set_id, labels)?;
        let scheme = &self.header.schemes[set_id];
        for (i, (sentence, arcs)) in self.sentences.iter_mut().zip(layer).enumerate() {
            for arc in &arcs {
                check_arc(arc, sentence.len()).map_err(|e| Error::Invariant(format!("sentence {i}: {e}")))?;
                if !scheme.contains(&arc.label) {
                    return Err(Error::Scheme(format!(
                        "label `{}` is not in the scheme of `{set_id}`",
                        arc.label
                    )));
                }
            }
            let entry = sentence.annotations.entry(set_id.to_string()).or_default();
            entry.arcs = arcs;
            entry.nary.clear();
        }
        Ok(())
    }

    /// Drop an annotation set from the header and every sentence.
    pub fn remove_layer(&mut self, set_id: &str) {
        self.header.schemes.shift_remove(set_id);
        for s in &mut self.sentences {
            s.annotations.remove(set_id);
        }
    }

    /// A corpus holding only the first `n` sentences.
    pub fn prefix(&self, n: usize) -> Corpus {
        Corpus {
            header: self.header.clone(),
            sentences: self.sentences[..n.min(self.sentences.len())].to_vec(),
        }
    }

    pub fn arc_count(&self, set_id: &str) -> usize {
        self.sentences
            .iter()
            .map(|s| s.set(set_id).map_or(0, |a| a.arcs.len()))
            .sum()
    }

    /// Check every sentence against the header declarations.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.sentences.iter().enumerate() {
            self.validate_sentence(s)
                .map_err(|e| Error::Invariant(format!("sentence {i}: {e}")))?;
        }
        Ok(())
    }

    pub(crate) fn validate_sentence(&self, s: &Sentence) -> Result<()> {
        s.validate_structure()?;
        for t in &s.tokens {
            if !self.header.pos_tags.contains(&t.pos) {
                return Err(Error::Invariant(format!("undeclared POS tag `{}`", t.pos)));
            }
        }
        for c in &s.chunks {
            if !self.header.chunk_types.contains(&c.kind) {
                return Err(Error::Invariant(format!("undeclared chunk type `{}`", c.kind)));
            }
        }
        for (set_id, set) in &s.annotations {
            if set.is_empty() {
                continue;
            }
            let scheme = self.require_scheme(set_id)?;
            let labels = set
                .arcs
                .iter()
                .map(|a| &a.label)
                .chain(set.nary.iter().map(|r| &r.label));
            for l in labels {
                if !scheme.contains(l) {
                    return Err(Error::Scheme(format!("label `{l}` is not in the scheme of `{set_id}`")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence() -> Sentence {
        let words = [("my", "PRP$"), ("dog", "NN"), ("barked", "VBD")];
        Sentence {
            tokens: words
                .iter()
                .enumerate()
                .map(|(i, (w, p))| Token {
                    index: i,
                    word: w.to_string(),
                    pos: p.to_string(),
                })
                .collect(),
            chunks: vec![
                Chunk {
                    start: 0,
                    end: 1,
                    kind: "NP".into(),
                    head: 1,
                },
                Chunk {
                    start: 2,
                    end: 2,
                    kind: "VP".into(),
                    head: 2,
                },
            ],
            ..Default::default()
        }
    }

    #[test]
    fn elements_are_heads_and_unchunked_tokens() {
        let mut s = sentence();
        assert_eq!(s.elements(), vec![1, 2]);
        assert_eq!(s.element_of(0), 1);
        s.chunks.pop();
        assert_eq!(s.elements(), vec![1, 2]);
    }

    #[test]
    fn duplicate_arc_rejected() {
        let mut set = AnnotationSet::default();
        set.insert(GrArc::new(1, 2, "subj")).unwrap();
        assert!(set.insert(GrArc::new(1, 2, "subj")).is_err());
        set.insert(GrArc::new(1, 2, "obj")).unwrap();
    }

    #[test]
    fn head_outside_span_is_invalid() {
        let mut s = sentence();
        s.chunks[0].head = 2;
        assert!(s.validate_structure().is_err());
    }

    #[test]
    fn overlapping_chunks_invalid() {
        let mut s = sentence();
        s.chunks[1].start = 1;
        s.chunks[1].head = 1;
        assert!(s.validate_structure().is_err());
    }

    #[test]
    fn empty_sets_do_not_affect_equality() {
        let a = sentence();
        let mut b = sentence();
        b.annotations.insert("key".into(), AnnotationSet::default());
        assert_eq!(a, b);
    }

    #[test]
    fn put_layer_checks_scheme() {
        let mut c = Corpus {
            header: Header::default(),
            sentences: vec![sentence()],
        };
        let mut arcs = ArcSet::new();
        arcs.insert(GrArc::new(1, 2, "subj"));
        assert!(c.put_layer("key", ["obj"], vec![arcs.clone()]).is_err());
        c.put_layer("key", ["subj"], vec![arcs]).unwrap();
        assert_eq!(c.arc_count("key"), 1);
        assert!(c.put_layer("PP", ["subj"], vec![ArcSet::new()]).is_err());
    }
}
