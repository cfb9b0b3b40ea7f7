//! Transformation-based error-driven learning over GR arcs.
//!
//! The learner starts from an initial annotation state (blank, or the
//! translated output of existing annotators) and greedily picks, one at a
//! time, the rule that removes the most arc-level errors against the key.
//! An arc-level error is a key arc missing from the state or a state arc
//! missing from the key.
//!
//! Rules test features of a candidate site `(source, target)` and edit the
//! arcs on that site only: add a label, remove every arc, or relabel one
//! label to another. Each rule is applied once, to all matching sites of
//! the corpus simultaneously.

mod engine;
mod features;
mod learn;
mod rule;

use crate::corpus::{ArcSet, Sentence};
use crate::error::Result;
use crate::exec::Execution;

pub use features::{distance_bucket, End, Feature, BOUNDARY, HINT_NO, HINT_YES, NO_ARC, OUTSIDE_CHUNK};
pub use learn::{LearnOutcome, LearnStep};
pub use rule::{
    format_rules, parse_rules, read_rules, template, templates, write_rules, RuleAction, RuleCondition, Template,
    TemplateId, TransformationRule,
};

use engine::Workspace;

/// Per-sentence annotation sets the rules operate on.
pub type AnnotationState = Vec<ArcSet>;

pub const DEFAULT_WINDOW: usize = 10;
pub const DEFAULT_MIN_GAIN: i64 = 2;
pub const DEFAULT_MAX_RULES: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    /// Stop once the best rule fixes fewer net errors than this.
    pub min_gain: i64,
    pub max_rules: usize,
    /// Maximum token distance of a candidate site.
    pub window: usize,
    pub templates: Vec<TemplateId>,
    pub execution: Execution,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            min_gain: DEFAULT_MIN_GAIN,
            max_rules: DEFAULT_MAX_RULES,
            window: DEFAULT_WINDOW,
            templates: templates().iter().map(|t| t.id).collect(),
            execution: Execution::default(),
        }
    }
}

/// Pairs of elements (chunk heads and unchunked tokens) at most `window`
/// tokens apart, in both directions, plus every attachment-hint pair.
/// Sorted and duplicate-free.
pub fn candidate_sites(sentence: &Sentence, window: usize) -> Vec<(usize, usize)> {
    let elements = sentence.elements();
    let mut pairs = Vec::new();
    for &a in &elements {
        for &b in &elements {
            if a != b && a.abs_diff(b) <= window {
                pairs.push((a, b));
            }
        }
    }
    pairs.extend(
        sentence
            .hints
            .iter()
            .filter(|h| h.source != h.target)
            .map(|h| (h.source, h.target)),
    );
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Arc-level errors of `state` against `key`: missing plus spurious arcs.
pub fn count_errors(state: &[ArcSet], key: &[ArcSet]) -> usize {
    state
        .iter()
        .zip(key)
        .map(|(s, k)| s.symmetric_difference(k).count())
        .sum()
}

/// Net errors fixed by applying `rule` once to `state`. Pure.
pub fn score_rule(
    rule: &TransformationRule,
    sentences: &[Sentence],
    state: &[ArcSet],
    key: &[ArcSet],
    window: usize,
) -> Result<i64> {
    let mut ws = Workspace::new(sentences, state, Some(key), window)?;
    let Some(compiled) = ws.compile(rule) else {
        return Ok(0);
    };
    ws.ensure_index(compiled.condition.template, Execution::Sequential);
    Ok(ws.score(&compiled))
}

/// Apply each rule once, in order, to the whole corpus.
pub fn apply_rules(
    rules: &[TransformationRule],
    sentences: &[Sentence],
    state: &[ArcSet],
    window: usize,
) -> Result<AnnotationState> {
    let mut ws = Workspace::new(sentences, state, None, window)?;
    for rule in rules {
        if let Some(compiled) = ws.compile(rule) {
            ws.ensure_index(compiled.condition.template, Execution::default());
            ws.apply(&compiled);
        }
    }
    Ok(ws.arc_sets())
}

/// Greedily learn an ordered rule list turning `initial` into `key`.
pub fn learn_rules(
    sentences: &[Sentence],
    initial: &[ArcSet],
    key: &[ArcSet],
    config: &LearnerConfig,
) -> Result<LearnOutcome> {
    learn::learn(sentences, initial, key, config)
}
