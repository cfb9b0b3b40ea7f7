//! Random inputs and brute-force oracles shared by the integration tests.
//! Nothing here calls into the library's scoring, matching or counting
//! code; the oracles recompute everything from the definitions.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use grbridge::corpus::{ArcSet, AttachmentHint, Chunk, Corpus, GrArc, Sentence, Token};
use grbridge::eval::ScoreCounts;
use grbridge::tbl::{templates, End, Feature, RuleAction, RuleCondition, TransformationRule};
use grbridge::tbl::{BOUNDARY, HINT_NO, HINT_YES, NO_ARC, OUTSIDE_CHUNK};

pub const WORDS: [&str; 6] = ["the", "dog", "saw", "on", "it", "runs"];
pub const TAGS: [&str; 4] = ["DT", "NN", "VBD", "IN"];
pub const KINDS: [&str; 2] = ["NP", "VP"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A sentence with random words, tags, chunks (headed by their last
/// token) and at most one attachment hint.
pub fn random_sentence(rng: &mut ChaCha8Rng, len: usize) -> Sentence {
    let tokens = (0..len)
        .map(|i| Token {
            index: i,
            word: WORDS[rng.gen_range(0..WORDS.len())].into(),
            pos: TAGS[rng.gen_range(0..TAGS.len())].into(),
        })
        .collect();
    let mut chunks = Vec::new();
    let mut i = 0;
    while i < len {
        if rng.gen_bool(0.5) {
            let end = (i + rng.gen_range(0..3)).min(len - 1);
            chunks.push(Chunk {
                start: i,
                end,
                kind: KINDS[rng.gen_range(0..KINDS.len())].into(),
                head: end,
            });
            i = end + 1;
        } else {
            i += 1;
        }
    }
    let mut s = Sentence {
        tokens,
        chunks,
        ..Default::default()
    };
    let el = elements(&s);
    if el.len() >= 2 && rng.gen_bool(0.4) {
        let a = el[rng.gen_range(0..el.len())];
        let b = el[rng.gen_range(0..el.len())];
        if a != b {
            s.hints.push(AttachmentHint { source: a, target: b });
        }
    }
    s
}

/// Chunk heads plus tokens outside every chunk, ascending.
pub fn elements(s: &Sentence) -> Vec<usize> {
    (0..s.tokens.len())
        .filter(|&t| match s.chunks.iter().find(|c| c.start <= t && t <= c.end) {
            Some(c) => c.head == t,
            None => true,
        })
        .collect()
}

/// Up to `n` random arcs between distinct elements.
pub fn random_arcs(rng: &mut ChaCha8Rng, s: &Sentence, labels: &[&str], n: usize) -> ArcSet {
    let el = elements(s);
    let mut out = ArcSet::new();
    if el.len() < 2 {
        return out;
    }
    for _ in 0..n {
        let a = el[rng.gen_range(0..el.len())];
        let b = el[rng.gen_range(0..el.len())];
        if a != b {
            out.insert(GrArc::new(a, b, labels[rng.gen_range(0..labels.len())]));
        }
    }
    out
}

/// A corpus whose header declares the test vocabulary and the given layers.
pub fn corpus_with(sentences: Vec<Sentence>, layers: &[(&str, &[&str], Vec<ArcSet>)]) -> Corpus {
    let mut c = Corpus {
        sentences,
        ..Default::default()
    };
    c.header.pos_tags = TAGS.iter().map(|t| t.to_string()).collect();
    c.header.chunk_types = KINDS.iter().map(|t| t.to_string()).collect();
    for (id, labels, layer) in layers {
        c.put_layer(id, labels.iter().copied(), layer.clone()).unwrap();
    }
    c.validate().unwrap();
    c
}

// ---------------------------------------------------------------- mapping

pub const KEY_LABELS: [&str; 4] = ["subj", "obj", "mod-loc", "mod-time"];
pub const SYS_LABELS: [&str; 5] = ["ncsubj", "dobj", "ncmod", "xmod", "aux"];

/// System layer correlated with the key: each key arc is kept under a
/// fixed per-label renaming with some probability, relabeled at random or
/// dropped otherwise, plus spurious arcs.
pub fn correlated_system(rng: &mut ChaCha8Rng, s: &Sentence, key: &ArcSet) -> ArcSet {
    let mut out = ArcSet::new();
    for arc in key {
        let r: f64 = rng.gen();
        let i = KEY_LABELS.iter().position(|l| *l == arc.label).unwrap();
        if r < 0.6 {
            out.insert(GrArc::new(arc.source, arc.target, SYS_LABELS[i]));
        } else if r < 0.85 {
            out.insert(GrArc::new(
                arc.source,
                arc.target,
                SYS_LABELS[rng.gen_range(0..SYS_LABELS.len())],
            ));
        }
    }
    out.extend(random_arcs(rng, s, &SYS_LABELS, 2));
    out
}

/// Paired system and key layers for 10 to 30 random sentences.
pub fn random_training_set(seed: u64) -> (Vec<ArcSet>, Vec<ArcSet>) {
    let mut rng = rng(seed);
    let n = rng.gen_range(10..=30);
    let mut system = Vec::new();
    let mut key = Vec::new();
    for _ in 0..n {
        let len = rng.gen_range(3..10);
        let s = random_sentence(&mut rng, len);
        let k = random_arcs(&mut rng, &s, &KEY_LABELS, 4);
        system.push(correlated_system(&mut rng, &s, &k));
        key.push(k);
    }
    (system, key)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleDecision {
    pub target: Option<String>,
    pub correct: u64,
    pub false_alarms: u64,
}

/// Materialize the dense co-occurrence table by comparing every system
/// instance with every key instance, then replay the decision rule.
pub fn mapping_oracle(system: &[ArcSet], key: &[ArcSet]) -> BTreeMap<String, OracleDecision> {
    let sources: BTreeSet<&str> = system.iter().flatten().map(|a| a.label.as_str()).collect();
    let targets: Vec<&str> = key
        .iter()
        .flatten()
        .map(|a| a.label.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut out = BTreeMap::new();
    for e in sources {
        let mut row = vec![0u64; targets.len()];
        let mut total = 0u64;
        for (sys, gold) in system.iter().zip(key) {
            for s in sys.iter().filter(|a| a.label == e) {
                total += 1;
                for g in gold {
                    if g.source == s.source && g.target == s.target {
                        let j = targets.iter().position(|t| *t == g.label).unwrap();
                        row[j] += 1;
                    }
                }
            }
        }
        let best = row.iter().copied().max().unwrap_or(0);
        let winners: Vec<usize> = (0..row.len()).filter(|&j| row[j] == best).collect();
        let correct = best;
        let false_alarms = total - best;
        let target =
            (best > 0 && winners.len() == 1 && correct >= false_alarms).then(|| targets[winners[0]].to_string());
        out.insert(
            e.to_string(),
            OracleDecision {
                target,
                correct,
                false_alarms,
            },
        );
    }
    out
}

// -------------------------------------------------------------------- tbl

/// Candidate sites recomputed from their definition, plus the pairs
/// carrying an arc in `state`.
pub fn oracle_sites(s: &Sentence, state: &ArcSet, window: usize) -> BTreeSet<(usize, usize)> {
    let el = elements(s);
    let mut out = BTreeSet::new();
    for &a in &el {
        for &b in &el {
            if a != b && (a as i64 - b as i64).unsigned_abs() as usize <= window {
                out.insert((a, b));
            }
        }
    }
    for h in &s.hints {
        if h.source != h.target {
            out.insert((h.source, h.target));
        }
    }
    for a in state {
        out.insert((a.source, a.target));
    }
    out
}

fn bucket(d: i64) -> String {
    let m = d.unsigned_abs();
    let body = match m {
        0 => return "0".into(),
        1 => "1",
        2 => "2",
        3 | 4 => "3..4",
        5..=7 => "5..7",
        _ => "8..",
    };
    format!("{}{body}", if d > 0 { '+' } else { '-' })
}

fn chunk_kind(s: &Sentence, t: usize) -> String {
    s.chunks
        .iter()
        .find(|c| c.start <= t && t <= c.end)
        .map_or(OUTSIDE_CHUNK.to_string(), |c| c.kind.clone())
}

/// Value of a state-independent feature at a site.
pub fn oracle_feature(s: &Sentence, f: Feature, src: usize, tgt: usize) -> String {
    let end = |e: End| if e == End::Source { src } else { tgt };
    let at = |e: End, o: i8| {
        let i = end(e) as i64 + o as i64;
        (i >= 0 && (i as usize) < s.tokens.len()).then_some(i as usize)
    };
    match f {
        Feature::Word(e) => s.tokens[end(e)].word.clone(),
        Feature::Pos(e) => s.tokens[end(e)].pos.clone(),
        Feature::Chunk(e) => chunk_kind(s, end(e)),
        Feature::WordAt(e, o) => at(e, o).map_or(BOUNDARY.into(), |i| s.tokens[i].word.clone()),
        Feature::PosAt(e, o) => at(e, o).map_or(BOUNDARY.into(), |i| s.tokens[i].pos.clone()),
        Feature::ChunkAt(e, o) => at(e, o).map_or(BOUNDARY.into(), |i| chunk_kind(s, i)),
        Feature::Dist => bucket(tgt as i64 - src as i64),
        Feature::Hint => {
            if s.hints.iter().any(|h| h.source == src && h.target == tgt) {
                HINT_YES.into()
            } else {
                HINT_NO.into()
            }
        }
        Feature::Arc => unreachable!(),
    }
}

fn labels_at(state: &ArcSet, src: usize, tgt: usize) -> BTreeSet<String> {
    state
        .iter()
        .filter(|a| a.source == src && a.target == tgt)
        .map(|a| a.label.clone())
        .collect()
}

fn condition_holds(cond: &RuleCondition, s: &Sentence, state: &ArcSet, src: usize, tgt: usize) -> bool {
    cond.bindings().all(|(f, v)| match f {
        Feature::Arc => {
            let here = labels_at(state, src, tgt);
            if v == NO_ARC {
                here.is_empty()
            } else {
                here.contains(v)
            }
        }
        _ => oracle_feature(s, f, src, tgt) == v,
    })
}

fn act(action: &RuleAction, state: &mut ArcSet, src: usize, tgt: usize) {
    let here = labels_at(state, src, tgt);
    match action {
        RuleAction::Add(l) => {
            state.insert(GrArc::new(src, tgt, l.clone()));
        }
        RuleAction::Remove => {
            for l in here {
                state.remove(&GrArc::new(src, tgt, l));
            }
        }
        RuleAction::Relabel { from, to } => {
            if here.contains(from) {
                state.remove(&GrArc::new(src, tgt, from.clone()));
                state.insert(GrArc::new(src, tgt, to.clone()));
            }
        }
    }
}

/// Apply rules one after another, each to all its matches at once, over
/// sites fixed by the starting state.
pub fn oracle_apply(
    rules: &[TransformationRule],
    sentences: &[Sentence],
    start: &[ArcSet],
    window: usize,
) -> Vec<ArcSet> {
    oracle_apply_on(rules, sentences, start, start, window)
}

/// As [`oracle_apply`], with sites fixed by `basis` instead.
pub fn oracle_apply_on(
    rules: &[TransformationRule],
    sentences: &[Sentence],
    start: &[ArcSet],
    basis: &[ArcSet],
    window: usize,
) -> Vec<ArcSet> {
    sentences
        .iter()
        .zip(start)
        .zip(basis)
        .map(|((s, init), b)| {
            let sites = oracle_sites(s, b, window);
            let mut state = init.clone();
            for rule in rules {
                let hits: Vec<(usize, usize)> = sites
                    .iter()
                    .copied()
                    .filter(|&(a, b)| condition_holds(&rule.condition, s, &state, a, b))
                    .collect();
                for (a, b) in hits {
                    act(&rule.action, &mut state, a, b);
                }
            }
            state
        })
        .collect()
}

pub fn oracle_errors(state: &[ArcSet], key: &[ArcSet]) -> i64 {
    state
        .iter()
        .zip(key)
        .map(|(s, k)| (s.difference(k).count() + k.difference(s).count()) as i64)
        .sum()
}

/// Net errors fixed by one rule: recount after applying it to a copy.
pub fn oracle_score(
    rule: &TransformationRule,
    sentences: &[Sentence],
    state: &[ArcSet],
    key: &[ArcSet],
    window: usize,
) -> i64 {
    let after = oracle_apply(std::slice::from_ref(rule), sentences, state, window);
    oracle_errors(state, key) - oracle_errors(&after, key)
}

/// Every rule some template can instantiate on the corpus: all observed
/// condition value tuples crossed with every action over `labels`.
pub fn all_rules(
    sentences: &[Sentence],
    state: &[ArcSet],
    labels: &[String],
    window: usize,
) -> Vec<TransformationRule> {
    let mut conditions = BTreeSet::new();
    for (s, st) in sentences.iter().zip(state) {
        for (a, b) in oracle_sites(s, st, window) {
            let here = labels_at(st, a, b);
            let arc_values: Vec<String> = if here.is_empty() {
                vec![NO_ARC.to_string()]
            } else {
                here.into_iter().collect()
            };
            for t in templates() {
                for arc in &arc_values {
                    let values: Vec<String> = t
                        .features
                        .iter()
                        .map(|&f| {
                            if f == Feature::Arc {
                                arc.clone()
                            } else {
                                oracle_feature(s, f, a, b)
                            }
                        })
                        .collect();
                    conditions.insert((t.id, values));
                }
            }
        }
    }
    let mut actions = vec![RuleAction::Remove];
    for l in labels {
        actions.push(RuleAction::Add(l.clone()));
        for m in labels {
            if l != m {
                actions.push(RuleAction::Relabel {
                    from: l.clone(),
                    to: m.clone(),
                });
            }
        }
    }
    let mut out = Vec::new();
    for (id, values) in conditions {
        let condition = RuleCondition::new(id, values).unwrap();
        for action in &actions {
            out.push(TransformationRule {
                condition: condition.clone(),
                action: action.clone(),
                gain: 0,
            });
        }
    }
    out
}

pub const TINY_LABELS: [&str; 3] = ["a", "b", "c"];

pub struct Tiny {
    pub sentences: Vec<Sentence>,
    pub initial: Vec<ArcSet>,
    pub key: Vec<ArcSet>,
}

/// At most `max_sentences` short sentences with a two-label key and a
/// noisy initial state drawn partly from it.
pub fn tiny(seed: u64, max_sentences: usize) -> Tiny {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=max_sentences);
    let mut t = Tiny {
        sentences: Vec::new(),
        initial: Vec::new(),
        key: Vec::new(),
    };
    for _ in 0..n {
        let len = rng.gen_range(3..8);
        let s = random_sentence(&mut rng, len);
        let key = random_arcs(&mut rng, &s, &TINY_LABELS[..2], 3);
        let initial = if rng.gen_bool(0.3) {
            ArcSet::new()
        } else {
            let mut st: ArcSet = key.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect();
            st.extend(random_arcs(&mut rng, &s, &TINY_LABELS, 2));
            st
        };
        t.sentences.push(s);
        t.key.push(key);
        t.initial.push(initial);
    }
    t
}

pub fn labels_of(t: &Tiny) -> Vec<String> {
    t.key
        .iter()
        .chain(&t.initial)
        .flatten()
        .map(|a| a.label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

// ------------------------------------------------------------------ stats

/// C(n, i) for all i by Pascal's rule; exact in u64 for n ≤ 60.
pub fn binomial_row(n: usize) -> Vec<u64> {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64; row.len() + 1];
        for i in 1..row.len() {
            next[i] = row[i - 1] + row[i];
        }
        row = next;
    }
    row
}

/// One-sided sign-test p-value as an exact fraction `num / 2^n`.
pub fn sign_test_oracle(n: usize, k: usize) -> (u64, u64) {
    let row = binomial_row(n);
    (row[k..].iter().sum(), 1u64 << n)
}

fn stat(f_score: bool, c: &ScoreCounts) -> f64 {
    if f_score {
        if c.claimed + c.key_total == 0 {
            0.0
        } else {
            200.0 * c.correct as f64 / (c.claimed + c.key_total) as f64
        }
    } else if c.claimed == 0 {
        0.0
    } else {
        100.0 * c.correct as f64 / c.claimed as f64
    }
}

/// Exhaustive paired randomization p-value: the share of all 2^n swap
/// patterns whose pooled difference is at least the observed one.
pub fn randomization_oracle(a: &[ScoreCounts], b: &[ScoreCounts], f_score: bool) -> f64 {
    let n = a.len();
    let pooled = |mask: u64| {
        let mut x = ScoreCounts::default();
        let mut y = ScoreCounts::default();
        for i in 0..n {
            let (p, q) = if mask >> i & 1 == 1 {
                (&b[i], &a[i])
            } else {
                (&a[i], &b[i])
            };
            x.add(p);
            y.add(q);
        }
        stat(f_score, &x) - stat(f_score, &y)
    };
    let observed = pooled(0);
    let hits = (0..1u64 << n).filter(|&m| pooled(m) >= observed - 1e-9).count();
    hits as f64 / (1u64 << n) as f64
}

pub fn random_units(rng: &mut ChaCha8Rng, n: usize) -> (Vec<ScoreCounts>, Vec<ScoreCounts>) {
    let unit = |rng: &mut ChaCha8Rng, key: u64| {
        let claimed = rng.gen_range(0..=key + 2);
        let correct = rng.gen_range(0..=claimed.min(key));
        ScoreCounts::new(key, claimed, correct)
    };
    let mut a = Vec::new();
    let mut b = Vec::new();
    for _ in 0..n {
        let key = rng.gen_range(1..8);
        a.push(unit(rng, key));
        b.push(unit(rng, key));
    }
    (a, b)
}
