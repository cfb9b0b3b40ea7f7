use std::cmp::Reverse;
use std::collections::HashMap;

use super::engine::{CompiledAction, CompiledCondition, CompiledRule, Labels, Workspace, MAX_ATOMS};
use super::features::{Sym, SYM_NO_ARC};
use super::rule::{templates, TemplateId, TransformationRule};
use super::LearnerConfig;
use crate::corpus::{ArcSet, Sentence};
use crate::error::{Error, Result};
use crate::exec;

/// One accepted rule's effect on the training errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnStep {
    pub score: i64,
    pub errors_before: usize,
    pub errors_after: usize,
    pub sites_matched: usize,
}

#[derive(Debug, Clone)]
pub struct LearnOutcome {
    pub rules: Vec<TransformationRule>,
    /// Training annotations after applying every learned rule.
    pub final_state: Vec<ArcSet>,
    pub initial_errors: usize,
    pub steps: Vec<LearnStep>,
}

/// Actions with a positive effect on one site, with that effect.
fn positive_actions(state: &[Sym], key: &[Sym]) -> Vec<(CompiledAction, i64)> {
    let in_key = |l: &Sym| key.binary_search(l).is_ok();
    let in_state = |l: &Sym| state.binary_search(l).is_ok();
    let spurious: Vec<Sym> = state.iter().copied().filter(|l| !in_key(l)).collect();
    let missing: Vec<Sym> = key.iter().copied().filter(|l| !in_state(l)).collect();
    let mut out = Vec::new();
    for &l in &missing {
        out.push((CompiledAction::Add(l), 1));
    }
    let remove = spurious.len() as i64 - (state.len() - spurious.len()) as i64;
    if remove > 0 {
        out.push((CompiledAction::Remove, remove));
    }
    for &from in &spurious {
        for &to in &missing {
            out.push((CompiledAction::Relabel(from, to), 2));
        }
        for &to in state.iter().filter(|&&l| l != from) {
            out.push((CompiledAction::Relabel(from, to), 1));
        }
    }
    out
}

fn arc_slot(template_no: u8) -> Option<usize> {
    templates()[template_no as usize]
        .features
        .iter()
        .position(|f| f.is_state())
}

/// Sum, per rule, of its positive per-site effects over the given error
/// sites. Every rule with a positive total score appears here, and the sum
/// bounds its score from above.
fn upper_bounds(ws: &Workspace, site_ids: &[u32], template_nos: &[u8]) -> HashMap<CompiledRule, i64> {
    let key = ws.key.as_ref().expect("learning needs a key");
    let mut out: HashMap<CompiledRule, i64> = HashMap::new();
    for &id in site_ids {
        let site = &ws.sites[id as usize];
        let state: &Labels = &ws.state[id as usize];
        let actions = positive_actions(state, &key[id as usize]);
        if actions.is_empty() {
            continue;
        }
        for &t in template_nos {
            let base = ws.static_key(site, t);
            let arc_values: Vec<Sym> = match arc_slot(t) {
                None => vec![SYM_NO_ARC],
                Some(_) if state.is_empty() => vec![SYM_NO_ARC],
                Some(_) => state.to_vec(),
            };
            for v in arc_values {
                let mut values: [Sym; MAX_ATOMS] = base;
                if let Some(slot) = arc_slot(t) {
                    values[slot] = v;
                }
                let condition = CompiledCondition { template: t, values };
                for &(action, gain) in &actions {
                    *out.entry(CompiledRule { condition, action }).or_default() += gain;
                }
            }
        }
    }
    out
}

fn merge(mut a: HashMap<CompiledRule, i64>, b: HashMap<CompiledRule, i64>) -> HashMap<CompiledRule, i64> {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_default() += v;
    }
    a
}

const SITE_CHUNK: usize = 512;

/// Best rule by (score desc, serialized rule asc), considering only rules
/// that could still reach `min_gain`.
fn select_best(ws: &Workspace, config: &LearnerConfig, template_nos: &[u8]) -> Option<(CompiledRule, i64)> {
    let key = ws.key.as_ref().expect("learning needs a key");
    let error_sites: Vec<u32> = (0..ws.sites.len() as u32)
        .filter(|&i| ws.state[i as usize] != key[i as usize])
        .collect();
    let chunks: Vec<&[u32]> = error_sites.chunks(SITE_CHUNK).collect();
    let bounds = exec::map_reduce(
        config.execution,
        &chunks,
        HashMap::new,
        |chunk| upper_bounds(ws, chunk, template_nos),
        merge,
    );
    let mut order: Vec<(CompiledRule, i64)> = bounds.into_iter().filter(|&(_, ub)| ub >= config.min_gain).collect();
    order.sort_unstable_by_key(|&(_, ub)| Reverse(ub));

    let mut best: Option<(i64, String, CompiledRule)> = None;
    let mut i = 0;
    let mut batch = 16;
    while i < order.len() {
        if let Some((best_score, ..)) = &best {
            if order[i].1 < *best_score {
                break;
            }
        }
        let end = (i + batch).min(order.len());
        let scores = exec::map_slice(config.execution, &order[i..end], |(r, _)| ws.score(r));
        for (&(rule, _), score) in order[i..end].iter().zip(scores) {
            let replace = match &best {
                None => true,
                Some((bs, _, _)) if score > *bs => true,
                Some((bs, bk, _)) if score == *bs => ws.decompile(&rule, 0).sort_key() < *bk,
                Some(_) => false,
            };
            if replace {
                best = Some((score, ws.decompile(&rule, 0).sort_key(), rule));
            }
        }
        i = end;
        batch *= 2;
    }
    best.map(|(score, _, rule)| (rule, score))
}

pub(super) fn learn(
    sentences: &[Sentence],
    initial: &[ArcSet],
    key: &[ArcSet],
    config: &LearnerConfig,
) -> Result<LearnOutcome> {
    if config.min_gain < 1 {
        return Err(Error::InvalidArgument("min_gain must be at least 1".into()));
    }
    let mut ws = Workspace::new(sentences, initial, Some(key), config.window)?;
    let template_nos = enabled_templates(&config.templates)?;
    for &t in &template_nos {
        ws.ensure_index(t, config.execution);
    }
    let initial_errors = ws.errors();
    let mut errors = initial_errors;
    let mut rules = Vec::new();
    let mut steps = Vec::new();
    while rules.len() < config.max_rules {
        let Some((rule, score)) = select_best(&ws, config, &template_nos) else {
            break;
        };
        if score < config.min_gain {
            break;
        }
        let sites_matched = ws.apply(&rule);
        let after = ws.errors();
        if errors as i64 - after as i64 != score {
            return Err(Error::Invariant(format!(
                "rule scored {score} but changed training errors by {}",
                errors as i64 - after as i64
            )));
        }
        steps.push(LearnStep {
            score,
            errors_before: errors,
            errors_after: after,
            sites_matched,
        });
        rules.push(ws.decompile(&rule, score));
        errors = after;
    }
    Ok(LearnOutcome {
        rules,
        final_state: ws.arc_sets(),
        initial_errors,
        steps,
    })
}

pub(super) fn enabled_templates(ids: &[TemplateId]) -> Result<Vec<u8>> {
    let mut out: Vec<u8> = ids
        .iter()
        .map(|&id| Workspace::template_no(id))
        .collect::<Result<_>>()?;
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidArgument("no rule templates enabled".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use smallvec::smallvec;

    #[test]
    fn positive_actions_cover_fixes() {
        // state {1,2}, key {2,3}: 1 spurious, 3 missing
        let acts = positive_actions(&[1, 2], &[2, 3]);
        assert!(acts.contains(&(CompiledAction::Add(3), 1)));
        assert!(acts.contains(&(CompiledAction::Relabel(1, 3), 2)));
        assert!(acts.contains(&(CompiledAction::Relabel(1, 2), 1)));
        // one spurious, one correct: removing everything nets zero
        assert!(!acts.iter().any(|(a, _)| *a == CompiledAction::Remove));
        let s: Labels = smallvec![1, 2];
        for (a, g) in acts {
            assert_eq!(super::super::engine::site_delta(a, &s, &[2, 3]), g);
        }
    }
}
