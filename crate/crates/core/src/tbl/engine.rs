//! Compiled corpus state shared by rule scoring, application and learning.
//!
//! A workspace fixes the set of sites per sentence up front: the candidate
//! sites plus every pair that carries an initial arc. Rules only ever edit
//! arcs on their own site and conditions only inspect that site, so all
//! matches of a rule can be found on one snapshot and applied together.

use std::collections::HashMap;

use smallvec::SmallVec;

use super::candidate_sites;
use super::features::{intern_dist_buckets, CompiledSentence, Feature, Sym, Symbols, SYM_NO_ARC};
use super::rule::{template, templates, RuleAction, RuleCondition, TemplateId, TransformationRule};
use crate::corpus::{ArcSet, GrArc, Sentence};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

pub(crate) type Labels = SmallVec<[Sym; 2]>;

pub(crate) const MAX_ATOMS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Site {
    pub sentence: u32,
    pub source: u32,
    pub target: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum CompiledAction {
    Add(Sym),
    Remove,
    Relabel(Sym, Sym),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct CompiledCondition {
    pub template: u8,
    /// Static values in template order; the `arc` slot holds its value too.
    pub values: [Sym; MAX_ATOMS],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct CompiledRule {
    pub condition: CompiledCondition,
    pub action: CompiledAction,
}

/// Per-template lookup from static feature values to the sites having them.
type SiteIndex = HashMap<[Sym; MAX_ATOMS], Vec<u32>>;

pub(crate) struct Workspace {
    pub symbols: Symbols,
    pub sentences: Vec<CompiledSentence>,
    pub sites: Vec<Site>,
    /// Range of site ids belonging to each sentence.
    pub site_ranges: Vec<std::ops::Range<u32>>,
    pub state: Vec<Labels>,
    pub key: Option<Vec<Labels>>,
    /// Key arcs on pairs that are not sites; no rule can reach them.
    pub unreachable: usize,
    dist_syms: [Sym; 11],
    index: Vec<Option<SiteIndex>>,
}

fn insert_sorted(labels: &mut Labels, l: Sym) -> bool {
    match labels.binary_search(&l) {
        Ok(_) => false,
        Err(pos) => {
            labels.insert(pos, l);
            true
        }
    }
}

fn remove_sorted(labels: &mut Labels, l: Sym) -> bool {
    match labels.binary_search(&l) {
        Ok(pos) => {
            labels.remove(pos);
            true
        }
        Err(_) => false,
    }
}

/// Change in error count (positive = fewer errors) of applying `action` to
/// one site whose current labels are `state` and gold labels are `key`.
pub(crate) fn site_delta(action: CompiledAction, state: &[Sym], key: &[Sym]) -> i64 {
    let in_key = |l: Sym| key.binary_search(&l).is_ok();
    let in_state = |l: Sym| state.binary_search(&l).is_ok();
    let gain_of_adding = |l: Sym| if in_key(l) { 1 } else { -1 };
    match action {
        CompiledAction::Add(l) => {
            if in_state(l) {
                0
            } else {
                gain_of_adding(l)
            }
        }
        CompiledAction::Remove => state.iter().map(|&l| -gain_of_adding(l)).sum(),
        CompiledAction::Relabel(from, to) => {
            if !in_state(from) {
                return 0;
            }
            let removal = -gain_of_adding(from);
            let addition = if in_state(to) { 0 } else { gain_of_adding(to) };
            removal + addition
        }
    }
}

pub(crate) fn apply_action(action: CompiledAction, labels: &mut Labels) {
    match action {
        CompiledAction::Add(l) => {
            insert_sorted(labels, l);
        }
        CompiledAction::Remove => labels.clear(),
        CompiledAction::Relabel(from, to) => {
            if remove_sorted(labels, from) {
                insert_sorted(labels, to);
            }
        }
    }
}

pub(crate) fn symmetric_difference(a: &[Sym], b: &[Sym]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                n += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                n += 1;
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    n + (a.len() - i) + (b.len() - j)
}

impl Workspace {
    /// Compile sentences and an initial state, optionally with a key.
    pub fn new(sentences: &[Sentence], initial: &[ArcSet], key: Option<&[ArcSet]>, window: usize) -> Result<Self> {
        if initial.len() != sentences.len() {
            return Err(Error::Misaligned(format!(
                "initial annotations cover {} sentences, corpus has {}",
                initial.len(),
                sentences.len()
            )));
        }
        if let Some(k) = key {
            if k.len() != sentences.len() {
                return Err(Error::Misaligned(format!(
                    "key covers {} sentences, corpus has {}",
                    k.len(),
                    sentences.len()
                )));
            }
        }
        let mut symbols = Symbols::new();
        let dist_syms = intern_dist_buckets(&mut symbols);
        let mut compiled = Vec::with_capacity(sentences.len());
        let mut sites = Vec::new();
        let mut site_ranges = Vec::with_capacity(sentences.len());
        let mut state = Vec::new();
        let mut key_labels = key.map(|_| Vec::new());
        let mut unreachable = 0;

        for (si, sentence) in sentences.iter().enumerate() {
            compiled.push(CompiledSentence::new(sentence, &mut symbols));
            let mut pairs = candidate_sites(sentence, window);
            for arc in &initial[si] {
                crate::corpus::check_arc(arc, sentence.len())
                    .map_err(|e| Error::Invariant(format!("sentence {si}: {e}")))?;
                pairs.push((arc.source, arc.target));
            }
            pairs.sort_unstable();
            pairs.dedup();
            let start = sites.len() as u32;
            let mut local: HashMap<(usize, usize), usize> = HashMap::with_capacity(pairs.len());
            for &(s, t) in &pairs {
                local.insert((s, t), sites.len());
                sites.push(Site {
                    sentence: si as u32,
                    source: s as u32,
                    target: t as u32,
                });
                state.push(Labels::new());
                if let Some(kl) = key_labels.as_mut() {
                    kl.push(Labels::new());
                }
            }
            site_ranges.push(start..sites.len() as u32);
            for arc in &initial[si] {
                let l = symbols.intern(&arc.label);
                insert_sorted(&mut state[local[&(arc.source, arc.target)]], l);
            }
            if let (Some(k), Some(kl)) = (key, key_labels.as_mut()) {
                for arc in &k[si] {
                    match local.get(&(arc.source, arc.target)) {
                        Some(&site) => {
                            let l = symbols.intern(&arc.label);
                            insert_sorted(&mut kl[site], l);
                        }
                        None => unreachable += 1,
                    }
                }
            }
        }
        let n_templates = templates().len();
        Ok(Workspace {
            symbols,
            sentences: compiled,
            sites,
            site_ranges,
            state,
            key: key_labels,
            unreachable,
            dist_syms,
            index: vec![None; n_templates],
        })
    }

    pub fn static_value(&self, site: &Site, feature: Feature) -> Sym {
        self.sentences[site.sentence as usize].value(
            feature,
            site.source as usize,
            site.target as usize,
            &self.dist_syms,
        )
    }

    /// Static part of a site's condition key for a template (the `arc`
    /// slot left as [`SYM_NO_ARC`]).
    pub fn static_key(&self, site: &Site, template_no: u8) -> [Sym; MAX_ATOMS] {
        let t = &templates()[template_no as usize];
        let mut key = [SYM_NO_ARC; MAX_ATOMS];
        for (slot, &f) in t.features.iter().enumerate() {
            if !f.is_state() {
                key[slot] = self.static_value(site, f);
            }
        }
        key
    }

    pub fn ensure_index(&mut self, template_no: u8, exec: Execution) {
        if self.index[template_no as usize].is_some() {
            return;
        }
        let keys = exec::map_range(exec, 0..self.sites.len(), |i| {
            self.static_key(&self.sites[i], template_no)
        });
        let mut index: SiteIndex = HashMap::new();
        for (i, k) in keys.into_iter().enumerate() {
            index.entry(k).or_default().push(i as u32);
        }
        self.index[template_no as usize] = Some(index);
    }

    fn arc_slot(template_no: u8) -> Option<usize> {
        templates()[template_no as usize]
            .features
            .iter()
            .position(|f| f.is_state())
    }

    /// Site ids where the condition holds in the current state. The index
    /// for the condition's template must have been built.
    pub fn matches(&self, cond: &CompiledCondition) -> impl Iterator<Item = u32> + '_ {
        let index = self.index[cond.template as usize]
            .as_ref()
            .expect("site index built before matching");
        let arc_slot = Self::arc_slot(cond.template);
        let mut lookup = cond.values;
        let arc_value = arc_slot.map(|slot| std::mem::replace(&mut lookup[slot], SYM_NO_ARC));
        index
            .get(&lookup)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .copied()
            .filter(move |&site| match arc_value {
                None => true,
                Some(SYM_NO_ARC) => self.state[site as usize].is_empty(),
                Some(l) => self.state[site as usize].binary_search(&l).is_ok(),
            })
    }

    pub fn score(&self, rule: &CompiledRule) -> i64 {
        let key = self.key.as_ref().expect("scoring needs a key");
        self.matches(&rule.condition)
            .map(|s| site_delta(rule.action, &self.state[s as usize], &key[s as usize]))
            .sum()
    }

    /// Apply a rule to every matching site at once.
    pub fn apply(&mut self, rule: &CompiledRule) -> usize {
        let hits: Vec<u32> = self.matches(&rule.condition).collect();
        for &s in &hits {
            apply_action(rule.action, &mut self.state[s as usize]);
        }
        hits.len()
    }

    pub fn errors(&self) -> usize {
        let key = self.key.as_ref().expect("error count needs a key");
        self.state
            .iter()
            .zip(key)
            .map(|(s, k)| symmetric_difference(s, k))
            .sum::<usize>()
            + self.unreachable
    }

    /// Translate a rule into this workspace's symbols. `None` when a
    /// condition value never occurs here, so the rule cannot match.
    pub fn compile(&mut self, rule: &TransformationRule) -> Option<CompiledRule> {
        let condition = self.compile_condition(&rule.condition)?;
        let action = match &rule.action {
            RuleAction::Add(l) => CompiledAction::Add(self.symbols.intern(l)),
            RuleAction::Remove => CompiledAction::Remove,
            RuleAction::Relabel { from, to } => {
                CompiledAction::Relabel(self.symbols.intern(from), self.symbols.intern(to))
            }
        };
        Some(CompiledRule { condition, action })
    }

    fn compile_condition(&self, cond: &RuleCondition) -> Option<CompiledCondition> {
        let mut values = [SYM_NO_ARC; MAX_ATOMS];
        for (slot, (_, v)) in cond.bindings().enumerate() {
            values[slot] = self.symbols.get(v)?;
        }
        Some(CompiledCondition {
            template: cond.template.0 - 1,
            values,
        })
    }

    pub fn decompile(&self, rule: &CompiledRule, gain: i64) -> TransformationRule {
        let t = &templates()[rule.condition.template as usize];
        let values = (0..t.features.len())
            .map(|i| self.symbols.name(rule.condition.values[i]).to_string())
            .collect();
        let name = |s: Sym| self.symbols.name(s).to_string();
        let action = match rule.action {
            CompiledAction::Add(l) => RuleAction::Add(name(l)),
            CompiledAction::Remove => RuleAction::Remove,
            CompiledAction::Relabel(a, b) => RuleAction::Relabel {
                from: name(a),
                to: name(b),
            },
        };
        TransformationRule {
            condition: RuleCondition { template: t.id, values },
            action,
            gain,
        }
    }

    /// Current state as arc sets, one per sentence.
    pub fn arc_sets(&self) -> Vec<ArcSet> {
        self.site_ranges
            .iter()
            .map(|range| {
                let mut arcs = ArcSet::new();
                for id in range.clone() {
                    let site = &self.sites[id as usize];
                    for &l in &self.state[id as usize] {
                        arcs.insert(GrArc::new(
                            site.source as usize,
                            site.target as usize,
                            self.symbols.name(l),
                        ));
                    }
                }
                arcs
            })
            .collect()
    }

    pub fn template_no(id: TemplateId) -> Result<u8> {
        template(id).map(|t| t.id.0 - 1)
    }
}
