//! Label translation from an existing annotator's scheme into the target
//! scheme.
//!
//! For every source label we count which key labels sit on exactly the same
//! `(source, target)` pair in the training data. The most frequent key
//! label wins if it is unique and relabelling every instance to it yields
//! at least as many correct arcs as false alarms. Everything else
//! translates to no relation and is dropped.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use log::warn;

use crate::corpus::{ArcSet, GrArc, NaryRelation};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Marker written for a label that translates to no relation.
pub const NULL_TARGET: &str = "∅";

/// Split each 3- or 4-element relation into binary arcs from its first
/// element to every other element, labelled `<label>/arg<k>`.
pub fn decompose_nary(relations: &[NaryRelation]) -> Result<Vec<GrArc>> {
    let mut out = Vec::new();
    for rel in relations {
        if !(3..=4).contains(&rel.elements.len()) {
            return Err(Error::InvalidArgument(format!(
                "relation `{}` has {} elements, expected 3 or 4",
                rel.label,
                rel.elements.len()
            )));
        }
        let head = rel.elements[0];
        for (k, &elem) in rel.elements.iter().enumerate().skip(1) {
            out.push(GrArc::new(head, elem, nary_label(&rel.label, k + 1)));
        }
    }
    Ok(out)
}

pub fn nary_label(label: &str, position: usize) -> String {
    format!("{label}/arg{position}")
}

/// Co-occurrence counts between source labels and key labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CooccurrenceTable {
    pub counts: BTreeMap<String, BTreeMap<String, u64>>,
    pub totals: BTreeMap<String, u64>,
}

impl CooccurrenceTable {
    fn merge(mut self, other: CooccurrenceTable) -> CooccurrenceTable {
        for (src, row) in other.counts {
            let mine = self.counts.entry(src).or_default();
            for (tgt, n) in row {
                *mine.entry(tgt).or_default() += n;
            }
        }
        for (src, n) in other.totals {
            *self.totals.entry(src).or_default() += n;
        }
        self
    }

    pub fn count(&self, source: &str, target: &str) -> u64 {
        self.counts
            .get(source)
            .and_then(|row| row.get(target))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.totals.values().sum()
    }
}

fn count_sentence(system: &ArcSet, key: &ArcSet) -> CooccurrenceTable {
    let mut key_by_pair: BTreeMap<(usize, usize), Vec<&str>> = BTreeMap::new();
    for arc in key {
        key_by_pair
            .entry((arc.source, arc.target))
            .or_default()
            .push(&arc.label);
    }
    let mut table = CooccurrenceTable::default();
    for arc in system {
        *table.totals.entry(arc.label.clone()).or_default() += 1;
        let row = table.counts.entry(arc.label.clone()).or_default();
        if let Some(labels) = key_by_pair.get(&(arc.source, arc.target)) {
            for &l in labels {
                *row.entry(l.to_string()).or_default() += 1;
            }
        }
    }
    table
}

/// Build the co-occurrence table over aligned system/key layers.
pub fn cooccurrence(system: &[ArcSet], key: &[ArcSet], exec: Execution) -> Result<CooccurrenceTable> {
    if system.len() != key.len() {
        return Err(Error::Misaligned(format!(
            "system output covers {} sentences, key covers {}",
            system.len(),
            key.len()
        )));
    }
    let pairs: Vec<(&ArcSet, &ArcSet)> = system.iter().zip(key).collect();
    Ok(exec::map_reduce(
        exec,
        &pairs,
        CooccurrenceTable::default,
        |(s, k)| count_sentence(s, k),
        CooccurrenceTable::merge,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingEntry {
    /// `None` translates the label to no relation.
    pub target: Option<String>,
    pub win_count: u64,
    pub runner_up_count: u64,
    pub correct: u64,
    pub false_alarms: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelMapping {
    pub entries: BTreeMap<String, MappingEntry>,
    /// Percentage of training instances whose label translates to nothing.
    pub null_fraction: f64,
}

impl LabelMapping {
    pub fn empty() -> Self {
        LabelMapping {
            entries: BTreeMap::new(),
            null_fraction: 0.0,
        }
    }

    pub fn translate(&self, label: &str) -> Option<&str> {
        self.entries.get(label).and_then(|e| e.target.as_deref())
    }

    pub fn target_labels(&self) -> BTreeSet<&str> {
        self.entries.values().filter_map(|e| e.target.as_deref()).collect()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_string()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }
}

/// Decide each source label's translation from a co-occurrence table.
pub fn decide(table: &CooccurrenceTable) -> LabelMapping {
    let mut entries = BTreeMap::new();
    let mut null_instances = 0u64;
    for (source, &total) in &table.totals {
        let empty = BTreeMap::new();
        let row = table.counts.get(source).unwrap_or(&empty);
        // BTreeMap order makes the winner independent of input order.
        let mut best: Option<(&String, u64)> = None;
        let mut runner_up = 0u64;
        for (label, &n) in row {
            match best {
                Some((_, b)) if n > b => {
                    runner_up = b;
                    best = Some((label, n));
                }
                Some(_) => runner_up = runner_up.max(n),
                None => best = Some((label, n)),
            }
        }
        let (winner, win_count) = best.map_or((None, 0), |(l, n)| (Some(l), n));
        let unique = win_count > 0 && win_count > runner_up;
        // What relabelling every instance to the winner would score. Tied
        // winners all give the same numbers.
        let correct = win_count;
        let false_alarms = total - win_count;
        let target = if unique && correct >= false_alarms {
            winner.cloned()
        } else {
            None
        };
        if target.is_none() {
            null_instances += total;
        }
        entries.insert(
            source.clone(),
            MappingEntry {
                target,
                win_count,
                runner_up_count: runner_up,
                correct,
                false_alarms,
            },
        );
    }
    let total = table.total();
    let null_fraction = if total == 0 {
        0.0
    } else {
        100.0 * null_instances as f64 / total as f64
    };
    LabelMapping { entries, null_fraction }
}

/// Learn the translation of `system` labels into `key` labels from aligned
/// training layers. N-ary relations must already be decomposed.
pub fn learn_mapping(system: &[ArcSet], key: &[ArcSet], exec: Execution) -> Result<LabelMapping> {
    Ok(decide(&cooccurrence(system, key, exec)?))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ApplyReport {
    pub translated: usize,
    pub dropped: usize,
    /// Instances whose label was never seen while learning the mapping.
    pub unknown: usize,
    /// Arcs that collapsed onto an already translated arc.
    pub collapsed: usize,
}

pub fn apply_mapping(mapping: &LabelMapping, system: &[ArcSet]) -> (Vec<ArcSet>, ApplyReport) {
    let mut report = ApplyReport::default();
    let mut unknown_labels = BTreeSet::new();
    let out = system
        .iter()
        .map(|arcs| {
            let mut translated = ArcSet::new();
            for arc in arcs {
                match mapping.entries.get(&arc.label) {
                    None => {
                        report.unknown += 1;
                        report.dropped += 1;
                        unknown_labels.insert(arc.label.clone());
                    }
                    Some(MappingEntry { target: None, .. }) => report.dropped += 1,
                    Some(MappingEntry { target: Some(t), .. }) => {
                        if translated.insert(GrArc::new(arc.source, arc.target, t.clone())) {
                            report.translated += 1;
                        } else {
                            report.collapsed += 1;
                        }
                    }
                }
            }
            translated
        })
        .collect();
    if report.unknown > 0 {
        warn!(
            "{} arcs with labels unseen in training were dropped: {:?}",
            report.unknown, unknown_labels
        );
    }
    (out, report)
}

impl fmt::Display for LabelMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (source, e) in &self.entries {
            let _ = writeln!(
                out,
                "{source}\t{}\t{}\t{}\t{}\t{}",
                e.target.as_deref().unwrap_or(NULL_TARGET),
                e.win_count,
                e.runner_up_count,
                e.correct,
                e.false_alarms
            );
        }
        let _ = writeln!(out, "null_fraction\t{:.1}", self.null_fraction);
        f.write_str(&out)
    }
}

impl std::str::FromStr for LabelMapping {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut null_fraction = None;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if null_fraction.is_some() {
                return Err(Error::format(lineno, "content after the null_fraction footer"));
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let num =
                |s: &str| -> Result<u64> { s.parse().map_err(|_| Error::format(lineno, format!("bad count `{s}`"))) };
            match fields.as_slice() {
                ["null_fraction", pct] => {
                    let v: f64 = pct
                        .parse()
                        .map_err(|_| Error::format(lineno, format!("bad percentage `{pct}`")))?;
                    null_fraction = Some(v);
                }
                [source, target, win, runner, correct, fa] => {
                    let entry = MappingEntry {
                        target: (*target != NULL_TARGET).then(|| target.to_string()),
                        win_count: num(win)?,
                        runner_up_count: num(runner)?,
                        correct: num(correct)?,
                        false_alarms: num(fa)?,
                    };
                    if entries.insert(source.to_string(), entry).is_some() {
                        return Err(Error::format(lineno, format!("duplicate entry for `{source}`")));
                    }
                }
                _ => {
                    return Err(Error::format(
                        lineno,
                        format!("expected 6 fields or a null_fraction footer, got {}", fields.len()),
                    ))
                }
            }
        }
        let null_fraction =
            null_fraction.ok_or_else(|| Error::format(text.lines().count() + 1, "missing null_fraction footer"))?;
        Ok(LabelMapping { entries, null_fraction })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arcs(items: &[(usize, usize, &str)]) -> ArcSet {
        items.iter().map(|&(s, t, l)| GrArc::new(s, t, l)).collect()
    }

    #[test]
    fn decompose_three_and_four() {
        let rels = vec![
            NaryRelation {
                label: "L".into(),
                elements: vec![0, 1, 2],
            },
            NaryRelation {
                label: "M".into(),
                elements: vec![3, 0, 1, 2],
            },
        ];
        let out = decompose_nary(&rels).unwrap();
        assert_eq!(
            out,
            vec![
                GrArc::new(0, 1, "L/arg2"),
                GrArc::new(0, 2, "L/arg3"),
                GrArc::new(3, 0, "M/arg2"),
                GrArc::new(3, 1, "M/arg3"),
                GrArc::new(3, 2, "M/arg4"),
            ]
        );
        assert!(decompose_nary(&[]).unwrap().is_empty());
        let bad = NaryRelation {
            label: "L".into(),
            elements: vec![0, 1],
        };
        assert!(decompose_nary(&[bad]).is_err());
    }

    #[test]
    fn subject_label_maps() {
        let system = vec![
            arcs(&[(0, 1, "np-sbj"), (2, 1, "np-obj")]),
            arcs(&[(0, 2, "np-sbj")]),
            arcs(&[(1, 2, "np-sbj")]),
        ];
        let key = vec![
            arcs(&[(0, 1, "subj"), (2, 1, "obj")]),
            arcs(&[(0, 2, "subj")]),
            arcs(&[(1, 2, "obj")]),
        ];
        let m = learn_mapping(&system, &key, Execution::Sequential).unwrap();
        assert_eq!(m.translate("np-sbj"), Some("subj"));
        let e = &m.entries["np-sbj"];
        assert_eq!(
            (e.win_count, e.runner_up_count, e.correct, e.false_alarms),
            (2, 1, 2, 1)
        );
    }

    #[test]
    fn tie_maps_to_null() {
        let mut system = vec![];
        let mut key = vec![];
        for i in 0..6 {
            system.push(arcs(&[(0, 1, "e1")]));
            key.push(arcs(&[(0, 1, if i < 3 { "t1" } else { "t2" })]));
        }
        let m = learn_mapping(&system, &key, Execution::Sequential).unwrap();
        assert_eq!(m.translate("e1"), None);
        assert_eq!(m.entries["e1"].win_count, 3);
        assert_eq!(m.entries["e1"].runner_up_count, 3);
        assert!((m.null_fraction - 100.0).abs() < 1e-12);
    }

    #[test]
    fn more_false_alarms_than_correct_maps_to_null() {
        let mut system = vec![];
        let mut key = vec![];
        for i in 0..5 {
            system.push(arcs(&[(0, 1, "e1")]));
            key.push(if i < 2 { arcs(&[(0, 1, "t1")]) } else { ArcSet::new() });
        }
        let m = learn_mapping(&system, &key, Execution::Sequential).unwrap();
        let e = &m.entries["e1"];
        assert_eq!(e.target, None);
        assert_eq!((e.correct, e.false_alarms), (2, 3));
    }

    #[test]
    fn apply_drops_null_and_unknown() {
        let text = "e1\tt1\t1\t0\t1\t0\ne2\t∅\t0\t0\t0\t0\nnull_fraction\t50.0\n";
        let m: LabelMapping = text.parse().unwrap();
        assert_eq!(m.to_string(), text);
        let (out, report) = apply_mapping(&m, &[arcs(&[(0, 1, "e1"), (2, 3, "e2"), (4, 5, "zz")])]);
        assert_eq!(out, vec![arcs(&[(0, 1, "t1")])]);
        assert_eq!(report.unknown, 1);
        assert_eq!(report.dropped, 2);
    }

    #[test]
    fn relabel_collisions_collapse() {
        let text = "a\tt\t1\t0\t1\t0\nb\tt\t1\t0\t1\t0\nnull_fraction\t0.0\n";
        let m: LabelMapping = text.parse().unwrap();
        let (out, report) = apply_mapping(&m, &[arcs(&[(0, 1, "a"), (0, 1, "b")])]);
        assert_eq!(out[0].len(), 1);
        assert_eq!(report.collapsed, 1);
    }

    #[test]
    fn empty_mapping_gives_blank_state() {
        let (out, _) = apply_mapping(&LabelMapping::empty(), &[arcs(&[(0, 1, "x")])]);
        assert!(out[0].is_empty());
    }

    #[test]
    fn misaligned_layers_rejected() {
        assert!(learn_mapping(&[ArcSet::new()], &[], Execution::Sequential).is_err());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("a\tb\n".parse::<LabelMapping>().is_err());
        assert!("a\tt\t1\t0\t1\t0\n".parse::<LabelMapping>().is_err());
        assert!("a\tt\tx\t0\t1\t0\nnull_fraction\t0.0\n"
            .parse::<LabelMapping>()
            .is_err());
    }
}
