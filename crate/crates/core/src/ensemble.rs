//! Union of several annotators' translated arcs, used as a merged initial
//! state for the rule learner.

use std::collections::BTreeMap;

use crate::corpus::{ArcSet, GrArc};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnionReport {
    pub component_counts: Vec<usize>,
    /// Union arcs contributed by more than one component.
    pub overlap: usize,
    pub union_count: usize,
}

/// Per-sentence set union of all components. Arcs that differ only in label
/// are distinct and both kept. `scheme`, when given, is the label inventory
/// every component must stay within.
pub fn union_annotations<S: AsRef<str>>(
    components: &[Vec<ArcSet>],
    scheme: Option<&[S]>,
) -> Result<(Vec<ArcSet>, UnionReport)> {
    let Some(first) = components.first() else {
        return Err(Error::InvalidArgument("union of zero components".into()));
    };
    let n = first.len();
    if let Some(bad) = components.iter().find(|c| c.len() != n) {
        return Err(Error::Misaligned(format!(
            "union components cover {} and {} sentences",
            n,
            bad.len()
        )));
    }
    if let Some(labels) = scheme {
        for arc in components.iter().flatten().flatten() {
            if !labels.iter().any(|l| l.as_ref() == arc.label) {
                return Err(Error::Scheme(format!(
                    "label `{}` is not in the target scheme",
                    arc.label
                )));
            }
        }
    }
    let mut report = UnionReport {
        component_counts: components.iter().map(|c| c.iter().map(ArcSet::len).sum()).collect(),
        ..Default::default()
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut votes: BTreeMap<&GrArc, usize> = BTreeMap::new();
        for c in components {
            for arc in &c[i] {
                *votes.entry(arc).or_default() += 1;
            }
        }
        report.overlap += votes.values().filter(|&&v| v > 1).count();
        let merged: ArcSet = votes.into_keys().cloned().collect();
        report.union_count += merged.len();
        out.push(merged);
    }
    Ok((out, report))
}
