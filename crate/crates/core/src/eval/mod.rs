//! Scoring hypothesis arcs against a key, and the paired significance tests
//! used to compare conditions.
//!
//! Percentages are kept at full precision; only the report writer rounds.

mod report;
mod stats;

use std::collections::BTreeMap;

use crate::corpus::ArcSet;
use crate::error::{Error, Result};

pub use report::{format_report, Comparison, ConditionRow};
pub use stats::{
    binomial_upper_tail, randomization_test, sign_test, sign_test_recall, RandomizationConfig, Resampling,
    SignificanceResult, Statistic, TestKind, DEFAULT_ITERATIONS, EXHAUSTIVE_MAX_UNITS,
};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScoreCounts {
    pub key_total: u64,
    pub claimed: u64,
    pub correct: u64,
}

impl ScoreCounts {
    pub fn new(key_total: u64, claimed: u64, correct: u64) -> Self {
        ScoreCounts {
            key_total,
            claimed,
            correct,
        }
    }

    /// Recall in percent; 0 when the key is empty.
    pub fn recall(&self) -> f64 {
        percent(self.correct, self.key_total)
    }

    pub fn precision(&self) -> f64 {
        percent(self.correct, self.claimed)
    }

    pub fn f_score(&self) -> f64 {
        f_score(self.precision(), self.recall())
    }

    pub fn add(&mut self, other: &ScoreCounts) {
        self.key_total += other.key_total;
        self.claimed += other.claimed;
        self.correct += other.correct;
    }
}

fn percent(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Harmonic mean of two percentages, 0 when both are 0.
pub fn f_score(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Share of the baseline's missing F-score recovered, in percent.
pub fn error_reduction(f_ia: f64, f_ni: f64) -> Result<f64> {
    if f_ni >= 100.0 {
        return Err(Error::InvalidArgument(format!(
            "error reduction is undefined for a baseline F of {f_ni}"
        )));
    }
    Ok(100.0 * (f_ia - f_ni) / (100.0 - f_ni))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub overall: ScoreCounts,
    /// Recall side keyed by key label, claimed side by hypothesis label.
    pub per_label: BTreeMap<String, ScoreCounts>,
    pub er_vs_baseline: Option<f64>,
}

impl EvalReport {
    pub fn recall(&self) -> f64 {
        self.overall.recall()
    }

    pub fn precision(&self) -> f64 {
        self.overall.precision()
    }

    pub fn f_score(&self) -> f64 {
        self.overall.f_score()
    }

    pub fn with_baseline(mut self, baseline: &EvalReport) -> Result<Self> {
        self.er_vs_baseline = Some(error_reduction(self.f_score(), baseline.f_score())?);
        Ok(self)
    }
}

fn check_aligned(hypothesis: &[ArcSet], key: &[ArcSet]) -> Result<()> {
    if hypothesis.len() != key.len() {
        return Err(Error::Misaligned(format!(
            "hypothesis covers {} sentences, key {}",
            hypothesis.len(),
            key.len()
        )));
    }
    Ok(())
}

pub fn score(hypothesis: &[ArcSet], key: &[ArcSet]) -> Result<EvalReport> {
    check_aligned(hypothesis, key)?;
    let mut report = EvalReport::default();
    for (hyp, gold) in hypothesis.iter().zip(key) {
        for arc in gold {
            let e = report.per_label.entry(arc.label.clone()).or_default();
            e.key_total += 1;
            if hyp.contains(arc) {
                e.correct += 1;
            }
        }
        for arc in hyp {
            report.per_label.entry(arc.label.clone()).or_default().claimed += 1;
        }
    }
    for c in report.per_label.values() {
        report.overall.add(c);
    }
    Ok(report)
}

/// Per-sentence counts, the pairing units of the randomization test.
pub fn sentence_counts(hypothesis: &[ArcSet], key: &[ArcSet]) -> Result<Vec<ScoreCounts>> {
    check_aligned(hypothesis, key)?;
    Ok(hypothesis
        .iter()
        .zip(key)
        .map(|(h, k)| ScoreCounts::new(k.len() as u64, h.len() as u64, h.intersection(k).count() as u64))
        .collect())
}

/// One flag per key arc, in corpus order: whether the hypothesis has it.
pub fn recall_flags(hypothesis: &[ArcSet], key: &[ArcSet]) -> Result<Vec<bool>> {
    check_aligned(hypothesis, key)?;
    Ok(hypothesis
        .iter()
        .zip(key)
        .flat_map(|(h, k)| k.iter().map(move |arc| h.contains(arc)))
        .collect())
}

/// The three paired tests between two hypotheses over one key: sign test on
/// recall, randomization tests on precision and F.
pub fn compare_hypotheses(
    a: &[ArcSet],
    b: &[ArcSet],
    key: &[ArcSet],
    config: &RandomizationConfig,
) -> Result<[SignificanceResult; 3]> {
    check_aligned(b, key)?;
    let recall = sign_test_recall(&recall_flags(a, key)?, &recall_flags(b, key)?)?;
    let units_a = sentence_counts(a, key)?;
    let units_b = sentence_counts(b, key)?;
    let precision = randomization_test(
        &units_a,
        &units_b,
        &RandomizationConfig {
            statistic: Statistic::Precision,
            ..config.clone()
        },
    )?;
    let f = randomization_test(
        &units_a,
        &units_b,
        &RandomizationConfig {
            statistic: Statistic::FScore,
            ..config.clone()
        },
    )?;
    Ok([recall, precision, f])
}
