use std::fmt::Write;

use super::{EvalReport, SignificanceResult};

/// One condition's row of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRow {
    pub name: String,
    pub report: EvalReport,
}

/// A pairwise comparison `a` vs `b` with its test results.
pub type Comparison = (String, String, Vec<SignificanceResult>);

fn pct(x: f64) -> String {
    format!("{x:.1}")
}

fn verdict(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Tab-separated results table, a per-label section and a significance
/// section. Values are rounded to one decimal here and nowhere else.
pub fn format_report(rows: &[ConditionRow], comparisons: &[Comparison]) -> String {
    let mut out = String::new();
    out.push_str("condition\trecalled\tR%\tP%\tF%\tER%\n");
    for row in rows {
        let r = &row.report;
        let er = r.er_vs_baseline.map(pct).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            row.name,
            r.overall.correct,
            pct(r.recall()),
            pct(r.precision()),
            pct(r.f_score()),
            er
        );
    }
    out.push_str("\n# per-label\ncondition\tlabel\tkey\tclaimed\tcorrect\tR%\tP%\tF%\n");
    for row in rows {
        for (label, c) in &row.report.per_label {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                row.name,
                label,
                c.key_total,
                c.claimed,
                c.correct,
                pct(c.recall()),
                pct(c.precision()),
                pct(c.f_score())
            );
        }
    }
    if !comparisons.is_empty() {
        out.push_str("\n# significance (one-sided, A better than B)\nA\tB\ttest\tstatistic\tp\tsig5\tsig10\n");
        for (a, b, tests) in comparisons {
            for t in tests {
                let _ = writeln!(
                    out,
                    "{a}\t{b}\t{}\t{:.6}\t{}\t{}",
                    t.kind,
                    t.p_value,
                    verdict(t.sig5()),
                    verdict(t.sig10())
                );
            }
        }
    }
    out
}
