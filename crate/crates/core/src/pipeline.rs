//! The end-to-end experiment: translate existing annotators into the key
//! scheme, merge them, learn rules on the training corpus, apply them to the
//! test corpus and score every condition against the test key.
//!
//! Every step is also public. Running them one by one produces the same
//! artifacts as [`run_pipeline`].

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{read_corpus, write_corpus, ArcSet, Corpus, KEY_SET};
use crate::ensemble::{union_annotations, UnionReport};
use crate::error::{Error, Result};
use crate::eval::{
    compare_hypotheses, format_report, score, Comparison, ConditionRow, EvalReport, RandomizationConfig,
    DEFAULT_ITERATIONS,
};
use crate::exec::Execution;
use crate::mapping::{apply_mapping, decompose_nary, learn_mapping, ApplyReport, LabelMapping};
use crate::synth::{SYSTEM_B, SYSTEM_C};
use crate::tbl::{
    apply_rules, learn_rules, templates, write_rules, LearnerConfig, TemplateId, TransformationRule, DEFAULT_MAX_RULES,
    DEFAULT_MIN_GAIN, DEFAULT_WINDOW,
};

/// Layer holding a condition's initial state.
pub const INITIAL_SET: &str = "initial";
/// Layer holding a condition's output after the rules.
pub const FINAL_SET: &str = "final";
pub const REPORT_FILE: &str = "report.tsv";
pub const MANIFEST_FILE: &str = "manifest.tsv";

/// Layer holding one system's output translated into the key scheme.
pub fn translated_set(system: &str) -> String {
    format!("tr-{system}")
}

pub fn mapping_file(system: &str) -> String {
    format!("mapping-{system}.tsv")
}

pub fn rules_file(condition: &str) -> String {
    format!("rules-{condition}.tsv")
}

pub fn union_file(condition: &str) -> String {
    format!("union-{condition}.tsv")
}

pub fn annotated_file(condition: &str) -> String {
    format!("annotated-{condition}.gr")
}

fn default_name() -> String {
    "experiment".into()
}

fn default_key() -> String {
    KEY_SET.into()
}

fn default_fraction() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    #[serde(default = "LearnerSection::default_min_gain")]
    pub min_gain: i64,
    #[serde(default = "LearnerSection::default_max_rules")]
    pub max_rules: usize,
    #[serde(default = "LearnerSection::default_window")]
    pub window: usize,
    /// Template ids such as `T07`; all templates when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<Vec<String>>,
}

impl LearnerSection {
    fn default_min_gain() -> i64 {
        DEFAULT_MIN_GAIN
    }

    fn default_max_rules() -> usize {
        DEFAULT_MAX_RULES
    }

    fn default_window() -> usize {
        DEFAULT_WINDOW
    }

    pub fn learner_config(&self, execution: Execution) -> Result<LearnerConfig> {
        let templates = match &self.templates {
            None => templates().iter().map(|t| t.id).collect(),
            Some(ids) => ids.iter().map(|s| s.parse()).collect::<Result<Vec<TemplateId>>>()?,
        };
        if self.min_gain < 1 {
            return Err(Error::Config(format!("min_gain {} is below 1", self.min_gain)));
        }
        Ok(LearnerConfig {
            min_gain: self.min_gain,
            max_rules: self.max_rules,
            window: self.window,
            templates,
            execution,
        })
    }
}

impl Default for LearnerSection {
    fn default() -> Self {
        LearnerSection {
            min_gain: DEFAULT_MIN_GAIN,
            max_rules: DEFAULT_MAX_RULES,
            window: DEFAULT_WINDOW,
            templates: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    #[serde(default = "EvalSection::default_iterations")]
    pub iterations: u64,
    #[serde(default)]
    pub seed: u64,
}

impl EvalSection {
    fn default_iterations() -> u64 {
        DEFAULT_ITERATIONS
    }

    pub fn randomization(&self, execution: Execution) -> RandomizationConfig {
        RandomizationConfig {
            iterations: self.iterations,
            seed: self.seed,
            execution,
            ..RandomizationConfig::default()
        }
    }
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
        }
    }
}

/// One row of the experiment: which existing systems seed the learner.
/// No systems means a blank start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub name: String,
    #[serde(default)]
    pub systems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Relative paths are resolved against the config file's directory.
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default = "default_key")]
    pub key: String,
    /// Leading share of the training sentences to learn from.
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    /// Condition the others are compared against.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(default)]
    pub learner: LearnerSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(rename = "condition")]
    pub conditions: Vec<ConditionSpec>,
    #[serde(skip)]
    pub base_dir: PathBuf,
    #[serde(skip)]
    pub execution: Execution,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.base_dir = base_dir.into();
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, dir)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serializes")
    }

    /// The four conditions of the synthetic benchmark.
    pub fn benchmark(train: impl Into<PathBuf>, test: impl Into<PathBuf>) -> Self {
        let cond = |name: &str, systems: &[&str]| ConditionSpec {
            name: name.into(),
            systems: systems.iter().map(|s| s.to_string()).collect(),
        };
        ExperimentConfig {
            name: "benchmark".into(),
            train: train.into(),
            test: test.into(),
            key: KEY_SET.into(),
            train_fraction: 1.0,
            baseline: Some("NI".into()),
            learner: LearnerSection::default(),
            eval: EvalSection::default(),
            conditions: vec![
                cond("NI", &[]),
                cond("IaB", &[SYSTEM_B]),
                cond("IaC", &[SYSTEM_C]),
                cond("IaU", &[SYSTEM_B, SYSTEM_C]),
            ],
            base_dir: PathBuf::new(),
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.conditions.is_empty() {
            return Err(Error::Config("no conditions".into()));
        }
        let mut names = BTreeSet::new();
        for c in &self.conditions {
            if c.name.is_empty()
                || !c
                    .name
                    .chars()
                    .all(|ch| ch.is_ascii_alphanumeric() || "-_.".contains(ch))
            {
                return Err(Error::Config(format!(
                    "condition name `{}` must be non-empty ASCII letters, digits, `-`, `_` or `.`",
                    c.name
                )));
            }
            if !names.insert(c.name.as_str()) {
                return Err(Error::Config(format!("duplicate condition `{}`", c.name)));
            }
            let unique: BTreeSet<&String> = c.systems.iter().collect();
            if unique.len() != c.systems.len() {
                return Err(Error::Config(format!("condition `{}` lists a system twice", c.name)));
            }
        }
        if let Some(b) = &self.baseline {
            if !names.contains(b.as_str()) {
                return Err(Error::Config(format!("baseline `{b}` is not a condition")));
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "train_fraction {} is not in (0, 1]",
                self.train_fraction
            )));
        }
        if self.eval.iterations == 0 {
            return Err(Error::Config("eval iterations must be positive".into()));
        }
        self.learner.learner_config(self.execution)?;
        Ok(())
    }

    pub fn train_path(&self) -> PathBuf {
        self.base_dir.join(&self.train)
    }

    pub fn test_path(&self) -> PathBuf {
        self.base_dir.join(&self.test)
    }

    /// Every system named by some condition, sorted.
    pub fn systems(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.conditions.iter().flat_map(|c| &c.systems).collect();
        set.into_iter().cloned().collect()
    }

    /// SHA-256 of the effective configuration, in hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

/// The leading `fraction` of the sentences, rounded to the nearest count.
pub fn training_slice(corpus: &Corpus, fraction: f64) -> Corpus {
    corpus.prefix((corpus.len() as f64 * fraction).round() as usize)
}

/// A system's binary arcs plus its decomposed n-ary relations.
pub fn system_layer(corpus: &Corpus, system: &str) -> Result<Vec<ArcSet>> {
    corpus.require_scheme(system)?;
    corpus
        .sentences
        .iter()
        .map(|s| {
            let mut arcs = s.arcs(system);
            if let Some(set) = s.set(system) {
                arcs.extend(decompose_nary(&set.nary)?);
            }
            Ok(arcs)
        })
        .collect()
}

pub fn key_scheme(corpus: &Corpus, key: &str) -> Result<Vec<String>> {
    Ok(corpus.require_scheme(key)?.iter().cloned().collect())
}

/// Learn how `system` translates into `key` on a training corpus.
pub fn learn_system_mapping(train: &Corpus, system: &str, key: &str, exec: Execution) -> Result<LabelMapping> {
    key_scheme(train, key)?;
    learn_mapping(&system_layer(train, system)?, &train.layer(key), exec)
}

/// Store `system` translated through `mapping` as layer `tr-<system>`.
pub fn add_translation(corpus: &mut Corpus, system: &str, mapping: &LabelMapping, key: &str) -> Result<ApplyReport> {
    let scheme = key_scheme(corpus, key)?;
    if let Some(bad) = mapping
        .target_labels()
        .into_iter()
        .find(|l| !scheme.iter().any(|s| s == l))
    {
        return Err(Error::Scheme(format!(
            "mapping target `{bad}` is not in the `{key}` scheme"
        )));
    }
    let (layer, report) = apply_mapping(mapping, &system_layer(corpus, system)?);
    corpus.put_layer(&translated_set(system), scheme, layer)?;
    Ok(report)
}

/// Store the union of `layers` as layer `into`.
pub fn add_union(corpus: &mut Corpus, layers: &[String], into: &str, key: &str) -> Result<UnionReport> {
    let scheme = key_scheme(corpus, key)?;
    let components = layers
        .iter()
        .map(|l| corpus.require_scheme(l).map(|_| corpus.layer(l)))
        .collect::<Result<Vec<_>>>()?;
    let (merged, report) = union_annotations(&components, Some(scheme.as_slice()))?;
    corpus.put_layer(into, scheme, merged)?;
    Ok(report)
}

/// Arc counts of a union, one line per component.
pub fn format_union_report(layers: &[String], report: &UnionReport) -> String {
    let mut out = String::from("component\tarcs\n");
    for (name, n) in layers.iter().zip(&report.component_counts) {
        out.push_str(&format!("{name}\t{n}\n"));
    }
    out.push_str(&format!("overlap\t{}\nunion\t{}\n", report.overlap, report.union_count));
    out
}

/// The starting state: layer `initial` if given, blank otherwise.
pub fn initial_state(corpus: &Corpus, initial: Option<&str>) -> Result<Vec<ArcSet>> {
    match initial {
        Some(set) => {
            corpus.require_scheme(set)?;
            Ok(corpus.layer(set))
        }
        None => Ok(vec![ArcSet::new(); corpus.len()]),
    }
}

/// Learn rules from `initial` (or a blank start) towards `key`.
pub fn learn_corpus_rules(
    train: &Corpus,
    initial: Option<&str>,
    key: &str,
    config: &LearnerConfig,
) -> Result<Vec<TransformationRule>> {
    key_scheme(train, key)?;
    let start = initial_state(train, initial)?;
    Ok(learn_rules(&train.sentences, &start, &train.layer(key), config)?.rules)
}

/// Apply `rules` to `initial` (or a blank start) and store the result as
/// layer `into`.
pub fn add_rule_output(
    corpus: &mut Corpus,
    rules: &[TransformationRule],
    initial: Option<&str>,
    into: &str,
    key: &str,
    window: usize,
) -> Result<()> {
    let scheme = key_scheme(corpus, key)?;
    let start = initial_state(corpus, initial)?;
    let out = apply_rules(rules, &corpus.sentences, &start, window)?;
    corpus.put_layer(into, scheme, out)
}

/// A condition's test-set output, with the initial state it started from
/// when there was one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionOutput {
    pub name: String,
    pub initial: Option<Vec<ArcSet>>,
    pub output: Vec<ArcSet>,
}

impl ConditionOutput {
    /// Read the `final` and, if present, `initial` layers of an annotated
    /// corpus.
    pub fn from_corpus(name: &str, corpus: &Corpus) -> Result<Self> {
        corpus.require_scheme(FINAL_SET)?;
        Ok(ConditionOutput {
            name: name.to_string(),
            initial: corpus.scheme(INITIAL_SET).map(|_| corpus.layer(INITIAL_SET)),
            output: corpus.layer(FINAL_SET),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// Final rows followed, per condition with one, by its initial row.
    pub rows: Vec<ConditionRow>,
    pub comparisons: Vec<Comparison>,
    pub text: String,
}

impl Report {
    pub fn row(&self, name: &str) -> Option<&EvalReport> {
        self.rows.iter().find(|r| r.name == name).map(|r| &r.report)
    }
}

pub fn initial_row_name(condition: &str) -> String {
    format!("{condition}:initial")
}

/// Score every condition and compare each one against `baseline`.
pub fn build_report(
    outputs: &[ConditionOutput],
    key: &[ArcSet],
    baseline: Option<&str>,
    randomization: &RandomizationConfig,
) -> Result<Report> {
    let base = match baseline {
        Some(b) => Some(
            outputs
                .iter()
                .find(|o| o.name == b)
                .ok_or_else(|| Error::InvalidArgument(format!("baseline `{b}` is not among the conditions")))?,
        ),
        None => None,
    };
    let base_report = base.map(|b| score(&b.output, key)).transpose()?;
    let mut rows = Vec::new();
    let mut initial_rows = Vec::new();
    let mut comparisons = Vec::new();
    for o in outputs {
        let mut report = score(&o.output, key)?;
        if let (Some(b), Some(br)) = (base, &base_report) {
            if b.name != o.name {
                report = report.with_baseline(br)?;
                let tests = compare_hypotheses(&o.output, &b.output, key, randomization)?;
                comparisons.push((o.name.clone(), b.name.clone(), tests.to_vec()));
            }
        }
        rows.push(ConditionRow {
            name: o.name.clone(),
            report,
        });
        if let Some(initial) = &o.initial {
            initial_rows.push(ConditionRow {
                name: initial_row_name(&o.name),
                report: score(initial, key)?,
            });
        }
    }
    rows.extend(initial_rows);
    let text = format_report(&rows, &comparisons);
    Ok(Report {
        rows,
        comparisons,
        text,
    })
}

#[derive(Debug, Clone)]
pub struct ConditionOutcome {
    pub name: String,
    pub rules: Vec<TransformationRule>,
    /// Training and test unions, for conditions with systems.
    pub union: Option<(UnionReport, UnionReport)>,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub report: Report,
    pub conditions: Vec<ConditionOutcome>,
    pub mappings: Vec<(String, LabelMapping)>,
    pub train_sentences: usize,
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn file_hash(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| e.in_stage(name))
}

/// Run every condition of `config` and write its artifacts to `out_dir`.
pub fn run_pipeline(config: &ExperimentConfig, out_dir: impl AsRef<Path>) -> Result<PipelineOutcome> {
    let out_dir = out_dir.as_ref();
    stage("config", || config.validate())?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let key = config.key.as_str();

    let (mut train, mut test) = stage("load", || {
        let full = read_corpus(config.train_path())?;
        let train = training_slice(&full, config.train_fraction);
        let test = read_corpus(config.test_path())?;
        key_scheme(&train, key)?;
        key_scheme(&test, key)?;
        Ok((train, test))
    })?;

    let mut mappings = Vec::new();
    for system in config.systems() {
        let mapping = stage(&format!("mapping {system}"), || {
            let m = learn_system_mapping(&train, &system, key, config.execution)?;
            m.write(out_dir.join(mapping_file(&system)))?;
            add_translation(&mut train, &system, &m, key)?;
            add_translation(&mut test, &system, &m, key)?;
            Ok(m)
        })?;
        mappings.push((system, mapping));
    }

    let learner = config.learner.learner_config(config.execution)?;
    let mut outputs = Vec::new();
    let mut conditions = Vec::new();
    for cond in &config.conditions {
        let (output, outcome) = stage(&format!("condition {}", cond.name), || {
            let mut train_c = train.clone();
            let mut test_c = test.clone();
            let layers: Vec<String> = cond.systems.iter().map(|s| translated_set(s)).collect();
            let mut union = None;
            let initial = if layers.is_empty() {
                None
            } else {
                let tr = add_union(&mut train_c, &layers, INITIAL_SET, key)?;
                let te = add_union(&mut test_c, &layers, INITIAL_SET, key)?;
                write_text(
                    &out_dir.join(union_file(&cond.name)),
                    &format_union_report(&layers, &te),
                )?;
                union = Some((tr, te));
                Some(INITIAL_SET)
            };
            let rules = learn_corpus_rules(&train_c, initial, key, &learner)?;
            write_rules(&rules, out_dir.join(rules_file(&cond.name)))?;
            add_rule_output(&mut test_c, &rules, initial, FINAL_SET, key, learner.window)?;
            write_corpus(&test_c, out_dir.join(annotated_file(&cond.name)))?;
            let output = ConditionOutput::from_corpus(&cond.name, &test_c)?;
            Ok((
                output,
                ConditionOutcome {
                    name: cond.name.clone(),
                    rules,
                    union,
                },
            ))
        })?;
        outputs.push(output);
        conditions.push(outcome);
    }

    let report = stage("report", || {
        let report = build_report(
            &outputs,
            &test.layer(key),
            config.baseline.as_deref(),
            &config.eval.randomization(config.execution),
        )?;
        write_text(&out_dir.join(REPORT_FILE), &report.text)?;
        Ok(report)
    })?;

    stage("manifest", || {
        let mut m = String::new();
        m.push_str(&format!("name\t{}\n", config.name));
        m.push_str(&format!("config_sha256\t{}\n", config.hash()));
        m.push_str(&format!(
            "train\t{}\t{}\n",
            config.train.display(),
            file_hash(&config.train_path())?
        ));
        m.push_str(&format!(
            "test\t{}\t{}\n",
            config.test.display(),
            file_hash(&config.test_path())?
        ));
        m.push_str(&format!("train_sentences\t{}\n", train.len()));
        m.push_str(&format!("eval_seed\t{}\n", config.eval.seed));
        m.push_str(&format!("eval_iterations\t{}\n", config.eval.iterations));
        let mut artifacts: Vec<String> = mappings.iter().map(|(s, _)| mapping_file(s)).collect();
        for c in &config.conditions {
            if !c.systems.is_empty() {
                artifacts.push(union_file(&c.name));
            }
            artifacts.push(rules_file(&c.name));
            artifacts.push(annotated_file(&c.name));
        }
        artifacts.push(REPORT_FILE.into());
        for a in artifacts {
            m.push_str(&format!("artifact\t{a}\t{}\n", file_hash(&out_dir.join(&a))?));
        }
        write_text(&out_dir.join(MANIFEST_FILE), &m)
    })?;

    Ok(PipelineOutcome {
        report,
        conditions,
        mappings,
        train_sentences: train.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let text = "train = \"a.gr\"\ntest = \"b.gr\"\n[[condition]]\nname = \"NI\"\n";
        let c = ExperimentConfig::from_toml(text, "dir").unwrap();
        assert_eq!(c.key, KEY_SET);
        assert_eq!(c.learner, LearnerSection::default());
        assert_eq!(c.train_path(), Path::new("dir/a.gr"));
        let again = ExperimentConfig::from_toml(&c.to_toml(), "dir").unwrap();
        assert_eq!(again, c);
        let b = ExperimentConfig::benchmark("train.gr", "test.gr");
        assert_eq!(ExperimentConfig::from_toml(&b.to_toml(), "").unwrap(), b);
        assert_eq!(b.systems(), vec![SYSTEM_B.to_string(), SYSTEM_C.to_string()]);
    }

    #[test]
    fn config_rejects_bad_input() {
        let base = "train = \"a.gr\"\ntest = \"b.gr\"\n";
        for extra in [
            "[[condition]]\nname = \"NI\"\n[[condition]]\nname = \"NI\"\n",
            "baseline = \"X\"\n[[condition]]\nname = \"NI\"\n",
            "train_fraction = 0.0\n[[condition]]\nname = \"NI\"\n",
            "[learner]\ntemplates = [\"T99\"]\n[[condition]]\nname = \"NI\"\n",
            "[[condition]]\nname = \"a/b\"\n",
            "[[condition]]\nname = \"U\"\nsystems = [\"s\", \"s\"]\n",
            "bogus = 1\n[[condition]]\nname = \"NI\"\n",
        ] {
            let text = format!("{base}{extra}");
            assert!(
                matches!(
                    ExperimentConfig::from_toml(&text, ""),
                    Err(Error::Config(_)) | Err(Error::InvalidArgument(_))
                ),
                "{extra}"
            );
        }
    }

    #[test]
    fn hash_tracks_effective_config() {
        let a = ExperimentConfig::benchmark("train.gr", "test.gr");
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.eval.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
