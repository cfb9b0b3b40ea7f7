//! Command-line driver: every pipeline stage as a subcommand, plus `run`
//! for a whole experiment.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use grbridge::corpus::{read_corpus, Corpus, KEY_SET};
use grbridge::eval::{format_report, score, ConditionRow};
use grbridge::mapping::LabelMapping;
use grbridge::pipeline::{
    self, add_rule_output, add_translation, add_union, build_report, format_union_report, learn_corpus_rules,
    learn_system_mapping, training_slice, ConditionOutput, ExperimentConfig, LearnerSection, FINAL_SET,
};
use grbridge::synth::{
    add_system, benchmark_corpora, generate_corpus, generate_with_arcs, Channel, DivergenceSpec, GrammarSpec,
    BENCHMARK_SEED, BENCHMARK_TEST_ARCS, BENCHMARK_TRAIN_ARCS,
};
use grbridge::tbl::{read_rules, write_rules};
use grbridge::Execution;

#[derive(Parser)]
#[command(
    name = "grbridge",
    version,
    about = "Adapt existing GR annotators to a target scheme"
)]
struct Cli {
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus, or with --benchmark a full experiment.
    Gen(GenArgs),
    /// Add a simulated annotator's layer to a corpus.
    Simulate(SimulateArgs),
    /// Learn a label mapping from a system layer to the key.
    LearnMapping(LearnMappingArgs),
    /// Translate a system layer into the key scheme as layer tr-<system>.
    ApplyMapping(ApplyMappingArgs),
    /// Merge translated layers into one.
    Union(UnionArgs),
    /// Learn transformation rules on a training corpus.
    LearnRules(LearnRulesArgs),
    /// Apply a rule list to a corpus.
    ApplyRules(ApplyRulesArgs),
    /// Score one layer against the key.
    Score(ScoreArgs),
    /// Score annotated corpora and test them against a baseline.
    Compare(CompareArgs),
    /// Run a whole experiment from a config file.
    Run(RunArgs),
}

#[derive(Args)]
struct KeyArg {
    /// Annotation set holding the key.
    #[arg(long, default_value = KEY_SET)]
    key: String,
}

#[derive(Args)]
struct GenArgs {
    /// Grammar spec (TOML); the built-in grammar when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, conflicts_with_all = ["arcs", "benchmark"])]
    sentences: Option<usize>,
    /// Generate until the key holds at least this many arcs.
    #[arg(long, conflicts_with = "benchmark")]
    arcs: Option<usize>,
    /// Write train.gr, test.gr and experiment.toml into --out.
    #[arg(long)]
    benchmark: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    B,
    C,
}

#[derive(Args)]
struct SimulateArgs {
    corpus: PathBuf,
    /// Divergence spec (TOML).
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Annotation set to create.
    #[arg(long = "as")]
    set: String,
    /// Replace every noise channel's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FractionArgs {
    /// Experiment config whose key and training fraction apply.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Leading share of the sentences to learn from.
    #[arg(long)]
    fraction: Option<f64>,
}

#[derive(Args)]
struct LearnMappingArgs {
    corpus: PathBuf,
    #[arg(long)]
    system: String,
    #[command(flatten)]
    key: KeyArg,
    #[command(flatten)]
    fraction: FractionArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ApplyMappingArgs {
    corpus: PathBuf,
    #[arg(long)]
    system: String,
    #[arg(long)]
    mapping: PathBuf,
    #[command(flatten)]
    key: KeyArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct UnionArgs {
    corpus: PathBuf,
    /// Layers to merge.
    #[arg(long, value_delimiter = ',', required = true)]
    layers: Vec<String>,
    #[arg(long = "as", default_value = pipeline::INITIAL_SET)]
    set: String,
    #[command(flatten)]
    key: KeyArg,
    /// Where to write the overlap statistics.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LearnRulesArgs {
    corpus: PathBuf,
    /// Layer to start from; a blank start when absent.
    #[arg(long)]
    initial: Option<String>,
    #[command(flatten)]
    key: KeyArg,
    #[command(flatten)]
    fraction: FractionArgs,
    #[arg(long)]
    min_gain: Option<i64>,
    #[arg(long)]
    max_rules: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ApplyRulesArgs {
    corpus: PathBuf,
    #[arg(long)]
    rules: PathBuf,
    #[arg(long)]
    initial: Option<String>,
    #[arg(long = "as", default_value = FINAL_SET)]
    set: String,
    #[arg(long, default_value_t = grbridge::tbl::DEFAULT_WINDOW)]
    window: usize,
    #[command(flatten)]
    key: KeyArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    corpus: PathBuf,
    #[arg(long, default_value = FINAL_SET)]
    layer: String,
    #[command(flatten)]
    key: KeyArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Annotated corpora as NAME=PATH, in report order.
    #[arg(required = true, value_parser = parse_named)]
    conditions: Vec<(String, PathBuf)>,
    #[arg(long)]
    baseline: Option<String>,
    /// Experiment config supplying the baseline and evaluation settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    key: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Evaluation seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    min_gain: Option<i64>,
}

fn parse_named(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=PATH, got `{s}`")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_experiment(path: Option<&Path>) -> anyhow::Result<Option<ExperimentConfig>> {
    path.map(|p| ExperimentConfig::read(p).map_err(anyhow::Error::from))
        .transpose()
}

/// The training slice selected by --fraction, else the config, else all.
fn training(corpus: &Corpus, args: &FractionArgs, config: Option<&ExperimentConfig>) -> anyhow::Result<Corpus> {
    let fraction = args.fraction.or(config.map(|c| c.train_fraction)).unwrap_or(1.0);
    if !(fraction > 0.0 && fraction <= 1.0) {
        bail!(Usage(format!("--fraction {fraction} is not in (0, 1]")));
    }
    Ok(training_slice(corpus, fraction))
}

/// Command-line misuse detected after parsing.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn gen(args: GenArgs) -> anyhow::Result<()> {
    let mut spec = match &args.config {
        Some(p) => GrammarSpec::read(p)?,
        None => GrammarSpec::default(),
    };
    if args.benchmark {
        let dir = args.out.ok_or_else(|| Usage("--benchmark needs --out <dir>".into()))?;
        let seed = args.seed.unwrap_or(BENCHMARK_SEED);
        if args.config.is_some() {
            bail!(Usage("--benchmark uses the built-in grammar; drop --config".into()));
        }
        let (train, test) = benchmark_corpora(seed, BENCHMARK_TRAIN_ARCS, BENCHMARK_TEST_ARCS)?;
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        grbridge::corpus::write_corpus(&train, dir.join("train.gr"))?;
        grbridge::corpus::write_corpus(&test, dir.join("test.gr"))?;
        let config = ExperimentConfig::benchmark("train.gr", "test.gr");
        emit(Some(&dir.join("experiment.toml")), &config.to_toml())?;
        info!("benchmark written to {}", dir.display());
        return Ok(());
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let corpus = match (args.sentences, args.arcs) {
        (Some(n), _) => generate_corpus(&spec, n)?,
        (None, Some(a)) => generate_with_arcs(&spec, a)?,
        (None, None) => bail!(Usage("give --sentences, --arcs or --benchmark".into())),
    };
    emit(args.out.as_deref(), &corpus.to_string())
}

fn simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let mut spec = match (&args.config, args.preset) {
        (Some(p), _) => DivergenceSpec::read(p)?,
        (None, Some(Preset::B)) => DivergenceSpec::system_b(),
        (None, Some(Preset::C)) => DivergenceSpec::system_c(),
        (None, None) => bail!(Usage("give --config or --preset".into())),
    };
    if let Some(s) = args.seed {
        for ch in &mut spec.channels {
            if let Channel::Noise { seed, .. } = ch {
                *seed = s;
            }
        }
    }
    let mut corpus = read_corpus(&args.corpus)?;
    add_system(&mut corpus, &args.set, &spec)?;
    emit(args.out.as_deref(), &corpus.to_string())
}

fn learn_mapping(args: LearnMappingArgs, exec: Execution) -> anyhow::Result<()> {
    let config = read_experiment(args.fraction.config.as_deref())?;
    let corpus = read_corpus(&args.corpus)?;
    let train = training(&corpus, &args.fraction, config.as_ref())?;
    let mapping = learn_system_mapping(&train, &args.system, &args.key.key, exec)?;
    if mapping.null_fraction > 0.0 {
        info!(
            "{:.1}% of `{}` instances translate to no relation",
            mapping.null_fraction, args.system
        );
    }
    emit(args.out.as_deref(), &mapping.to_string())
}

fn apply_mapping(args: ApplyMappingArgs) -> anyhow::Result<()> {
    let mapping = LabelMapping::read(&args.mapping)?;
    let mut corpus = read_corpus(&args.corpus)?;
    let report = add_translation(&mut corpus, &args.system, &mapping, &args.key.key)?;
    info!(
        "translated {}, dropped {} ({} unknown), collapsed {}",
        report.translated, report.dropped, report.unknown, report.collapsed
    );
    emit(args.out.as_deref(), &corpus.to_string())
}

fn union(args: UnionArgs) -> anyhow::Result<()> {
    let mut corpus = read_corpus(&args.corpus)?;
    let report = add_union(&mut corpus, &args.layers, &args.set, &args.key.key)?;
    let text = format_union_report(&args.layers, &report);
    match &args.report {
        Some(p) => emit(Some(p), &text)?,
        None => eprint!("{text}"),
    }
    emit(args.out.as_deref(), &corpus.to_string())
}

fn learn_rules(args: LearnRulesArgs, exec: Execution) -> anyhow::Result<()> {
    let config = read_experiment(args.fraction.config.as_deref())?;
    let mut section = config
        .as_ref()
        .map(|c| c.learner.clone())
        .unwrap_or_else(LearnerSection::default);
    if let Some(g) = args.min_gain {
        section.min_gain = g;
    }
    if let Some(m) = args.max_rules {
        section.max_rules = m;
    }
    if let Some(w) = args.window {
        section.window = w;
    }
    let learner = section.learner_config(exec).map_err(|e| Usage(e.to_string()))?;
    let corpus = read_corpus(&args.corpus)?;
    let train = training(&corpus, &args.fraction, config.as_ref())?;
    let rules = learn_corpus_rules(&train, args.initial.as_deref(), &args.key.key, &learner)?;
    info!("learned {} rules", rules.len());
    match &args.out {
        Some(p) => write_rules(&rules, p)?,
        None => print!("{}", grbridge::tbl::format_rules(&rules)),
    }
    Ok(())
}

fn apply_rules(args: ApplyRulesArgs) -> anyhow::Result<()> {
    let rules = read_rules(&args.rules)?;
    let mut corpus = read_corpus(&args.corpus)?;
    add_rule_output(
        &mut corpus,
        &rules,
        args.initial.as_deref(),
        &args.set,
        &args.key.key,
        args.window,
    )?;
    emit(args.out.as_deref(), &corpus.to_string())
}

fn score_layer(args: ScoreArgs) -> anyhow::Result<()> {
    let corpus = read_corpus(&args.corpus)?;
    corpus.require_scheme(&args.key.key)?;
    corpus.require_scheme(&args.layer)?;
    let report = score(&corpus.layer(&args.layer), &corpus.layer(&args.key.key))?;
    let rows = [ConditionRow {
        name: args.layer.clone(),
        report,
    }];
    emit(args.out.as_deref(), &format_report(&rows, &[]))
}

fn compare(args: CompareArgs, exec: Execution) -> anyhow::Result<()> {
    let config = read_experiment(args.config.as_deref())?;
    let mut eval = config.as_ref().map(|c| c.eval.clone()).unwrap_or_default();
    if let Some(i) = args.iterations {
        eval.iterations = i;
    }
    if let Some(s) = args.seed {
        eval.seed = s;
    }
    if eval.iterations == 0 {
        bail!(Usage("--iterations must be positive".into()));
    }
    let key_set = args
        .key
        .or(config.as_ref().map(|c| c.key.clone()))
        .unwrap_or_else(|| KEY_SET.to_string());
    let baseline = args.baseline.or(config.and_then(|c| c.baseline));
    let mut key = None;
    let mut outputs = Vec::new();
    for (name, path) in &args.conditions {
        let corpus = read_corpus(path)?;
        corpus.require_scheme(&key_set)?;
        let k = corpus.layer(&key_set);
        match &key {
            None => key = Some(k),
            Some(first) if *first != k => {
                return Err(anyhow!(grbridge::Error::Misaligned(format!(
                    "`{name}` is annotated over a different key"
                ))))
            }
            Some(_) => {}
        }
        outputs.push(ConditionOutput::from_corpus(name, &corpus)?);
    }
    let key = key.expect("at least one condition");
    let report = build_report(&outputs, &key, baseline.as_deref(), &eval.randomization(exec))?;
    emit(args.out.as_deref(), &report.text)
}

fn run(args: RunArgs, exec: Execution) -> anyhow::Result<()> {
    let mut config = ExperimentConfig::read(&args.config)?;
    config.execution = exec;
    if let Some(s) = args.seed {
        config.eval.seed = s;
    }
    if let Some(i) = args.iterations {
        config.eval.iterations = i;
    }
    if let Some(g) = args.min_gain {
        config.learner.min_gain = g;
    }
    config.validate().map_err(|e| Usage(e.to_string()))?;
    let outcome = pipeline::run_pipeline(&config, &args.out)?;
    print!("{}", outcome.report.text);
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Simulate(a) => simulate(a),
        Command::LearnMapping(a) => learn_mapping(a, exec),
        Command::ApplyMapping(a) => apply_mapping(a),
        Command::Union(a) => union(a),
        Command::LearnRules(a) => learn_rules(a, exec),
        Command::ApplyRules(a) => apply_rules(a),
        Command::Score(a) => score_layer(a),
        Command::Compare(a) => compare(a, exec),
        Command::Run(a) => run(a, exec),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
