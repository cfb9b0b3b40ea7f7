//! Synthetic corpora with gold arcs, and simulated annotators whose
//! conventions diverge from the key's.

mod divergence;
mod grammar;

pub use divergence::{simulate_system, Channel, DivergenceSpec};
pub use grammar::{
    generate_corpus, generate_with_arcs, Frame, GrammarSpec, Lexicon, PpClass, PpClasses, SentenceTemplate, MOD_LOC,
    MOD_OTHER, MOD_POSS, MOD_TIME, OBJ, PRED, SUBJ, TARGET_LABELS, VCOMP,
};

use crate::corpus::Corpus;
use crate::error::Result;

pub const SYSTEM_B: &str = "sysB";
pub const SYSTEM_C: &str = "sysC";

pub const BENCHMARK_SEED: u64 = 2024;
pub const BENCHMARK_TRAIN_ARCS: usize = 2000;
pub const BENCHMARK_TEST_ARCS: usize = 750;

/// Simulate an annotator over `corpus` and store its output as layer
/// `set_id`.
pub fn add_system(corpus: &mut Corpus, set_id: &str, spec: &DivergenceSpec) -> Result<()> {
    let (layer, labels) = simulate_system(corpus, spec)?;
    corpus.put_layer(set_id, labels, layer)
}

/// Training and test corpora from the default grammar, each carrying the
/// key plus the two default simulated annotators.
pub fn benchmark_corpora(seed: u64, train_arcs: usize, test_arcs: usize) -> Result<(Corpus, Corpus)> {
    let mut spec = GrammarSpec {
        seed,
        ..GrammarSpec::default()
    };
    let mut train = generate_with_arcs(&spec, train_arcs)?;
    spec.seed = seed.wrapping_add(1);
    let mut test = generate_with_arcs(&spec, test_arcs)?;
    for corpus in [&mut train, &mut test] {
        add_system(corpus, SYSTEM_B, &DivergenceSpec::system_b())?;
        add_system(corpus, SYSTEM_C, &DivergenceSpec::system_c())?;
    }
    Ok((train, test))
}
