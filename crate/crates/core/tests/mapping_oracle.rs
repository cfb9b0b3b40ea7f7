mod common;

use std::collections::BTreeSet;

use common::*;
use grbridge::corpus::{ArcSet, GrArc, KEY_SET};
use grbridge::eval::score;
use grbridge::mapping::{apply_mapping, learn_mapping, LabelMapping};
use grbridge::synth::{generate_with_arcs, simulate_system, Channel, DivergenceSpec, GrammarSpec};
use grbridge::Execution;
use proptest::prelude::*;
use rand::Rng;

fn check_against_oracle(mapping: &LabelMapping, system: &[ArcSet], key: &[ArcSet]) -> Result<(), String> {
    let oracle = mapping_oracle(system, key);
    let ours: BTreeSet<&String> = mapping.entries.keys().collect();
    let theirs: BTreeSet<&String> = oracle.keys().collect();
    if ours != theirs {
        return Err(format!("entry labels differ: {ours:?} vs {theirs:?}"));
    }
    for (label, o) in &oracle {
        let e = &mapping.entries[label];
        if e.target != o.target || e.correct != o.correct || e.false_alarms != o.false_alarms {
            return Err(format!("{label}: {e:?} vs oracle {o:?}"));
        }
    }
    Ok(())
}

#[test]
fn random_training_sets_match_oracle() {
    for seed in 0..150 {
        let (system, key) = random_training_set(seed);
        let mapping = learn_mapping(&system, &key, Execution::default()).unwrap();
        check_against_oracle(&mapping, &system, &key).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}

/// Ten sentences where `e1` occurs five times, twice on `t1` arcs and
/// three times on pairs the key does not annotate; `e2` ties between two
/// labels; `e3` wins cleanly.
fn hand_built() -> (Vec<ArcSet>, Vec<ArcSet>) {
    let mut system = vec![ArcSet::new(); 10];
    let mut key = vec![ArcSet::new(); 10];
    for i in 0..2 {
        key[i].insert(GrArc::new(0, 1, "t1"));
        system[i].insert(GrArc::new(0, 1, "e1"));
    }
    for s in system.iter_mut().take(5).skip(2) {
        s.insert(GrArc::new(1, 2, "e1"));
    }
    for i in 5..9 {
        key[i].insert(GrArc::new(2, 3, if i % 2 == 0 { "t1" } else { "t2" }));
        system[i].insert(GrArc::new(2, 3, "e2"));
    }
    for i in 0..10 {
        key[i].insert(GrArc::new(4, 0, "t3"));
        if i != 9 {
            system[i].insert(GrArc::new(4, 0, "e3"));
        }
    }
    (system, key)
}

#[test]
fn hand_built_corpus_decisions_and_counts() {
    let (system, key) = hand_built();
    let mapping = learn_mapping(&system, &key, Execution::Sequential).unwrap();
    check_against_oracle(&mapping, &system, &key).unwrap();
    assert_eq!(mapping.translate("e1"), None);
    assert_eq!(mapping.entries["e1"].correct, 2);
    assert_eq!(mapping.entries["e1"].false_alarms, 3);
    assert_eq!(mapping.translate("e2"), None);
    assert_eq!(mapping.entries["e2"].win_count, mapping.entries["e2"].runner_up_count);
    assert_eq!(mapping.translate("e3"), Some("t3"));

    let oracle = mapping_oracle(&system, &key);
    let (translated, report) = apply_mapping(&mapping, &system);
    assert_eq!(report.collapsed, 0);
    let r = score(&translated, &key).unwrap();
    let kept: Vec<_> = oracle.values().filter(|o| o.target.is_some()).collect();
    assert_eq!(r.overall.correct, kept.iter().map(|o| o.correct).sum::<u64>());
    assert_eq!(
        r.overall.claimed - r.overall.correct,
        kept.iter().map(|o| o.false_alarms).sum::<u64>()
    );
}

#[test]
fn tie_maps_to_null_in_oracle_too() {
    let key = vec![
        [GrArc::new(0, 1, "t1")].into_iter().collect::<ArcSet>(),
        [GrArc::new(0, 1, "t2")].into_iter().collect(),
    ];
    let system = vec![
        [GrArc::new(0, 1, "e1")].into_iter().collect::<ArcSet>(),
        [GrArc::new(0, 1, "e1")].into_iter().collect(),
    ];
    let m = learn_mapping(&system, &key, Execution::Sequential).unwrap();
    assert_eq!(m.translate("e1"), None);
    assert_eq!(mapping_oracle(&system, &key)["e1"].target, None);
}

#[test]
fn identity_channel_recovers_inverse_renaming() {
    let corpus = generate_with_arcs(&GrammarSpec::default(), 600).unwrap();
    let renames: Vec<Channel> = corpus
        .scheme(KEY_SET)
        .unwrap()
        .iter()
        .map(|l| Channel::Rename {
            from: l.clone(),
            to: format!("X-{l}"),
        })
        .collect();
    let (system, _) = simulate_system(&corpus, &DivergenceSpec { channels: renames }).unwrap();
    let key = corpus.layer(KEY_SET);
    let mapping = learn_mapping(&system, &key, Execution::default()).unwrap();
    for (src, e) in &mapping.entries {
        assert_eq!(e.target.as_deref(), src.strip_prefix("X-"));
    }
    assert_eq!(apply_mapping(&mapping, &system).0, key);
}

fn layer_strategy() -> impl Strategy<Value = Vec<ArcSet>> {
    let arc = (0usize..6, 0usize..6, 0usize..4).prop_filter_map("loop", |(s, t, l)| {
        (s != t).then(|| GrArc::new(s, t, ["a", "b", "c", "d"][l]))
    });
    prop::collection::vec(prop::collection::btree_set(arc, 0..6), 1..8)
}

fn key_for(system: &[ArcSet], seed: u64) -> Vec<ArcSet> {
    let mut rng = rng(seed);
    system
        .iter()
        .map(|arcs| {
            let mut out = ArcSet::new();
            for a in arcs {
                if rng.gen_bool(0.7) {
                    out.insert(GrArc::new(a.source, a.target, KEY_LABELS[rng.gen_range(0..2)]));
                }
            }
            out
        })
        .collect()
}

proptest! {
    #[test]
    fn mapping_properties(system in layer_strategy(), seed in any::<u64>()) {
        let key = key_for(&system, seed);
        let mapping = learn_mapping(&system, &key, Execution::default()).unwrap();
        for e in mapping.entries.values() {
            if e.target.is_some() {
                prop_assert!(e.correct >= e.false_alarms);
            }
        }
        let (out, _) = apply_mapping(&mapping, &system);
        let targets = mapping.target_labels();
        for (o, s) in out.iter().zip(&system) {
            let pairs: BTreeSet<(usize, usize)> = s.iter().map(|a| (a.source, a.target)).collect();
            for a in o {
                prop_assert!(pairs.contains(&(a.source, a.target)));
                prop_assert!(targets.contains(a.label.as_str()));
            }
        }
        // Sentence order does not matter.
        let mut idx: Vec<usize> = (0..system.len()).collect();
        idx.reverse();
        let sys_r: Vec<ArcSet> = idx.iter().map(|&i| system[i].clone()).collect();
        let key_r: Vec<ArcSet> = idx.iter().map(|&i| key[i].clone()).collect();
        prop_assert_eq!(learn_mapping(&sys_r, &key_r, Execution::Sequential).unwrap(), mapping);
    }
}
