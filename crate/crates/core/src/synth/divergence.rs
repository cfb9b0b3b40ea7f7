use std::path::Path;

use indexmap::IndexSet;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grammar::{MOD_LOC, MOD_OTHER, MOD_POSS, MOD_TIME, OBJ, PRED, SUBJ, VCOMP};
use crate::corpus::{ArcSet, Corpus, GrArc, Sentence, KEY_SET};
use crate::error::{Error, Result};

/// Token window for spurious arcs added by noise.
const NOISE_WINDOW: usize = 10;

/// One step of the key-to-system channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Channel {
    /// Collapse several labels into one.
    Merge {
        labels: Vec<String>,
        into: String,
    },
    Drop {
        label: String,
    },
    Rename {
        from: String,
        to: String,
    },
    /// Move the source of `label` arcs from an antecedent to the relative
    /// pronoun right after it, when the target starts right after the
    /// pronoun.
    ShiftEndpoint {
        label: String,
        pronoun_pos: String,
    },
    /// Make the predicate the head of a copular clause: `s -subj-> c` and
    /// `p -pred-> c` become `s -subj-> p` and `c -pred-> p`.
    CopulaVariant {
        subj: String,
        pred: String,
    },
    Noise {
        false_alarm: f64,
        miss: f64,
        seed: u64,
    },
}

/// Channels applied in order to the key.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceSpec {
    #[serde(default, rename = "channel")]
    pub channels: Vec<Channel>,
}

impl DivergenceSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("divergence spec serializes")
    }

    /// Tells modifier kinds apart but shares nothing else with the key's
    /// conventions: relative pronouns as subjects, predicate-headed
    /// copulas, no verb complements, renamed labels.
    pub fn system_b() -> Self {
        use Channel::*;
        DivergenceSpec {
            channels: vec![
                ShiftEndpoint {
                    label: SUBJ.into(),
                    pronoun_pos: "WP".into(),
                },
                CopulaVariant {
                    subj: SUBJ.into(),
                    pred: PRED.into(),
                },
                Drop { label: VCOMP.into() },
                Rename {
                    from: SUBJ.into(),
                    to: "ncsubj".into(),
                },
                Rename {
                    from: OBJ.into(),
                    to: "dobj".into(),
                },
                Rename {
                    from: MOD_TIME.into(),
                    to: "tmod".into(),
                },
                Merge {
                    labels: vec![MOD_LOC.into(), MOD_OTHER.into()],
                    into: "ncmod".into(),
                },
                Noise {
                    false_alarm: 0.04,
                    miss: 0.1,
                    seed: 11,
                },
            ],
        }
    }

    /// Does not tell time from place modifiers and ignores possessives.
    pub fn system_c() -> Self {
        use Channel::*;
        DivergenceSpec {
            channels: vec![
                Merge {
                    labels: vec![MOD_TIME.into(), MOD_LOC.into()],
                    into: "mod".into(),
                },
                Rename {
                    from: MOD_OTHER.into(),
                    to: "mod-x".into(),
                },
                Drop { label: MOD_POSS.into() },
                Rename {
                    from: SUBJ.into(),
                    to: "S".into(),
                },
                Rename {
                    from: OBJ.into(),
                    to: "O".into(),
                },
                Rename {
                    from: PRED.into(),
                    to: "PRD".into(),
                },
                Rename {
                    from: VCOMP.into(),
                    to: "XCOMP".into(),
                },
                Noise {
                    false_alarm: 0.04,
                    miss: 0.15,
                    seed: 23,
                },
            ],
        }
    }
}

fn require(labels: &IndexSet<String>, label: &str) -> Result<()> {
    if labels.contains(label) {
        Ok(())
    } else {
        Err(Error::UnknownLabel(label.to_string()))
    }
}

fn relabel(layer: &mut [ArcSet], f: impl Fn(&str) -> Option<String>) {
    for arcs in layer {
        *arcs = std::mem::take(arcs)
            .into_iter()
            .filter_map(|a| f(&a.label).map(|l| GrArc::new(a.source, a.target, l)))
            .collect();
    }
}

fn shift_endpoint(sentence: &Sentence, arcs: &ArcSet, label: &str, pronoun_pos: &str) -> ArcSet {
    arcs.iter()
        .map(|a| {
            if a.label != label {
                return a.clone();
            }
            let pronoun = sentence.chunk_of(a.source).map_or(a.source, |c| c.end) + 1;
            let target_start = sentence.chunk_of(a.target).map_or(a.target, |c| c.start);
            let is_pronoun = sentence
                .tokens
                .get(pronoun)
                .is_some_and(|t| t.pos == pronoun_pos && sentence.chunk_of(pronoun).is_none());
            if is_pronoun && target_start == pronoun + 1 {
                GrArc::new(pronoun, a.target, label)
            } else {
                a.clone()
            }
        })
        .collect()
}

fn copula_variant(arcs: &ArcSet, subj: &str, pred: &str) -> ArcSet {
    let mut out = arcs.clone();
    for p in arcs.iter().filter(|a| a.label == pred) {
        let copula = p.target;
        out.remove(p);
        out.insert(GrArc::new(copula, p.source, pred));
        for s in arcs.iter().filter(|a| a.label == subj && a.target == copula) {
            out.remove(s);
            if s.source != p.source {
                out.insert(GrArc::new(s.source, p.source, subj));
            }
        }
    }
    out
}

fn noise(
    sentence: &Sentence,
    arcs: &ArcSet,
    labels: &IndexSet<String>,
    rng: &mut ChaCha8Rng,
    false_alarm: f64,
    miss: f64,
) -> ArcSet {
    let elements = sentence.elements();
    let mut pairs = Vec::new();
    for &a in &elements {
        for &b in &elements {
            if a != b && a.abs_diff(b) <= NOISE_WINDOW {
                pairs.push((a, b));
            }
        }
    }
    let mut out = ArcSet::new();
    for arc in arcs {
        if !rng.gen_bool(miss) {
            out.insert(arc.clone());
        }
        if rng.gen_bool(false_alarm) && !pairs.is_empty() && !labels.is_empty() {
            let (s, t) = pairs[rng.gen_range(0..pairs.len())];
            let l = &labels[rng.gen_range(0..labels.len())];
            out.insert(GrArc::new(s, t, l.clone()));
        }
    }
    out
}

/// Run the key through the channels. Returns the system layer and its
/// label scheme, in declaration order.
pub fn simulate_system(corpus: &Corpus, spec: &DivergenceSpec) -> Result<(Vec<ArcSet>, Vec<String>)> {
    let mut labels: IndexSet<String> = corpus.require_scheme(KEY_SET)?.clone();
    let mut layer = corpus.layer(KEY_SET);
    for channel in &spec.channels {
        match channel {
            Channel::Merge { labels: from, into } => {
                for l in from {
                    require(&labels, l)?;
                }
                relabel(&mut layer, |l| {
                    Some(if from.iter().any(|f| f == l) {
                        into.clone()
                    } else {
                        l.to_string()
                    })
                });
                let first = labels.iter().position(|l| from.contains(l)).unwrap_or(labels.len());
                labels.retain(|l| !from.contains(l));
                if !labels.contains(into) {
                    labels.shift_insert(first.min(labels.len()), into.clone());
                }
            }
            Channel::Drop { label } => {
                require(&labels, label)?;
                relabel(&mut layer, |l| (l != label).then(|| l.to_string()));
                labels.shift_remove(label);
            }
            Channel::Rename { from, to } => {
                require(&labels, from)?;
                relabel(&mut layer, |l| Some(if l == from { to.clone() } else { l.to_string() }));
                labels = labels
                    .into_iter()
                    .map(|l| if &l == from { to.clone() } else { l })
                    .collect();
            }
            Channel::ShiftEndpoint { label, pronoun_pos } => {
                require(&labels, label)?;
                for (s, arcs) in corpus.sentences.iter().zip(layer.iter_mut()) {
                    *arcs = shift_endpoint(s, arcs, label, pronoun_pos);
                }
            }
            Channel::CopulaVariant { subj, pred } => {
                require(&labels, subj)?;
                require(&labels, pred)?;
                for arcs in layer.iter_mut() {
                    *arcs = copula_variant(arcs, subj, pred);
                }
            }
            Channel::Noise {
                false_alarm,
                miss,
                seed,
            } => {
                for (what, p) in [("false_alarm", false_alarm), ("miss", miss)] {
                    if !(0.0..=1.0).contains(p) {
                        return Err(Error::Config(format!("noise {what} rate {p} is not in [0, 1]")));
                    }
                }
                for (i, (s, arcs)) in corpus.sentences.iter().zip(layer.iter_mut()).enumerate() {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    rng.set_stream(i as u64);
                    *arcs = noise(s, arcs, &labels, &mut rng, *false_alarm, *miss);
                }
            }
        }
    }
    Ok((layer, labels.into_iter().collect()))
}
