use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{ArcSet, AttachmentHint, Chunk, Corpus, GrArc, Sentence, Token, KEY_SET};
use crate::error::{Error, Result};

pub const SUBJ: &str = "subj";
pub const OBJ: &str = "obj";
pub const MOD_TIME: &str = "mod-time";
pub const MOD_LOC: &str = "mod-loc";
pub const MOD_OTHER: &str = "mod-other";
pub const MOD_POSS: &str = "mod-poss";
pub const PRED: &str = "pred";
pub const VCOMP: &str = "vcomp";

/// Key scheme of generated corpora.
pub const TARGET_LABELS: [&str; 8] = [SUBJ, OBJ, MOD_TIME, MOD_LOC, MOD_OTHER, MOD_POSS, PRED, VCOMP];

const CHUNK_TYPES: [&str; 3] = ["NP", "VP", "ADJP"];
const COMMA: (&str, &str) = (",", ",");
const PERIOD: (&str, &str) = (".", ".");
const POSSESSIVE: (&str, &str) = ("'s", "POS");
const INFINITIVE: (&str, &str) = ("to", "TO");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Transitive,
    Intransitive,
    Copula,
    /// Control verb with an infinitival complement taking an object.
    Control,
}

/// A sentence skeleton. Probabilities are per sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceTemplate {
    pub frame: Frame,
    pub weight: f64,
    /// Fronted bare time phrase followed by a comma.
    #[serde(default)]
    pub time_front: f64,
    /// Bare time phrase before the final period.
    #[serde(default)]
    pub time_end: f64,
    /// Relative clause on the subject.
    #[serde(default)]
    pub relative: f64,
    /// `Name 's noun` subject.
    #[serde(default)]
    pub possessive: f64,
    #[serde(default)]
    pub adjective: f64,
    /// First prepositional phrase; a second follows with `pp_second`.
    #[serde(default)]
    pub pp: f64,
    #[serde(default)]
    pub pp_second: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpClass {
    pub weight: f64,
    /// Share of the class's nouns whose phrases attach to the object noun
    /// when there is one. Each noun always attaches the same way.
    pub noun_attach: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpClasses {
    pub loc: PpClass,
    pub time: PpClass,
    pub other: PpClass,
}

/// Word lists per slot, each entry written `word/POS`. Earlier entries are
/// more frequent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lexicon {
    pub det: Vec<String>,
    pub adj: Vec<String>,
    pub noun: Vec<String>,
    pub name: Vec<String>,
    pub verb_trans: Vec<String>,
    pub verb_intrans: Vec<String>,
    pub copula: Vec<String>,
    pub verb_control: Vec<String>,
    pub verb_base: Vec<String>,
    pub time_adverb: Vec<String>,
    pub rel_pronoun: Vec<String>,
    pub loc_prep: Vec<String>,
    pub time_prep: Vec<String>,
    pub other_prep: Vec<String>,
    pub loc_noun: Vec<String>,
    pub time_noun: Vec<String>,
    pub other_noun: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrammarSpec {
    #[serde(default)]
    pub seed: u64,
    /// Exponent of the rank-frequency law inside every lexicon slot.
    pub zipf_exponent: f64,
    /// Chance that a preposition's attachment hint names its true site.
    pub hint_accuracy: f64,
    pub pp_classes: PpClasses,
    #[serde(rename = "template")]
    pub templates: Vec<SentenceTemplate>,
    pub lexicon: Lexicon,
}

impl GrammarSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("grammar spec serializes")
    }
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Default for GrammarSpec {
    fn default() -> Self {
        let t = |frame, weight| SentenceTemplate {
            frame,
            weight,
            time_front: 0.12,
            time_end: 0.12,
            relative: 0.12,
            possessive: 0.12,
            adjective: 0.25,
            pp: 0.55,
            pp_second: 0.2,
        };
        GrammarSpec {
            seed: 1,
            zipf_exponent: 1.0,
            hint_accuracy: 0.85,
            pp_classes: PpClasses {
                loc: PpClass {
                    weight: 0.45,
                    noun_attach: 0.4,
                },
                time: PpClass {
                    weight: 0.3,
                    noun_attach: 0.05,
                },
                other: PpClass {
                    weight: 0.25,
                    noun_attach: 0.45,
                },
            },
            templates: vec![
                t(Frame::Transitive, 5.0),
                t(Frame::Intransitive, 2.0),
                t(Frame::Copula, 1.5),
                t(Frame::Control, 1.0),
            ],
            lexicon: Lexicon {
                det: words(&[
                    "the/DT", "a/DT", "my/PRP$", "this/DT", "his/PRP$", "her/PRP$", "every/DT",
                ]),
                adj: words(&[
                    "big/JJ",
                    "old/JJ",
                    "red/JJ",
                    "small/JJ",
                    "happy/JJ",
                    "new/JJ",
                    "quiet/JJ",
                    "young/JJ",
                    "strange/JJ",
                    "tired/JJ",
                    "bright/JJ",
                    "heavy/JJ",
                ]),
                noun: words(&[
                    "dog/NN",
                    "ball/NN",
                    "man/NN",
                    "woman/NN",
                    "cat/NN",
                    "boy/NN",
                    "girl/NN",
                    "book/NN",
                    "car/NN",
                    "teacher/NN",
                    "letter/NN",
                    "friend/NN",
                    "doctor/NN",
                    "box/NN",
                    "bird/NN",
                    "farmer/NN",
                    "song/NN",
                    "door/NN",
                    "child/NN",
                    "horse/NN",
                    "story/NN",
                    "student/NN",
                    "apple/NN",
                    "painter/NN",
                    "window/NN",
                    "neighbor/NN",
                    "key/NN",
                    "sailor/NN",
                    "lamp/NN",
                    "clerk/NN",
                    "coat/NN",
                    "pilot/NN",
                ]),
                name: words(&["John/NNP", "Mary/NNP", "Miller/NNP", "Anna/NNP", "Pat/NNP", "Lee/NNP"]),
                verb_trans: words(&[
                    "pushed/VBD",
                    "saw/VBD",
                    "took/VBD",
                    "found/VBD",
                    "liked/VBD",
                    "chased/VBD",
                    "read/VBD",
                    "opened/VBD",
                    "bought/VBD",
                    "carried/VBD",
                    "painted/VBD",
                    "helped/VBD",
                    "called/VBD",
                    "wrote/VBD",
                    "lost/VBD",
                    "watched/VBD",
                    "kicked/VBD",
                    "fixed/VBD",
                    "sold/VBD",
                    "met/VBD",
                    "dropped/VBD",
                    "visited/VBD",
                ]),
                verb_intrans: words(&[
                    "slept/VBD",
                    "laughed/VBD",
                    "waited/VBD",
                    "arrived/VBD",
                    "left/VBD",
                    "smiled/VBD",
                    "ran/VBD",
                    "sang/VBD",
                    "danced/VBD",
                    "cried/VBD",
                    "fell/VBD",
                    "stayed/VBD",
                ]),
                copula: words(&["is/VBZ", "was/VBD", "seems/VBZ", "became/VBD", "looked/VBD"]),
                verb_control: words(&[
                    "wanted/VBD",
                    "tried/VBD",
                    "hoped/VBD",
                    "refused/VBD",
                    "began/VBD",
                    "needed/VBD",
                    "promised/VBD",
                ]),
                verb_base: words(&[
                    "see/VB", "find/VB", "buy/VB", "fix/VB", "read/VB", "open/VB", "visit/VB", "help/VB", "carry/VB",
                    "sell/VB", "paint/VB", "call/VB",
                ]),
                time_adverb: words(&[
                    "today/NN",
                    "yesterday/NN",
                    "tonight/NN",
                    "tomorrow/NN",
                    "Monday/NNP",
                    "Friday/NNP",
                    "Sunday/NNP",
                    "Tuesday/NNP",
                    "Saturday/NNP",
                    "Thursday/NNP",
                    "Wednesday/NNP",
                    "tonite/NN",
                    "weekly/NN",
                    "overnight/NN",
                    "nightly/NN",
                    "daily/NN",
                    "lately/NN",
                    "meanwhile/NN",
                ]),
                rel_pronoun: words(&["who/WP"]),
                loc_prep: words(&[
                    "on/IN",
                    "in/IN",
                    "near/IN",
                    "at/IN",
                    "under/IN",
                    "behind/IN",
                    "beside/IN",
                    "above/IN",
                    "inside/IN",
                    "across/IN",
                    "outside/IN",
                    "along/IN",
                    "below/IN",
                    "around/IN",
                ]),
                time_prep: words(&[
                    "during/IN",
                    "after/IN",
                    "in/IN",
                    "before/IN",
                    "on/IN",
                    "since/IN",
                    "until/IN",
                    "at/IN",
                    "throughout/IN",
                    "till/IN",
                ]),
                other_prep: words(&[
                    "with/IN",
                    "for/IN",
                    "about/IN",
                    "like/IN",
                    "without/IN",
                    "despite/IN",
                    "against/IN",
                    "toward/IN",
                ]),
                loc_noun: words(&[
                    "floor/NN",
                    "park/NN",
                    "kitchen/NN",
                    "table/NN",
                    "garden/NN",
                    "station/NN",
                    "street/NN",
                    "school/NN",
                    "river/NN",
                    "office/NN",
                    "roof/NN",
                    "bridge/NN",
                    "market/NN",
                    "hill/NN",
                    "corner/NN",
                    "library/NN",
                    "church/NN",
                    "harbor/NN",
                    "forest/NN",
                    "hallway/NN",
                    "barn/NN",
                    "beach/NN",
                    "village/NN",
                    "yard/NN",
                    "shelf/NN",
                    "bench/NN",
                    "tower/NN",
                    "cellar/NN",
                    "field/NN",
                    "lake/NN",
                    "attic/NN",
                    "porch/NN",
                ]),
                time_noun: words(&[
                    "morning/NN",
                    "night/NN",
                    "weekend/NN",
                    "evening/NN",
                    "afternoon/NN",
                    "summer/NN",
                    "winter/NN",
                    "holiday/NN",
                    "noon/NN",
                    "lunch/NN",
                    "dinner/NN",
                    "spring/NN",
                    "autumn/NN",
                    "midnight/NN",
                    "dawn/NN",
                    "dusk/NN",
                    "breakfast/NN",
                    "vacation/NN",
                    "semester/NN",
                    "festival/NN",
                    "storm/NN",
                    "war/NN",
                    "meeting/NN",
                    "concert/NN",
                    "season/NN",
                    "sunrise/NN",
                ]),
                other_noun: words(&[
                    "stick/NN",
                    "care/NN",
                    "money/NN",
                    "hammer/NN",
                    "joy/NN",
                    "pen/NN",
                    "help/NN",
                    "rope/NN",
                    "luck/NN",
                    "reason/NN",
                    "smile/NN",
                    "glove/NN",
                    "brush/NN",
                    "knife/NN",
                    "patience/NN",
                    "courage/NN",
                    "spoon/NN",
                    "ladder/NN",
                    "permission/NN",
                    "skill/NN",
                    "anger/NN",
                    "wire/NN",
                    "sponge/NN",
                    "effort/NN",
                    "shovel/NN",
                    "interest/NN",
                ]),
            },
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    word: String,
    pos: String,
}

/// Stable per-word draw, so attachment is a lexical property.
fn attaches_to_noun(word: &str, share: f64) -> bool {
    let digest = Sha256::digest(word.as_bytes());
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    (u64::from_le_bytes(bytes) as f64 / u64::MAX as f64) < share
}

struct Slot {
    entries: Vec<Entry>,
    dist: WeightedIndex<f64>,
}

impl Slot {
    fn new(name: &'static str, list: &[String], zipf: f64) -> Result<Slot> {
        if list.is_empty() {
            return Err(Error::Config(format!("lexicon slot `{name}` is empty")));
        }
        let entries = list
            .iter()
            .map(|s| match s.rsplit_once('/') {
                Some((w, p)) if !w.is_empty() && !p.is_empty() && !s.contains(char::is_whitespace) => Ok(Entry {
                    word: w.to_string(),
                    pos: p.to_string(),
                }),
                _ => Err(Error::Config(format!(
                    "lexicon slot `{name}`: entry `{s}` is not `word/POS`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let weights: Vec<f64> = (1..=entries.len()).map(|r| (r as f64).powf(-zipf)).collect();
        let dist = WeightedIndex::new(weights).map_err(|e| Error::Config(format!("slot `{name}`: {e}")))?;
        Ok(Slot { entries, dist })
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> &Entry {
        &self.entries[self.dist.sample(rng)]
    }
}

struct Slots {
    det: Slot,
    adj: Slot,
    noun: Slot,
    name: Slot,
    verb_trans: Slot,
    verb_intrans: Slot,
    copula: Slot,
    verb_control: Slot,
    verb_base: Slot,
    time_adverb: Slot,
    rel_pronoun: Slot,
    preps: [Slot; 3],
    pp_nouns: [Slot; 3],
}

impl Slots {
    fn new(lex: &Lexicon, zipf: f64) -> Result<Slots> {
        let s = |name, list: &Vec<String>| Slot::new(name, list, zipf);
        Ok(Slots {
            det: s("det", &lex.det)?,
            adj: s("adj", &lex.adj)?,
            noun: s("noun", &lex.noun)?,
            name: s("name", &lex.name)?,
            verb_trans: s("verb_trans", &lex.verb_trans)?,
            verb_intrans: s("verb_intrans", &lex.verb_intrans)?,
            copula: s("copula", &lex.copula)?,
            verb_control: s("verb_control", &lex.verb_control)?,
            verb_base: s("verb_base", &lex.verb_base)?,
            time_adverb: s("time_adverb", &lex.time_adverb)?,
            rel_pronoun: s("rel_pronoun", &lex.rel_pronoun)?,
            preps: [
                s("loc_prep", &lex.loc_prep)?,
                s("time_prep", &lex.time_prep)?,
                s("other_prep", &lex.other_prep)?,
            ],
            pp_nouns: [
                s("loc_noun", &lex.loc_noun)?,
                s("time_noun", &lex.time_noun)?,
                s("other_noun", &lex.other_noun)?,
            ],
        })
    }

    fn all(&self) -> Vec<&Slot> {
        let mut v = vec![
            &self.det,
            &self.adj,
            &self.noun,
            &self.name,
            &self.verb_trans,
            &self.verb_intrans,
            &self.copula,
            &self.verb_control,
            &self.verb_base,
            &self.time_adverb,
            &self.rel_pronoun,
        ];
        v.extend(self.preps.iter());
        v.extend(self.pp_nouns.iter());
        v
    }
}

#[derive(Default)]
struct Builder {
    tokens: Vec<Token>,
    chunks: Vec<Chunk>,
    hints: Vec<AttachmentHint>,
    arcs: ArcSet,
}

impl Builder {
    fn token(&mut self, word: &str, pos: &str) -> usize {
        let index = self.tokens.len();
        self.tokens.push(Token {
            index,
            word: word.to_string(),
            pos: pos.to_string(),
        });
        index
    }

    fn outside(&mut self, e: &Entry) -> usize {
        self.token(&e.word, &e.pos)
    }

    /// A chunk headed by its last token.
    fn chunk(&mut self, kind: &str, entries: &[&Entry]) -> usize {
        let start = self.tokens.len();
        for e in entries {
            self.token(&e.word, &e.pos);
        }
        let end = self.tokens.len() - 1;
        self.chunks.push(Chunk {
            start,
            end,
            kind: kind.to_string(),
            head: end,
        });
        end
    }

    fn arc(&mut self, source: usize, target: usize, label: &str) {
        self.arcs.insert(GrArc::new(source, target, label));
    }
}

fn fixed(pair: (&str, &str)) -> Entry {
    Entry {
        word: pair.0.to_string(),
        pos: pair.1.to_string(),
    }
}

struct Generator<'a> {
    spec: &'a GrammarSpec,
    slots: Slots,
    templates: WeightedIndex<f64>,
    classes: WeightedIndex<f64>,
}

impl<'a> Generator<'a> {
    fn new(spec: &'a GrammarSpec) -> Result<Self> {
        if spec.templates.is_empty() {
            return Err(Error::Config("grammar has no templates".into()));
        }
        let probability = |what: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} = {p} is not a probability")))
            }
        };
        probability("hint_accuracy", spec.hint_accuracy)?;
        for t in &spec.templates {
            if !(t.weight > 0.0 && t.weight.is_finite()) {
                return Err(Error::Config(format!("template weight {} is not positive", t.weight)));
            }
            for (what, p) in [
                ("time_front", t.time_front),
                ("time_end", t.time_end),
                ("relative", t.relative),
                ("possessive", t.possessive),
                ("adjective", t.adjective),
                ("pp", t.pp),
                ("pp_second", t.pp_second),
            ] {
                probability(what, p)?;
            }
        }
        let c = &spec.pp_classes;
        for class in [c.loc, c.time, c.other] {
            probability("noun_attach", class.noun_attach)?;
        }
        let templates = WeightedIndex::new(spec.templates.iter().map(|t| t.weight))
            .map_err(|e| Error::Config(format!("template weights: {e}")))?;
        let classes = WeightedIndex::new([c.loc.weight, c.time.weight, c.other.weight])
            .map_err(|e| Error::Config(format!("pp class weights: {e}")))?;
        Ok(Generator {
            spec,
            slots: Slots::new(&spec.lexicon, spec.zipf_exponent)?,
            templates,
            classes,
        })
    }

    fn noun_phrase(&self, b: &mut Builder, rng: &mut ChaCha8Rng, possessive: f64, adjective: f64) -> usize {
        let s = &self.slots;
        if rng.gen_bool(possessive) {
            let owner = b.chunk("NP", &[s.name.pick(rng)]);
            b.outside(&fixed(POSSESSIVE));
            let mut parts = Vec::new();
            if rng.gen_bool(adjective) {
                parts.push(s.adj.pick(rng));
            }
            parts.push(s.noun.pick(rng));
            let head = b.chunk("NP", &parts);
            b.arc(owner, head, MOD_POSS);
            return head;
        }
        let mut parts = vec![s.det.pick(rng)];
        if rng.gen_bool(adjective) {
            parts.push(s.adj.pick(rng));
        }
        parts.push(s.noun.pick(rng));
        b.chunk("NP", &parts)
    }

    fn sentence(&self, rng: &mut ChaCha8Rng) -> Sentence {
        let s = &self.slots;
        let t = &self.spec.templates[self.templates.sample(rng)];
        let mut b = Builder::default();

        let front_time = rng.gen_bool(t.time_front).then(|| {
            let head = b.chunk("NP", &[s.time_adverb.pick(rng)]);
            b.outside(&fixed(COMMA));
            head
        });
        let subject = self.noun_phrase(&mut b, rng, t.possessive, t.adjective);
        if rng.gen_bool(t.relative) {
            b.outside(s.rel_pronoun.pick(rng));
            let verb = b.chunk("VP", &[s.verb_trans.pick(rng)]);
            let object = self.noun_phrase(&mut b, rng, 0.0, t.adjective);
            b.arc(subject, verb, SUBJ);
            b.arc(object, verb, OBJ);
        }
        // (verb taking the subject, verb taking modifiers, object)
        let (verb, site_verb, object) = match t.frame {
            Frame::Transitive => {
                let v = b.chunk("VP", &[s.verb_trans.pick(rng)]);
                let o = self.noun_phrase(&mut b, rng, 0.0, t.adjective);
                b.arc(o, v, OBJ);
                (v, v, Some(o))
            }
            Frame::Intransitive => {
                let v = b.chunk("VP", &[s.verb_intrans.pick(rng)]);
                (v, v, None)
            }
            Frame::Copula => {
                let v = b.chunk("VP", &[s.copula.pick(rng)]);
                let p = if rng.gen_bool(0.7) {
                    b.chunk("ADJP", &[s.adj.pick(rng)])
                } else {
                    self.noun_phrase(&mut b, rng, 0.0, t.adjective)
                };
                b.arc(p, v, PRED);
                (v, v, None)
            }
            Frame::Control => {
                let v = b.chunk("VP", &[s.verb_control.pick(rng)]);
                b.outside(&fixed(INFINITIVE));
                let inner = b.chunk("VP", &[s.verb_base.pick(rng)]);
                let o = self.noun_phrase(&mut b, rng, 0.0, t.adjective);
                b.arc(inner, v, VCOMP);
                b.arc(o, inner, OBJ);
                (v, inner, Some(o))
            }
        };
        b.arc(subject, verb, SUBJ);
        if let Some(ft) = front_time {
            b.arc(ft, verb, MOD_TIME);
        }

        let mut n_pp = usize::from(rng.gen_bool(t.pp));
        if n_pp == 1 && rng.gen_bool(t.pp_second) {
            n_pp = 2;
        }
        let c = &self.spec.pp_classes;
        for _ in 0..n_pp {
            let class = self.classes.sample(rng);
            let (label, noun_attach) = match class {
                0 => (MOD_LOC, c.loc.noun_attach),
                1 => (MOD_TIME, c.time.noun_attach),
                _ => (MOD_OTHER, c.other.noun_attach),
            };
            let prep = b.outside(s.preps[class].pick(rng));
            let noun = s.pp_nouns[class].pick(rng);
            b.chunk("NP", &[s.det.pick(rng), noun]);
            let site = match object {
                Some(o) if attaches_to_noun(&noun.word, noun_attach) => o,
                _ => site_verb,
            };
            b.arc(prep, site, label);
            let alternative = match object {
                Some(o) if site == o => site_verb,
                Some(o) => o,
                None => site,
            };
            let hinted = if rng.gen_bool(self.spec.hint_accuracy) {
                site
            } else {
                alternative
            };
            b.hints.push(AttachmentHint {
                source: prep,
                target: hinted,
            });
        }
        if rng.gen_bool(t.time_end) {
            let head = b.chunk("NP", &[s.time_adverb.pick(rng)]);
            b.arc(head, verb, MOD_TIME);
        }
        b.outside(&fixed(PERIOD));

        let mut sentence = Sentence {
            tokens: b.tokens,
            chunks: b.chunks,
            hints: b.hints,
            ..Default::default()
        };
        sentence.annotations.entry(KEY_SET.to_string()).or_default().arcs = b.arcs;
        sentence
    }

    fn header_corpus(&self) -> Result<Corpus> {
        let mut corpus = Corpus::default();
        let mut pos: Vec<&str> = vec![COMMA.1, PERIOD.1, POSSESSIVE.1, INFINITIVE.1];
        for slot in self.slots.all() {
            pos.extend(slot.entries.iter().map(|e| e.pos.as_str()));
        }
        corpus.header.pos_tags = pos.into_iter().map(str::to_string).collect();
        corpus.header.chunk_types = CHUNK_TYPES.iter().map(|s| s.to_string()).collect();
        corpus.header.declare_scheme(KEY_SET, TARGET_LABELS)?;
        Ok(corpus)
    }
}

/// `n` sentences with key arcs in the [`TARGET_LABELS`] scheme.
/// Deterministic for a given spec (including its seed).
pub fn generate_corpus(spec: &GrammarSpec, n: usize) -> Result<Corpus> {
    let generator = Generator::new(spec)?;
    let mut corpus = generator.header_corpus()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    corpus.sentences = (0..n).map(|_| generator.sentence(&mut rng)).collect();
    Ok(corpus)
}

/// The shortest prefix of the generated sentence stream holding at least
/// `min_arcs` key arcs.
pub fn generate_with_arcs(spec: &GrammarSpec, min_arcs: usize) -> Result<Corpus> {
    let generator = Generator::new(spec)?;
    let mut corpus = generator.header_corpus()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut arcs = 0;
    while arcs < min_arcs {
        let s = generator.sentence(&mut rng);
        arcs += s.arcs(KEY_SET).len();
        corpus.sentences.push(s);
    }
    Ok(corpus)
}
