//! Site features: what a rule condition can test about a candidate arc
//! `(source, target)`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::corpus::Sentence;
use crate::error::Error;

pub(crate) type Sym = u32;

/// Interned strings shared by a compiled corpus and the rules run on it.
#[derive(Debug, Default, Clone)]
pub(crate) struct Symbols {
    ids: HashMap<String, Sym>,
    names: Vec<String>,
}

impl Symbols {
    pub fn new() -> Self {
        let mut s = Symbols::default();
        // Fixed ids for the reserved values.
        for name in [NO_ARC, BOUNDARY, OUTSIDE_CHUNK, HINT_YES, HINT_NO] {
            s.intern(name);
        }
        s
    }

    pub fn intern(&mut self, name: &str) -> Sym {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as Sym;
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<Sym> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: Sym) -> &str {
        &self.names[id as usize]
    }
}

/// Value of the `arc` feature at a site with no arcs.
pub const NO_ARC: &str = "∅";
/// Value of an offset feature that falls outside the sentence.
pub const BOUNDARY: &str = "#";
/// Chunk value of a token outside every chunk.
pub const OUTSIDE_CHUNK: &str = "O";
pub const HINT_YES: &str = "yes";
pub const HINT_NO: &str = "no";

pub(crate) const SYM_NO_ARC: Sym = 0;
pub(crate) const SYM_BOUNDARY: Sym = 1;
pub(crate) const SYM_OUTSIDE_CHUNK: Sym = 2;
pub(crate) const SYM_HINT_YES: Sym = 3;
pub(crate) const SYM_HINT_NO: Sym = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    Source,
    Target,
}

impl End {
    fn prefix(self) -> &'static str {
        match self {
            End::Source => "src",
            End::Target => "tgt",
        }
    }
}

/// One testable property of a candidate site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    Word(End),
    Pos(End),
    Chunk(End),
    /// Word of the token at a relative offset (-2..=2, non-zero) from an
    /// endpoint.
    WordAt(End, i8),
    /// POS of the token at a relative offset (-2..=2, non-zero) from an
    /// endpoint.
    PosAt(End, i8),
    ChunkAt(End, i8),
    /// Signed, bucketed `target - source` distance.
    Dist,
    /// Whether an attachment hint joins the site.
    Hint,
    /// A label currently on the site, or [`NO_ARC`]. The only feature that
    /// depends on the annotation state.
    Arc,
}

impl Feature {
    pub fn is_state(self) -> bool {
        self == Feature::Arc
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Feature::Word(e) => write!(f, "{}.word", e.prefix()),
            Feature::Pos(e) => write!(f, "{}.pos", e.prefix()),
            Feature::Chunk(e) => write!(f, "{}.chunk", e.prefix()),
            Feature::WordAt(e, o) => write!(f, "{}[{o:+}].word", e.prefix()),
            Feature::PosAt(e, o) => write!(f, "{}[{o:+}].pos", e.prefix()),
            Feature::ChunkAt(e, o) => write!(f, "{}[{o:+}].chunk", e.prefix()),
            Feature::Dist => f.write_str("dist"),
            Feature::Hint => f.write_str("hint"),
            Feature::Arc => f.write_str("arc"),
        }
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::InvalidArgument(format!("unknown feature `{s}`"));
        match s {
            "dist" => return Ok(Feature::Dist),
            "hint" => return Ok(Feature::Hint),
            "arc" => return Ok(Feature::Arc),
            _ => {}
        }
        let (end, rest) = if let Some(r) = s.strip_prefix("src") {
            (End::Source, r)
        } else if let Some(r) = s.strip_prefix("tgt") {
            (End::Target, r)
        } else {
            return Err(bad());
        };
        match rest {
            ".word" => return Ok(Feature::Word(end)),
            ".pos" => return Ok(Feature::Pos(end)),
            ".chunk" => return Ok(Feature::Chunk(end)),
            _ => {}
        }
        let rest = rest.strip_prefix('[').ok_or_else(bad)?;
        let (offset, attr) = rest.split_once("].").ok_or_else(bad)?;
        if !offset.starts_with(['+', '-']) {
            return Err(bad());
        }
        let offset: i8 = offset.parse().map_err(|_| bad())?;
        if offset == 0 || !(-2..=2).contains(&offset) {
            return Err(bad());
        }
        match attr {
            "word" => Ok(Feature::WordAt(end, offset)),
            "pos" => Ok(Feature::PosAt(end, offset)),
            "chunk" => Ok(Feature::ChunkAt(end, offset)),
            _ => Err(bad()),
        }
    }
}

/// Bucket of the signed distance `target - source`.
pub fn distance_bucket(source: usize, target: usize) -> &'static str {
    let d = target as i64 - source as i64;
    let sign = d >= 0;
    match (sign, d.unsigned_abs()) {
        (_, 0) => "0",
        (true, 1) => "+1",
        (true, 2) => "+2",
        (true, 3..=4) => "+3..4",
        (true, 5..=7) => "+5..7",
        (true, _) => "+8..",
        (false, 1) => "-1",
        (false, 2) => "-2",
        (false, 3..=4) => "-3..4",
        (false, 5..=7) => "-5..7",
        (false, _) => "-8..",
    }
}

const DIST_BUCKETS: [&str; 11] = [
    "0", "+1", "+2", "+3..4", "+5..7", "+8..", "-1", "-2", "-3..4", "-5..7", "-8..",
];

/// A sentence with every token attribute interned.
#[derive(Debug, Clone)]
pub(crate) struct CompiledSentence {
    pub words: Vec<Sym>,
    pub pos: Vec<Sym>,
    pub chunk: Vec<Sym>,
    pub hints: HashSet<(usize, usize)>,
}

impl CompiledSentence {
    pub fn new(sentence: &Sentence, symbols: &mut Symbols) -> Self {
        let n = sentence.len();
        let mut chunk = vec![SYM_OUTSIDE_CHUNK; n];
        for c in &sentence.chunks {
            let kind = symbols.intern(&c.kind);
            for slot in &mut chunk[c.start..=c.end] {
                *slot = kind;
            }
        }
        CompiledSentence {
            words: sentence.tokens.iter().map(|t| symbols.intern(&t.word)).collect(),
            pos: sentence.tokens.iter().map(|t| symbols.intern(&t.pos)).collect(),
            chunk,
            hints: sentence.hints.iter().map(|h| (h.source, h.target)).collect(),
        }
    }

    fn at(&self, base: usize, offset: i8, attr: &[Sym]) -> Sym {
        let i = base as i64 + offset as i64;
        if i < 0 || i as usize >= attr.len() {
            SYM_BOUNDARY
        } else {
            attr[i as usize]
        }
    }

    /// Value of a static (state-independent) feature at a site.
    pub fn value(&self, feature: Feature, source: usize, target: usize, dist_syms: &[Sym; 11]) -> Sym {
        let end = |e: End| match e {
            End::Source => source,
            End::Target => target,
        };
        match feature {
            Feature::Word(e) => self.words[end(e)],
            Feature::Pos(e) => self.pos[end(e)],
            Feature::Chunk(e) => self.chunk[end(e)],
            Feature::WordAt(e, o) => self.at(end(e), o, &self.words),
            Feature::PosAt(e, o) => self.at(end(e), o, &self.pos),
            Feature::ChunkAt(e, o) => self.at(end(e), o, &self.chunk),
            Feature::Dist => {
                let bucket = distance_bucket(source, target);
                let i = DIST_BUCKETS.iter().position(|b| *b == bucket).expect("known bucket");
                dist_syms[i]
            }
            Feature::Hint => {
                if self.hints.contains(&(source, target)) {
                    SYM_HINT_YES
                } else {
                    SYM_HINT_NO
                }
            }
            Feature::Arc => unreachable!("arc is a state feature"),
        }
    }
}

pub(crate) fn intern_dist_buckets(symbols: &mut Symbols) -> [Sym; 11] {
    DIST_BUCKETS.map(|b| symbols.intern(b))
}
