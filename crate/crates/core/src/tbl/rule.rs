//! Rule templates, rules, and the rule-list text format.
//!
//! One rule per line, fields tab separated:
//!
//! ```text
//! T02  src.pos=NN;tgt.pos=VBD;arc=∅  ADD(subj)  41
//! ```
//!
//! Values are percent-escaped where they contain a separator
//! (`%`, `;`, `=`, `,`, `(`, `)`, tab or newline).

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::features::{End, Feature};
use crate::error::{Error, Result};

/// A conjunction of one to three features; instantiating every feature
/// with a value yields a rule condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Template {
    pub id: TemplateId,
    pub features: &'static [Feature],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemplateId(pub u8);

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{:02}", self.0)
    }
}

impl FromStr for TemplateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: u8 = s
            .strip_prefix('T')
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::InvalidArgument(format!("bad template id `{s}`")))?;
        let id = TemplateId(n);
        template(id)?;
        Ok(id)
    }
}

use End::{Source as S, Target as T};
use Feature::*;

static TEMPLATES: [Template; 17] = [
    Template {
        id: TemplateId(1),
        features: &[Pos(S), Pos(T)],
    },
    Template {
        id: TemplateId(2),
        features: &[Pos(S), Pos(T), Arc],
    },
    Template {
        id: TemplateId(3),
        features: &[Pos(S), Pos(T), Dist],
    },
    Template {
        id: TemplateId(4),
        features: &[Word(S), Pos(T), Arc],
    },
    Template {
        id: TemplateId(5),
        features: &[Pos(S), Word(T), Arc],
    },
    Template {
        id: TemplateId(6),
        features: &[Chunk(S), Chunk(T), Dist],
    },
    Template {
        id: TemplateId(7),
        features: &[Pos(S), Pos(T), Hint],
    },
    Template {
        id: TemplateId(8),
        features: &[Pos(S), PosAt(S, 1), Pos(T)],
    },
    Template {
        id: TemplateId(9),
        features: &[Pos(S), Pos(T), PosAt(T, -1)],
    },
    Template {
        id: TemplateId(10),
        features: &[PosAt(S, -1), Pos(S), Dist],
    },
    Template {
        id: TemplateId(11),
        features: &[Word(S), Word(T)],
    },
    Template {
        id: TemplateId(12),
        features: &[Pos(S), PosAt(S, 2), Pos(T)],
    },
    Template {
        id: TemplateId(13),
        features: &[Pos(S), Arc, Hint],
    },
    Template {
        id: TemplateId(14),
        features: &[Pos(S), Pos(T), ChunkAt(T, 1)],
    },
    Template {
        id: TemplateId(15),
        features: &[Word(S), Pos(T), Hint],
    },
    Template {
        id: TemplateId(16),
        features: &[WordAt(S, 2), Pos(T), Hint],
    },
    Template {
        id: TemplateId(17),
        features: &[WordAt(S, 2), Pos(T), Arc],
    },
];

/// The full template inventory.
pub fn templates() -> &'static [Template] {
    &TEMPLATES
}

pub fn template(id: TemplateId) -> Result<&'static Template> {
    TEMPLATES
        .iter()
        .find(|t| t.id == id)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown template {id}")))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RuleCondition {
    pub template: TemplateId,
    /// One value per template feature, in template order.
    pub values: Vec<String>,
}

impl RuleCondition {
    pub fn new(template: TemplateId, values: Vec<String>) -> Result<Self> {
        let t = self::template(template)?;
        if t.features.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "template {template} takes {} values, got {}",
                t.features.len(),
                values.len()
            )));
        }
        Ok(RuleCondition { template, values })
    }

    pub fn bindings(&self) -> impl Iterator<Item = (Feature, &str)> {
        let t = template(self.template).expect("validated on construction");
        t.features.iter().copied().zip(self.values.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RuleAction {
    Add(String),
    /// Remove every arc on the site.
    Remove,
    Relabel {
        from: String,
        to: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TransformationRule {
    pub condition: RuleCondition,
    pub action: RuleAction,
    /// Net training errors fixed when the rule was accepted.
    pub gain: i64,
}

impl TransformationRule {
    /// The serialized rule without its gain; ties between equally good
    /// rules go to the smallest key.
    pub fn sort_key(&self) -> String {
        format!("{}\t{}", self.condition, self.action)
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '%' | ';' | '=' | ',' | '(' | ')' | '\t' | '\n' | '\r' => {
                let mut buf = [0u8; 4];
                for b in c.encode_utf8(&mut buf).bytes() {
                    out.push_str(&format!("%{b:02X}"));
                }
            }
            _ => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> Result<String> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s
                .get(i + 1..i + 3)
                .and_then(|h| u8::from_str_radix(h, 16).ok())
                .ok_or_else(|| Error::InvalidArgument(format!("bad escape in `{s}`")))?;
            out.push(hex);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).map_err(|_| Error::InvalidArgument(format!("bad escape in `{s}`")))
}

impl fmt::Display for RuleCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t", self.template)?;
        for (i, (feature, value)) in self.bindings().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{feature}={}", escape(value))?;
        }
        Ok(())
    }
}

impl fmt::Display for RuleAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleAction::Add(l) => write!(f, "ADD({})", escape(l)),
            RuleAction::Remove => f.write_str("REMOVE"),
            RuleAction::Relabel { from, to } => write!(f, "RELABEL({},{})", escape(from), escape(to)),
        }
    }
}

impl fmt::Display for TransformationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.condition, self.action, self.gain)
    }
}

impl FromStr for RuleAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad action `{s}`"));
        if s == "REMOVE" {
            return Ok(RuleAction::Remove);
        }
        if let Some(arg) = s.strip_prefix("ADD(").and_then(|r| r.strip_suffix(')')) {
            if arg.is_empty() {
                return Err(bad());
            }
            return Ok(RuleAction::Add(unescape(arg)?));
        }
        if let Some(args) = s.strip_prefix("RELABEL(").and_then(|r| r.strip_suffix(')')) {
            let (from, to) = args.split_once(',').ok_or_else(bad)?;
            if from.is_empty() || to.is_empty() || from == to {
                return Err(bad());
            }
            return Ok(RuleAction::Relabel {
                from: unescape(from)?,
                to: unescape(to)?,
            });
        }
        Err(bad())
    }
}

impl FromStr for TransformationRule {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [tid, bindings, action, gain] = fields.as_slice() else {
            return Err(Error::InvalidArgument(format!(
                "rule line has {} fields, expected 4",
                fields.len()
            )));
        };
        let template_id: TemplateId = tid.parse()?;
        let t = template(template_id)?;
        let mut values = Vec::new();
        for (i, binding) in bindings.split(';').enumerate() {
            let (name, value) = binding
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("bad binding `{binding}`")))?;
            let feature: Feature = name.parse()?;
            if t.features.get(i) != Some(&feature) {
                return Err(Error::InvalidArgument(format!(
                    "binding `{name}` does not match template {template_id}"
                )));
            }
            values.push(unescape(value)?);
        }
        let condition = RuleCondition::new(template_id, values)?;
        let gain: i64 = gain
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad gain `{gain}`")))?;
        Ok(TransformationRule {
            condition,
            action: action.parse()?,
            gain,
        })
    }
}

pub fn format_rules(rules: &[TransformationRule]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}

pub fn parse_rules(text: &str) -> Result<Vec<TransformationRule>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| line.parse().map_err(|e: Error| Error::format(i + 1, e.to_string())))
        .collect()
}

pub fn write_rules(rules: &[TransformationRule], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_rules(rules)).map_err(|e| Error::io(path, e))
}

pub fn read_rules(path: impl AsRef<Path>) -> Result<Vec<TransformationRule>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rules(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_ids_are_dense() {
        for (i, t) in templates().iter().enumerate() {
            assert_eq!(t.id.0 as usize, i + 1);
            assert!((1..=3).contains(&t.features.len()));
        }
    }

    #[test]
    fn rule_text_round_trip() {
        let rule = TransformationRule {
            condition: RuleCondition::new(TemplateId(4), vec!["a;b=c%".into(), "VBD".into(), "∅".into()]).unwrap(),
            action: RuleAction::Relabel {
                from: "mod".into(),
                to: "mod(time)".into(),
            },
            gain: 7,
        };
        let line = rule.to_string();
        assert_eq!(
            line,
            "T04\tsrc.word=a%3Bb%3Dc%25;tgt.pos=VBD;arc=∅\tRELABEL(mod,mod%28time%29)\t7"
        );
        assert_eq!(line.parse::<TransformationRule>().unwrap(), rule);
    }

    #[test]
    fn parse_errors() {
        assert!("T99\tdist=+1\tREMOVE\t3".parse::<TransformationRule>().is_err());
        assert!("T01\tsrc.pos=NN\tREMOVE\t3".parse::<TransformationRule>().is_err());
        assert!("T01\ttgt.pos=NN;src.pos=VB\tREMOVE\t3"
            .parse::<TransformationRule>()
            .is_err());
        assert!("T01\tsrc.pos=NN;tgt.pos=VB\tRELABEL(a,a)\t3"
            .parse::<TransformationRule>()
            .is_err());
        assert!("T01\tsrc.pos=NN;tgt.pos=VB\tADD()\t3"
            .parse::<TransformationRule>()
            .is_err());
        assert!("T01\tsrc.pos=NN;tgt.pos=VB\tADD(x)"
            .parse::<TransformationRule>()
            .is_err());
        match parse_rules("T01\tsrc.pos=NN;tgt.pos=VB\tREMOVE\t3\nbogus\n") {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
