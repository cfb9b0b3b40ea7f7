//! Line-oriented corpus file format.
//!
//! ```text
//! #! pos DT NN VBD
//! #! chunk-types NP VP
//! #! scheme key subj obj
//!
//! 0  the  DT  B-NP
//! 1  dog  NN  I-NP:H
//! 2  barked  VBD  B-VP:H
//! key  1  2  subj
//! ```
//!
//! Fields are tab separated and sentences are separated by blank lines.
//! Inside a block the order is fixed: token lines, then `PP` hint lines,
//! then arc and `NARY` lines.
//! The writer emits annotation sets in header order with binary arcs
//! sorted, which makes its output a fixed point of read-then-write.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use indexmap::IndexSet;

use super::*;

pub fn read_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text)
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, corpus.to_string()).map_err(|e| Error::io(path, e))
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Phase {
    Tokens,
    Hints,
    Arcs,
}

struct OpenChunk {
    start: usize,
    kind: String,
    head: Option<usize>,
}

struct BlockBuilder {
    sentence: Sentence,
    phase: Phase,
    open: Option<OpenChunk>,
    first_line: usize,
}

impl BlockBuilder {
    fn new(first_line: usize) -> Self {
        BlockBuilder {
            sentence: Sentence::default(),
            phase: Phase::Tokens,
            open: None,
            first_line,
        }
    }

    fn close_chunk(&mut self, line: usize) -> Result<()> {
        if let Some(open) = self.open.take() {
            let head = open.head.ok_or_else(|| {
                Error::format(
                    line,
                    format!("{} chunk starting at token {} has no head", open.kind, open.start),
                )
            })?;
            self.sentence.chunks.push(Chunk {
                start: open.start,
                end: self.sentence.tokens.len() - 1,
                kind: open.kind,
                head,
            });
        }
        Ok(())
    }

    fn token(&mut self, line: usize, fields: &[&str], header: &Header) -> Result<()> {
        let index: usize = fields[0]
            .parse()
            .map_err(|_| Error::format(line, format!("bad token index `{}`", fields[0])))?;
        let expected = self.sentence.tokens.len();
        if index != expected {
            return Err(Error::format(line, format!("token index {index}, expected {expected}")));
        }
        let (word, pos, bio) = (fields[1], fields[2], fields[3]);
        if word.is_empty() {
            return Err(Error::format(line, "empty word"));
        }
        if !header.pos_tags.contains(pos) {
            return Err(Error::format(line, format!("undeclared POS tag `{pos}`")));
        }
        let (tag, is_head) = match bio.strip_suffix(":H") {
            Some(t) => (t, true),
            None => (bio, false),
        };
        if tag == "O" {
            if is_head {
                return Err(Error::format(line, "head flag on a token outside any chunk"));
            }
            self.close_chunk(line)?;
        } else if let Some(kind) = tag.strip_prefix("B-") {
            if !header.chunk_types.contains(kind) {
                return Err(Error::format(line, format!("undeclared chunk type `{kind}`")));
            }
            self.close_chunk(line)?;
            self.open = Some(OpenChunk {
                start: index,
                kind: kind.to_string(),
                head: None,
            });
        } else if let Some(kind) = tag.strip_prefix("I-") {
            match &self.open {
                Some(open) if open.kind == kind => {}
                _ => return Err(Error::format(line, format!("`{bio}` does not continue a {kind} chunk"))),
            }
        } else {
            return Err(Error::format(line, format!("bad chunk tag `{bio}`")));
        }
        if is_head {
            let open = self.open.as_mut().expect("chunk opened above");
            if open.head.is_some() {
                return Err(Error::format(line, format!("second head in {} chunk", open.kind)));
            }
            open.head = Some(index);
        }
        self.sentence.tokens.push(Token {
            index,
            word: word.to_string(),
            pos: pos.to_string(),
        });
        Ok(())
    }

    fn index(&self, line: usize, field: &str) -> Result<usize> {
        let i: usize = field
            .parse()
            .map_err(|_| Error::format(line, format!("bad token reference `{field}`")))?;
        if i >= self.sentence.tokens.len() {
            return Err(Error::format(
                line,
                format!(
                    "token reference {i} outside sentence of {} tokens",
                    self.sentence.tokens.len()
                ),
            ));
        }
        Ok(i)
    }

    fn finish(mut self, line: usize) -> Result<Sentence> {
        self.close_chunk(line)?;
        self.sentence
            .validate_structure()
            .map_err(|e| Error::format(self.first_line, e.to_string()))?;
        Ok(self.sentence)
    }
}

pub fn parse_corpus(text: &str) -> Result<Corpus> {
    let mut header = Header::default();
    let mut sentences = Vec::new();
    let mut block: Option<BlockBuilder> = None;
    let mut in_header = true;
    let mut seen_pos = false;
    let mut seen_chunks = false;

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if in_header {
            if let Some(rest) = line.strip_prefix("#!") {
                parse_header_line(lineno, rest, &mut header, &mut seen_pos, &mut seen_chunks)?;
                continue;
            }
            in_header = false;
        }
        if line.is_empty() {
            if let Some(b) = block.take() {
                sentences.push(b.finish(lineno)?);
            }
            continue;
        }
        if line.starts_with("#!") {
            return Err(Error::format(lineno, "header line after the first sentence"));
        }
        let b = block.get_or_insert_with(|| BlockBuilder::new(lineno));
        let fields: Vec<&str> = line.split('\t').collect();
        let is_token_line = fields[0].parse::<usize>().is_ok();

        if is_token_line {
            if b.phase != Phase::Tokens {
                return Err(Error::format(lineno, "token line after hint or arc lines"));
            }
            if fields.len() != 4 {
                return Err(Error::format(
                    lineno,
                    format!("token line has {} fields, expected 4", fields.len()),
                ));
            }
            b.token(lineno, &fields, &header)?;
            continue;
        }
        if b.sentence.tokens.is_empty() {
            return Err(Error::format(lineno, "sentence block does not start with a token line"));
        }
        if b.phase == Phase::Tokens {
            b.close_chunk(lineno)?;
        }
        if fields[0] == HINT_TAG {
            if b.phase == Phase::Arcs {
                return Err(Error::format(lineno, "hint line after arc lines"));
            }
            b.phase = Phase::Hints;
            if fields.len() != 3 {
                return Err(Error::format(
                    lineno,
                    format!("hint line has {} fields, expected 3", fields.len()),
                ));
            }
            let source = b.index(lineno, fields[1])?;
            let target = b.index(lineno, fields[2])?;
            b.sentence.hints.push(AttachmentHint { source, target });
            continue;
        }

        b.phase = Phase::Arcs;
        if fields.len() != 4 {
            return Err(Error::format(
                lineno,
                format!("arc line has {} fields, expected 4", fields.len()),
            ));
        }
        let set_id = fields[0];
        let scheme: &IndexSet<String> = header
            .schemes
            .get(set_id)
            .ok_or_else(|| Error::format(lineno, format!("undeclared annotation set `{set_id}`")))?;
        if fields[1] == NARY_TAG {
            let label = fields[2];
            if !scheme.contains(label) {
                return Err(Error::format(
                    lineno,
                    format!("label `{label}` is not in the scheme of `{set_id}`"),
                ));
            }
            let elements = fields[3]
                .split(',')
                .map(|f| b.index(lineno, f))
                .collect::<Result<Vec<_>>>()?;
            if !(3..=4).contains(&elements.len()) {
                return Err(Error::format(
                    lineno,
                    format!("n-ary relation with {} elements, expected 3 or 4", elements.len()),
                ));
            }
            b.sentence
                .annotations
                .entry(set_id.to_string())
                .or_default()
                .nary
                .push(NaryRelation {
                    label: label.to_string(),
                    elements,
                });
        } else {
            let source = b.index(lineno, fields[1])?;
            let target = b.index(lineno, fields[2])?;
            let label = fields[3];
            if !scheme.contains(label) {
                return Err(Error::format(
                    lineno,
                    format!("label `{label}` is not in the scheme of `{set_id}`"),
                ));
            }
            if source == target {
                return Err(Error::format(lineno, format!("self-loop arc on token {source}")));
            }
            b.sentence
                .annotations
                .entry(set_id.to_string())
                .or_default()
                .insert(GrArc::new(source, target, label))
                .map_err(|e| Error::format(lineno, e.to_string()))?;
        }
    }
    if let Some(b) = block.take() {
        let last = text.lines().count();
        sentences.push(b.finish(last)?);
    }
    Ok(Corpus { header, sentences })
}

fn parse_header_line(
    lineno: usize,
    rest: &str,
    header: &mut Header,
    seen_pos: &mut bool,
    seen_chunks: &mut bool,
) -> Result<()> {
    let rest = rest
        .strip_prefix(' ')
        .ok_or_else(|| Error::format(lineno, "header line must start with `#! `"))?;
    let parts: Vec<&str> = rest.split(' ').collect();
    if parts.iter().any(|p| p.is_empty() || p.contains('\t')) {
        return Err(Error::format(
            lineno,
            "header fields must be separated by single spaces",
        ));
    }
    let fail = |e: Error| Error::format(lineno, e.to_string());
    let collect = |items: &[&str]| -> Result<IndexSet<String>> {
        let mut set = IndexSet::new();
        for s in items {
            if !set.insert(s.to_string()) {
                return Err(Error::format(lineno, format!("`{s}` declared twice")));
            }
        }
        Ok(set)
    };
    match parts[0] {
        "pos" => {
            if std::mem::replace(seen_pos, true) {
                return Err(Error::format(lineno, "second `pos` declaration"));
            }
            header.pos_tags = collect(&parts[1..])?;
        }
        "chunk-types" => {
            if std::mem::replace(seen_chunks, true) {
                return Err(Error::format(lineno, "second `chunk-types` declaration"));
            }
            header.chunk_types = collect(&parts[1..])?;
        }
        "scheme" => {
            let set_id = parts
                .get(1)
                .ok_or_else(|| Error::format(lineno, "`scheme` needs a set id"))?;
            if header.schemes.contains_key(*set_id) {
                return Err(Error::format(lineno, format!("scheme `{set_id}` declared twice")));
            }
            let labels = collect(&parts[2..])?;
            header.declare_scheme(set_id, labels).map_err(fail)?;
        }
        other => return Err(Error::format(lineno, format!("unknown header keyword `{other}`"))),
    }
    Ok(())
}

fn write_list(out: &mut String, prefix: &str, items: &IndexSet<String>) {
    out.push_str(prefix);
    for item in items {
        out.push(' ');
        out.push_str(item);
    }
    out.push('\n');
}

impl fmt::Display for Corpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_list(&mut out, "#! pos", &self.header.pos_tags);
        write_list(&mut out, "#! chunk-types", &self.header.chunk_types);
        for (set_id, labels) in &self.header.schemes {
            write_list(&mut out, &format!("#! scheme {set_id}"), labels);
        }
        for s in &self.sentences {
            out.push('\n');
            write_sentence(&mut out, s, &self.header);
        }
        f.write_str(&out)
    }
}

fn write_sentence(out: &mut String, s: &Sentence, header: &Header) {
    for (i, tok) in s.tokens.iter().enumerate() {
        let bio = match s.chunk_of(i) {
            None => "O".to_string(),
            Some(c) => {
                let prefix = if c.start == i { "B" } else { "I" };
                let head = if c.head == i { ":H" } else { "" };
                format!("{prefix}-{}{head}", c.kind)
            }
        };
        let _ = writeln!(out, "{}\t{}\t{}\t{}", tok.index, tok.word, tok.pos, bio);
    }
    for h in &s.hints {
        let _ = writeln!(out, "{HINT_TAG}\t{}\t{}", h.source, h.target);
    }
    for set_id in header.schemes.keys() {
        let Some(set) = s.annotations.get(set_id) else {
            continue;
        };
        for arc in &set.arcs {
            let _ = writeln!(out, "{set_id}\t{}\t{}\t{}", arc.source, arc.target, arc.label);
        }
        for rel in &set.nary {
            let elems: Vec<String> = rel.elements.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{set_id}\t{NARY_TAG}\t{}\t{}", rel.label, elems.join(","));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const WORKED_EXAMPLE: &str = "\
#! pos NN , PRP$ VBD DT IN .
#! chunk-types NP VP
#! scheme key subj obj mod-time mod-loc

0\tToday\tNN\tB-NP:H
1\t,\t,\tO
2\tmy\tPRP$\tB-NP
3\tdog\tNN\tI-NP:H
4\tpushed\tVBD\tB-VP:H
5\tthe\tDT\tB-NP
6\tball\tNN\tI-NP:H
7\ton\tIN\tO
8\tthe\tDT\tB-NP
9\tfloor\tNN\tI-NP:H
10\t.\t.\tO
PP\t7\t6
key\t0\t4\tmod-time
key\t3\t4\tsubj
key\t6\t4\tobj
key\t7\t6\tmod-loc

0\tit\tNN\tB-NP:H
1\tbarked\tVBD\tB-VP:H
key\t0\t1\tsubj
";

    #[test]
    fn reads_worked_example() {
        let c = parse_corpus(WORKED_EXAMPLE).unwrap();
        assert_eq!(c.len(), 2);
        let s = &c.sentences[0];
        assert_eq!(s.chunks.len(), 5);
        assert_eq!(s.hints, vec![AttachmentHint { source: 7, target: 6 }]);
        let key = s.arcs(KEY_SET);
        assert!(key.contains(&GrArc::new(3, 4, "subj")));
        assert!(key.contains(&GrArc::new(0, 4, "mod-time")));
        assert!(key.contains(&GrArc::new(7, 6, "mod-loc")));
        c.validate().unwrap();
    }

    #[test]
    fn round_trips_byte_identically() {
        let c = parse_corpus(WORKED_EXAMPLE).unwrap();
        assert_eq!(c.to_string(), WORKED_EXAMPLE);
    }

    #[test]
    fn empty_corpus_is_header_only() {
        let mut c = Corpus::default();
        c.header.pos_tags.insert("NN".into());
        c.header.declare_scheme("key", ["subj"]).unwrap();
        let text = c.to_string();
        assert_eq!(text, "#! pos NN\n#! chunk-types\n#! scheme key subj\n");
        assert_eq!(parse_corpus(&text).unwrap(), c);
    }

    #[test]
    fn nary_round_trip() {
        let text = "\
#! pos NN VBD
#! chunk-types
#! scheme sys rel

0\ta\tNN\tO
1\tb\tVBD\tO
2\tc\tNN\tO
3\td\tNN\tO
sys\tNARY\trel\t1,0,2,3
";
        let c = parse_corpus(text).unwrap();
        let rel = &c.sentences[0].set("sys").unwrap().nary[0];
        assert_eq!(rel.elements, vec![1, 0, 2, 3]);
        assert_eq!(c.to_string(), text);
        assert_eq!(parse_corpus(&c.to_string()).unwrap(), c);
    }

    fn error_line(text: &str) -> usize {
        match parse_corpus(text) {
            Err(Error::Format { line, .. }) => line,
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn endpoint_outside_sentence_names_line() {
        let text = "#! pos NN\n#! chunk-types\n#! scheme key subj\n\n0\ta\tNN\tO\n1\tb\tNN\tO\n2\tc\tNN\tO\n3\td\tNN\tO\n4\te\tNN\tO\nkey\t9\t1\tsubj\n";
        assert_eq!(error_line(text), 10);
    }

    #[test]
    fn malformed_lines_are_errors() {
        let base = "#! pos NN\n#! chunk-types NP\n#! scheme key subj\n\n";
        // wrong field count
        assert_eq!(error_line(&format!("{base}0\ta\tNN\n")), 5);
        // extra whitespace in a field
        assert_eq!(error_line(&format!("{base}0\ta\tNN\tO \n")), 5);
        // I- without an open chunk
        assert_eq!(error_line(&format!("{base}0\ta\tNN\tI-NP:H\n")), 5);
        // chunk without head
        assert!(parse_corpus(&format!("{base}0\ta\tNN\tB-NP\n1\tb\tNN\tO\n")).is_err());
        // two heads
        assert_eq!(error_line(&format!("{base}0\ta\tNN\tB-NP:H\n1\tb\tNN\tI-NP:H\n")), 6);
        // undeclared set
        assert_eq!(
            error_line(&format!("{base}0\ta\tNN\tO\n1\tb\tNN\tO\nsys\t0\t1\tsubj\n")),
            7
        );
        // label outside scheme
        assert_eq!(
            error_line(&format!("{base}0\ta\tNN\tO\n1\tb\tNN\tO\nkey\t0\t1\tobj\n")),
            7
        );
        // duplicate arc
        assert_eq!(
            error_line(&format!(
                "{base}0\ta\tNN\tO\n1\tb\tNN\tO\nkey\t0\t1\tsubj\nkey\t0\t1\tsubj\n"
            )),
            8
        );
        // token after arcs
        assert_eq!(
            error_line(&format!(
                "{base}0\ta\tNN\tO\n1\tb\tNN\tO\nkey\t0\t1\tsubj\n2\tc\tNN\tO\n"
            )),
            8
        );
        // hint after arcs
        assert_eq!(
            error_line(&format!("{base}0\ta\tNN\tO\n1\tb\tNN\tO\nkey\t0\t1\tsubj\nPP\t0\t1\n")),
            8
        );
        // undeclared POS
        assert_eq!(error_line(&format!("{base}0\ta\tVB\tO\n")), 5);
        // double space in header
        assert_eq!(error_line("#! pos NN  VB\n"), 1);
    }
}
