//! Line-oriented text formats: `.ps` partial strings, `.prog` generator
//! lists, and `.rf` read-from maps. `#` starts a comment anywhere.

use crate::label::{Label, LoadTag, StoreTag};
use crate::memory::{RfMap, RfTarget};
use crate::program::Program;
use crate::pstring::{EventId, PartialString, PsError};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate event id `{id}`")]
    DuplicateEvent { line: usize, id: String },
    #[error("line {line}: unknown event id `{id}`")]
    UnknownEvent { line: usize, id: String },
    #[error("edge set is cyclic")]
    Cyclic,
    #[error("include `{0}` could not be loaded: {1}")]
    Include(String, String),
}

/// A parsed partial string together with its declared event names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPs {
    pub string: PartialString,
    pub names: Vec<String>,
}

impl ParsedPs {
    pub fn index_of(&self, name: &str) -> Option<EventId> {
        self.names.iter().position(|n| n == name)
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_event_line(
    line_no: usize,
    parts: &[&str],
) -> Result<(String, Label), ParseError> {
    // parts[0] == "event"
    if parts.len() < 3 {
        return Err(syntax(line_no, "expected `event <id> <kind> ...`"));
    }
    let id = parts[1].to_string();
    let label = match parts[2] {
        "opaque" => {
            if parts.len() != 4 {
                return Err(syntax(line_no, "expected `event <id> opaque <token>`"));
            }
            Label::opaque(parts[3])
        }
        "load" => {
            if parts.len() != 6 {
                return Err(syntax(
                    line_no,
                    "expected `event <id> load <none|acquire> <reg> <addr>`",
                ));
            }
            let tag = match parts[3] {
                "none" => LoadTag::None,
                "acquire" => LoadTag::Acquire,
                other => return Err(syntax(line_no, format!("unknown load tag `{other}`"))),
            };
            Label::load(tag, parts[4], parts[5])
        }
        "store" => {
            if parts.len() != 6 {
                return Err(syntax(
                    line_no,
                    "expected `event <id> store <none|release> <addr> <0|1>`",
                ));
            }
            let tag = match parts[3] {
                "none" => StoreTag::None,
                "release" => StoreTag::Release,
                other => return Err(syntax(line_no, format!("unknown store tag `{other}`"))),
            };
            let bit = match parts[5] {
                "0" => false,
                "1" => true,
                other => return Err(syntax(line_no, format!("bit must be 0 or 1, got `{other}`"))),
            };
            Label::store(tag, parts[4], bit)
        }
        other => return Err(syntax(line_no, format!("unknown event kind `{other}`"))),
    };
    Ok((id, label))
}

/// Parse one `.ps` document.
pub fn parse_partial_string(src: &str) -> Result<ParsedPs, ParseError> {
    let mut names: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, EventId> = BTreeMap::new();
    let mut labels: Vec<Label> = Vec::new();
    let mut edges: Vec<(EventId, EventId)> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts[0] {
            "event" => {
                let (id, label) = parse_event_line(line_no, &parts)?;
                if index.contains_key(&id) {
                    return Err(ParseError::DuplicateEvent { line: line_no, id });
                }
                index.insert(id.clone(), labels.len());
                names.push(id);
                labels.push(label);
            }
            "order" => {
                if parts.len() != 3 {
                    return Err(syntax(line_no, "expected `order <id> <id>`"));
                }
                let a = *index.get(parts[1]).ok_or_else(|| ParseError::UnknownEvent {
                    line: line_no,
                    id: parts[1].to_string(),
                })?;
                let b = *index.get(parts[2]).ok_or_else(|| ParseError::UnknownEvent {
                    line: line_no,
                    id: parts[2].to_string(),
                })?;
                edges.push((a, b));
            }
            other => return Err(syntax(line_no, format!("unknown directive `{other}`"))),
        }
    }
    let string = PartialString::new(labels, edges).map_err(|e| match e {
        PsError::Cyclic => ParseError::Cyclic,
        PsError::EdgeOutOfRange(..) => unreachable!("ids resolved through the index"),
    })?;
    Ok(ParsedPs { string, names })
}

/// Print a partial string in `.ps` syntax with canonical `e<i>` names and
/// covering edges only.
pub fn print_partial_string(ps: &PartialString) -> String {
    let mut out = String::new();
    for (e, label) in ps.labels().iter().enumerate() {
        match label {
            Label::Opaque(t) => {
                let _ = writeln!(out, "event e{e} opaque {t}");
            }
            Label::Load { tag, reg, addr } => {
                let _ = writeln!(out, "event e{e} load {tag} {} {}", reg.0, addr.0);
            }
            Label::Store { tag, addr, bit } => {
                let _ = writeln!(out, "event e{e} store {tag} {} {}", addr.0, u8::from(*bit));
            }
        }
    }
    for (a, b) in ps.covering_edges() {
        let _ = writeln!(out, "order e{a} e{b}");
    }
    out
}

/// Parse a `.prog` document. `include <path>` lines are resolved through the
/// supplied loader, which maps a path to file contents.
pub fn parse_program(
    src: &str,
    load_include: &dyn Fn(&str) -> Result<String, String>,
) -> Result<Program, ParseError> {
    let mut generators: Vec<PartialString> = Vec::new();
    let mut block: Option<(usize, Vec<String>)> = None;
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some((_, lines)) = block.as_mut() {
            if line == "end" {
                let body = lines.join("\n");
                generators.push(parse_partial_string(&body)?.string);
                block = None;
            } else {
                lines.push(line.to_string());
            }
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts[0] {
            "include" => {
                if parts.len() != 2 {
                    return Err(syntax(line_no, "expected `include <file.ps>`"));
                }
                let content = load_include(parts[1])
                    .map_err(|e| ParseError::Include(parts[1].to_string(), e))?;
                generators.push(parse_partial_string(&content)?.string);
            }
            "begin" => {
                if parts.len() != 3 || parts[1] != "ps" {
                    return Err(syntax(line_no, "expected `begin ps <name>`"));
                }
                block = Some((line_no, Vec::new()));
            }
            other => return Err(syntax(line_no, format!("unknown directive `{other}`"))),
        }
    }
    if let Some((line, _)) = block {
        return Err(syntax(line, "unterminated `begin ps` block"));
    }
    Ok(Program::from_generators(generators))
}

/// Print a program as inline `.ps` blocks.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, g) in p.generators().iter().enumerate() {
        let _ = writeln!(out, "begin ps g{i}");
        out.push_str(&print_partial_string(g));
        let _ = writeln!(out, "end");
    }
    out
}

/// Parse a `.rf` document against the event names of a parsed string.
/// `rf <load> bottom` marks a read of the initial value.
pub fn parse_rf(src: &str, ps: &ParsedPs) -> Result<RfMap, ParseError> {
    let mut rf = RfMap::new();
    for (i, raw) in src.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "rf" {
            return Err(syntax(line_no, "expected `rf <load-id> <store-id|bottom>`"));
        }
        let load = ps.index_of(parts[1]).ok_or_else(|| ParseError::UnknownEvent {
            line: line_no,
            id: parts[1].to_string(),
        })?;
        let target = if parts[2] == "bottom" {
            RfTarget::Initial
        } else {
            RfTarget::Store(ps.index_of(parts[2]).ok_or_else(|| ParseError::UnknownEvent {
                line: line_no,
                id: parts[2].to_string(),
            })?)
        };
        rf.insert(load, target);
    }
    Ok(rf)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_THREAD: &str = "\
# two threads, sync on b
event e0 load acquire r0 b
event e1 load none r1 a
event e2 store none a 1
event e3 store release b 1
order e0 e1
order e2 e3
";

    #[test]
    fn ps_round_trip_is_isomorphic() {
        let parsed = parse_partial_string(TWO_THREAD).unwrap();
        assert_eq!(parsed.string.len(), 4);
        let printed = print_partial_string(&parsed.string);
        let again = parse_partial_string(&printed).unwrap();
        assert!(again.string.is_isomorphic(&parsed.string));
        assert_eq!(printed, print_partial_string(&again.string));
    }

    #[test]
    fn ps_rejections() {
        let dup = "event x opaque a\nevent x opaque b\n";
        assert!(matches!(
            parse_partial_string(dup).unwrap_err(),
            ParseError::DuplicateEvent { .. }
        ));
        let unknown = "event x opaque a\norder x y\n";
        assert!(matches!(
            parse_partial_string(unknown).unwrap_err(),
            ParseError::UnknownEvent { .. }
        ));
        let cyclic = "event x opaque a\nevent y opaque b\norder x y\norder y x\n";
        assert_eq!(parse_partial_string(cyclic).unwrap_err(), ParseError::Cyclic);
        let bad_bit = "event x store none a 2\n";
        assert!(matches!(
            parse_partial_string(bad_bit).unwrap_err(),
            ParseError::Syntax { .. }
        ));
    }

    #[test]
    fn prog_blocks_and_includes() {
        let src = "\
include other.ps
begin ps inline
event a opaque p
event b opaque q
order a b
end
";
        let loader = |path: &str| -> Result<String, String> {
            if path == "other.ps" {
                Ok("event z opaque r\n".to_string())
            } else {
                Err("missing".to_string())
            }
        };
        let prog = parse_program(src, &loader).unwrap();
        assert_eq!(prog.generators().len(), 2);
        let printed = print_program(&prog);
        let again = parse_program(&printed, &|_| Err("no includes expected".into())).unwrap();
        assert!(prog.equivalent(&again));
    }

    #[test]
    fn prog_unterminated_block() {
        let src = "begin ps x\nevent a opaque t\n";
        assert!(matches!(
            parse_program(src, &|_| Err("none".into())).unwrap_err(),
            ParseError::Syntax { .. }
        ));
    }

    #[test]
    fn rf_lines_resolve_names() {
        let parsed = parse_partial_string(TWO_THREAD).unwrap();
        let rf = parse_rf("rf e0 bottom\nrf e1 e2\n", &parsed).unwrap();
        assert_eq!(rf.get(0), Some(RfTarget::Initial));
        assert_eq!(rf.get(1), Some(RfTarget::Store(2)));
        assert!(matches!(
            parse_rf("rf nosuch e2\n", &parsed).unwrap_err(),
            ParseError::UnknownEvent { .. }
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(48))]

        #[test]
        fn print_parse_round_trip(labels in proptest::collection::vec(0u8..5, 0..7),
                                  mask in proptest::bits::u32::ANY) {
            use crate::label::{Label, LoadTag, StoreTag};
            let mk = |k: u8| match k {
                0 => Label::opaque("tok"),
                1 => Label::load(LoadTag::None, "r0", "a"),
                2 => Label::load(LoadTag::Acquire, "r1", "b"),
                3 => Label::store(StoreTag::None, "a", true),
                _ => Label::store(StoreTag::Release, "b", false),
            };
            let n = labels.len();
            let mut edges = Vec::new();
            let mut bit = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if mask >> (bit % 32) & 1 == 1 {
                        edges.push((i, j));
                    }
                    bit += 1;
                }
            }
            let ps = PartialString::new(labels.iter().map(|&k| mk(k)).collect(), edges).unwrap();
            let printed = print_partial_string(&ps);
            let parsed = parse_partial_string(&printed).unwrap();
            proptest::prop_assert!(parsed.string.is_isomorphic(&ps));
            // Printing is stable.
            proptest::prop_assert_eq!(print_partial_string(&parsed.string), printed);
        }
    }
}
