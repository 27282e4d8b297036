//! The `.tb` model format.
//!
//! ```text
//! model "Lung disease and smoking"
//! # comment
//! L: 6%
//!   S: 0.92
//!   ~S: 0.08
//! ~L: 47/50
//!   S: 24%
//!   ~S: 76%
//! ```
//!
//! Children sit exactly two spaces deeper than their parent. Optional
//! `meta KEY "value"` lines between the header and the first node carry
//! tree metadata.

use std::fmt::Write as _;

use crate::error::{Error, SyntaxError};
use crate::model::{ensure_valid, is_name_byte, EventName, EventNode, EventTree};
use crate::prob::{format_ratio, parse_ratio, ProbError};

const INDENT: usize = 2;

/// Parses and validates a model.
pub fn parse_model(src: &str) -> Result<EventTree, Error> {
    let tree = parse_model_unchecked(src)?;
    ensure_valid(&tree)?;
    Ok(tree)
}

/// Parses without running validation.
pub fn parse_model_unchecked(src: &str) -> Result<EventTree, Error> {
    Parser::default().run(src).map_err(Error::from)
}

pub fn serialize_model(tree: &EventTree) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", quote(&tree.title));
    for (k, v) in &tree.metadata {
        let _ = writeln!(out, "meta {k} {}", quote(v));
    }
    fn go(out: &mut String, nodes: &[EventNode], depth: usize) {
        for n in nodes {
            let _ = writeln!(
                out,
                "{}{}: {}",
                " ".repeat(depth * INDENT),
                n.name,
                format_ratio(&n.cond_prob)
            );
            go(out, &n.children, depth + 1);
        }
    }
    go(&mut out, &tree.root_children, 0);
    out
}

fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

#[derive(Default)]
struct Parser {
    tree: EventTree,
    header_seen: bool,
    nodes_seen: bool,
    /// Open nodes along the current path, outermost first.
    open: Vec<EventNode>,
}

/// Cursor over one line; columns are 1-based character positions.
struct Line {
    no: usize,
    chars: Vec<char>,
    pos: usize,
}

impl Line {
    fn new(no: usize, src: &str) -> Self {
        Line {
            no,
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, expected: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.no, self.pos + 1, expected)
    }

    fn skip_spaces(&mut self) {
        while self.peek() == Some(' ') {
            self.pos += 1;
        }
    }

    /// Trailing spaces and an optional comment, then end of line.
    fn expect_end(&mut self) -> Result<(), SyntaxError> {
        self.skip_spaces();
        match self.peek() {
            None | Some('#') => Ok(()),
            Some('\t') => Err(self.err("tabs are not allowed")),
            Some(_) => Err(self.err("end of line")),
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn keyword(&mut self, kw: &str) -> bool {
        let n = kw.chars().count();
        let matches = self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().copied().eq(kw.chars())
            && self.chars.get(self.pos + n).is_none_or(|c| *c == ' ');
        if matches {
            self.pos += n;
        }
        matches
    }

    fn string(&mut self) -> Result<String, SyntaxError> {
        if self.peek() != Some('"') {
            return Err(self.err("'\"'"));
        }
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.peek() {
                None => return Err(self.err("closing '\"'")),
                Some('"') => {
                    self.pos += 1;
                    return Ok(s);
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some('"') => s.push('"'),
                        Some('\\') => s.push('\\'),
                        Some('n') => s.push('\n'),
                        _ => return Err(self.err("escape sequence \\\", \\\\ or \\n")),
                    }
                    self.pos += 1;
                }
                Some(c) => {
                    s.push(c);
                    self.pos += 1;
                }
            }
        }
    }
}

fn is_blank_or_comment(line: &str) -> bool {
    let t = line.trim_start_matches([' ', '\t']);
    t.is_empty() || t.starts_with('#')
}

impl Parser {
    fn run(mut self, src: &str) -> Result<EventTree, SyntaxError> {
        let mut last_line = 0;
        for (i, raw) in src.split('\n').enumerate() {
            let no = i + 1;
            last_line = no;
            let raw = raw.strip_suffix('\r').unwrap_or(raw);
            if is_blank_or_comment(raw) {
                continue;
            }
            let mut line = Line::new(no, raw);
            if !self.header_seen {
                self.header(&mut line)?;
            } else if !self.nodes_seen && line.keyword("meta") {
                self.meta(&mut line)?;
            } else {
                self.node(&mut line)?;
            }
        }
        if !self.header_seen {
            return Err(SyntaxError::new(last_line.max(1), 1, "'model' header"));
        }
        self.close_to(0);
        Ok(self.tree)
    }

    fn header(&mut self, line: &mut Line) -> Result<(), SyntaxError> {
        if !line.keyword("model") {
            return Err(line.err("'model' header"));
        }
        line.skip_spaces();
        self.tree.title = line.string()?;
        line.expect_end()?;
        self.header_seen = true;
        Ok(())
    }

    fn meta(&mut self, line: &mut Line) -> Result<(), SyntaxError> {
        line.skip_spaces();
        let key = line.take_while(|c| c.is_ascii() && is_name_byte(c as u8));
        if key.is_empty() {
            return Err(line.err("metadata key"));
        }
        line.skip_spaces();
        let value = line.string()?;
        line.expect_end()?;
        self.tree.metadata.insert(key, value);
        Ok(())
    }

    fn node(&mut self, line: &mut Line) -> Result<(), SyntaxError> {
        let spaces = line.take_while(|c| c == ' ').len();
        if line.peek() == Some('\t') {
            return Err(line.err("tabs are not allowed; indent with 2 spaces"));
        }
        if !spaces.is_multiple_of(INDENT) {
            return Err(line.err("indentation in multiples of 2 spaces"));
        }
        let level = spaces / INDENT;
        if level > self.open.len() {
            return Err(SyntaxError::new(
                line.no,
                1,
                format!("indentation of at most {} spaces", self.open.len() * INDENT),
            ));
        }
        let name_col = line.pos;
        let name = line.take_while(|c| c.is_ascii() && is_name_byte(c as u8));
        if name.is_empty() {
            return Err(line.err("event name [A-Za-z0-9_~]+"));
        }
        line.skip_spaces();
        if line.peek() != Some(':') {
            return Err(line.err("':'"));
        }
        line.pos += 1;
        line.skip_spaces();
        let prob_col = line.pos;
        let token = line.take_while(|c| !c.is_whitespace() && c != '#');
        if token.is_empty() {
            return Err(line.err("probability (decimal, fraction or percent)"));
        }
        let cond_prob = parse_ratio(&token).map_err(|e| {
            let what = match e {
                ProbError::ZeroDenominator => "nonzero denominator".to_string(),
                _ => format!("probability (decimal, fraction or percent), found {token:?}"),
            };
            SyntaxError::new(line.no, prob_col + 1, what)
        })?;
        line.expect_end()?;

        self.close_to(level);
        let name = EventName::new(name)
            .map_err(|_| SyntaxError::new(line.no, name_col + 1, "event name"))?;
        self.open.push(EventNode {
            name,
            cond_prob,
            children: Vec::new(),
        });
        self.nodes_seen = true;
        Ok(())
    }

    /// Pops open nodes until only `level` remain, attaching each to its parent.
    fn close_to(&mut self, level: usize) {
        while self.open.len() > level {
            let node = self.open.pop().expect("nonempty");
            match self.open.last_mut() {
                Some(parent) => parent.children.push(node),
                None => self.tree.root_children.push(node),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fixtures, leaves, join_path};
    use crate::prob::Prob;

    const LUNG: &str = "model \"Lung disease and smoking\"\n\
        L: 0.06\n  S: 0.92\n  ~S: 0.08\n~L: 0.94\n  S: 0.24\n  ~S: 0.76\n";

    fn syntax(src: &str) -> SyntaxError {
        match parse_model(src) {
            Err(Error::Syntax(e)) => e,
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn lung_source() {
        let t = parse_model(LUNG).unwrap();
        assert_eq!(t.title, "Lung disease and smoking");
        let ls = leaves(&t);
        assert_eq!(ls.len(), 4);
        assert_eq!(join_path(&ls[0].label, "/"), "L/S");
        assert_eq!(ls[0].prob, "69/1250".parse::<Prob>().unwrap());
        assert_eq!(t.root_children, fixtures::lung().root_children);
    }

    #[test]
    fn single_leaf() {
        let t = parse_model("model \"t\"\nX: 1").unwrap();
        assert_eq!(leaves(&t)[0].prob, Prob::one());
        assert_eq!(serialize_model(&t), "model \"t\"\nX: 1/1\n");
    }

    #[test]
    fn sum_violation_is_validation_error() {
        match parse_model("model \"t\"\nA: 0.5\nB: 0.6") {
            Err(Error::Validation(d)) => assert_eq!(d[0].to_string(), "children sum 11/10 ≠ 1 at Ω"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let src = "# leading\n\nmodel \"c # not a comment\" # trailing\n\
            A: 1/2 # half\n\n  # indented comment\nB: 50%\n";
        let t = parse_model(src).unwrap();
        assert_eq!(t.title, "c # not a comment");
        assert_eq!(t.root_children.len(), 2);
    }

    #[test]
    fn metadata_round_trips() {
        let src = "model \"m\"\nmeta source \"Weiss \\\"2012\\\"\"\nA: 1\n";
        let t = parse_model(src).unwrap();
        assert_eq!(t.metadata["source"], "Weiss \"2012\"");
        assert_eq!(parse_model(&serialize_model(&t)).unwrap(), t);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = syntax("model \"t\"\n\tA: 1\n");
        assert_eq!((e.line, e.column), (2, 1));
        assert!(e.expected.contains("tabs"));

        let e = syntax("model \"t\"\nA: 1\n   B: 1\n");
        assert_eq!((e.line, e.column), (3, 4));

        let e = syntax("model \"t\"\nA: 1\n    B: 1\n");
        assert_eq!(e.line, 3);
        assert!(e.expected.contains("at most 2"));

        let e = syntax("model \"t\"\nA 1\n");
        assert_eq!((e.line, e.column, e.expected.as_str()), (2, 3, "':'"));

        let e = syntax("model \"t\"\nA: 1/0\n");
        assert_eq!((e.line, e.column), (2, 4));

        let e = syntax("model \"t\"\nA: 1 - 0.5\n");
        assert_eq!((e.line, e.column, e.expected.as_str()), (2, 6, "end of line"));

        let e = syntax("A: 1\n");
        assert_eq!((e.line, e.column), (1, 1));

        let e = syntax("");
        assert_eq!(e.expected, "'model' header");

        let e = syntax("model \"unterminated\n");
        assert_eq!(e.line, 1);
    }

    #[test]
    fn crlf_tolerated() {
        let t = parse_model("model \"t\"\r\nA: 1\r\n").unwrap();
        assert_eq!(t.root_children.len(), 1);
    }

    #[test]
    fn urn_round_trip() {
        let t = fixtures::urn();
        let back = parse_model(&serialize_model(&t)).unwrap();
        assert_eq!(back, t);
        assert_eq!(leaves(&back).len(), 10);
    }

    #[test]
    fn out_of_range_reaches_validation() {
        match parse_model("model \"t\"\nA: 150%\n") {
            Err(Error::Validation(d)) => {
                assert!(d.iter().any(|d| d.to_string().starts_with("probability out of range")))
            }
            other => panic!("{other:?}"),
        }
    }
}
