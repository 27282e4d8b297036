//! Positional patterns and `P(target | condition)` queries.

use std::fmt;

use crate::error::SyntaxError;
use crate::model::{is_name_byte, EventName, MAX_DEPTH};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Segment {
    Name(EventName),
    Wildcard,
}

/// Nonempty sequence of names and wildcards, matched against label prefixes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    segments: Vec<Segment>,
}

impl Pattern {
    pub fn new(segments: Vec<Segment>) -> Option<Self> {
        if segments.is_empty() || segments.len() > MAX_DEPTH {
            None
        } else {
            Some(Pattern { segments })
        }
    }

    /// Exact path pattern without wildcards.
    pub fn path(names: &[EventName]) -> Option<Self> {
        Self::new(names.iter().cloned().map(Segment::Name).collect())
    }

    /// `*/*/.../name` with `name` at 1-based `position`.
    pub fn at_position(position: usize, name: EventName) -> Option<Self> {
        if position == 0 {
            return None;
        }
        let mut segs = vec![Segment::Wildcard; position - 1];
        segs.push(Segment::Name(name));
        Self::new(segs)
    }

    /// The whole sample space.
    pub fn any() -> Self {
        Pattern {
            segments: vec![Segment::Wildcard],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.segments.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            match s {
                Segment::Name(n) => write!(f, "{n}")?,
                Segment::Wildcard => f.write_str("*")?,
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Pattern {
    type Err = SyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_pattern(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Query {
    pub target: Pattern,
    pub condition: Option<Pattern>,
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.condition {
            Some(c) => write!(f, "P({} | {c})", self.target),
            None => write!(f, "P({})", self.target),
        }
    }
}

impl std::str::FromStr for Query {
    type Err = SyntaxError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_query(s)
    }
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, expected: impl Into<String>) -> SyntaxError {
        SyntaxError::new(1, self.pos + 1, expected)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(|c| c == ' ') {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn pattern(&mut self) -> Result<Pattern, SyntaxError> {
        let start = self.pos;
        if matches!(self.peek(), None | Some(')') | Some('|')) {
            return Err(self.err("empty pattern"));
        }
        let mut segs = Vec::new();
        loop {
            if self.eat('*') {
                segs.push(Segment::Wildcard);
            } else {
                let from = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii() && is_name_byte(c as u8)) {
                    self.pos += 1;
                }
                if from == self.pos {
                    return Err(self.err("event name or '*'"));
                }
                let tok: String = self.chars[from..self.pos].iter().collect();
                segs.push(Segment::Name(EventName::new(tok).expect("validated bytes")));
            }
            if !self.eat('/') {
                break;
            }
        }
        if segs.len() > MAX_DEPTH {
            return Err(SyntaxError::new(
                1,
                start + 1,
                format!("at most {MAX_DEPTH} pattern segments"),
            ));
        }
        Ok(Pattern { segments: segs })
    }
}

/// Parses `P(pattern)` or `P(pattern | pattern)`.
pub fn parse_query(text: &str) -> Result<Query, SyntaxError> {
    let mut c = Cursor {
        chars: text.chars().collect(),
        pos: 0,
    };
    c.skip_ws();
    if !(c.eat('P') && c.eat('(')) {
        return Err(c.err("'P('"));
    }
    c.skip_ws();
    let target = c.pattern()?;
    c.skip_ws();
    let condition = if c.eat('|') {
        c.skip_ws();
        let p = c.pattern()?;
        c.skip_ws();
        Some(p)
    } else {
        None
    };
    if !c.eat(')') {
        return Err(c.err(if condition.is_some() { "')'" } else { "'/', ' | ' or ')'" }));
    }
    c.skip_ws();
    if c.peek().is_some() {
        return Err(c.err("end of query"));
    }
    Ok(Query { target, condition })
}

/// Parses a bare pattern such as `*/S`.
pub fn parse_pattern(text: &str) -> Result<Pattern, SyntaxError> {
    let mut c = Cursor {
        chars: text.trim().chars().collect(),
        pos: 0,
    };
    let p = c.pattern()?;
    if c.peek().is_some() {
        return Err(c.err("'/' or end of pattern"));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn name(s: &str) -> Segment {
        Segment::Name(EventName::new(s).unwrap())
    }

    #[test]
    fn plain_and_conditional() {
        let q = parse_query("P(L/S)").unwrap();
        assert_eq!(q.target.segments(), &[name("L"), name("S")]);
        assert!(q.condition.is_none());

        let q = parse_query("P(L/S | */S)").unwrap();
        assert_eq!(q.condition.unwrap().segments(), &[Segment::Wildcard, name("S")]);

        let q = parse_query("P(~L/S|*/S)").unwrap();
        assert_eq!(q.target.segments()[0], name("~L"));
    }

    #[test]
    fn display_round_trips() {
        for s in ["P(L/S | */S)", "P(*)", "P(*/*/G)"] {
            assert_eq!(parse_query(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn errors() {
        let e = parse_query("P()").unwrap_err();
        assert_eq!((e.column, e.expected.as_str()), (3, "empty pattern"));
        let e = parse_query("P(L | )").unwrap_err();
        assert_eq!(e.expected, "empty pattern");
        let e = parse_query("P(L//S)").unwrap_err();
        assert_eq!((e.column, e.expected.as_str()), (5, "event name or '*'"));
        let e = parse_query("Q(L)").unwrap_err();
        assert_eq!(e.column, 1);
        let e = parse_query("P(L").unwrap_err();
        assert_eq!(e.column, 4);
        let e = parse_query("P(L) x").unwrap_err();
        assert_eq!(e.expected, "end of query");
        let long = format!("P({})", vec!["*"; MAX_DEPTH + 1].join("/"));
        assert!(parse_query(&long).is_err());
    }

    #[test]
    fn constructors() {
        assert_eq!(
            Pattern::at_position(3, EventName::new("G").unwrap()).unwrap().to_string(),
            "*/*/G"
        );
        assert!(Pattern::new(vec![]).is_none());
        assert_eq!(parse_pattern(" */S ").unwrap().to_string(), "*/S");
    }
}
