//! Event trees: the sample space and its recursive partition.
//!
//! The root of an [`EventTree`] is the implicit sample space Ω. Every node
//! carries the probability of its event given the full path to its parent,
//! so the probability of reaching a node is the product of weights on the
//! path from the root.

use std::collections::BTreeMap;
use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::Error;
use crate::prob::{format_ratio, Prob, Ratio};

pub const MAX_DEPTH: usize = 32;
pub const MAX_LEAVES: usize = 100_000;

/// Event identifier: nonempty, over `[A-Za-z0-9_~]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventName(String);

impl EventName {
    pub fn new(token: impl Into<String>) -> Result<Self, Error> {
        let token = token.into();
        if Self::is_valid(&token) {
            Ok(EventName(token))
        } else {
            Err(Error::InvalidName(token))
        }
    }

    pub fn is_valid(token: &str) -> bool {
        !token.is_empty() && token.bytes().all(is_name_byte)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// A single character, optionally marked as a complement (`S`, `~S`).
    pub fn is_short(&self) -> bool {
        let body = self.0.strip_prefix('~').unwrap_or(&self.0);
        body.chars().count() == 1
    }
}

pub(crate) fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_' || b == b'~'
}

impl fmt::Display for EventName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::str::FromStr for EventName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventName::new(s)
    }
}

/// A node of the event tree. `cond_prob` is kept as a raw rational so that
/// out-of-range weights survive until [`validate`] can report them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventNode {
    pub name: EventName,
    pub cond_prob: Ratio,
    pub children: Vec<EventNode>,
}

impl EventNode {
    pub fn leaf(name: &str, cond_prob: Ratio) -> Result<Self, Error> {
        Ok(EventNode {
            name: EventName::new(name)?,
            cond_prob,
            children: Vec::new(),
        })
    }

    pub fn with_children(mut self, children: Vec<EventNode>) -> Self {
        self.children = children;
        self
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Edge weight as a [`Prob`]; fails for out-of-range weights.
    pub fn weight(&self) -> Result<Prob, Error> {
        Prob::from_ratio(self.cond_prob.clone()).map_err(Error::from)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct EventTree {
    pub title: String,
    pub root_children: Vec<EventNode>,
    pub metadata: BTreeMap<String, String>,
}

/// Finest cell of the partition: a full root-to-leaf label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafAtom {
    pub label: Vec<EventName>,
    pub prob: Prob,
}

impl LeafAtom {
    pub fn depth(&self) -> usize {
        self.label.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub depth: usize,
    pub cells: Vec<(Vec<EventName>, Prob)>,
}

/// A violated tree invariant, located by node path (empty path = Ω).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: Vec<EventName>,
    pub kind: DiagnosticKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    ChildrenSum(Ratio),
    OutOfRange(Ratio),
    DuplicateSibling(EventName),
    NoEvents,
    DepthExceeded(usize),
    TooManyLeaves(usize),
    LeafMassNotOne(Ratio),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = path_display(&self.path);
        match &self.kind {
            DiagnosticKind::ChildrenSum(s) => {
                write!(f, "children sum {} ≠ 1 at {at}", format_short(s))
            }
            DiagnosticKind::OutOfRange(r) => {
                write!(f, "probability out of range ({}) at {at}", format_short(r))
            }
            DiagnosticKind::DuplicateSibling(n) => write!(f, "duplicate sibling {n} at {at}"),
            DiagnosticKind::NoEvents => write!(f, "no events under {at}"),
            DiagnosticKind::DepthExceeded(d) => {
                write!(f, "depth {d} exceeds maximum {MAX_DEPTH} at {at}")
            }
            DiagnosticKind::TooManyLeaves(n) => {
                write!(f, "{n} leaves exceed maximum {MAX_LEAVES}")
            }
            DiagnosticKind::LeafMassNotOne(s) => {
                write!(f, "leaf probabilities sum to {} ≠ 1", format_short(s))
            }
        }
    }
}

fn format_short(r: &Ratio) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format_ratio(r)
    }
}

/// `Ω` for the root, otherwise names joined by `/`.
pub fn path_display(path: &[EventName]) -> String {
    if path.is_empty() {
        "Ω".to_string()
    } else {
        join_path(path, "/")
    }
}

pub fn join_path(path: &[EventName], sep: &str) -> String {
    path.iter().map(EventName::as_str).collect::<Vec<_>>().join(sep)
}

impl EventTree {
    pub fn new(title: impl Into<String>, root_children: Vec<EventNode>) -> Self {
        EventTree {
            title: title.into(),
            root_children,
            metadata: BTreeMap::new(),
        }
    }

    /// Node at `path`; `None` for the root or an unknown path.
    pub fn node(&self, path: &[EventName]) -> Option<&EventNode> {
        let (first, rest) = path.split_first()?;
        let mut node = self.root_children.iter().find(|c| &c.name == first)?;
        for seg in rest {
            node = node.children.iter().find(|c| &c.name == seg)?;
        }
        Some(node)
    }

    pub fn children_at(&self, path: &[EventName]) -> Option<&[EventNode]> {
        if path.is_empty() {
            Some(&self.root_children)
        } else {
            self.node(path).map(|n| n.children.as_slice())
        }
    }

    pub fn max_depth(&self) -> usize {
        fn go(nodes: &[EventNode]) -> usize {
            nodes.iter().map(|n| 1 + go(&n.children)).max().unwrap_or(0)
        }
        go(&self.root_children)
    }

    /// Whether every event name is a single character (`~` prefix allowed).
    pub fn all_names_short(&self) -> bool {
        let mut ok = true;
        self.walk(|_, node| ok &= node.name.is_short());
        ok
    }

    /// Label join rule: concatenate short names (`RGRG`), otherwise `/`.
    pub fn label_separator(&self) -> &'static str {
        if self.all_names_short() {
            ""
        } else {
            "/"
        }
    }

    /// Pre-order visit of every non-root node with its full path.
    pub fn walk<F: FnMut(&[EventName], &EventNode)>(&self, mut f: F) {
        fn go<F: FnMut(&[EventName], &EventNode)>(
            nodes: &[EventNode],
            path: &mut Vec<EventName>,
            f: &mut F,
        ) {
            for n in nodes {
                path.push(n.name.clone());
                f(path, n);
                go(&n.children, path, f);
                path.pop();
            }
        }
        go(&self.root_children, &mut Vec::new(), &mut f);
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(|_, _| n += 1);
        n
    }
}

/// Product of edge weights along `path`; the empty path is Ω with probability 1.
pub fn path_probability(tree: &EventTree, path: &[EventName]) -> Result<Prob, Error> {
    let mut acc = Ratio::one();
    let mut level: &[EventNode] = &tree.root_children;
    for (i, seg) in path.iter().enumerate() {
        let node = level
            .iter()
            .find(|c| &c.name == seg)
            .ok_or_else(|| Error::UnknownPath(path_display(&path[..=i])))?;
        acc *= &node.cond_prob;
        level = &node.children;
    }
    Prob::from_ratio(acc).map_err(Error::from)
}

/// Depth-first pre-order list of leaf atoms.
pub fn leaves(tree: &EventTree) -> Vec<LeafAtom> {
    fn go(nodes: &[EventNode], label: &mut Vec<EventName>, mass: &Ratio, out: &mut Vec<LeafAtom>) {
        for n in nodes {
            label.push(n.name.clone());
            let m = mass * &n.cond_prob;
            if n.is_leaf() {
                out.push(LeafAtom {
                    label: label.clone(),
                    prob: Prob::from_ratio(m).unwrap_or_else(|_| Prob::one()),
                });
            } else {
                go(&n.children, label, &m, out);
            }
            label.pop();
        }
    }
    let mut out = Vec::new();
    go(&tree.root_children, &mut Vec::new(), &Ratio::one(), &mut out);
    out
}

/// Cells of the `k`-th partition: distinct length-`k` prefixes, with
/// shallower leaves kept as their own cells. Cells are in document order.
pub fn level_partition(tree: &EventTree, k: usize) -> Partition {
    fn go(
        nodes: &[EventNode],
        k: usize,
        prefix: &mut Vec<EventName>,
        mass: &Ratio,
        out: &mut Vec<(Vec<EventName>, Prob)>,
    ) {
        for n in nodes {
            prefix.push(n.name.clone());
            let m = mass * &n.cond_prob;
            if prefix.len() == k || n.is_leaf() {
                out.push((
                    prefix.clone(),
                    Prob::from_ratio(m).unwrap_or_else(|_| Prob::one()),
                ));
            } else {
                go(&n.children, k, prefix, &m, out);
            }
            prefix.pop();
        }
    }
    let mut cells = Vec::new();
    if k == 0 {
        cells.push((Vec::new(), Prob::one()));
    } else {
        go(&tree.root_children, k, &mut Vec::new(), &Ratio::one(), &mut cells);
    }
    Partition { depth: k, cells }
}

/// Every violated invariant; empty iff the tree is valid.
pub fn validate(tree: &EventTree) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut leaf_count = 0usize;
    check_siblings(&[], &tree.root_children, &mut out);
    let mut depth_reported = false;
    tree.walk(|path, node| {
        if node.cond_prob.is_negative() || node.cond_prob > Ratio::one() {
            out.push(Diagnostic {
                path: path.to_vec(),
                kind: DiagnosticKind::OutOfRange(node.cond_prob.clone()),
            });
        }
        if path.len() > MAX_DEPTH && !depth_reported {
            depth_reported = true;
            out.push(Diagnostic {
                path: path.to_vec(),
                kind: DiagnosticKind::DepthExceeded(path.len()),
            });
        }
        if node.is_leaf() {
            leaf_count += 1;
        } else {
            check_siblings(path, &node.children, &mut out);
        }
    });
    if leaf_count > MAX_LEAVES {
        out.push(Diagnostic {
            path: Vec::new(),
            kind: DiagnosticKind::TooManyLeaves(leaf_count),
        });
    }
    // Leaf mass is asserted on its own rather than inferred from the
    // per-node sums.
    if out.is_empty() {
        let total: Ratio = leaves(tree)
            .iter()
            .fold(Ratio::zero(), |acc, l| acc + l.prob.as_ratio());
        if !total.is_one() {
            out.push(Diagnostic {
                path: Vec::new(),
                kind: DiagnosticKind::LeafMassNotOne(total),
            });
        }
    }
    out
}

fn check_siblings(path: &[EventName], children: &[EventNode], out: &mut Vec<Diagnostic>) {
    if children.is_empty() {
        out.push(Diagnostic {
            path: path.to_vec(),
            kind: DiagnosticKind::NoEvents,
        });
        return;
    }
    let sum: Ratio = children.iter().fold(Ratio::zero(), |a, c| a + &c.cond_prob);
    if !sum.is_one() {
        out.push(Diagnostic {
            path: path.to_vec(),
            kind: DiagnosticKind::ChildrenSum(sum),
        });
    }
    let mut seen = HashSet::new();
    for c in children {
        if !seen.insert(&c.name) {
            out.push(Diagnostic {
                path: path.to_vec(),
                kind: DiagnosticKind::DuplicateSibling(c.name.clone()),
            });
        }
    }
}

/// Runs [`validate`] and converts diagnostics into an error.
pub fn ensure_valid(tree: &EventTree) -> Result<(), Error> {
    let diags = validate(tree);
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(diags))
    }
}

/// Hand-built models for tests and examples.
#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::prob::parse_ratio;

    pub fn n(name: &str, p: &str, children: Vec<EventNode>) -> EventNode {
        EventNode::leaf(name, parse_ratio(p).unwrap())
            .unwrap()
            .with_children(children)
    }

    pub fn lung() -> EventTree {
        EventTree::new(
            "lung",
            vec![
                n("L", "0.06", vec![n("S", "0.92", vec![]), n("~S", "0.08", vec![])]),
                n("~L", "0.94", vec![n("S", "0.24", vec![]), n("~S", "0.76", vec![])]),
            ],
        )
    }

    pub fn lucky() -> EventTree {
        let nnnn = n("N", "1/2", vec![n("P", "1", vec![])]);
        let nnn = n("N", "2/3", vec![n("P", "1/2", vec![]), nnnn]);
        let nn = n("N", "3/4", vec![n("P", "1/3", vec![]), nnn]);
        let root_n = n("N", "4/5", vec![n("P", "1/4", vec![]), nn]);
        EventTree::new("lucky", vec![n("P", "1/5", vec![]), root_n])
    }

    /// Two green, three red, drawn until both greens are out.
    pub fn urn() -> EventTree {
        fn grow(g: u32, r: u32, seen_g: u32) -> Vec<EventNode> {
            if seen_g == 2 || g + r == 0 {
                return vec![];
            }
            let total = g + r;
            let mut out = Vec::new();
            if g > 0 {
                out.push(n("G", &format!("{g}/{total}"), grow(g - 1, r, seen_g + 1)));
            }
            if r > 0 {
                out.push(n("R", &format!("{r}/{total}"), grow(g, r - 1, seen_g)));
            }
            out
        }
        EventTree::new("urn", grow(2, 3, 0))
    }
}
