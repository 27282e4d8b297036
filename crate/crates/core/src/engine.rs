//! Query evaluation over leaf sets.
//!
//! An event is the set of leaf atoms whose labels match a pattern, so every
//! probability here is a sum of path products. Conditionals intersect the
//! two leaf sets by matching each leaf against both patterns.

use num_traits::Zero;

use crate::error::Error;
use crate::model::{leaves, EventName, EventTree, LeafAtom};
use crate::prob::{Prob, Ratio};
use crate::textio::{Pattern, Query, Segment};

pub const TRUNCATION_WARNING: &str =
    "truncated leaves excluded; complement queries at this position may be inexact";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryResult {
    pub value: Prob,
    pub numerator_mass: Prob,
    pub denominator_mass: Prob,
    pub matched_leaves: Vec<LeafAtom>,
    pub condition_leaves: Option<Vec<LeafAtom>>,
    pub warnings: Vec<String>,
}

impl QueryResult {
    pub fn is_truncated(&self) -> bool {
        self.warnings.iter().any(|w| w == TRUNCATION_WARNING)
    }
}

/// Prefix match: the label must be at least as long as the pattern.
pub fn pattern_match(leaf: &LeafAtom, pattern: &Pattern) -> bool {
    label_matches(&leaf.label, pattern)
}

pub fn label_matches(label: &[EventName], pattern: &Pattern) -> bool {
    label.len() >= pattern.len()
        && pattern.segments().iter().zip(label).all(|(seg, name)| match seg {
            Segment::Wildcard => true,
            Segment::Name(n) => n == name,
        })
}

fn mass(atoms: &[LeafAtom]) -> Prob {
    let total = atoms
        .iter()
        .fold(Ratio::zero(), |acc, a| acc + a.prob.as_ratio());
    Prob::from_ratio(total).expect("leaf masses of a valid tree sum to at most 1")
}

fn truncation_warnings(atoms: &[LeafAtom], patterns: &[&Pattern]) -> Vec<String> {
    let longest = patterns.iter().map(|p| p.len()).max().unwrap_or(0);
    if atoms.iter().any(|a| a.depth() < longest) {
        vec![TRUNCATION_WARNING.to_string()]
    } else {
        Vec::new()
    }
}

pub fn event_probability(tree: &EventTree, pattern: &Pattern) -> QueryResult {
    let atoms = leaves(tree);
    let warnings = truncation_warnings(&atoms, &[pattern]);
    let matched: Vec<LeafAtom> = atoms
        .into_iter()
        .filter(|a| pattern_match(a, pattern))
        .collect();
    let numerator_mass = mass(&matched);
    QueryResult {
        value: numerator_mass.clone(),
        numerator_mass,
        denominator_mass: Prob::one(),
        matched_leaves: matched,
        condition_leaves: None,
        warnings,
    }
}

pub fn conditional_probability(
    tree: &EventTree,
    target: &Pattern,
    condition: &Pattern,
) -> Result<QueryResult, Error> {
    let atoms = leaves(tree);
    let warnings = truncation_warnings(&atoms, &[target, condition]);
    let (cond, _): (Vec<LeafAtom>, Vec<LeafAtom>) = atoms
        .into_iter()
        .partition(|a| pattern_match(a, condition));
    let denominator_mass = mass(&cond);
    if denominator_mass.is_zero() {
        return Err(Error::ZeroCondition);
    }
    let both: Vec<LeafAtom> = cond
        .iter()
        .filter(|a| pattern_match(a, target))
        .cloned()
        .collect();
    let numerator_mass = mass(&both);
    let value = numerator_mass
        .ratio_to(&denominator_mass)
        .expect("intersection mass never exceeds condition mass");
    Ok(QueryResult {
        value,
        numerator_mass,
        denominator_mass,
        matched_leaves: both,
        condition_leaves: Some(cond),
        warnings,
    })
}

pub fn evaluate(tree: &EventTree, query: &Query) -> Result<QueryResult, Error> {
    match &query.condition {
        Some(c) => conditional_probability(tree, &query.target, c),
        None => Ok(event_probability(tree, &query.target)),
    }
}

/// Worked solution, one line per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplanationSteps(pub Vec<String>);

impl std::fmt::Display for ExplanationSteps {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Edge weights along a leaf's label, root first.
fn factors(tree: &EventTree, label: &[EventName]) -> Vec<Prob> {
    let mut out = Vec::with_capacity(label.len());
    let mut level = &tree.root_children;
    for name in label {
        let Some(node) = level.iter().find(|n| &n.name == name) else {
            break;
        };
        out.push(node.weight().unwrap_or_else(|_| Prob::zero()));
        level = &node.children;
    }
    out
}

fn short(p: &Prob) -> String {
    if p.is_one() {
        "1".to_string()
    } else if p.is_zero() {
        "0".to_string()
    } else {
        p.to_string()
    }
}

fn approx(p: &Prob) -> String {
    let dec = p.to_sig_digits(4);
    if p.is_exact_at(4) {
        format!("= {dec}")
    } else {
        format!("≈ {dec}")
    }
}

fn sum_steps(tree: &EventTree, atoms: &[LeafAtom], sep: &str, indent: &str) -> Vec<String> {
    if atoms.is_empty() {
        return vec![format!("{indent}no atoms match; probability 0")];
    }
    let mut out = Vec::new();
    for a in atoms {
        let fs: Vec<String> = factors(tree, &a.label).iter().map(short).collect();
        out.push(format!(
            "{indent}{}: {} = {}",
            crate::model::join_path(&a.label, sep),
            fs.join(" · "),
            short(&a.prob)
        ));
    }
    let total = mass(atoms);
    if atoms.len() > 1 {
        let terms: Vec<String> = atoms.iter().map(|a| short(&a.prob)).collect();
        out.push(format!(
            "{indent}total: {} = {} {}",
            terms.join(" + "),
            short(&total),
            approx(&total)
        ));
    } else {
        out.push(format!("{indent}total: {} {}", short(&total), approx(&total)));
    }
    out
}

pub fn explain(tree: &EventTree, query: &Query) -> Result<ExplanationSteps, Error> {
    let result = evaluate(tree, query)?;
    let sep = tree.label_separator();
    let mut steps = Vec::new();
    match &query.condition {
        None => {
            if result.matched_leaves.is_empty() {
                steps.push("no atoms match; probability 0".to_string());
            } else {
                steps.push(format!(
                    "{query}: sum of path products over {} matching atoms",
                    result.matched_leaves.len()
                ));
                steps.extend(sum_steps(tree, &result.matched_leaves, sep, "  "));
            }
        }
        Some(cond) => {
            steps.push(format!("numerator P({} ∧ {cond}):", query.target));
            steps.extend(sum_steps(tree, &result.matched_leaves, sep, "  "));
            steps.push(format!("denominator P({cond}):"));
            let cond_atoms = result.condition_leaves.as_deref().unwrap_or_default();
            steps.extend(sum_steps(tree, cond_atoms, sep, "  "));
            steps.push(format!(
                "ratio: ({}) / ({}) = {} {}",
                short(&result.numerator_mass),
                short(&result.denominator_mass),
                short(&result.value),
                approx(&result.value)
            ));
        }
    }
    for w in &result.warnings {
        steps.push(format!("warning: {w}"));
    }
    Ok(ExplanationSteps(steps))
}
