//! JSON envelope shared by query results, equivalence reports and sample
//! estimates. Field names and order are fixed:
//! `{model, query, value: {num, den, decimal}, matched, condition_matched, warnings}`
//! followed by an optional `details` object.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::{json, Value};

use crate::engine::QueryResult;
use crate::model::{join_path, path_display, EventTree, LeafAtom};
use crate::prob::Prob;
use crate::textio::Query;
use crate::verify::{EquivalenceReport, SampleEstimate};

#[derive(Clone, Debug, Serialize)]
pub struct ExactValue {
    pub num: Value,
    pub den: Value,
    /// 12 significant digits.
    pub decimal: f64,
}

impl From<&Prob> for ExactValue {
    fn from(p: &Prob) -> Self {
        ExactValue {
            num: big_json(p.numer()),
            den: big_json(p.denom()),
            decimal: p.to_sig_digits(12).parse().unwrap_or(f64::NAN),
        }
    }
}

/// Integers that fit in 64 bits stay JSON numbers; larger ones become strings.
fn big_json(n: &BigInt) -> Value {
    match n.to_u64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Envelope {
    pub model: String,
    pub query: String,
    pub value: ExactValue,
    pub matched: Vec<String>,
    pub condition_matched: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl Envelope {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelope serializes")
    }
}

fn labels(tree: &EventTree, atoms: &[LeafAtom]) -> Vec<String> {
    let sep = tree.label_separator();
    atoms.iter().map(|a| join_path(&a.label, sep)).collect()
}

pub fn query_envelope(tree: &EventTree, query: &Query, result: &QueryResult) -> Envelope {
    Envelope {
        model: tree.title.clone(),
        query: query.to_string(),
        value: ExactValue::from(&result.value),
        matched: labels(tree, &result.matched_leaves),
        condition_matched: result
            .condition_leaves
            .as_deref()
            .map(|c| labels(tree, c))
            .unwrap_or_default(),
        warnings: result.warnings.clone(),
        details: None,
    }
}

pub fn equivalence_envelope(tree: &EventTree, report: &EquivalenceReport) -> Envelope {
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| {
            json!({
                "node": path_display(&v.node_path),
                "area_fraction": v.area_fraction.to_string(),
                "path_product": v.path_product.to_string(),
            })
        })
        .collect();
    Envelope {
        model: tree.title.clone(),
        query: "equivalence".to_string(),
        value: ExactValue::from(&report.max_discrepancy),
        matched: Vec::new(),
        condition_matched: Vec::new(),
        warnings: report
            .violations
            .iter()
            .map(|v| {
                format!(
                    "area {} ≠ path product {} at {}",
                    v.area_fraction,
                    v.path_product,
                    path_display(&v.node_path)
                )
            })
            .collect(),
        details: Some(json!({
            "checked_nodes": report.checked_nodes,
            "violations": violations,
        })),
    }
}

/// Exact result alongside the sampled estimate.
pub fn sample_envelope(
    tree: &EventTree,
    query: &Query,
    exact: &QueryResult,
    estimate: &SampleEstimate,
    seed: u64,
) -> Envelope {
    let mut env = query_envelope(tree, query, exact);
    env.details = Some(json!({
        "n": estimate.n,
        "hits": estimate.hits,
        "estimate": estimate.estimate,
        "stderr": estimate.stderr,
        "draws": estimate.draws,
        "seed": seed,
    }));
    env
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::evaluate;
    use crate::model::fixtures::{lung, urn};
    use crate::textio::parse_query;

    #[test]
    fn field_order_is_fixed() {
        let q = parse_query("P(L/S | */S)").unwrap();
        let r = evaluate(&lung(), &q).unwrap();
        let json = query_envelope(&lung(), &q, &r).to_json();
        let keys = ["\"model\"", "\"query\"", "\"value\"", "\"num\"", "\"den\"", "\"decimal\"",
            "\"matched\"", "\"condition_matched\"", "\"warnings\""];
        let pos: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{json}");
        let v: Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["value"]["num"], 23);
        assert_eq!(v["value"]["den"], 117);
        assert_eq!(v["value"]["decimal"], 0.196581196581);
        assert_eq!(v["matched"], json!(["LS"]));
        assert_eq!(v["condition_matched"], json!(["LS", "~LS"]));
        assert!(v.get("details").is_none());
    }

    #[test]
    fn warnings_surface() {
        let q = parse_query("P(*/*/G)").unwrap();
        let r = evaluate(&urn(), &q).unwrap();
        let v: Value = serde_json::from_str(&query_envelope(&urn(), &q, &r).to_json()).unwrap();
        assert_eq!(v["matched"], json!(["GRG", "RGG", "RRGG", "RRGRG"]));
        assert_eq!(v["warnings"].as_array().unwrap().len(), 1);
        assert_eq!(v["value"]["decimal"], 0.4);
    }
}
