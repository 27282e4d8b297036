//! Independent checks: layout/tree equivalence, partition refinement, and a
//! Monte Carlo sampler used as a statistical oracle for the exact engine.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::label_matches;
use crate::error::Error;
use crate::layout::TurtlebackLayout;
use crate::model::{
    level_partition, path_probability, EventName, EventNode, EventTree, Partition,
};
use crate::prob::{common_denominator, Prob, Ratio};
use crate::textio::Query;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub node_path: Vec<EventName>,
    pub area_fraction: Prob,
    pub path_product: Prob,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub checked_nodes: usize,
    pub max_discrepancy: Prob,
    pub violations: Vec<Violation>,
}

impl EquivalenceReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn node_paths(tree: &EventTree) -> BTreeSet<Vec<EventName>> {
    let mut set = BTreeSet::new();
    set.insert(Vec::new());
    tree.walk(|path, _| {
        set.insert(path.to_vec());
    });
    set
}

/// Compares every region's area fraction with the product of edge weights
/// on its path, recomputed from the tree.
pub fn check_equivalence(
    tree: &EventTree,
    layout: &TurtlebackLayout,
) -> Result<EquivalenceReport, Error> {
    let expected = node_paths(tree);
    let actual: BTreeSet<Vec<EventName>> =
        layout.regions.iter().map(|r| r.node_path.clone()).collect();
    if expected != actual || actual.len() != layout.regions.len() {
        let missing = expected.difference(&actual).count();
        let extra = actual.difference(&expected).count();
        return Err(Error::LayoutMismatch(format!(
            "{missing} tree nodes without a region, {extra} regions without a node, {} regions",
            layout.regions.len()
        )));
    }
    let mut max = Prob::zero();
    let mut violations = Vec::new();
    for r in &layout.regions {
        let product = path_probability(tree, &r.node_path)?;
        let diff = r.angle_span.abs_diff(&product);
        if !diff.is_zero() {
            violations.push(Violation {
                node_path: r.node_path.clone(),
                area_fraction: r.angle_span.clone(),
                path_product: product,
            });
        }
        if diff > max {
            max = diff;
        }
    }
    Ok(EquivalenceReport {
        checked_nodes: layout.regions.len(),
        max_discrepancy: max,
        violations,
    })
}

/// Whether `fine` refines `coarse`: each fine cell extends exactly one
/// coarse cell, every coarse cell is covered, and masses aggregate exactly.
pub fn partition_refines(coarse: &Partition, fine: &Partition) -> bool {
    let mut masses: Vec<Ratio> = vec![Ratio::zero(); coarse.cells.len()];
    for (prefix, p) in &fine.cells {
        let owners: Vec<usize> = coarse
            .cells
            .iter()
            .enumerate()
            .filter(|(_, (c, _))| prefix.starts_with(c))
            .map(|(i, _)| i)
            .collect();
        if owners.len() != 1 {
            return false;
        }
        masses[owners[0]] += p.as_ratio();
    }
    coarse
        .cells
        .iter()
        .zip(&masses)
        .all(|((_, p), m)| p.as_ratio() == m)
}

fn sums_to_one(p: &Partition) -> bool {
    let total = p.cells.iter().fold(Ratio::zero(), |a, (_, x)| a + x.as_ratio());
    total == Prob::one().into_ratio()
}

/// Checks a whole chain `P0, P1, ...` of partitions.
pub fn chain_refines(chain: &[Partition]) -> bool {
    chain.iter().all(sums_to_one) && chain.windows(2).all(|w| partition_refines(&w[0], &w[1]))
}

/// The level partitions of `tree` form a refinement chain down to the leaves.
pub fn check_refinement(tree: &EventTree) -> bool {
    let depth = tree.max_depth();
    let chain: Vec<Partition> = (0..=depth).map(|k| level_partition(tree, k)).collect();
    chain_refines(&chain)
}

/// Integer thresholds for choosing a child: draw `u` uniformly below
/// `total` and take the first child whose cumulative bound exceeds it.
enum Draw {
    Small { total: u64, cumulative: Vec<u64> },
    Big { total: BigUint, cumulative: Vec<BigUint> },
}

struct SamplerNode {
    children: Vec<usize>,
    draw: Option<Draw>,
    leaf: Option<usize>,
}

/// A tree compiled for repeated root-to-leaf walks. Edge weights are put on
/// a common denominator per node so that every draw is an exact integer
/// comparison.
pub struct Sampler {
    nodes: Vec<SamplerNode>,
    labels: Vec<Vec<EventName>>,
}

/// Samples drawn per independent generator stream.
const CHUNK: u64 = 1 << 16;

impl Sampler {
    pub fn new(tree: &EventTree) -> Self {
        let mut s = Sampler {
            nodes: Vec::new(),
            labels: Vec::new(),
        };
        s.nodes.push(SamplerNode {
            children: Vec::new(),
            draw: None,
            leaf: None,
        });
        s.compile(0, &tree.root_children, &mut Vec::new());
        s
    }

    fn compile(&mut self, at: usize, children: &[EventNode], path: &mut Vec<EventName>) {
        if children.is_empty() {
            self.nodes[at].leaf = Some(self.labels.len());
            self.labels.push(path.clone());
            return;
        }
        let denom = common_denominator(children.iter().map(|c| &c.cond_prob));
        let mut acc = BigUint::zero();
        let mut cumulative = Vec::with_capacity(children.len());
        for c in children {
            let scaled = &c.cond_prob * Ratio::from_integer(denom.clone().into());
            acc += scaled.to_integer().to_biguint().unwrap_or_default();
            cumulative.push(acc.clone());
        }
        // a valid tree has acc == denom
        let draw = match (
            acc.to_u64(),
            cumulative.iter().map(ToPrimitive::to_u64).collect::<Option<Vec<u64>>>(),
        ) {
            (Some(total), Some(cumulative)) => Draw::Small { total, cumulative },
            _ => Draw::Big {
                total: acc,
                cumulative,
            },
        };
        self.nodes[at].draw = Some(draw);
        for c in children {
            let idx = self.nodes.len();
            self.nodes.push(SamplerNode {
                children: Vec::new(),
                draw: None,
                leaf: None,
            });
            self.nodes[at].children.push(idx);
            path.push(c.name.clone());
            self.compile(idx, &c.children, path);
            path.pop();
        }
    }

    pub fn leaf_labels(&self) -> &[Vec<EventName>] {
        &self.labels
    }

    /// One root-to-leaf walk; returns the leaf index in leaf order.
    pub fn sample<R: RngCore>(&self, rng: &mut R) -> usize {
        let mut at = 0;
        loop {
            let node = &self.nodes[at];
            if let Some(leaf) = node.leaf {
                return leaf;
            }
            let pick = match node.draw.as_ref().expect("internal node") {
                Draw::Small { total, cumulative } => {
                    let u = rng.gen_range(0..*total);
                    cumulative.iter().position(|c| u < *c)
                }
                Draw::Big { total, cumulative } => {
                    let u = uniform_below(rng, total);
                    cumulative.iter().position(|c| u < *c)
                }
            };
            at = node.children[pick.expect("draw below total")];
        }
    }

    /// Leaf indices for `n` walks. The walks are split into fixed-size
    /// chunks, each with its own ChaCha8 stream keyed by `seed`, so the
    /// result is the same however many threads run it.
    pub fn sample_many(&self, n: u64, seed: u64) -> Vec<usize> {
        let chunks = n.div_ceil(CHUNK);
        let run_chunk = |c: u64| -> Vec<usize> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(|_| self.sample(&mut rng)).collect()
        };
        let threads = std::thread::available_parallelism()
            .map(|t| t.get() as u64)
            .unwrap_or(1)
            .min(chunks)
            .max(1);
        if threads == 1 {
            return (0..chunks).flat_map(run_chunk).collect();
        }
        let mut parts: Vec<Vec<usize>> = vec![Vec::new(); chunks as usize];
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|t| {
                    let run_chunk = &run_chunk;
                    scope.spawn(move || {
                        (t..chunks)
                            .step_by(threads as usize)
                            .map(|c| (c, run_chunk(c)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            for h in handles {
                for (c, v) in h.join().expect("sampler thread") {
                    parts[c as usize] = v;
                }
            }
        });
        parts.concat()
    }
}

fn uniform_below<R: RngCore>(rng: &mut R, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let bytes = bits.div_ceil(8) as usize;
    let excess = (bytes as u64 * 8 - bits) as u32;
    let mut buf = vec![0u8; bytes];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= 0xffu8 >> excess;
        let v = BigUint::from_bytes_be(&buf);
        if &v < bound {
            return v;
        }
    }
}

/// Labels of `n` seeded root-to-leaf walks.
pub fn sample_paths(tree: &EventTree, n: u64, seed: u64) -> Vec<Vec<EventName>> {
    let sampler = Sampler::new(tree);
    sampler
        .sample_many(n, seed)
        .into_iter()
        .map(|i| sampler.labels[i].clone())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleEstimate {
    /// Samples the estimate is based on: all walks, or the walks that hit
    /// the condition for a conditional query.
    pub n: u64,
    pub hits: u64,
    pub estimate: f64,
    pub stderr: f64,
    /// Total walks drawn.
    pub draws: u64,
}

impl SampleEstimate {
    fn from_counts(n: u64, hits: u64, draws: u64) -> Self {
        let p = hits as f64 / n as f64;
        SampleEstimate {
            n,
            hits,
            estimate: p,
            stderr: (p * (1.0 - p) / n as f64).sqrt(),
            draws,
        }
    }

    /// Whether `exact` lies within `k` standard errors of the estimate.
    pub fn agrees_with(&self, exact: f64, k: f64) -> bool {
        (self.estimate - exact).abs() <= k * self.stderr
    }
}

pub fn estimate_query(
    tree: &EventTree,
    query: &Query,
    n: u64,
    seed: u64,
) -> Result<SampleEstimate, Error> {
    let n = n.max(1);
    let sampler = Sampler::new(tree);
    let target: Vec<bool> = sampler
        .labels
        .iter()
        .map(|l| label_matches(l, &query.target))
        .collect();
    let condition: Vec<bool> = sampler
        .labels
        .iter()
        .map(|l| query.condition.as_ref().is_none_or(|c| label_matches(l, c)))
        .collect();
    let (mut cond_hits, mut hits) = (0u64, 0u64);
    for leaf in sampler.sample_many(n, seed) {
        if condition[leaf] {
            cond_hits += 1;
            if target[leaf] {
                hits += 1;
            }
        }
    }
    if cond_hits == 0 {
        return Err(Error::NoConditionHits(n));
    }
    Ok(SampleEstimate::from_counts(cond_hits, hits, n))
}
