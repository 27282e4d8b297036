//! Random valid event trees and patterns, for property tests and fuzzing.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{leaves, EventName, EventNode, EventTree};
use crate::prob::Ratio;
use crate::textio::{Pattern, Segment};

const NAMES: [&str; 8] = ["A", "B", "C", "D", "~A", "~B", "X", "Y"];

#[derive(Clone, Copy, Debug)]
pub struct TreeShape {
    pub max_depth: usize,
    pub max_branching: usize,
    /// Raw integer weights are drawn from `0..=max_weight` and normalized.
    pub max_weight: u32,
    /// Chance that a node above `max_depth` stops early.
    pub stop_probability: f64,
}

impl Default for TreeShape {
    fn default() -> Self {
        TreeShape {
            max_depth: 5,
            max_branching: 4,
            max_weight: 12,
            stop_probability: 0.3,
        }
    }
}

fn siblings<R: Rng>(rng: &mut R, shape: &TreeShape, depth: usize) -> Vec<EventNode> {
    let count = rng.gen_range(1..=shape.max_branching.clamp(1, NAMES.len()));
    let mut names = NAMES.to_vec();
    names.shuffle(rng);
    let mut weights: Vec<u32> = (0..count).map(|_| rng.gen_range(0..=shape.max_weight)).collect();
    if weights.iter().all(|w| *w == 0) {
        let i = rng.gen_range(0..count);
        weights[i] = 1;
    }
    let total: u32 = weights.iter().sum();
    names
        .into_iter()
        .take(count)
        .zip(weights)
        .map(|(name, w)| {
            let children = if depth < shape.max_depth && !rng.gen_bool(shape.stop_probability) {
                siblings(rng, shape, depth + 1)
            } else {
                Vec::new()
            };
            EventNode {
                name: EventName::new(name).expect("static name"),
                cond_prob: Ratio::new(BigInt::from(w), BigInt::from(total)),
                children,
            }
        })
        .collect()
}

/// A valid tree with depth at most `shape.max_depth`.
pub fn random_tree<R: Rng>(rng: &mut R, shape: &TreeShape) -> EventTree {
    EventTree::new("random", siblings(rng, shape, 1))
}

/// A pattern built from a random leaf label, with some positions replaced
/// by wildcards and sometimes a foreign name or an extra segment.
pub fn random_pattern<R: Rng>(rng: &mut R, tree: &EventTree) -> Pattern {
    let atoms = leaves(tree);
    let label = &atoms[rng.gen_range(0..atoms.len())].label;
    let len = rng.gen_range(1..=label.len() + 1);
    let segs: Vec<Segment> = (0..len)
        .map(|i| {
            let roll: f64 = rng.gen();
            match label.get(i) {
                _ if roll < 0.4 => Segment::Wildcard,
                Some(n) if roll < 0.9 => Segment::Name(n.clone()),
                _ => Segment::Name(
                    EventName::new(*NAMES.choose(rng).expect("nonempty")).expect("static"),
                ),
            }
        })
        .collect();
    Pattern::new(segs).expect("nonempty, short")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_trees_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let t = random_tree(&mut rng, &TreeShape::default());
            assert!(validate(&t).is_empty());
            assert!(t.max_depth() <= 5);
            let p = random_pattern(&mut rng, &t);
            assert!(p.len() <= 6);
        }
    }
}
