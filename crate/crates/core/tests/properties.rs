mod common;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use turtleglyph::engine::{conditional_probability, event_probability};
use turtleglyph::synth::{random_pattern, random_tree, TreeShape};
use turtleglyph::verify::{check_refinement, estimate_query};
use turtleglyph::{
    leaves, level_partition, parse_model, path_probability, serialize_model, EventName,
    EventTree, Pattern, Prob, Query, Segment,
};

fn tree_from(seed: u64) -> EventTree {
    random_tree(&mut ChaCha8Rng::seed_from_u64(seed), &TreeShape::default())
}

fn sum(probs: impl IntoIterator<Item = Prob>) -> BigRational {
    probs
        .into_iter()
        .fold(BigRational::zero(), |a, p| a + p.into_ratio())
}

/// Every node path in pre-order.
fn node_paths(tree: &EventTree) -> Vec<Vec<EventName>> {
    let mut out = Vec::new();
    tree.walk(|path, _| out.push(path.to_vec()));
    out
}

/// Independent matcher: written from the prefix rule, not shared with the engine.
fn matches(label: &[EventName], pattern: &Pattern) -> bool {
    if label.len() < pattern.len() {
        return false;
    }
    for (i, seg) in pattern.segments().iter().enumerate() {
        if let Segment::Name(n) = seg {
            if &label[i] != n {
                return false;
            }
        }
    }
    true
}

fn mass(tree: &EventTree, keep: impl Fn(&[EventName]) -> bool) -> BigRational {
    sum(leaves(tree)
        .into_iter()
        .filter(|a| keep(&a.label))
        .map(|a| a.prob))
}

fn with_wildcard(p: &Pattern) -> Pattern {
    let mut segs = p.segments().to_vec();
    segs.push(Segment::Wildcard);
    Pattern::new(segs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn leaf_mass_is_exactly_one(seed: u64) {
        let t = tree_from(seed);
        prop_assert!(sum(leaves(&t).into_iter().map(|a| a.prob)).is_one());
    }

    #[test]
    fn round_trip(seed: u64) {
        let t = tree_from(seed);
        prop_assert_eq!(parse_model(&serialize_model(&t)).unwrap(), t);
    }

    #[test]
    fn path_probability_is_prefix_mass(seed: u64) {
        let t = tree_from(seed);
        for path in node_paths(&t) {
            let p = path_probability(&t, &path).unwrap().into_ratio();
            let below = mass(&t, |l| l.starts_with(&path));
            prop_assert_eq!(p, below);
        }
    }

    #[test]
    fn levels_refine_and_aggregate(seed: u64) {
        let t = tree_from(seed);
        prop_assert!(check_refinement(&t));
        for k in 0..=t.max_depth() {
            let coarse = level_partition(&t, k);
            let fine = level_partition(&t, k + 1);
            prop_assert!(sum(coarse.cells.iter().map(|c| c.1.clone())).is_one());
            for (prefix, p) in &coarse.cells {
                let children: BigRational = sum(fine
                    .cells
                    .iter()
                    .filter(|(f, _)| f.starts_with(prefix))
                    .map(|c| c.1.clone()));
                prop_assert_eq!(&children, p.as_ratio());
            }
        }
    }

    #[test]
    fn trailing_wildcard_never_increases(seed: u64, pseed: u64) {
        let t = tree_from(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(pseed);
        let p = random_pattern(&mut rng, &t);
        let longer = with_wildcard(&p);
        let a = event_probability(&t, &p).value;
        let b = event_probability(&t, &longer).value;
        prop_assert!(b.as_ratio() <= a.as_ratio());
        // with every leaf at least as long, nothing is dropped
        if leaves(&t).iter().all(|l| l.depth() >= longer.len()) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn complement_sum(seed: u64) {
        let t = tree_from(seed);
        let atoms = leaves(&t);
        let shortest = atoms.iter().map(|a| a.depth()).min().unwrap();
        for k in 1..=shortest {
            let names: BTreeSet<EventName> =
                atoms.iter().map(|a| a.label[k - 1].clone()).collect();
            let total = sum(names.into_iter().map(|x| {
                event_probability(&t, &Pattern::at_position(k, x).unwrap()).value
            }));
            prop_assert!(total.is_one(), "position {}: {}", k, total);
        }
    }

    #[test]
    fn chain_rule(seed: u64) {
        let t = tree_from(seed);
        for path in node_paths(&t).into_iter().filter(|p| !p.is_empty()) {
            let pat = Pattern::path(&path).unwrap();
            prop_assert_eq!(
                event_probability(&t, &pat).value,
                path_probability(&t, &path).unwrap()
            );
        }
    }

    #[test]
    fn bayes_symmetry(seed: u64, pseed: u64) {
        let t = tree_from(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(pseed);
        let a = random_pattern(&mut rng, &t);
        let b = random_pattern(&mut rng, &t);
        let pa = event_probability(&t, &a).value;
        let pb = event_probability(&t, &b).value;
        prop_assume!(!pa.is_zero() && !pb.is_zero());
        let a_given_b = conditional_probability(&t, &a, &b).unwrap();
        let b_given_a = conditional_probability(&t, &b, &a).unwrap();
        let both = mass(&t, |l| matches(l, &a) && matches(l, &b));
        prop_assert_eq!(a_given_b.value.into_ratio() * pb.into_ratio(), both.clone());
        prop_assert_eq!(b_given_a.value.into_ratio() * pa.into_ratio(), both);
    }

    #[test]
    fn conditional_matches_recomputation(seed: u64, pseed: u64) {
        let t = tree_from(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(pseed);
        let target = random_pattern(&mut rng, &t);
        let cond = random_pattern(&mut rng, &t);
        let den = mass(&t, |l| matches(l, &cond));
        let got = conditional_probability(&t, &target, &cond);
        if den.is_zero() {
            prop_assert!(got.is_err());
        } else {
            let num = mass(&t, |l| matches(l, &cond) && matches(l, &target));
            let r = got.unwrap();
            prop_assert_eq!(r.value.as_ratio(), &(num.clone() / &den));
            prop_assert_eq!(r.numerator_mass.into_ratio(), num);
            prop_assert_eq!(r.denominator_mass.into_ratio(), den);
        }
    }

    #[test]
    fn numeric_forms_agree(n in 0u32..=100) {
        let pct: Prob = format!("{n}%").parse().unwrap();
        let dec: Prob = format!("{}", f64::from(n) / 100.0).parse().unwrap();
        let frac: Prob = format!("{n}/100").parse().unwrap();
        prop_assert_eq!(&pct, &dec);
        prop_assert_eq!(&pct, &frac);
    }

    #[test]
    fn parser_never_panics(src in "model \"t\"\n([ A-Z~:0-9./%#\t]{0,12}\n){0,6}") {
        if let Err(turtleglyph::Error::Syntax(s)) = parse_model(&src) {
            prop_assert!(s.line >= 1 && s.column >= 1);
        }
    }
}

#[test]
fn rational_arithmetic_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draw = |rng: &mut ChaCha8Rng| {
        let d: i64 = rng.gen_range(1..=10_000);
        BigRational::new(BigInt::from(rng.gen_range(0..=d)), BigInt::from(d))
    };
    let mut acc = BigRational::one();
    for i in 0..10_000 {
        let (a, b, c) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        assert_eq!((&a + &b) + &c, &a + (&b + &c));
        assert_eq!((&a * &b) * &c, &a * (&b * &c));
        let r = if i % 2 == 0 { &acc * &a } else { (&acc + &a) / BigInt::from(2) };
        assert!(r.numer().gcd(r.denom()).is_one(), "{r} not reduced");
        let p = Prob::from_ratio(r.clone()).expect("stays in [0,1]");
        assert!(p.numer().gcd(p.denom()).is_one());
        // restart before denominators grow past a few hundred bits
        acc = if r.is_zero() || r.denom().bits() > 512 { BigRational::one() } else { r };
    }
}

/// Engine and sampler agree within 4 standard errors in at least 99% of
/// trials.
#[test]
fn oracle_concordance() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let shape = TreeShape::default();
    let (mut trials, mut agree) = (0, 0);
    while trials < 200 {
        let t = random_tree(&mut rng, &shape);
        let target = random_pattern(&mut rng, &t);
        let condition = rng.gen_bool(0.5).then(|| random_pattern(&mut rng, &t));
        let q = Query { target, condition };
        let Ok(exact) = turtleglyph::evaluate(&t, &q) else { continue };
        let est = match estimate_query(&t, &q, 100_000, rng.gen()) {
            Ok(e) => e,
            // a condition too rare to be drawn
            Err(_) => continue,
        };
        trials += 1;
        let x = exact.value.to_f64();
        // a degenerate estimate has zero stderr; it agrees only when exact
        if est.agrees_with(x, 4.0) || (est.stderr == 0.0 && (est.estimate - x).abs() < 1e-12) {
            agree += 1;
        }
    }
    assert!(agree * 100 >= trials * 99, "{agree}/{trials} within 4·stderr");
}
