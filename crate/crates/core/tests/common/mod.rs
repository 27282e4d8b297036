#![allow(dead_code)]

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use turtleglyph::synth::{random_tree, TreeShape};
use turtleglyph::{parse_model, EventTree};

pub fn corpus(name: &str) -> EventTree {
    let src = turtleglyph::corpus::ALL
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .expect("corpus file");
    parse_model(src).expect("corpus parses")
}

/// 1000 trees of depth ≤ 5 and branching ≤ 4 from a fixed seed.
pub fn random_trees(count: usize, seed: u64) -> Vec<EventTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = TreeShape::default();
    (0..count).map(|_| random_tree(&mut rng, &shape)).collect()
}

/// One leaf sector recovered from SVG: its `<title>` and the angle its arcs
/// sweep, as a fraction of a full turn.
#[derive(Debug)]
pub struct Sector {
    pub title: String,
    pub exact: f64,
    pub sweep_turns: f64,
}

fn parse_fraction(s: &str) -> f64 {
    let (n, d) = s.split_once('/').expect("fraction");
    n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
}

/// Re-derives sector sweeps from the path geometry alone: each arc's end
/// points are converted back to angles about the canvas center.
pub fn sectors(svg: &str) -> Vec<Sector> {
    let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
    let root = doc.root_element();
    let size: f64 = root.attribute("width").unwrap().parse().unwrap();
    let (cx, cy) = (size / 2.0, size / 2.0);
    let angle = |x: f64, y: f64| (cy - y).atan2(x - cx);
    let mut out = Vec::new();
    for node in doc.descendants().filter(|n| n.attribute("class") == Some("leaf")) {
        let title = node
            .children()
            .find(|c| c.has_tag_name("title"))
            .and_then(|t| t.text())
            .unwrap()
            .to_string();
        let exact = parse_fraction(title.rsplit(' ').next().unwrap());
        let toks: Vec<&str> = node.attribute("d").unwrap().split_whitespace().collect();
        let mut i = 0;
        let (mut px, mut py) = (0.0, 0.0);
        let mut sweep = 0.0;
        while i < toks.len() {
            let f = |k: usize| toks[i + k].parse::<f64>().unwrap();
            match toks[i] {
                "M" | "L" => {
                    (px, py) = (f(1), f(2));
                    i += 3;
                }
                "A" => {
                    assert_eq!(toks[i + 5], "0", "sweep flag must be counter-clockwise");
                    let (x, y) = (f(6), f(7));
                    let mut d = (angle(x, y) - angle(px, py)).rem_euclid(TAU);
                    if toks[i + 4] == "1" && d < 1e-12 {
                        d = TAU;
                    }
                    sweep += d;
                    (px, py) = (x, y);
                    i += 8;
                }
                "Z" => i += 1,
                other => panic!("unexpected path command {other}"),
            }
        }
        out.push(Sector {
            title,
            exact,
            sweep_turns: sweep / TAU,
        });
    }
    out
}
