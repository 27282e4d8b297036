mod common;

use common::{corpus, sectors};
use turtleglyph::layout::{layout_tree, layout_turtleback};
use turtleglyph::render::{render_tree, render_turtleback, render_turtleback_chord, Style};

fn turtle(name: &str) -> String {
    render_turtleback(&layout_turtleback(&corpus(name)).unwrap(), &Style::default())
        .unwrap()
        .svg
}

#[test]
fn urn_sweeps_resum_to_a_full_turn() {
    let secs = sectors(&turtle("urn.tb"));
    assert_eq!(secs.len(), 10);
    let degrees: f64 = secs.iter().map(|s| s.sweep_turns * 360.0).sum();
    assert!((degrees - 360.0).abs() <= 1e-9, "{degrees}");
    for s in &secs {
        assert!((s.sweep_turns - 0.1).abs() <= 1e-9, "{}", s.title);
    }
}

#[test]
fn lung_sector_and_label() {
    let svg = turtle("lung.tb");
    let secs = sectors(&svg);
    let ls = secs.iter().find(|s| s.title.starts_with("LS ")).unwrap();
    assert!((ls.sweep_turns * 360.0 - 360.0 * 69.0 / 1250.0).abs() <= 1e-9);
    assert!(svg.contains(">LS 5.52%<"), "label missing");
}

#[test]
fn single_leaf_is_a_full_circle() {
    let t = turtleglyph::parse_model("model \"t\"\nX: 1\n").unwrap();
    let svg = render_turtleback(&layout_turtleback(&t).unwrap(), &Style::default())
        .unwrap()
        .svg;
    let secs = sectors(&svg);
    assert_eq!(secs.len(), 1);
    assert!((secs[0].sweep_turns - 1.0).abs() <= 1e-9);
}

#[test]
fn no_external_references() {
    for (name, _) in turtleglyph::corpus::ALL {
        let t = corpus(name);
        let style = Style::default();
        let mut docs = vec![
            turtle(name),
            render_tree(&layout_tree(&t).unwrap(), &style).unwrap().svg,
        ];
        if t.root_children.len() == 2 {
            docs.push(render_turtleback_chord(&layout_turtleback(&t).unwrap(), &style).unwrap().svg);
        }
        for svg in docs {
            let doc = roxmltree::Document::parse(&svg).unwrap();
            for n in doc.descendants() {
                for a in n.attributes() {
                    assert!(a.name() != "href", "{name}: external reference");
                    assert!(!a.value().contains("url("), "{name}: url reference");
                }
            }
        }
    }
}

#[test]
fn tree_edge_labels() {
    let style = Style::default();
    let lung = render_tree(&layout_tree(&corpus("lung.tb")).unwrap(), &style).unwrap().svg;
    assert!(lung.contains(">6%<") && lung.contains(">92%<"));
    assert!(lung.contains(">*<"));
    let lucky = render_tree(&layout_tree(&corpus("luckydraw.tb")).unwrap(), &style).unwrap().svg;
    assert!(lucky.contains(">80%<") && lucky.contains(">25%<"));
}
