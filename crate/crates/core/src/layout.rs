//! Geometry for turtleback and tree diagrams.
//!
//! The turtleback layout partitions the full turn of a disk: every node owns
//! an angular interval whose length, as a fraction of a turn, is its path
//! probability. A central sector's area fraction equals its angle fraction,
//! so areas stay exact at every depth. Angles are exact rationals here and
//! only become radians when rendered.

use std::f64::consts::TAU;

use num_traits::Zero;

use crate::error::Error;
use crate::model::{ensure_valid, EventName, EventNode, EventTree, MAX_DEPTH};
use crate::prob::{Prob, Ratio};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionGeometry {
    pub node_path: Vec<EventName>,
    /// Fraction of a full turn, counter-clockwise from 3 o'clock.
    pub angle_start: Prob,
    pub angle_span: Prob,
    pub depth: usize,
    pub is_leaf: bool,
}

impl RegionGeometry {
    pub fn angle_end(&self) -> Ratio {
        self.angle_start.as_ratio() + self.angle_span.as_ratio()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TurtlebackLayout {
    /// Pre-order, root (empty path) first.
    pub regions: Vec<RegionGeometry>,
    pub radius: f64,
}

impl TurtlebackLayout {
    pub fn region(&self, path: &[EventName]) -> Option<&RegionGeometry> {
        self.regions.iter().find(|r| r.node_path == path)
    }

    pub fn leaves(&self) -> impl Iterator<Item = &RegionGeometry> {
        self.regions.iter().filter(|r| r.is_leaf)
    }

    pub fn max_depth(&self) -> usize {
        self.regions.iter().map(|r| r.depth).max().unwrap_or(0)
    }

    /// Children of the root, in order.
    pub fn top_level(&self) -> impl Iterator<Item = &RegionGeometry> {
        self.regions.iter().filter(|r| r.depth == 1)
    }
}

fn check_depth(tree: &EventTree) -> Result<(), Error> {
    let d = tree.max_depth();
    if d > MAX_DEPTH {
        Err(Error::DepthExceeded(d))
    } else {
        Ok(())
    }
}

/// Depth-first proportional subdivision of `[0, 1)`, children in document order.
pub fn layout_turtleback(tree: &EventTree) -> Result<TurtlebackLayout, Error> {
    check_depth(tree)?;
    ensure_valid(tree)?;
    fn go(
        nodes: &[EventNode],
        start: &Ratio,
        span: &Ratio,
        path: &mut Vec<EventName>,
        out: &mut Vec<RegionGeometry>,
    ) -> Result<(), Error> {
        let mut cursor = start.clone();
        for n in nodes {
            let child_span = span * &n.cond_prob;
            path.push(n.name.clone());
            out.push(RegionGeometry {
                node_path: path.clone(),
                angle_start: Prob::from_ratio(cursor.clone())?,
                angle_span: Prob::from_ratio(child_span.clone())?,
                depth: path.len(),
                is_leaf: n.is_leaf(),
            });
            go(&n.children, &cursor, &child_span, path, out)?;
            path.pop();
            cursor += child_span;
        }
        Ok(())
    }
    let mut regions = vec![RegionGeometry {
        node_path: Vec::new(),
        angle_start: Prob::zero(),
        angle_span: Prob::one(),
        depth: 0,
        is_leaf: tree.root_children.is_empty(),
    }];
    go(
        &tree.root_children,
        &Ratio::zero(),
        &Prob::one().into_ratio(),
        &mut Vec::new(),
        &mut regions,
    )?;
    Ok(TurtlebackLayout {
        regions,
        radius: 1.0,
    })
}

/// Area fraction of the circular segment cut off by a chord subtending `theta`.
pub fn segment_fraction(theta: f64) -> f64 {
    (theta - theta.sin()) / TAU
}

/// Central angle of the chord whose segment has area fraction `p`.
///
/// Bisects `θ ↦ (θ − sin θ)/2π`, strictly increasing on `(0, 2π)`, down to
/// float resolution and then checks the residual against `tol`.
pub fn solve_chord_angle(p: &Prob, tol: f64) -> Result<f64, Error> {
    if p.is_zero() || p.is_one() {
        return Err(Error::Domain(p.to_string()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance {tol}")));
    }
    let target = p.to_f64();
    let (mut lo, mut hi) = (0.0f64, TAU);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if segment_fraction(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let res_lo = (segment_fraction(lo) - target).abs();
    let res_hi = (segment_fraction(hi) - target).abs();
    let (theta, residual) = if res_lo <= res_hi { (lo, res_lo) } else { (hi, res_hi) };
    if residual > tol {
        return Err(Error::Tolerance { tol, residual });
    }
    Ok(theta)
}

/// Signed distance from the center to the chord that cuts off a segment of
/// area fraction `p` on the right side, in units of the radius. Runs from
/// 1 (nothing cut) to -1 (everything cut).
pub fn chord_offset(p: &Prob, tol: f64) -> Result<f64, Error> {
    if p.is_zero() {
        return Ok(1.0);
    }
    if p.is_one() {
        return Ok(-1.0);
    }
    Ok((solve_chord_angle(p, tol)? / 2.0).cos())
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodePosition {
    pub path: Vec<EventName>,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeEdge {
    pub parent: Vec<EventName>,
    pub child: Vec<EventName>,
    pub weight: Prob,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeLayout {
    /// Pre-order, root first.
    pub positions: Vec<NodePosition>,
    pub edges: Vec<TreeEdge>,
}

impl TreeLayout {
    pub fn position(&self, path: &[EventName]) -> Option<(f64, f64)> {
        self.positions
            .iter()
            .find(|p| p.path == path)
            .map(|p| (p.x, p.y))
    }

    pub fn width(&self) -> f64 {
        self.positions.iter().map(|p| p.x).fold(0.0, f64::max)
    }

    pub fn height(&self) -> f64 {
        self.positions.iter().map(|p| p.y).fold(0.0, f64::max)
    }
}

/// Layered placement: depth is the layer, leaves sit at consecutive integer
/// x in leaf order, and each internal node is centered over its children.
pub fn layout_tree(tree: &EventTree) -> Result<TreeLayout, Error> {
    check_depth(tree)?;
    fn go(
        nodes: &[EventNode],
        path: &mut Vec<EventName>,
        next_leaf: &mut usize,
        positions: &mut Vec<NodePosition>,
        edges: &mut Vec<TreeEdge>,
    ) -> Result<Vec<f64>, Error> {
        let mut xs = Vec::with_capacity(nodes.len());
        for n in nodes {
            let parent = path.clone();
            path.push(n.name.clone());
            let slot = positions.len();
            positions.push(NodePosition {
                path: path.clone(),
                x: 0.0,
                y: path.len() as f64,
            });
            edges.push(TreeEdge {
                parent,
                child: path.clone(),
                weight: n.weight()?,
            });
            let x = if n.is_leaf() {
                let x = *next_leaf as f64;
                *next_leaf += 1;
                x
            } else {
                mean(&go(&n.children, path, next_leaf, positions, edges)?)
            };
            positions[slot].x = x;
            xs.push(x);
            path.pop();
        }
        Ok(xs)
    }
    let mut positions = vec![NodePosition {
        path: Vec::new(),
        x: 0.0,
        y: 0.0,
    }];
    let mut edges = Vec::new();
    let xs = go(
        &tree.root_children,
        &mut Vec::new(),
        &mut 0,
        &mut positions,
        &mut edges,
    )?;
    if !xs.is_empty() {
        positions[0].x = mean(&xs);
    }
    Ok(TreeLayout { positions, edges })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Converts a fraction of a turn to radians.
pub fn turn_to_radians(turn: &Ratio) -> f64 {
    crate::prob::ratio_to_f64(turn) * TAU
}
