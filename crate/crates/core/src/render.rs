//! Deterministic SVG output for turtleback and tree diagrams.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::Error;
use crate::layout::{chord_offset, turn_to_radians, RegionGeometry, TreeLayout, TurtlebackLayout};
use crate::model::{join_path, EventName};
use crate::prob::{Prob, Ratio};

pub const PALETTE_ENV: &str = "TURTLEGLYPH_PALETTE";

/// Labels for sectors narrower than this many degrees go to the legend.
const MIN_LABEL_DEGREES: f64 = 0.5;
/// Rough advance width of one glyph, in font sizes.
const GLYPH_WIDTH: f64 = 0.6;
const CHORD_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelMode {
    Concatenated,
    SlashSeparated,
    /// Concatenate when every name is a single character (optionally `~`-prefixed).
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Style {
    pub canvas_size: u32,
    pub font_size: f64,
    pub palette: Vec<String>,
    pub stroke_width_by_depth: Vec<f64>,
    pub label_mode: LabelMode,
}

impl Default for Style {
    fn default() -> Self {
        Style {
            canvas_size: 600,
            font_size: 14.0,
            palette: [
                "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69",
                "#fccde5", "#d9d9d9", "#bc80bd",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            stroke_width_by_depth: vec![3.0, 2.0, 1.25, 0.75, 0.5],
            label_mode: LabelMode::Auto,
        }
    }
}

impl Style {
    pub fn validate(&self) -> Result<(), Error> {
        if self.canvas_size < 100 {
            return Err(Error::Style(format!(
                "canvas size {} is below 100",
                self.canvas_size
            )));
        }
        if self.palette.is_empty() {
            return Err(Error::Style("palette is empty".into()));
        }
        if let Some(bad) = self.palette.iter().find(|c| !is_hex_color(c)) {
            return Err(Error::Style(format!("{bad:?} is not a #rrggbb color")));
        }
        if self.font_size.is_nan() || self.font_size <= 0.0 {
            return Err(Error::Style("font size must be positive".into()));
        }
        if self.stroke_width_by_depth.is_empty() {
            return Err(Error::Style("stroke widths are empty".into()));
        }
        Ok(())
    }

    /// Default style with the palette taken from `TURTLEGLYPH_PALETTE` when set.
    pub fn from_env() -> Result<Self, Error> {
        let mut style = Style::default();
        if let Ok(v) = std::env::var(PALETTE_ENV) {
            style.palette = parse_palette(&v)?;
        }
        Ok(style)
    }

    fn stroke(&self, depth: usize) -> f64 {
        let i = depth.min(self.stroke_width_by_depth.len() - 1);
        self.stroke_width_by_depth[i]
    }

    fn fill(&self, i: usize) -> &str {
        &self.palette[i % self.palette.len()]
    }

    fn separator(&self, all_short: bool) -> &'static str {
        match self.label_mode {
            LabelMode::Concatenated => "",
            LabelMode::SlashSeparated => "/",
            LabelMode::Auto if all_short => "",
            LabelMode::Auto => "/",
        }
    }
}

/// Comma-separated `#rrggbb` list.
pub fn parse_palette(s: &str) -> Result<Vec<String>, Error> {
    let colors: Vec<String> = s
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .filter(|c| !c.is_empty())
        .collect();
    if colors.is_empty() {
        return Err(Error::Style("palette is empty".into()));
    }
    if let Some(bad) = colors.iter().find(|c| !is_hex_color(c)) {
        return Err(Error::Style(format!("{bad:?} is not a #rrggbb color")));
    }
    Ok(colors)
}

fn is_hex_color(c: &str) -> bool {
    c.len() == 7 && c.starts_with('#') && c[1..].bytes().all(|b| b.is_ascii_hexdigit())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RenderWarning {
    /// The label is wider than its region at the given font size.
    CanvasTooSmall { label: String },
}

impl std::fmt::Display for RenderWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RenderWarning::CanvasTooSmall { label } => {
                write!(f, "label {label:?} does not fit its region at this canvas size")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub svg: String,
    pub warnings: Vec<RenderWarning>,
}

/// Shortest round-trip decimal, with `-0` folded to `0`.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn open_svg(out: &mut String, size: u32) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
}

fn all_short(paths: impl Iterator<Item = impl AsRef<[EventName]>>) -> bool {
    let mut ok = true;
    for p in paths {
        ok &= p.as_ref().iter().all(EventName::is_short);
    }
    ok
}

fn leaf_text(region: &RegionGeometry, sep: &str) -> String {
    format!(
        "{} {}",
        join_path(&region.node_path, sep),
        region.angle_span.to_percent(4)
    )
}

fn too_narrow(span: &Prob) -> bool {
    span.to_f64() * 360.0 < MIN_LABEL_DEGREES
}

struct Disk {
    cx: f64,
    cy: f64,
    r: f64,
}

impl Disk {
    fn new(style: &Style) -> Self {
        let c = style.canvas_size as f64;
        Disk {
            cx: c / 2.0,
            cy: c / 2.0,
            r: c * 0.4,
        }
    }

    /// Screen point at angle `radians` (counter-clockwise from 3 o'clock)
    /// and `k` times the radius.
    fn at(&self, radians: f64, k: f64) -> (f64, f64) {
        (
            self.cx + self.r * k * radians.cos(),
            self.cy - self.r * k * radians.sin(),
        )
    }
}

fn legend(out: &mut String, entries: &[String], style: &Style) {
    if entries.is_empty() {
        return;
    }
    let c = style.canvas_size as f64;
    let fs = style.font_size * 0.8;
    let x = fs;
    let mut y = c - fs * (entries.len() as f64 + 0.5);
    let _ = writeln!(
        out,
        r#"<g class="legend" font-family="sans-serif" font-size="{}">"#,
        num(fs)
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}">small regions:</text>"#, num(x), num(y));
    for e in entries {
        y += fs;
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, num(x), num(y), escape(e));
    }
    let _ = writeln!(out, "</g>");
}

/// Turtleback diagram as central sectors, one filled path per leaf.
pub fn render_turtleback(layout: &TurtlebackLayout, style: &Style) -> Result<Rendered, Error> {
    style.validate()?;
    let disk = Disk::new(style);
    let sep = style.separator(all_short(layout.regions.iter().map(|r| &r.node_path)));
    let mut out = String::new();
    let mut warnings = Vec::new();
    open_svg(&mut out, style.canvas_size);

    // sectors
    let _ = writeln!(out, r#"<g class="sectors" stroke="none">"#);
    for (i, leaf) in layout.leaves().enumerate() {
        let title = format!(
            "{} {}",
            join_path(&leaf.node_path, sep),
            leaf.angle_span
        );
        if leaf.angle_span.is_zero() {
            continue;
        }
        let d = if leaf.angle_span.is_one() {
            let (x0, y0) = disk.at(0.0, 1.0);
            let (x1, y1) = disk.at(TAU / 2.0, 1.0);
            format!(
                "M {} {} A {r} {r} 0 1 0 {} {} A {r} {r} 0 1 0 {} {} Z",
                num(x0),
                num(y0),
                num(x1),
                num(y1),
                num(x0),
                num(y0),
                r = num(disk.r)
            )
        } else {
            let a0 = turn_to_radians(leaf.angle_start.as_ratio());
            let a1 = turn_to_radians(&leaf.angle_end());
            let (x0, y0) = disk.at(a0, 1.0);
            let (x1, y1) = disk.at(a1, 1.0);
            let large = u8::from(leaf.angle_span.to_f64() > 0.5);
            format!(
                "M {} {} L {} {} A {r} {r} 0 {large} 0 {} {} Z",
                num(disk.cx),
                num(disk.cy),
                num(x0),
                num(y0),
                num(x1),
                num(y1),
                r = num(disk.r)
            )
        };
        let _ = writeln!(
            out,
            r#"<path class="leaf" d="{d}" fill="{}"><title>{}</title></path>"#,
            style.fill(i),
            escape(&title)
        );
    }
    let _ = writeln!(out, "</g>");

    // boundaries, coarse to fine
    let _ = writeln!(out, r#"<g class="boundaries" stroke="black" fill="none">"#);
    let _ = writeln!(
        out,
        r#"<circle cx="{}" cy="{}" r="{}" stroke-width="{}"/>"#,
        num(disk.cx),
        num(disk.cy),
        num(disk.r),
        num(style.stroke(0))
    );
    for depth in 1..=layout.max_depth() {
        for line in boundary_starts(layout, depth) {
            let (x, y) = disk.at(turn_to_radians(line.as_ratio()), 1.0);
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="{}"/>"#,
                num(disk.cx),
                num(disk.cy),
                num(x),
                num(y),
                num(style.stroke(depth))
            );
        }
    }
    let _ = writeln!(out, "</g>");

    // labels
    let mut suppressed = Vec::new();
    let _ = writeln!(
        out,
        r#"<g class="labels" font-family="sans-serif" font-size="{}" text-anchor="middle" dominant-baseline="central">"#,
        num(style.font_size)
    );
    for leaf in layout.leaves() {
        let text = leaf_text(leaf, sep);
        if too_narrow(&leaf.angle_span) {
            if !leaf.angle_span.is_zero() {
                suppressed.push(text);
            }
            continue;
        }
        let mid = if leaf.angle_span.is_one() {
            0.0
        } else {
            let m = leaf.angle_start.as_ratio()
                + leaf.angle_span.as_ratio() / Ratio::from_integer(2.into());
            turn_to_radians(&m)
        };
        let (x, y) = disk.at(mid, 2.0 / 3.0);
        let room = if leaf.angle_span.to_f64() >= 0.5 {
            2.0 * disk.r * 2.0 / 3.0
        } else {
            2.0 * disk.r * 2.0 / 3.0 * (leaf.angle_span.to_f64() * TAU / 2.0).sin()
        };
        if text_width(&text, style.font_size) > room {
            warnings.push(RenderWarning::CanvasTooSmall {
                label: text.clone(),
            });
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            num(x),
            num(y),
            escape(&text)
        );
    }
    let _ = writeln!(out, "</g>");
    legend(&mut out, &suppressed, style);
    let _ = writeln!(out, "</svg>");
    Ok(Rendered { svg: out, warnings })
}

fn text_width(text: &str, font_size: f64) -> f64 {
    text.chars().count() as f64 * font_size * GLYPH_WIDTH
}

/// Start fractions of the boundaries first drawn at `depth`. At depth 1
/// every sibling start is a boundary once there are two or more; deeper, the
/// first child's start coincides with its parent's and is skipped.
fn boundary_starts(layout: &TurtlebackLayout, depth: usize) -> Vec<Prob> {
    let mut out = Vec::new();
    let level: Vec<&RegionGeometry> = layout.regions.iter().filter(|r| r.depth == depth).collect();
    for (i, r) in level.iter().enumerate() {
        let parent = &r.node_path[..r.node_path.len() - 1];
        let first_child = i == 0 || level[i - 1].node_path[..level[i - 1].node_path.len() - 1] != *parent;
        if depth == 1 {
            if level.len() >= 2 {
                out.push(r.angle_start.clone());
            }
        } else if !first_child {
            out.push(r.angle_start.clone());
        }
    }
    out
}

/// Turtleback diagram split by parallel chords instead of sectors.
///
/// The root's two events are separated by a straight chord placed so the
/// segment areas match their probabilities. Deeper leaves are laid out as
/// stripes between further parallel chords at cumulative leaf mass, which
/// keeps every region's area exact.
pub fn render_turtleback_chord(
    layout: &TurtlebackLayout,
    style: &Style,
) -> Result<Rendered, Error> {
    style.validate()?;
    let top = layout.top_level().count();
    if top != 2 {
        return Err(Error::Domain(format!(
            "chord mode needs exactly two root events, found {top}"
        )));
    }
    let disk = Disk::new(style);
    let sep = style.separator(all_short(layout.regions.iter().map(|r| &r.node_path)));
    let mut out = String::new();
    let mut warnings = Vec::new();
    open_svg(&mut out, style.canvas_size);

    let offset = |p: &Ratio| -> Result<f64, Error> {
        chord_offset(&Prob::from_ratio(p.clone())?, CHORD_TOL)
    };
    let chord_ends = |o: f64| -> ((f64, f64), (f64, f64)) {
        let h = (1.0 - o * o).max(0.0).sqrt();
        let x = disk.cx + disk.r * o;
        ((x, disk.cy - disk.r * h), (x, disk.cy + disk.r * h))
    };

    let _ = writeln!(out, r#"<g class="sectors" stroke="none">"#);
    let mut stripes = Vec::new();
    for (i, leaf) in layout.leaves().enumerate() {
        let oa = offset(leaf.angle_start.as_ratio())?;
        let ob = offset(&leaf.angle_end())?;
        stripes.push((oa, ob));
        if leaf.angle_span.is_zero() {
            continue;
        }
        let ((ax, ay), (bx, by)) = chord_ends(oa);
        let ((cx, cy), (dx, dy)) = chord_ends(ob);
        let d = format!(
            "M {} {} A {r} {r} 0 0 0 {} {} L {} {} A {r} {r} 0 0 0 {} {} Z",
            num(ax),
            num(ay),
            num(cx),
            num(cy),
            num(dx),
            num(dy),
            num(bx),
            num(by),
            r = num(disk.r)
        );
        let _ = writeln!(
            out,
            r#"<path class="leaf" d="{d}" fill="{}"><title>{} {}</title></path>"#,
            style.fill(i),
            escape(&join_path(&leaf.node_path, sep)),
            leaf.angle_span
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="boundaries" stroke="black" fill="none">"#);
    let _ = writeln!(
        out,
        r#"<circle cx="{}" cy="{}" r="{}" stroke-width="{}"/>"#,
        num(disk.cx),
        num(disk.cy),
        num(disk.r),
        num(style.stroke(0))
    );
    for depth in 1..=layout.max_depth() {
        for start in boundary_starts(layout, depth) {
            let o = offset(start.as_ratio())?;
            if o.abs() >= 1.0 {
                continue;
            }
            let ((x1, y1), (x2, y2)) = chord_ends(o);
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="{}"/>"#,
                num(x1),
                num(y1),
                num(x2),
                num(y2),
                num(style.stroke(depth))
            );
        }
    }
    let _ = writeln!(out, "</g>");

    let mut suppressed = Vec::new();
    let _ = writeln!(
        out,
        r#"<g class="labels" font-family="sans-serif" font-size="{}" text-anchor="middle" dominant-baseline="central">"#,
        num(style.font_size)
    );
    for (leaf, (oa, ob)) in layout.leaves().zip(&stripes) {
        let text = leaf_text(leaf, sep);
        if too_narrow(&leaf.angle_span) {
            if !leaf.angle_span.is_zero() {
                suppressed.push(text);
            }
            continue;
        }
        let x = disk.cx + disk.r * (oa + ob) / 2.0;
        if text_width(&text, style.font_size) > disk.r * (oa - ob) {
            warnings.push(RenderWarning::CanvasTooSmall {
                label: text.clone(),
            });
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            num(x),
            num(disk.cy),
            escape(&text)
        );
    }
    let _ = writeln!(out, "</g>");
    legend(&mut out, &suppressed, style);
    let _ = writeln!(out, "</svg>");
    Ok(Rendered { svg: out, warnings })
}

/// Tree diagram: root `*` on top, one layer per depth, edge weights as percentages.
pub fn render_tree(layout: &TreeLayout, style: &Style) -> Result<Rendered, Error> {
    style.validate()?;
    let c = style.canvas_size as f64;
    let margin = (style.font_size * 3.0).max(c * 0.08);
    let width = layout.width();
    let height = layout.height().max(1.0);
    let x_step = if width > 0.0 { (c - 2.0 * margin) / width } else { 0.0 };
    let y_step = (c - 2.0 * margin) / height;
    let px = |x: f64| if width > 0.0 { margin + x * x_step } else { c / 2.0 };
    let py = |y: f64| margin + y * y_step;
    let node_r = {
        let spacing = if width > 0.0 { x_step } else { y_step };
        (style.font_size * 0.9).min(spacing / 3.0).max(1.0)
    };

    let mut out = String::new();
    open_svg(&mut out, style.canvas_size);

    let _ = writeln!(out, r#"<g class="edges" stroke="black">"#);
    for e in &layout.edges {
        let (Some(a), Some(b)) = (layout.position(&e.parent), layout.position(&e.child)) else {
            continue;
        };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke-width="{}"/>"#,
            num(px(a.0)),
            num(py(a.1)),
            num(px(b.0)),
            num(py(b.1)),
            num(style.stroke(e.child.len()))
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r#"<g class="nodes" stroke="black" stroke-width="1">"#);
    for (i, n) in layout.positions.iter().enumerate() {
        let fill = if n.path.is_empty() { "#ffffff" } else { style.fill(i - 1) };
        let _ = writeln!(
            out,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            num(px(n.x)),
            num(py(n.y)),
            num(node_r)
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r#"<g class="edge-labels" font-family="sans-serif" font-size="{}" text-anchor="start" dominant-baseline="central">"#,
        num(style.font_size * 0.85)
    );
    for e in &layout.edges {
        let (Some(a), Some(b)) = (layout.position(&e.parent), layout.position(&e.child)) else {
            continue;
        };
        let mx = (px(a.0) + px(b.0)) / 2.0 + node_r * 0.4;
        let my = (py(a.1) + py(b.1)) / 2.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            num(mx),
            num(my),
            escape(&e.weight.to_percent(4))
        );
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r#"<g class="node-labels" font-family="sans-serif" font-size="{}" text-anchor="middle" dominant-baseline="central">"#,
        num(style.font_size)
    );
    for n in &layout.positions {
        let name = n.path.last().map_or("*", EventName::as_str);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}">{}</text>"#,
            num(px(n.x)),
            num(py(n.y)),
            escape(name)
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    Ok(Rendered {
        svg: out,
        warnings: Vec::new(),
    })
}
