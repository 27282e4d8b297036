//! Command-line front end. [`run`] is the whole program minus process exit,
//! so tests can drive it with in-memory streams.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::engine::{evaluate, explain};
use crate::envelope::{equivalence_envelope, query_envelope, sample_envelope};
use crate::error::Error;
use crate::layout::{layout_tree, layout_turtleback};
use crate::model::{validate, EventTree};
use crate::prob::Prob;
use crate::render::{render_tree, render_turtleback, render_turtleback_chord, Style};
use crate::textio::{parse_model_unchecked, parse_query, Query};
use crate::verify::{check_equivalence, check_refinement, estimate_query};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SYNTAX: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "turtleglyph", version, about = "Exact conditional probability on event trees, with turtleback and tree diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Turtleback,
    Tree,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a model and check partition refinement and layout equivalence
    Check {
        model: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a query such as "P(L/S | */S)"
    Query {
        model: PathBuf,
        query: String,
        #[arg(long)]
        json: bool,
        /// Print the worked solution
        #[arg(long)]
        explain: bool,
    },
    /// Draw the model as SVG
    Render {
        model: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
        /// Split the two root events with a straight chord
        #[arg(long)]
        chord_root: bool,
        #[arg(long, default_value_t = 600)]
        size: u32,
    },
    /// Estimate a query by seeded Monte Carlo and compare with the exact value
    Sample {
        model: PathBuf,
        query: String,
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Write one markdown page per query with inline diagrams
    Report {
        model: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax(_) | Error::InvalidName(_) => EXIT_SYNTAX,
        Error::Validation(_) => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

/// Parses argv, runs one subcommand, and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SYNTAX } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Check { model, json } => check(&model, json, out, err),
        Command::Query {
            model,
            query,
            json,
            explain,
        } => query_cmd(&model, &query, json, explain, out, err),
        Command::Render {
            model,
            kind,
            out: path,
            chord_root,
            size,
        } => render_cmd(&model, kind, &path, chord_root, size, out, err),
        Command::Sample {
            model,
            query,
            n,
            seed,
            json,
        } => sample_cmd(&model, &query, n, seed, json, out),
        Command::Report {
            model,
            queries,
            out: dir,
        } => report_cmd(&model, &queries, &dir, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read_model(path: &Path) -> Result<EventTree, Error> {
    let src = std::fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })?;
    let tree = parse_model_unchecked(&src)?;
    let diags = validate(&tree);
    if !diags.is_empty() {
        return Err(Error::Validation(diags));
    }
    Ok(tree)
}

fn parse_query_arg(text: &str) -> Result<Query, Error> {
    parse_query(text).map_err(Error::from)
}

/// `23/117 ≈ 0.196581`, or `=` when six significant digits are exact.
pub fn format_value(p: &Prob) -> String {
    let rel = if p.is_exact_at(6) { "=" } else { "≈" };
    let frac = if p.is_one() {
        "1".to_string()
    } else if p.is_zero() {
        "0".to_string()
    } else {
        p.to_string()
    };
    format!("{frac} {rel} {}", p.to_sig_digits(6))
}

fn check(path: &Path, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Error> {
    let src = std::fs::read_to_string(path)?;
    let tree = parse_model_unchecked(&src)?;
    let diags = validate(&tree);
    if !diags.is_empty() {
        for d in &diags {
            let _ = writeln!(err, "invalid: {d}");
        }
        let _ = writeln!(out, "{}: {} validation error(s)", path.display(), diags.len());
        return Ok(EXIT_VALIDATION);
    }
    let refined = check_refinement(&tree);
    let layout = layout_turtleback(&tree)?;
    let report = check_equivalence(&tree, &layout)?;
    if json {
        let mut env = equivalence_envelope(&tree, &report);
        if let Some(serde_json::Value::Object(d)) = env.details.as_mut() {
            d.insert("refinement".into(), serde_json::Value::Bool(refined));
        }
        let _ = writeln!(out, "{}", env.to_json());
    } else {
        let _ = writeln!(out, "model: {}", tree.title);
        let _ = writeln!(out, "validation: ok ({} events, {} leaves, depth {})",
            tree.node_count(), crate::model::leaves(&tree).len(), tree.max_depth());
        let _ = writeln!(out, "refinement: {}", if refined { "ok" } else { "FAILED" });
        let _ = writeln!(
            out,
            "equivalence: {} ({} nodes checked, max discrepancy {})",
            if report.is_clean() { "ok" } else { "FAILED" },
            report.checked_nodes,
            report.max_discrepancy
        );
    }
    Ok(if refined && report.is_clean() {
        EXIT_OK
    } else {
        EXIT_VALIDATION
    })
}

fn query_cmd(
    path: &Path,
    text: &str,
    json: bool,
    with_steps: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let tree = read_model(path)?;
    let query = parse_query_arg(text)?;
    let result = evaluate(&tree, &query)?;
    if json {
        let mut env = query_envelope(&tree, &query, &result);
        if with_steps {
            let steps = explain(&tree, &query)?;
            env.details = Some(serde_json::json!({ "explanation": steps.0 }));
        }
        let _ = writeln!(out, "{}", env.to_json());
    } else {
        let _ = writeln!(out, "{}", format_value(&result.value));
        if with_steps {
            let _ = write!(out, "{}", explain(&tree, &query)?);
        }
        for w in &result.warnings {
            let _ = writeln!(err, "warning: {w}");
        }
    }
    Ok(EXIT_OK)
}

fn render_svg(tree: &EventTree, kind: Kind, chord_root: bool, size: u32) -> Result<crate::render::Rendered, Error> {
    let mut style = Style::from_env()?;
    style.canvas_size = size;
    match kind {
        Kind::Turtleback => {
            let layout = layout_turtleback(tree)?;
            if chord_root {
                render_turtleback_chord(&layout, &style)
            } else {
                render_turtleback(&layout, &style)
            }
        }
        Kind::Tree => render_tree(&layout_tree(tree)?, &style),
    }
}

fn render_cmd(
    path: &Path,
    kind: Kind,
    dest: &Path,
    chord_root: bool,
    size: u32,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let tree = read_model(path)?;
    let rendered = render_svg(&tree, kind, chord_root, size)?;
    std::fs::write(dest, &rendered.svg)?;
    for w in &rendered.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let _ = writeln!(out, "wrote {}", dest.display());
    Ok(EXIT_OK)
}

fn sample_cmd(
    path: &Path,
    text: &str,
    n: u64,
    seed: u64,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    let tree = read_model(path)?;
    let query = parse_query_arg(text)?;
    let exact = evaluate(&tree, &query)?;
    let est = estimate_query(&tree, &query, n, seed)?;
    if json {
        let _ = writeln!(out, "{}", sample_envelope(&tree, &query, &exact, &est, seed).to_json());
    } else {
        let diff = (est.estimate - exact.value.to_f64()).abs();
        let z = if est.stderr > 0.0 { diff / est.stderr } else { 0.0 };
        let _ = writeln!(
            out,
            "estimate {:.6} ± {:.6} (hits {} of {}, {} draws, seed {seed})",
            est.estimate, est.stderr, est.hits, est.n, est.draws
        );
        let _ = writeln!(out, "exact    {}", format_value(&exact.value));
        let _ = writeln!(out, "|estimate − exact| = {diff:.3e} ({z:.2} stderr)");
    }
    Ok(EXIT_OK)
}

fn read_queries(path: &Path) -> Result<Vec<Query>, Error> {
    let text = std::fs::read_to_string(path)?;
    let mut queries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let q = parse_query(line).map_err(|mut e| {
            e.line = i + 1;
            e
        })?;
        queries.push(q);
    }
    Ok(queries)
}

fn report_cmd(
    path: &Path,
    queries_path: &Path,
    dir: &Path,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Error> {
    let tree = read_model(path)?;
    let queries = read_queries(queries_path)?;
    std::fs::create_dir_all(dir)?;
    let turtle = render_svg(&tree, Kind::Turtleback, false, 480)?.svg;
    let treesvg = render_svg(&tree, Kind::Tree, false, 480)?.svg;
    let mut index = format!("# {}\n\n", tree.title);
    let mut code = EXIT_OK;
    for (i, q) in queries.iter().enumerate() {
        let name = format!("query-{:02}.md", i + 1);
        let mut page = format!("# {}: `{q}`\n\n", tree.title);
        match evaluate(&tree, q).and_then(|r| Ok((r, explain(&tree, q)?))) {
            Ok((r, steps)) => {
                let _ = writeln!(page, "**Answer:** {}\n", format_value(&r.value));
                let _ = writeln!(page, "```text\n{steps}```\n");
                let _ = writeln!(index, "- [`{q}`]({name}): {}", format_value(&r.value));
            }
            Err(e) => {
                let _ = writeln!(page, "**Error:** {e}\n");
                let _ = writeln!(index, "- [`{q}`]({name}): error: {e}");
                let _ = writeln!(err, "error in {q}: {e}");
                code = code.max(exit_code(&e));
            }
        }
        let _ = writeln!(page, "## Turtleback diagram\n\n{}", strip_xml_decl(&turtle));
        let _ = writeln!(page, "## Tree diagram\n\n{}", strip_xml_decl(&treesvg));
        std::fs::write(dir.join(&name), page)?;
    }
    std::fs::write(dir.join("index.md"), index)?;
    let _ = writeln!(out, "wrote {} report page(s) to {}", queries.len(), dir.display());
    Ok(code)
}

/// Inline SVG in markdown must not carry an XML declaration.
fn strip_xml_decl(svg: &str) -> &str {
    match svg.strip_prefix("<?xml") {
        Some(rest) => rest.split_once('\n').map_or("", |(_, body)| body),
        None => svg,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(&"23/117".parse().unwrap()), "23/117 ≈ 0.196581");
        assert_eq!(format_value(&"69/1250".parse().unwrap()), "69/1250 = 0.0552");
        assert_eq!(format_value(&Prob::one()), "1 = 1");
    }

    #[test]
    fn xml_decl_stripped() {
        assert_eq!(strip_xml_decl("<?xml a?>\n<svg/>"), "<svg/>");
        assert_eq!(strip_xml_decl("<svg/>"), "<svg/>");
    }
}
