//! Plain-text file formats.
//!
//! * graph: `n <count>` then `e <src> <tgt>` lines, 1-based;
//! * framework: a graph block plus `v <idx> <x> <y>` lines;
//! * Henneberg sequence: `va <i> <j>` and `es <i> <j> <k>` lines;
//! * edge lengths: whitespace-separated reals in edge order.
//!
//! `#` starts a comment; blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::framework::{Framework, Point};
use crate::graph::{DirectedGraph, GraphError};
use crate::henneberg::{HennebergError, HennebergSequence, HennebergStep};
use crate::numfmt::fmt_f64;
use crate::shape_space::EdgeLengthVector;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `n <count>` line")]
    MissingCount,
    #[error("vertex {0} has no position")]
    MissingVertex(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Henneberg(#[from] HennebergError),
    #[error("invalid edge lengths: {0}")]
    Lengths(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-empty, comment-stripped lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        (!tokens.is_empty()).then_some((i + 1, tokens))
    })
}

fn parse_index(tok: &str, line: usize) -> Result<usize, ParseError> {
    match tok.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(syntax(line, format!("expected a 1-based index, got `{tok}`"))),
    }
}

fn parse_real(tok: &str, line: usize) -> Result<f64, ParseError> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(syntax(line, format!("expected a finite number, got `{tok}`"))),
    }
}

pub fn read_text(path: &Path) -> Result<String, ParseError> {
    std::fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })
}

struct RawFramework {
    graph: DirectedGraph,
    positions: Vec<(usize, usize, f64, f64)>,
}

fn parse_blocks(text: &str, allow_vertices: bool) -> Result<RawFramework, ParseError> {
    let mut n = None;
    let mut edges = Vec::new();
    let mut positions = Vec::new();
    for (line, tokens) in content_lines(text) {
        match (tokens[0], tokens.len()) {
            ("n", 2) => {
                if n.is_some() {
                    return Err(syntax(line, "duplicate `n` line"));
                }
                if !edges.is_empty() {
                    return Err(syntax(line, "`n` must precede edges"));
                }
                n = Some(
                    tokens[1]
                        .parse::<usize>()
                        .map_err(|_| syntax(line, format!("bad vertex count `{}`", tokens[1])))?,
                );
            }
            ("e", 3) => {
                if n.is_none() {
                    return Err(ParseError::MissingCount);
                }
                edges.push((parse_index(tokens[1], line)?, parse_index(tokens[2], line)?));
            }
            ("v", 4) if allow_vertices => {
                positions.push((
                    line,
                    parse_index(tokens[1], line)?,
                    parse_real(tokens[2], line)?,
                    parse_real(tokens[3], line)?,
                ));
            }
            _ => return Err(syntax(line, format!("unrecognized line `{}`", tokens.join(" ")))),
        }
    }
    let n = n.ok_or(ParseError::MissingCount)?;
    let graph = DirectedGraph::from_one_based(n, &edges)?;
    Ok(RawFramework { graph, positions })
}

pub fn parse_graph(text: &str) -> Result<DirectedGraph, ParseError> {
    Ok(parse_blocks(text, false)?.graph)
}

pub fn parse_framework(text: &str) -> Result<Framework, ParseError> {
    let raw = parse_blocks(text, true)?;
    let n = raw.graph.n();
    let mut pos: Vec<Option<Point>> = vec![None; n];
    for (line, idx, x, y) in raw.positions {
        if idx > n {
            return Err(syntax(line, format!("vertex {idx} out of range")));
        }
        if pos[idx - 1].replace(Point::new(x, y)).is_some() {
            return Err(syntax(line, format!("vertex {idx} given twice")));
        }
    }
    let positions = pos
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or(ParseError::MissingVertex(i + 1)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Framework::new(raw.graph, positions).expect("positions checked"))
}

pub fn parse_sequence(text: &str) -> Result<HennebergSequence, ParseError> {
    let mut steps = Vec::new();
    for (line, tokens) in content_lines(text) {
        let idx = |k: usize| parse_index(tokens[k], line).map(|v| v - 1);
        let step = match (tokens[0], tokens.len()) {
            ("va", 3) => HennebergStep::VertexAdd {
                anchors: (idx(1)?, idx(2)?),
            },
            ("es", 4) => HennebergStep::EdgeSplit {
                edge: (idx(1)?, idx(2)?),
                third: idx(3)?,
            },
            _ => return Err(syntax(line, format!("unrecognized step `{}`", tokens.join(" ")))),
        };
        steps.push(step);
    }
    Ok(HennebergSequence::new(steps)?)
}

pub fn parse_lengths(text: &str) -> Result<EdgeLengthVector, ParseError> {
    let mut values = Vec::new();
    for (line, tokens) in content_lines(text) {
        for t in tokens {
            values.push(parse_real(t, line)?);
        }
    }
    EdgeLengthVector::new(values).map_err(|e| ParseError::Lengths(e.to_string()))
}

pub fn write_graph(g: &DirectedGraph) -> String {
    let mut s = format!("n {}\n", g.n());
    for (a, b) in g.edges_one_based() {
        let _ = writeln!(s, "e {a} {b}");
    }
    s
}

pub fn write_framework(f: &Framework) -> String {
    let mut s = write_graph(f.graph());
    for (i, p) in f.positions().iter().enumerate() {
        let _ = writeln!(s, "v {} {} {}", i + 1, fmt_f64(p.x), fmt_f64(p.y));
    }
    s
}

pub fn write_lengths(d: &EdgeLengthVector) -> String {
    let parts: Vec<String> = d.as_slice().iter().map(|&x| fmt_f64(x)).collect();
    parts.join(" ") + "\n"
}

/// Static SVG of a framework: vertices, labelled, with arrowed edges.
pub fn framework_svg(f: &Framework) -> String {
    const SIZE: f64 = 400.0;
    const MARGIN: f64 = 40.0;
    let pts = f.positions();
    let (mut lo, mut hi) = (Point::repeat(f64::INFINITY), Point::repeat(f64::NEG_INFINITY));
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let span = (hi - lo).max().max(1e-12);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |p: &Point| (MARGIN + (p.x - lo.x) * scale, SIZE - MARGIN - (p.y - lo.y) * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    s.push_str(concat!(
        r#"<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="8" markerHeight="8" orient="auto">"#,
        r#"<path d="M0,0 L10,5 L0,10 z"/></marker></defs>"#,
        "\n"
    ));
    for &(a, b) in f.graph().edges() {
        let (x1, y1) = map(&pts[a]);
        let (x2, y2) = map(&pts[b]);
        // Stop the arrow at the vertex circle.
        let len = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt().max(1e-12);
        let k = (len - 8.0).max(0.0) / len;
        let _ = writeln!(
            s,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{:.3}" y2="{:.3}" stroke="black" marker-end="url(#arrow)"/>"#,
            x1 + (x2 - x1) * k,
            y1 + (y2 - y1) * k
        );
    }
    for (i, p) in pts.iter().enumerate() {
        let (x, y) = map(p);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="6" fill="white" stroke="black"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="14">{}</text>"#,
            x + 8.0,
            y - 8.0,
            i + 1
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn graph_round_trip() {
        let g = fixtures::two_cycles();
        assert_eq!(parse_graph(&write_graph(&g)).unwrap(), g);
    }

    #[test]
    fn comments_and_blanks() {
        let g = parse_graph("# demo\nn 3\n\ne 1 2 # first\ne 2 3\n").unwrap();
        assert_eq!(g.edges_one_based(), vec![(1, 2), (2, 3)]);
    }

    #[test]
    fn graph_errors() {
        assert!(matches!(parse_graph("e 1 2\n"), Err(ParseError::MissingCount)));
        assert!(matches!(parse_graph("n 2\ne 1 x\n"), Err(ParseError::Syntax { line: 2, .. })));
        assert!(matches!(parse_graph("n 2\ne 1 3\n"), Err(ParseError::Graph(_))));
        assert!(matches!(parse_graph("n 2\ne 1 0\n"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse_graph("n 2\nq 1\n"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn framework_round_trip_is_exact() {
        let f = Framework::from_xy(fixtures::triangle(), &[(0.1, -2.5), (1.0 / 3.0, 0.7), (1e-17, 4.0)])
            .unwrap();
        let back = parse_framework(&write_framework(&f)).unwrap();
        assert_eq!(back, f);
        assert!(matches!(
            parse_framework("n 2\ne 1 2\nv 1 0 0\n"),
            Err(ParseError::MissingVertex(2))
        ));
    }

    #[test]
    fn sequence_and_lengths() {
        let seq = parse_sequence("va 1 2\nva 1 3\n").unwrap();
        assert_eq!(seq.vertex_count(), 4);
        assert_eq!(parse_sequence(&seq.to_text()).unwrap(), seq);
        assert!(parse_sequence("xx 1\n").is_err());
        let d = parse_lengths("1.0 1.2\n1.5 # c\n").unwrap();
        assert_eq!(d.as_slice(), &[1.0, 1.2, 1.5]);
        assert_eq!(parse_lengths(&write_lengths(&d)).unwrap(), d);
        assert!(parse_lengths("1 -2").is_err());
    }

    #[test]
    fn svg_mentions_every_vertex() {
        let f = Framework::from_xy(fixtures::triangle(), &[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]).unwrap();
        let svg = framework_svg(&f);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert_eq!(svg.matches("<line").count(), 3);
    }
}
