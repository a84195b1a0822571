//! Multi-frame XYZ reader and writer.
//!
//! ```text
//! <atom count>
//! <comment: optional key=value tokens, e.g. target=-1.5 id=water>
//! <symbol> <x> <y> <z> [node target columns...]
//! ```
//!
//! Frames are simply concatenated. Numbers are parsed with `str::parse`, which
//! is locale independent.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::elements::{atomic_number, symbol, MAX_Z};
use super::graph::{Graph3D, GraphError};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("xyz frame {frame}, line {line}: {kind}")]
pub struct XyzError {
    /// Zero-based frame index.
    pub frame: usize,
    /// One-based line number in the input text.
    pub line: usize,
    pub kind: XyzErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum XyzErrorKind {
    #[error("malformed atom count {0:?}")]
    MalformedCount(String),
    #[error("missing comment line")]
    MissingComment,
    #[error("unknown element symbol {0:?}")]
    UnknownSymbol(String),
    #[error("expected `<symbol> <x> <y> <z>`, got {0:?}")]
    MalformedAtomLine(String),
    #[error("invalid or non-finite coordinate {0:?}")]
    BadCoordinate(String),
    #[error("invalid or non-finite number {0:?}")]
    BadNumber(String),
    #[error("header declares {expected} atoms but the frame has {found}")]
    AtomCountMismatch { expected: usize, found: usize },
    #[error("atom lines carry differing numbers of extra columns")]
    RaggedColumns,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parse every frame of an XYZ stream.
pub fn parse_xyz(text: &str) -> Result<Vec<Graph3D>, XyzError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut graphs = Vec::new();
    let mut cursor = 0;

    loop {
        while cursor < lines.len() && lines[cursor].trim().is_empty() {
            cursor += 1;
        }
        if cursor >= lines.len() {
            break;
        }
        let frame = graphs.len();
        let err = |line: usize, kind: XyzErrorKind| XyzError { frame, line: line + 1, kind };

        let count_line = lines[cursor].trim();
        let count: usize = count_line
            .parse()
            .map_err(|_| err(cursor, XyzErrorKind::MalformedCount(count_line.to_string())))?;
        if count == 0 {
            return Err(err(cursor, XyzErrorKind::MalformedCount(count_line.to_string())));
        }
        let comment_at = cursor + 1;
        let comment = *lines
            .get(comment_at)
            .ok_or_else(|| err(comment_at, XyzErrorKind::MissingComment))?;
        let header = parse_comment(comment).map_err(|kind| err(comment_at, kind))?;

        let mut numbers = Vec::with_capacity(count);
        let mut positions = Vec::with_capacity(count);
        let mut extras: Vec<Vec<f64>> = Vec::with_capacity(count);
        let mut at = comment_at + 1;
        while numbers.len() < count {
            let Some(line) = lines.get(at) else {
                return Err(err(
                    at,
                    XyzErrorKind::AtomCountMismatch { expected: count, found: numbers.len() },
                ));
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 4 {
                // A lone integer here is almost certainly the next frame's header.
                let kind = if fields.is_empty() || (fields.len() == 1 && fields[0].parse::<usize>().is_ok()) {
                    XyzErrorKind::AtomCountMismatch { expected: count, found: numbers.len() }
                } else {
                    XyzErrorKind::MalformedAtomLine(line.trim().to_string())
                };
                return Err(err(at, kind));
            }
            numbers.push(parse_element(fields[0]).map_err(|kind| err(at, kind))?);
            let mut xyz = [0.0; 3];
            for (c, raw) in xyz.iter_mut().zip(&fields[1..4]) {
                *c = parse_finite(raw)
                    .ok_or_else(|| err(at, XyzErrorKind::BadCoordinate(raw.to_string())))?;
            }
            positions.push(xyz);
            let extra = fields[4..]
                .iter()
                .map(|raw| parse_finite(raw).ok_or_else(|| XyzErrorKind::BadNumber(raw.to_string())))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|kind| err(at, kind))?;
            if extras.first().is_some_and(|first| first.len() != extra.len()) {
                return Err(err(at, XyzErrorKind::RaggedColumns));
            }
            extras.push(extra);
            at += 1;
        }

        let id = header.id.unwrap_or_else(|| format!("frame{frame}"));
        let mut graph =
            Graph3D::new(id, numbers, positions).map_err(|e| err(cursor, e.into()))?;
        if let Some(target) = header.target {
            graph = graph.with_target(target).map_err(|e| err(comment_at, e.into()))?;
        }
        if extras.first().is_some_and(|row| !row.is_empty()) {
            graph = graph.with_node_targets(extras).map_err(|e| err(cursor, e.into()))?;
        }
        graphs.push(graph);
        cursor = at;
    }
    Ok(graphs)
}

/// Serialize graphs as XYZ text that [`parse_xyz`] reads back bit-exactly.
pub fn write_xyz(graphs: &[Graph3D]) -> String {
    let mut out = String::new();
    for g in graphs {
        write_frame(&mut out, g).expect("writing to a String cannot fail");
    }
    out
}

fn write_frame(out: &mut String, g: &Graph3D) -> fmt::Result {
    writeln!(out, "{}", g.len())?;
    let mut comment = Vec::new();
    if !g.id().is_empty() && !g.id().contains(char::is_whitespace) {
        comment.push(format!("id={}", g.id()));
    }
    if let Some(t) = g.graph_target() {
        comment.push(format!("target={t:?}"));
    }
    writeln!(out, "{}", comment.join(" "))?;
    for (i, (&z, p)) in g.atomic_numbers().iter().zip(g.positions()).enumerate() {
        // `{:?}` prints the shortest representation that round-trips.
        write!(out, "{} {:?} {:?} {:?}", symbol(z).unwrap_or("X"), p[0], p[1], p[2])?;
        if let Some(rows) = g.node_targets() {
            for v in &rows[i] {
                write!(out, " {v:?}")?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

#[derive(Default)]
struct Header {
    id: Option<String>,
    target: Option<f64>,
}

fn parse_comment(line: &str) -> Result<Header, XyzErrorKind> {
    let mut header = Header::default();
    for token in line.split_whitespace() {
        let Some((key, value)) = token.split_once('=') else {
            continue;
        };
        match key {
            "target" => {
                header.target = Some(
                    parse_finite(value).ok_or_else(|| XyzErrorKind::BadNumber(value.to_string()))?,
                )
            }
            "id" if !value.is_empty() => header.id = Some(value.to_string()),
            _ => {}
        }
    }
    Ok(header)
}

fn parse_element(raw: &str) -> Result<u8, XyzErrorKind> {
    if let Some(z) = atomic_number(raw) {
        return Ok(z);
    }
    match raw.parse::<u8>() {
        Ok(z) if (1..=MAX_Z).contains(&z) => Ok(z),
        _ => Err(XyzErrorKind::UnknownSymbol(raw.to_string())),
    }
}

fn parse_finite(raw: &str) -> Option<f64> {
    raw.parse::<f64>().ok().filter(|v| v.is_finite())
}
