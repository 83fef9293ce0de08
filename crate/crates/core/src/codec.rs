//! Edge-list and graph6 encodings.

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// One `u v` pair per line, 0-based, `#` starts a comment. An optional
    /// `# n=<count>` comment pins the vertex count so isolated vertices
    /// survive a round trip.
    EdgeList,
    Graph6,
}

impl Format {
    /// `.g6` / `.graph6` select graph6, anything else is an edge list.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("g6") | Some("graph6") => Format::Graph6,
            _ => Format::EdgeList,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edge-list" | "edgelist" | "el" => Ok(Format::EdgeList),
            "graph6" | "g6" => Ok(Format::Graph6),
            other => Err(Error::Param(format!("unknown graph format `{other}`"))),
        }
    }
}

pub fn read(bytes: &[u8], format: Format) -> Result<Graph> {
    match format {
        Format::EdgeList => read_edge_list(bytes),
        Format::Graph6 => read_graph6(bytes),
    }
}

pub fn write(g: &Graph, format: Format) -> Vec<u8> {
    match format {
        Format::EdgeList => write_edge_list(g).into_bytes(),
        Format::Graph6 => {
            let mut out = write_graph6(g);
            out.push(b'\n');
            out
        }
    }
}

fn read_edge_list(bytes: &[u8]) -> Result<Graph> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::parse("byte 0", e.to_string()))?;
    let mut declared_n = None;
    let mut pairs = Vec::new();
    let mut max_vertex: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let (body, comment) = match line.find('#') {
            Some(i) => (&line[..i], Some(&line[i + 1..])),
            None => (line, None),
        };
        if let Some(n) = comment.and_then(|c| c.trim().strip_prefix("n=")) {
            let n = n
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::parse(format!("line {lineno}"), format!("bad vertex count: {e}")))?;
            declared_n = Some(n);
        }
        let mut fields = body.split_whitespace();
        let Some(a) = fields.next() else { continue };
        let b = fields
            .next()
            .ok_or_else(|| Error::parse(format!("line {lineno}"), "expected two vertex ids"))?;
        if fields.next().is_some() {
            return Err(Error::parse(format!("line {lineno}"), "more than two fields"));
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::parse(format!("line {lineno}"), format!("bad vertex id `{s}`: {e}")))
        };
        let (u, v) = (parse(a)?, parse(b)?);
        max_vertex = max_vertex.max(Some(u.max(v)));
        pairs.push((u, v));
    }
    let n = match (declared_n, max_vertex) {
        (Some(n), Some(m)) if m >= n => {
            return Err(Error::parse(
                "header",
                format!("vertex {m} exceeds declared count n={n}"),
            ))
        }
        (Some(n), _) => n,
        (None, Some(m)) => m + 1,
        (None, None) => 0,
    };
    Graph::from_edges(n, pairs).map_err(|e| match e {
        Error::Param(m) => Error::parse("edge list", m),
        e => e,
    })
}

fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("# n={}\n", g.order());
    for &(u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

const GRAPH6_HEADER: &[u8] = b">>graph6<<";

fn read_graph6(bytes: &[u8]) -> Result<Graph> {
    let mut data = bytes;
    if data.starts_with(GRAPH6_HEADER) {
        data = &data[GRAPH6_HEADER.len()..];
    }
    while let Some((&last, rest)) = data.split_last() {
        if last == b'\n' || last == b'\r' {
            data = rest;
        } else {
            break;
        }
    }
    let offset0 = bytes.len() - bytes.strip_prefix(GRAPH6_HEADER).map_or(bytes.len(), |r| r.len());
    for (i, &c) in data.iter().enumerate() {
        if !(63..=126).contains(&c) {
            return Err(Error::parse(
                format!("offset {}", offset0 + i),
                format!("byte {c:#04x} outside the graph6 range 63..=126"),
            ));
        }
    }
    let (n, body_start) = match data {
        [] => return Err(Error::parse("offset 0", "empty graph6 string")),
        [126, 126, rest @ ..] => {
            if rest.len() < 6 {
                return Err(Error::parse(format!("offset {}", offset0 + 2), "truncated 36-bit vertex count"));
            }
            let n = rest[..6].iter().fold(0u64, |acc, &c| (acc << 6) | (c - 63) as u64);
            (n as usize, 8)
        }
        [126, rest @ ..] => {
            if rest.len() < 3 {
                return Err(Error::parse(format!("offset {}", offset0 + 1), "truncated 18-bit vertex count"));
            }
            let n = rest[..3].iter().fold(0u64, |acc, &c| (acc << 6) | (c - 63) as u64);
            (n as usize, 4)
        }
        [c, ..] => ((c - 63) as usize, 1),
    };
    let nbits = n * n.saturating_sub(1) / 2;
    let expected = nbits.div_ceil(6);
    let body = &data[body_start..];
    if body.len() != expected {
        return Err(Error::parse(
            format!("offset {}", offset0 + body_start),
            format!(
                "graph6 body for n={n} needs {expected} bytes, found {}",
                body.len()
            ),
        ));
    }
    let mut edges = Vec::new();
    let mut k = 0usize;
    for j in 1..n {
        for i in 0..j {
            let byte = body[k / 6] - 63;
            if byte >> (5 - k % 6) & 1 == 1 {
                edges.push((i as Vertex, j as Vertex));
            }
            k += 1;
        }
    }
    edges.sort_unstable();
    Ok(Graph::from_sorted_unique(n, edges))
}

fn write_graph6(g: &Graph) -> Vec<u8> {
    let n = g.order();
    let mut out = Vec::new();
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    } else {
        out.extend([126, 126]);
        for shift in [30, 24, 18, 12, 6, 0] {
            out.push(((n as u64 >> shift) & 63) as u8 + 63);
        }
    }
    let nbits = n * n.saturating_sub(1) / 2;
    let mut bits = vec![0u8; nbits.div_ceil(6)];
    for &(u, v) in g.edges() {
        let (i, j) = (u as usize, v as usize);
        let k = j * (j - 1) / 2 + i;
        bits[k / 6] |= 1 << (5 - k % 6);
    }
    out.extend(bits.into_iter().map(|b| b + 63));
    out
}
