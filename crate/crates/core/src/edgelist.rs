//! Plain-text edge lists.
//!
//! ```text
//! #N=5
//! #kappa=1
//! #m=1
//! #hubs=0
//! 0 1
//! 0 2
//! 0 4
//! 1 2
//! 2 3
//! 3 4
//! ```
//!
//! Header tokens are `#key=value` and may share a line or sit on separate
//! lines; all of `N`, `kappa`, `m` and `hubs` are required before the first
//! edge. Every edge, ring edges included, is listed once as `u v` with
//! `u < v`. The reader rejects anything that does not describe a valid HNW
//! graph.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Read, Write};

use thiserror::Error;

use crate::graph::{is_ring_pair, Graph};

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: ParseErrorKind },
    #[error("edge list is not valid UTF-8")]
    Encoding,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingHeader(&'static str),
    DuplicateHeader(String),
    UnknownHeader(String),
    HeaderAfterEdges,
    BadHeaderValue(String),
    Malformed,
    OutOfRange(usize),
    SelfLoop(usize),
    Unordered(usize, usize),
    DuplicateEdge(usize, usize),
    EdgeCount { expected: usize, found: usize },
    MissingRingEdge(usize, usize),
    ShortcutWithoutHub(usize, usize),
    InvalidGraph(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ParseErrorKind::*;
        match self {
            MissingHeader(key) => write!(f, "missing header field `{key}`"),
            DuplicateHeader(key) => write!(f, "header field `{key}` given twice"),
            UnknownHeader(key) => write!(f, "unknown header field `{key}`"),
            HeaderAfterEdges => write!(f, "header line after the first edge"),
            BadHeaderValue(tok) => write!(f, "cannot parse header token `{tok}`"),
            Malformed => write!(f, "expected two node ids separated by a space"),
            OutOfRange(id) => write!(f, "node id {id} out of range"),
            SelfLoop(id) => write!(f, "self-loop at node {id}"),
            Unordered(u, v) => write!(f, "edge `{u} {v}` must be written low id first"),
            DuplicateEdge(u, v) => write!(f, "edge `{u} {v}` declared twice"),
            EdgeCount { expected, found } => {
                write!(f, "expected N*kappa + m = {expected} edges, found {found}")
            }
            MissingRingEdge(u, v) => write!(f, "ring edge `{u} {v}` is missing"),
            ShortcutWithoutHub(u, v) => write!(f, "shortcut `{u} {v}` has no hub endpoint"),
            InvalidGraph(msg) => write!(f, "{msg}"),
        }
    }
}

pub fn write_edge_list<W: Write>(g: &Graph, mut sink: W) -> io::Result<()> {
    writeln!(sink, "#N={}", g.node_count())?;
    writeln!(sink, "#kappa={}", g.kappa())?;
    writeln!(sink, "#m={}", g.shortcut_count())?;
    let hubs: Vec<String> = g.hub_ids().iter().map(|h| h.to_string()).collect();
    writeln!(sink, "#hubs={}", hubs.join(","))?;
    for (u, v) in g.edges() {
        writeln!(sink, "{u} {v}")?;
    }
    sink.flush()
}

pub fn read_edge_list<R: Read>(mut source: R) -> Result<Graph, EdgeListError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| EdgeListError::Encoding)?;
    parse_edge_list(text)
}

#[derive(Default)]
struct Header {
    node_count: Option<usize>,
    kappa: Option<usize>,
    shortcuts: Option<usize>,
    hubs: Option<Vec<usize>>,
}

impl Header {
    fn complete(&self) -> Result<(usize, usize, usize, &[usize]), ParseErrorKind> {
        use ParseErrorKind::MissingHeader;
        Ok((
            self.node_count.ok_or(MissingHeader("N"))?,
            self.kappa.ok_or(MissingHeader("kappa"))?,
            self.shortcuts.ok_or(MissingHeader("m"))?,
            self.hubs.as_deref().ok_or(MissingHeader("hubs"))?,
        ))
    }

    fn set(&mut self, token: &str) -> Result<(), ParseErrorKind> {
        let body = &token[1..];
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ParseErrorKind::BadHeaderValue(token.to_string()))?;
        let bad = || ParseErrorKind::BadHeaderValue(token.to_string());
        let dup = || ParseErrorKind::DuplicateHeader(key.to_string());
        match key {
            "N" | "kappa" | "m" => {
                let v: usize = value.parse().map_err(|_| bad())?;
                let slot = match key {
                    "N" => &mut self.node_count,
                    "kappa" => &mut self.kappa,
                    _ => &mut self.shortcuts,
                };
                if slot.replace(v).is_some() {
                    return Err(dup());
                }
            }
            "hubs" => {
                let ids = if value.is_empty() {
                    Vec::new()
                } else {
                    value
                        .split(',')
                        .map(|s| s.parse::<usize>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| bad())?
                };
                if self.hubs.replace(ids).is_some() {
                    return Err(dup());
                }
            }
            other => return Err(ParseErrorKind::UnknownHeader(other.to_string())),
        }
        Ok(())
    }
}

pub fn parse_edge_list(text: &str) -> Result<Graph, EdgeListError> {
    let err = |line: usize, kind: ParseErrorKind| EdgeListError::Parse { line, kind };

    let mut header = Header::default();
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    let mut node_count = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with('#') {
            if node_count.is_some() {
                return Err(err(line, ParseErrorKind::HeaderAfterEdges));
            }
            for token in trimmed.split_whitespace() {
                if !token.starts_with('#') {
                    return Err(err(line, ParseErrorKind::BadHeaderValue(token.to_string())));
                }
                header.set(token).map_err(|k| err(line, k))?;
            }
            continue;
        }

        let n = match node_count {
            Some(n) => n,
            None => {
                let (n, ..) = header.complete().map_err(|k| err(line, k))?;
                node_count = Some(n);
                n
            }
        };
        let mut fields = trimmed.split_whitespace();
        let (u, v) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => match (a.parse::<usize>(), b.parse::<usize>()) {
                (Ok(u), Ok(v)) => (u, v),
                _ => return Err(err(line, ParseErrorKind::Malformed)),
            },
            _ => return Err(err(line, ParseErrorKind::Malformed)),
        };
        for id in [u, v] {
            if id >= n {
                return Err(err(line, ParseErrorKind::OutOfRange(id)));
            }
        }
        if u == v {
            return Err(err(line, ParseErrorKind::SelfLoop(u)));
        }
        if u > v {
            return Err(err(line, ParseErrorKind::Unordered(u, v)));
        }
        if !edges.insert((u, v)) {
            return Err(err(line, ParseErrorKind::DuplicateEdge(u, v)));
        }
    }

    let end = last_line + 1;
    let (n, kappa, m, hubs) = header.complete().map_err(|k| err(end, k))?;
    if kappa == 0 || kappa > n.saturating_sub(1) / 2 {
        return Err(err(
            end,
            ParseErrorKind::InvalidGraph(format!("N={n} is too small for kappa={kappa}")),
        ));
    }
    // Checked before the ring scan so the scan is bounded by the input size.
    let expected = n
        .checked_mul(kappa)
        .and_then(|r| r.checked_add(m))
        .ok_or_else(|| err(end, ParseErrorKind::InvalidGraph("edge count overflows".into())))?;
    if edges.len() != expected {
        return Err(err(
            end,
            ParseErrorKind::EdgeCount {
                expected,
                found: edges.len(),
            },
        ));
    }
    for x in 0..n {
        for d in 1..=kappa {
            let y = (x + d) % n;
            let pair = (x.min(y), x.max(y));
            if !edges.contains(&pair) {
                return Err(err(end, ParseErrorKind::MissingRingEdge(pair.0, pair.1)));
            }
        }
    }
    if let Some(&h) = hubs.iter().find(|&&h| h >= n) {
        return Err(err(end, ParseErrorKind::OutOfRange(h)));
    }

    let mut shortcuts: Vec<(usize, usize)> = edges
        .into_iter()
        .filter(|&(u, v)| !is_ring_pair(n, kappa, u, v))
        .collect();
    shortcuts.sort_unstable();
    if let Some(&(u, v)) = shortcuts
        .iter()
        .find(|(u, v)| !hubs.contains(u) && !hubs.contains(v))
    {
        return Err(err(end, ParseErrorKind::ShortcutWithoutHub(u, v)));
    }

    Graph::from_parts(n, kappa, hubs.to_vec(), shortcuts)
        .map_err(|e| err(end, ParseErrorKind::InvalidGraph(e.to_string())))
}
