//! Plain-text edge-list format.
//!
//! ```text
//! # comment
//! n m [directed]
//! u v          (undirected)
//! u v [r|b]    (directed, optional arc colour)
//! ```
//!
//! Colours are all-or-nothing: either every arc line carries one or none does.

use std::fmt::Write as _;

use super::{ArcColour, DiGraph, Graph};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParsedGraph {
    Undirected(Graph),
    Directed(DiGraph),
}

impl ParsedGraph {
    pub fn into_undirected(self) -> Result<Graph> {
        match self {
            ParsedGraph::Undirected(g) => Ok(g),
            ParsedGraph::Directed(_) => Err(Error::Input("expected an undirected graph".into())),
        }
    }

    pub fn into_directed(self) -> Result<DiGraph> {
        match self {
            ParsedGraph::Directed(g) => Ok(g),
            ParsedGraph::Undirected(_) => Err(Error::Input("expected a directed graph".into())),
        }
    }
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        line,
        message: message.into(),
    })
}

fn parse_num(line: usize, tok: &str) -> Result<usize> {
    tok.parse()
        .or_else(|_| parse_err(line, format!("expected a non-negative integer, found `{tok}`")))
}

pub fn parse(text: &str) -> Result<ParsedGraph> {
    let mut lines = text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((i + 1, body))
    });
    let Some((hline, header)) = lines.next() else {
        return parse_err(1, "missing header line");
    };
    let toks: Vec<_> = header.split_whitespace().collect();
    let directed = match toks.as_slice() {
        [_, _] => false,
        [_, _, "directed"] => true,
        _ => return parse_err(hline, "header must be `n m [directed]`"),
    };
    let n = parse_num(hline, toks[0])?;
    let m = parse_num(hline, toks[1])?;

    let mut pairs = Vec::with_capacity(m);
    let mut colours = Vec::new();
    for (lno, body) in lines {
        let toks: Vec<_> = body.split_whitespace().collect();
        let (u, v, colour) = match (directed, toks.as_slice()) {
            (_, [u, v]) => (u, v, None),
            (true, [u, v, c]) => (u, v, Some(*c)),
            _ => return parse_err(lno, "expected `u v` (or `u v r|b` for directed graphs)"),
        };
        pairs.push((parse_num(lno, u)?, parse_num(lno, v)?));
        match colour {
            Some("r") => colours.push(ArcColour::Red),
            Some("b") => colours.push(ArcColour::Blue),
            Some(c) => return parse_err(lno, format!("unknown arc colour `{c}`")),
            None => {}
        }
        if !colours.is_empty() && colours.len() != pairs.len() {
            return parse_err(lno, "arc colours must be given on every line or none");
        }
    }
    if pairs.len() != m {
        return parse_err(hline, format!("header declares {m} edges, found {}", pairs.len()));
    }

    if !directed {
        return Ok(ParsedGraph::Undirected(Graph::new(n, pairs)?));
    }
    // colours follow the file order; arc ids follow sorted order
    let mut coloured: Vec<_> = pairs.iter().copied().zip(colours.iter().copied()).collect();
    let mut g = DiGraph::new(n, pairs)?;
    if !colours.is_empty() {
        coloured.sort_unstable_by_key(|&(arc, _)| arc);
        g = g.with_colours(coloured.into_iter().map(|(_, c)| c).collect())?;
    }
    Ok(ParsedGraph::Directed(g))
}

pub fn write_graph(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for &(u, v) in g.edges() {
        writeln!(out, "{u} {v}").unwrap();
    }
    out
}

pub fn write_digraph(g: &DiGraph) -> String {
    let mut out = format!("{} {} directed\n", g.n(), g.arc_count());
    for (id, &(u, v)) in g.arcs().iter().enumerate() {
        match g.colour(id) {
            Some(ArcColour::Red) => writeln!(out, "{u} {v} r"),
            Some(ArcColour::Blue) => writeln!(out, "{u} {v} b"),
            None => writeln!(out, "{u} {v}"),
        }
        .unwrap();
    }
    out
}
