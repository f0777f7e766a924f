//! Reader and writer for the network part of the SNDlib native text format.
//!
//! Only the `NODES` and `LINKS` sections are interpreted. Links are read as
//! undirected and every other section or attribute is skipped.

use std::collections::HashMap;
use std::fmt::Write as _;

use sdnmig_core::{NodeId, Topology, TopologyError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}{kind}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ParseError {
    /// 1-based line number, when the problem has a location.
    pub line: Option<usize>,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("missing {0} section")]
    MissingSection(&'static str),
    #[error("section {0} is never closed")]
    UnclosedSection(String),
    #[error("malformed {section} entry: `{text}`")]
    Malformed { section: &'static str, text: String },
    #[error("node `{0}` declared twice")]
    DuplicateNode(String),
    #[error("link `{link}` references undeclared node `{node}`")]
    UnknownEndpoint { link: String, node: String },
    #[error("link id `{0}` declared twice")]
    DuplicateLinkId(String),
    #[error("link `{0}` connects a node to itself")]
    SelfLoop(String),
    #[error("link `{link}` repeats the endpoints of link `{first}`")]
    ParallelLink { link: String, first: String },
    #[error("topology: {0}")]
    Topology(TopologyError),
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError {
        line: Some(line),
        kind,
    }
}

/// Splits an entry like `L1 ( a b ) 0.0 ( 1 2 )` into bare tokens.
fn tokens(text: &str) -> Vec<&str> {
    text.split(|c: char| c.is_whitespace() || c == '(' || c == ')')
        .filter(|t| !t.is_empty())
        .collect()
}

fn section_header(text: &str) -> Option<&str> {
    let name = text.strip_suffix('(')?.trim_end();
    (!name.is_empty() && name.chars().all(|c| c.is_ascii_uppercase() || c == '_')).then_some(name)
}

pub fn parse_sndlib(text: &str) -> Result<Topology, ParseError> {
    let mut nodes: Vec<String> = Vec::new();
    let mut node_ids: HashMap<String, usize> = HashMap::new();
    let mut links: Vec<(NodeId, NodeId)> = Vec::new();
    let mut link_ids: HashMap<String, usize> = HashMap::new();
    let mut endpoints: HashMap<(usize, usize), String> = HashMap::new();
    let mut nodes_at = None;
    let mut links_at = None;
    let mut open: Option<(String, usize)> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() || body.starts_with('?') {
            continue;
        }
        let Some((section, _)) = &open else {
            if let Some(name) = section_header(body) {
                match name {
                    "NODES" => nodes_at = Some(line),
                    "LINKS" => links_at = Some(line),
                    _ => {}
                }
                open = Some((name.to_string(), line));
            }
            continue;
        };
        if body == ")" {
            open = None;
            continue;
        }
        match section.as_str() {
            "NODES" => {
                let Some(&name) = tokens(body).first() else {
                    return Err(err(
                        line,
                        ParseErrorKind::Malformed {
                            section: "NODES",
                            text: body.into(),
                        },
                    ));
                };
                if node_ids.insert(name.to_string(), nodes.len()).is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateNode(name.into())));
                }
                nodes.push(name.to_string());
            }
            "LINKS" => {
                if nodes_at.is_none() {
                    return Err(ParseError {
                        line: Some(line),
                        kind: ParseErrorKind::MissingSection("NODES"),
                    });
                }
                let t = tokens(body);
                if t.len() < 3 {
                    return Err(err(
                        line,
                        ParseErrorKind::Malformed {
                            section: "LINKS",
                            text: body.into(),
                        },
                    ));
                }
                let (id, a, b) = (t[0], t[1], t[2]);
                let lookup = |name: &str| {
                    node_ids.get(name).copied().ok_or_else(|| {
                        err(
                            line,
                            ParseErrorKind::UnknownEndpoint {
                                link: id.into(),
                                node: name.into(),
                            },
                        )
                    })
                };
                let (a, b) = (lookup(a)?, lookup(b)?);
                if link_ids.insert(id.to_string(), line).is_some() {
                    return Err(err(line, ParseErrorKind::DuplicateLinkId(id.into())));
                }
                if a == b {
                    return Err(err(line, ParseErrorKind::SelfLoop(id.into())));
                }
                let key = (a.min(b), a.max(b));
                if let Some(first) = endpoints.get(&key) {
                    return Err(err(
                        line,
                        ParseErrorKind::ParallelLink {
                            link: id.into(),
                            first: first.clone(),
                        },
                    ));
                }
                endpoints.insert(key, id.to_string());
                links.push((NodeId(a), NodeId(b)));
            }
            _ => {}
        }
    }
    if let Some((name, line)) = open {
        return Err(err(line, ParseErrorKind::UnclosedSection(name)));
    }
    let nodes_line = nodes_at.ok_or(ParseError {
        line: None,
        kind: ParseErrorKind::MissingSection("NODES"),
    })?;
    let links_line = links_at.ok_or(ParseError {
        line: None,
        kind: ParseErrorKind::MissingSection("LINKS"),
    })?;
    Topology::from_indices(nodes, links).map_err(|e| {
        let line = match e {
            TopologyError::TooFewNodes(_) | TopologyError::DuplicateNode(_) => nodes_line,
            _ => links_line,
        };
        err(line, ParseErrorKind::Topology(e))
    })
}

/// Writes `topology` in SNDlib native format. Coordinates are zero and link
/// ids are `L1`, `L2`, ... in link order.
pub fn write_sndlib(topology: &Topology, network: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "?SNDlib native format; type: network; version: 1.0");
    let _ = writeln!(out, "# network {network}\n\nNODES (");
    for name in topology.names() {
        let _ = writeln!(out, "  {name} ( 0.00 0.00 )");
    }
    let _ = writeln!(out, ")\n\nLINKS (");
    for (i, &(a, b)) in topology.links().iter().enumerate() {
        let _ = writeln!(
            out,
            "  L{} ( {} {} ) 0.00 0.00 0.00 0.00 ( )",
            i + 1,
            topology.name(a),
            topology.name(b)
        );
    }
    let _ = writeln!(out, ")");
    out
}
