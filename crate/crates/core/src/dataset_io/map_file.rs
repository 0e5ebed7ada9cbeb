//! Map and triplet annotation document.
//!
//! ```text
//! navmap 1
//! # comments and blank lines are ignored
//! [nodes]
//! <node-id> intersection|exit
//! [edges]
//! <edge-id> <node-a> <node-b> <weight-frames>
//! [triplets]
//! <incoming> <node-id> <outgoing> <video-id> <frame-start> <frame-end> [reversed]
//! ```
//!
//! Identifiers are whitespace-free tokens. In a triplet line, `-` stands for
//! the route starting or ending at the node instead of a corridor. Sections
//! appear once each, in this order.

use std::path::Path;

use super::{read_text, write_bytes, IoError};
use crate::route_graph::{
    AnnotationSet, EdgeId, NodeKind, Port, SegmentRef, TopologicalMap, TripletAnnotation,
    TripletKey,
};

pub const MAP_HEADER: &str = "navmap";
pub const MAP_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Preamble,
    Nodes,
    Edges,
    Triplets,
}

fn parse_err(line: usize, reason: impl Into<String>) -> IoError {
    IoError::ParseError {
        line,
        reason: reason.into(),
    }
}

fn parse_port(token: &str) -> Port {
    if token == "-" {
        Port::Terminal
    } else {
        Port::Edge(EdgeId(token.to_owned()))
    }
}

fn check_ident(line: usize, token: &str) -> Result<(), IoError> {
    if token == "-" || token.starts_with('[') || token.starts_with('#') {
        return Err(parse_err(line, format!("{token:?} is not a valid identifier")));
    }
    Ok(())
}

fn parse_u64(line: usize, token: &str, what: &str) -> Result<u64, IoError> {
    token
        .parse()
        .map_err(|_| parse_err(line, format!("{what} {token:?} is not a non-negative integer")))
}

/// Parses a map document. Every loaded annotation is checked against the
/// map, and a key annotated twice is rejected.
pub fn parse_map(text: &str) -> Result<(TopologicalMap, Vec<TripletAnnotation>), IoError> {
    let mut map = TopologicalMap::new();
    let mut annotations = AnnotationSet::new();
    let mut ordered = Vec::new();
    let mut section = Section::Preamble;
    let mut saw_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if !saw_header {
            match tokens.as_slice() {
                [MAP_HEADER, v] => {
                    let version: u32 = v
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad version {v:?}")))?;
                    if version != MAP_VERSION {
                        return Err(IoError::VersionUnsupported(version));
                    }
                    saw_header = true;
                    continue;
                }
                _ => return Err(parse_err(line, format!("expected `{MAP_HEADER} {MAP_VERSION}`"))),
            }
        }
        if content.starts_with('[') {
            let next = match content {
                "[nodes]" => Section::Nodes,
                "[edges]" => Section::Edges,
                "[triplets]" => Section::Triplets,
                other => return Err(parse_err(line, format!("unknown section {other}"))),
            };
            if next <= section {
                return Err(parse_err(line, format!("section {content} is out of order or repeated")));
            }
            section = next;
            continue;
        }
        match section {
            Section::Preamble => return Err(parse_err(line, "record before any section")),
            Section::Nodes => {
                let [id, kind] = tokens.as_slice() else {
                    return Err(parse_err(line, "node record needs: id kind"));
                };
                check_ident(line, id)?;
                let kind = match *kind {
                    "intersection" => NodeKind::Intersection,
                    "exit" => NodeKind::Exit,
                    other => return Err(parse_err(line, format!("unknown node kind {other:?}"))),
                };
                map.add_node(*id, kind)
                    .map_err(|e| IoError::InvariantViolation(format!("line {line}: {e}")))?;
            }
            Section::Edges => {
                let [id, a, b, w] = tokens.as_slice() else {
                    return Err(parse_err(line, "edge record needs: id node-a node-b weight"));
                };
                check_ident(line, id)?;
                let weight = parse_u64(line, w, "weight")?;
                map.add_edge(*id, *a, *b, weight)
                    .map_err(|e| IoError::InvariantViolation(format!("line {line}: {e}")))?;
            }
            Section::Triplets => {
                let (fields, reversed) = match tokens.as_slice() {
                    [f @ .., "reversed"] if f.len() == 6 => (f, true),
                    f if f.len() == 6 => (f, false),
                    _ => {
                        return Err(parse_err(
                            line,
                            "triplet record needs: incoming node outgoing video start end [reversed]",
                        ))
                    }
                };
                let key = TripletKey::new(parse_port(fields[0]), fields[1], parse_port(fields[2]));
                let segment = SegmentRef {
                    video_id: fields[3].to_owned(),
                    frame_start: parse_u64(line, fields[4], "frame start")?,
                    frame_end: parse_u64(line, fields[5], "frame end")?,
                    reversed,
                };
                let annotation = TripletAnnotation::new(key.clone(), segment);
                annotation
                    .validate(&map)
                    .map_err(|e| IoError::InvariantViolation(format!("line {line}: {e}")))?;
                if annotations.contains(&key) {
                    return Err(IoError::DuplicateTriplet(key));
                }
                annotations.insert_if_absent(annotation.clone());
                ordered.push(annotation);
            }
        }
    }
    if !saw_header {
        return Err(parse_err(0, "empty document"));
    }
    Ok((map, ordered))
}

pub fn format_map(map: &TopologicalMap, annotations: &[TripletAnnotation]) -> String {
    let mut out = format!("{MAP_HEADER} {MAP_VERSION}\n[nodes]\n");
    for (id, kind) in map.nodes() {
        let kind = match kind {
            NodeKind::Intersection => "intersection",
            NodeKind::Exit => "exit",
        };
        out.push_str(&format!("{id} {kind}\n"));
    }
    out.push_str("[edges]\n");
    for (id, e) in map.edges() {
        out.push_str(&format!("{id} {} {} {}\n", e.a, e.b, e.weight_frames));
    }
    out.push_str("[triplets]\n");
    for a in annotations {
        let s = &a.segment;
        out.push_str(&format!(
            "{} {} {} {} {} {}{}\n",
            a.key.incoming,
            a.key.node,
            a.key.outgoing,
            s.video_id,
            s.frame_start,
            s.frame_end,
            if s.reversed { " reversed" } else { "" }
        ));
    }
    out
}

pub fn load_map(path: &Path) -> Result<(TopologicalMap, Vec<TripletAnnotation>), IoError> {
    parse_map(&read_text(path)?)
}

pub fn save_map(
    map: &TopologicalMap,
    annotations: &[TripletAnnotation],
    path: &Path,
) -> Result<(), IoError> {
    write_bytes(path, format_map(map, annotations).as_bytes())
}
