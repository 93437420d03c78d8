//! Plain-text graph format.
//!
//! ```text
//! socialgraph v1 <n> <m>
//! P <id> <region> <lat> <lon> passions=1,2;tv_shows=3;...
//! E <u> <v>
//! ```
//!
//! Profile lines come first in id order, then edges with `u < v` in
//! lexicographic order. Floats use the shortest representation that parses
//! back to the same value, so save/load/save is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use super::{InterestCategory, Interests, SocialGraph, Token, UserId, UserProfile};
use crate::error::{Result, SimError};

const MAGIC: &str = "socialgraph";
const VERSION: &str = "v1";

pub fn write_graph(g: &SocialGraph) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} {VERSION} {} {}", g.node_count(), g.edge_count()).unwrap();
    for p in g.profiles() {
        write!(out, "P {} {} {} {} ", p.id, p.region, p.lat, p.lon).unwrap();
        for (i, c) in InterestCategory::ALL.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            out.push_str(c.name());
            out.push('=');
            for (j, t) in p.interests.get(*c).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{t}").unwrap();
            }
        }
        out.push('\n');
    }
    for (u, v) in g.edges() {
        writeln!(out, "E {u} {v}").unwrap();
    }
    out
}

pub fn save_graph(g: &SocialGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_graph(g)).map_err(|e| SimError::io(path, e))
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<SocialGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_graph(&text)
}

fn field<'a, T: std::str::FromStr>(parts: &mut impl Iterator<Item = &'a str>, line: usize, what: &str) -> Result<T> {
    let raw = parts
        .next()
        .ok_or_else(|| SimError::parse(line, format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| SimError::parse(line, format!("bad {what} `{raw}`")))
}

pub fn parse_graph(text: &str) -> Result<SocialGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| SimError::parse(1, "empty file, expected header"))?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) || parts.next() != Some(VERSION) {
        return Err(SimError::parse(ln, format!("expected `{MAGIC} {VERSION} <n> <m>`")));
    }
    let n: usize = field(&mut parts, ln, "node count")?;
    let m: usize = field(&mut parts, ln, "edge count")?;
    if parts.next().is_some() {
        return Err(SimError::parse(ln, "trailing tokens in header"));
    }

    let mut last_line = ln;
    let mut profiles = Vec::with_capacity(n);
    for expected in 0..n {
        let (ln, line) = lines.next().ok_or_else(|| {
            SimError::parse(
                last_line + 1,
                format!("truncated: expected {n} profiles, found {expected}"),
            )
        })?;
        last_line = ln;
        profiles.push(parse_profile(line, ln, expected)?);
    }
    let mut edges = Vec::with_capacity(m);
    for found in 0..m {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| SimError::parse(last_line + 1, format!("truncated: expected {m} edges, found {found}")))?;
        last_line = ln;
        let mut parts = line.split_whitespace();
        if parts.next() != Some("E") {
            return Err(SimError::parse(ln, "expected edge line `E <u> <v>`"));
        }
        let u: u32 = field(&mut parts, ln, "edge endpoint")?;
        let v: u32 = field(&mut parts, ln, "edge endpoint")?;
        if u >= v || v as usize >= n || parts.next().is_some() {
            return Err(SimError::parse(ln, "edge must be `E <u> <v>` with u < v < n"));
        }
        edges.push((UserId(u), UserId(v)));
    }
    if let Some((ln, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(SimError::parse(ln, format!("unexpected trailing content `{line}`")));
    }
    SocialGraph::from_edges(profiles, edges).map_err(|e| SimError::parse(last_line, e.to_string()))
}

fn parse_profile(line: &str, ln: usize, expected: usize) -> Result<UserProfile> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("P") {
        return Err(SimError::parse(ln, "expected profile line `P ...`"));
    }
    let id: u32 = field(&mut parts, ln, "user id")?;
    if id as usize != expected {
        return Err(SimError::parse(ln, format!("expected user id {expected}, got {id}")));
    }
    let region: usize = field(&mut parts, ln, "region")?;
    let lat: f64 = field(&mut parts, ln, "latitude")?;
    let lon: f64 = field(&mut parts, ln, "longitude")?;
    let spec = parts.next().ok_or_else(|| SimError::parse(ln, "missing interests"))?;
    if parts.next().is_some() {
        return Err(SimError::parse(ln, "trailing tokens in profile line"));
    }

    let mut interests = Interests::default();
    let mut seen = [false; InterestCategory::COUNT];
    for entry in spec.split(';') {
        let (name, toks) = entry
            .split_once('=')
            .ok_or_else(|| SimError::parse(ln, format!("bad interest entry `{entry}`")))?;
        let cat: InterestCategory = name
            .parse()
            .map_err(|_| SimError::parse(ln, format!("unknown category `{name}`")))?;
        if std::mem::replace(&mut seen[cat.index()], true) {
            return Err(SimError::parse(ln, format!("duplicate category `{name}`")));
        }
        let tokens = toks
            .split(',')
            .map(|t| {
                t.parse::<Token>()
                    .map_err(|_| SimError::parse(ln, format!("bad token `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        interests.set(cat, tokens);
    }
    if !interests.is_complete() {
        return Err(SimError::parse(ln, "every category needs at least one token"));
    }
    Ok(UserProfile {
        id: UserId(id),
        region,
        lat,
        lon,
        interests,
    })
}
