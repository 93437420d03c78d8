//! Topology file:
//!
//! ```text
//! underlay v1 <routers> <links>
//! R <id> <transit|stub> <tdom> <sdom|->
//! L <u> <v> <delay_ms> <level>
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{LinkLevel, Micros, Router, RouterId, RouterKind, UnderlayGraph, UnderlayLink};
use crate::error::{Result, SimError};

pub fn write_underlay(g: &UnderlayGraph) -> String {
    let mut out = String::new();
    writeln!(out, "underlay v1 {} {}", g.router_count(), g.links().len()).unwrap();
    for r in g.routers() {
        let sdom = r.stub_domain.map_or_else(|| "-".to_string(), |s| s.to_string());
        writeln!(out, "R {} {} {} {}", r.id, r.kind.name(), r.transit_domain, sdom).unwrap();
    }
    for l in g.links() {
        writeln!(out, "L {} {} {} {}", l.a, l.b, l.delay, l.level.name()).unwrap();
    }
    out
}

pub fn save_underlay(g: &UnderlayGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_underlay(g)).map_err(|e| SimError::io(path, e))
}

pub fn load_underlay(path: impl AsRef<Path>) -> Result<UnderlayGraph> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_underlay(&text)
}

pub fn parse_underlay(text: &str) -> Result<UnderlayGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (ln, header) = lines
        .next()
        .ok_or_else(|| SimError::parse(1, "empty file, expected header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let (nr, nl) = match h.as_slice() {
        ["underlay", "v1", r, l] => (
            r.parse::<usize>()
                .map_err(|_| SimError::parse(ln, "bad router count"))?,
            l.parse::<usize>().map_err(|_| SimError::parse(ln, "bad link count"))?,
        ),
        _ => return Err(SimError::parse(ln, "expected `underlay v1 <routers> <links>`")),
    };

    let mut last = ln;
    let mut routers = Vec::with_capacity(nr);
    for i in 0..nr {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| SimError::parse(last + 1, format!("truncated: expected {nr} routers")))?;
        last = ln;
        let f: Vec<&str> = line.split_whitespace().collect();
        let ["R", id, kind, tdom, sdom] = f.as_slice() else {
            return Err(SimError::parse(ln, "expected `R <id> <kind> <tdom> <sdom|->`"));
        };
        let id: u32 = id.parse().map_err(|_| SimError::parse(ln, "bad router id"))?;
        if id as usize != i {
            return Err(SimError::parse(ln, format!("expected router id {i}")));
        }
        let kind = match *kind {
            "transit" => RouterKind::Transit,
            "stub" => RouterKind::Stub,
            other => return Err(SimError::parse(ln, format!("unknown router kind `{other}`"))),
        };
        let transit_domain = tdom.parse().map_err(|_| SimError::parse(ln, "bad transit domain"))?;
        let stub_domain = match *sdom {
            "-" => None,
            s => Some(s.parse().map_err(|_| SimError::parse(ln, "bad stub domain"))?),
        };
        routers.push(Router {
            id: RouterId(id),
            kind,
            transit_domain,
            stub_domain,
        });
    }

    let mut links = Vec::with_capacity(nl);
    for _ in 0..nl {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| SimError::parse(last + 1, format!("truncated: expected {nl} links")))?;
        last = ln;
        let f: Vec<&str> = line.split_whitespace().collect();
        let ["L", a, b, delay, level] = f.as_slice() else {
            return Err(SimError::parse(ln, "expected `L <u> <v> <delay_ms> <level>`"));
        };
        let a: u32 = a.parse().map_err(|_| SimError::parse(ln, "bad link endpoint"))?;
        let b: u32 = b.parse().map_err(|_| SimError::parse(ln, "bad link endpoint"))?;
        let delay: Micros = delay
            .parse()
            .map_err(|e: SimError| SimError::parse(ln, e.to_string()))?;
        let level: LinkLevel = level
            .parse()
            .map_err(|e: SimError| SimError::parse(ln, e.to_string()))?;
        links.push(UnderlayLink {
            a: RouterId(a),
            b: RouterId(b),
            delay,
            level,
        });
    }
    if let Some((ln, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(SimError::parse(ln, "unexpected trailing content"));
    }
    UnderlayGraph::new(routers, links).map_err(|e| SimError::parse(last, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::underlay::{generate_transit_stub, TransitStubParams};

    fn small() -> TransitStubParams {
        TransitStubParams {
            transit_domains: 2,
            transit_nodes_per_domain: 3,
            stub_domains_per_transit_node: 2,
            stub_nodes_per_domain: 4,
            ..TransitStubParams::default()
        }
    }

    #[test]
    fn round_trip() {
        let g = generate_transit_stub(&small(), 11).unwrap();
        let text = write_underlay(&g);
        let back = parse_underlay(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.stub_domains(), g.stub_domains());
        assert_eq!(write_underlay(&back), text);
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(parse_underlay(""), Err(SimError::Parse { line: 1, .. })));
        let g = generate_transit_stub(&small(), 11).unwrap();
        let text = write_underlay(&g);
        let cut: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_underlay(&cut), Err(SimError::Parse { line: 5, .. })));
        let bad = "underlay v1 2 1\nR 0 transit 0 -\nR 1 stub 0 0\nL 0 1 1.5 sideways\n";
        assert!(matches!(parse_underlay(bad), Err(SimError::Parse { line: 4, .. })));
    }
}
