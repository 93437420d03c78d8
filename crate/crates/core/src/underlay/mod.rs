//! Transit-stub router topology and shortest-path delays.
//!
//! All delays are integer microseconds ([`Micros`]) so path sums are exact
//! and independent of summation order.

mod generate;
mod io;
mod paths;

use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use crate::error::{Result, SimError};

pub use generate::{generate_transit_stub, DelayRange, TransitStubParams};
pub use io::{load_underlay, parse_underlay, save_underlay, write_underlay};
pub use paths::{dijkstra, SsspTable};

use paths::PathCache;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RouterId(pub u32);

impl RouterId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for RouterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A delay in integer microseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Micros(pub u64);

impl Micros {
    pub const ZERO: Micros = Micros(0);

    pub fn from_ms(ms: f64) -> Self {
        Micros((ms * 1000.0).round().max(0.0) as u64)
    }

    pub fn as_ms(self) -> f64 {
        self.0 as f64 / 1000.0
    }
}

impl Add for Micros {
    type Output = Micros;
    fn add(self, rhs: Micros) -> Micros {
        Micros(self.0 + rhs.0)
    }
}

impl AddAssign for Micros {
    fn add_assign(&mut self, rhs: Micros) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for Micros {
    fn sum<I: Iterator<Item = Micros>>(iter: I) -> Micros {
        Micros(iter.map(|m| m.0).sum())
    }
}

/// Millisecond rendering with exactly three decimals.
impl fmt::Display for Micros {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:03}", self.0 / 1000, self.0 % 1000)
    }
}

impl FromStr for Micros {
    type Err = SimError;

    /// Parses a non-negative millisecond value with at most three decimals.
    fn from_str(s: &str) -> Result<Micros> {
        let bad = || SimError::param(format!("bad millisecond value `{s}`"));
        let (whole, frac) = s.split_once('.').unwrap_or((s, ""));
        if whole.is_empty() || frac.len() > 3 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let whole: u64 = whole.parse().map_err(|_| bad())?;
        let mut frac_us = 0u64;
        for (i, b) in frac.bytes().enumerate() {
            frac_us += u64::from(b - b'0') * 10u64.pow(2 - i as u32);
        }
        Ok(Micros(whole * 1000 + frac_us))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouterKind {
    Transit,
    Stub,
}

impl RouterKind {
    pub fn name(self) -> &'static str {
        match self {
            RouterKind::Transit => "transit",
            RouterKind::Stub => "stub",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Router {
    pub id: RouterId,
    pub kind: RouterKind,
    pub transit_domain: u32,
    /// Global stub-domain index; `None` exactly for transit routers.
    pub stub_domain: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LinkLevel {
    InterTransit,
    IntraTransit,
    TransitStub,
    IntraStub,
}

impl LinkLevel {
    pub const ALL: [LinkLevel; 4] = [
        LinkLevel::InterTransit,
        LinkLevel::IntraTransit,
        LinkLevel::TransitStub,
        LinkLevel::IntraStub,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinkLevel::InterTransit => "inter_transit",
            LinkLevel::IntraTransit => "intra_transit",
            LinkLevel::TransitStub => "transit_stub",
            LinkLevel::IntraStub => "intra_stub",
        }
    }
}

impl FromStr for LinkLevel {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        LinkLevel::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| SimError::param(format!("unknown link level `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnderlayLink {
    pub a: RouterId,
    pub b: RouterId,
    pub delay: Micros,
    pub level: LinkLevel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StubDomain {
    pub index: u32,
    pub transit_domain: u32,
    /// Transit router the domain hangs off.
    pub transit_router: RouterId,
    /// Member routers in id order.
    pub routers: Vec<RouterId>,
}

/// Undirected router graph with a memoized single-source shortest-path cache.
pub struct UnderlayGraph {
    routers: Vec<Router>,
    links: Vec<UnderlayLink>,
    /// `(neighbor, link index)` per router.
    adjacency: Vec<Vec<(RouterId, usize)>>,
    stub_domains: Vec<StubDomain>,
    cache: PathCache,
}

impl fmt::Debug for UnderlayGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnderlayGraph")
            .field("routers", &self.routers.len())
            .field("links", &self.links.len())
            .field("stub_domains", &self.stub_domains.len())
            .finish()
    }
}

impl PartialEq for UnderlayGraph {
    fn eq(&self, other: &Self) -> bool {
        self.routers == other.routers && self.links == other.links
    }
}

impl UnderlayGraph {
    /// Assembles a graph, checking ids, kinds and the no-shortcut rule.
    pub fn new(routers: Vec<Router>, links: Vec<UnderlayLink>) -> Result<Self> {
        for (i, r) in routers.iter().enumerate() {
            if r.id.index() != i {
                return Err(SimError::param(format!("router at position {i} has id {}", r.id)));
            }
            if (r.kind == RouterKind::Stub) != r.stub_domain.is_some() {
                return Err(SimError::param(format!("router {i} kind/domain mismatch")));
            }
        }
        // predecessor links are stored as u32 with u32::MAX as the sentinel
        if routers.len() >= u32::MAX as usize || links.len() >= u32::MAX as usize {
            return Err(SimError::param("too many routers or links"));
        }
        let mut adjacency = vec![Vec::new(); routers.len()];
        for (idx, l) in links.iter().enumerate() {
            if l.a == l.b || l.a.index() >= routers.len() || l.b.index() >= routers.len() {
                return Err(SimError::param(format!("bad link {} - {}", l.a, l.b)));
            }
            if l.delay == Micros::ZERO {
                return Err(SimError::param(format!("link {} - {} has zero delay", l.a, l.b)));
            }
            let (ra, rb) = (&routers[l.a.index()], &routers[l.b.index()]);
            if ra.kind == RouterKind::Stub && rb.kind == RouterKind::Stub && ra.stub_domain != rb.stub_domain {
                return Err(SimError::param(format!(
                    "stub link {} - {} crosses stub domains",
                    l.a, l.b
                )));
            }
            adjacency[l.a.index()].push((l.b, idx));
            adjacency[l.b.index()].push((l.a, idx));
        }

        let stub_count = routers.iter().filter_map(|r| r.stub_domain).max().map_or(0, |m| m + 1);
        let mut stub_domains: Vec<StubDomain> = (0..stub_count)
            .map(|index| StubDomain {
                index,
                transit_domain: 0,
                transit_router: RouterId(u32::MAX),
                routers: Vec::new(),
            })
            .collect();
        for r in &routers {
            if let Some(s) = r.stub_domain {
                let d = &mut stub_domains[s as usize];
                d.routers.push(r.id);
                d.transit_domain = r.transit_domain;
            }
        }
        for l in &links {
            if l.level == LinkLevel::TransitStub {
                let (t, s) = if routers[l.a.index()].kind == RouterKind::Transit {
                    (l.a, l.b)
                } else {
                    (l.b, l.a)
                };
                if let Some(sd) = routers[s.index()].stub_domain {
                    stub_domains[sd as usize].transit_router = t;
                }
            }
        }
        if let Some(d) = stub_domains.iter().find(|d| d.routers.is_empty()) {
            return Err(SimError::param(format!("stub domain {} has no routers", d.index)));
        }

        let cache = PathCache::new(routers.len());
        Ok(UnderlayGraph {
            routers,
            links,
            adjacency,
            stub_domains,
            cache,
        })
    }

    pub fn router_count(&self) -> usize {
        self.routers.len()
    }

    pub fn routers(&self) -> &[Router] {
        &self.routers
    }

    pub fn router(&self, id: RouterId) -> &Router {
        &self.routers[id.index()]
    }

    pub fn links(&self) -> &[UnderlayLink] {
        &self.links
    }

    pub fn neighbors(&self, id: RouterId) -> &[(RouterId, usize)] {
        &self.adjacency[id.index()]
    }

    pub fn stub_domains(&self) -> &[StubDomain] {
        &self.stub_domains
    }

    /// Number of connected components of the router graph.
    pub fn component_count(&self) -> usize {
        let n = self.routers.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v.index()] {
                        seen[v.index()] = true;
                        stack.push(v.index());
                    }
                }
            }
        }
        count
    }

    /// Memoized shortest-path table from `source`; repeated calls return the
    /// same allocation. Safe to call from several threads.
    pub fn sssp(&self, source: RouterId) -> std::sync::Arc<SsspTable> {
        self.cache.get_or_fill(source, || dijkstra(self, source))
    }

    /// Exact minimum delay between two routers.
    pub fn shortest_path_delay(&self, a: RouterId, b: RouterId) -> Micros {
        if a == b {
            return Micros::ZERO;
        }
        // fill from the smaller id so symmetric queries share one table
        let (s, t) = if a <= b { (a, b) } else { (b, a) };
        self.sssp(s).dist[t.index()]
    }

    /// Link indices along the cached shortest path between `a` and `b`; the
    /// same path whose delay [`Self::shortest_path_delay`] reports.
    pub fn path_links(&self, a: RouterId, b: RouterId) -> Vec<usize> {
        if a == b {
            return Vec::new();
        }
        let (s, t) = if a <= b { (a, b) } else { (b, a) };
        self.sssp(s).path_links(self, t)
    }

    pub fn cached_sources(&self) -> usize {
        self.cache.filled()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn micros_text_round_trip() {
        for (text, us) in [("0.000", 0), ("1.000", 1000), ("12.345", 12345), ("150.001", 150001)] {
            let m: Micros = text.parse().unwrap();
            assert_eq!(m, Micros(us));
            assert_eq!(m.to_string(), text);
        }
        assert_eq!("2.5".parse::<Micros>().unwrap(), Micros(2500));
        assert_eq!("7".parse::<Micros>().unwrap(), Micros(7000));
        for bad in ["", "-1", "1.2345", "a.b", ".5"] {
            assert!(bad.parse::<Micros>().is_err(), "{bad}");
        }
    }

    #[test]
    fn rejects_cross_domain_stub_links() {
        let routers = vec![
            Router {
                id: RouterId(0),
                kind: RouterKind::Stub,
                transit_domain: 0,
                stub_domain: Some(0),
            },
            Router {
                id: RouterId(1),
                kind: RouterKind::Stub,
                transit_domain: 0,
                stub_domain: Some(1),
            },
        ];
        let links = vec![UnderlayLink {
            a: RouterId(0),
            b: RouterId(1),
            delay: Micros(1000),
            level: LinkLevel::IntraStub,
        }];
        assert!(UnderlayGraph::new(routers, links).is_err());
    }
}
