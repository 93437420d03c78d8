//! Transit-stub topology generator in the style of GT-ITM.
//!
//! Transit domains are random graphs of transit routers joined by a fixed
//! number of inter-domain links per domain pair. Every transit router owns a
//! number of stub domains, each a random graph attached to its transit router
//! through one gateway link. Any Bernoulli subgraph that comes out
//! disconnected is repaired by chaining its components.

use rand::Rng;

use super::{LinkLevel, Micros, Router, RouterId, RouterKind, UnderlayGraph, UnderlayLink};
use crate::error::{Result, SimError};
use crate::rng_from_seed;

/// Inclusive millisecond range for link delays of one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayRange {
    pub lo_ms: f64,
    pub hi_ms: f64,
}

impl DelayRange {
    pub const fn new(lo_ms: f64, hi_ms: f64) -> Self {
        DelayRange { lo_ms, hi_ms }
    }

    pub fn contains(&self, d: Micros) -> bool {
        Micros::from_ms(self.lo_ms) <= d && d <= Micros::from_ms(self.hi_ms)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Micros {
        let lo = Micros::from_ms(self.lo_ms).0.max(1);
        let hi = Micros::from_ms(self.hi_ms).0.max(lo);
        Micros(rng.gen_range(lo..=hi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitStubParams {
    pub transit_domains: usize,
    pub transit_nodes_per_domain: usize,
    pub transit_edge_prob: f64,
    pub stub_domains_per_transit_node: usize,
    /// Mean stub-domain size; sizes are drawn uniformly from
    /// `[ceil(mean/2), floor(3*mean/2)]`.
    pub stub_nodes_per_domain: usize,
    pub stub_edge_prob: f64,
    pub inter_transit_links: usize,
    pub inter_transit_delay: DelayRange,
    pub intra_transit_delay: DelayRange,
    pub transit_stub_delay: DelayRange,
    pub intra_stub_delay: DelayRange,
}

impl Default for TransitStubParams {
    fn default() -> Self {
        TransitStubParams {
            transit_domains: 10,
            transit_nodes_per_domain: 10,
            transit_edge_prob: 0.6,
            stub_domains_per_transit_node: 3,
            stub_nodes_per_domain: 16,
            stub_edge_prob: 0.42,
            inter_transit_links: 1,
            inter_transit_delay: DelayRange::new(50.0, 150.0),
            intra_transit_delay: DelayRange::new(10.0, 40.0),
            transit_stub_delay: DelayRange::new(5.0, 20.0),
            intra_stub_delay: DelayRange::new(1.0, 5.0),
        }
    }
}

impl TransitStubParams {
    pub fn validate(&self) -> Result<()> {
        if self.transit_domains == 0 {
            return Err(SimError::param("transit_domains must be >= 1"));
        }
        if self.transit_nodes_per_domain == 0 || self.stub_nodes_per_domain == 0 {
            return Err(SimError::param("per-domain node means must be >= 1"));
        }
        for (name, p) in [
            ("transit_edge_prob", self.transit_edge_prob),
            ("stub_edge_prob", self.stub_edge_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SimError::param(format!("{name} must lie in [0,1]")));
            }
        }
        for level in LinkLevel::ALL {
            let r = self.delay_range(level);
            if !(r.lo_ms > 0.0) || !(r.lo_ms <= r.hi_ms) {
                return Err(SimError::param(format!(
                    "{} delay range must satisfy 0 < lo <= hi",
                    level.name()
                )));
            }
        }
        Ok(())
    }

    pub fn delay_range(&self, level: LinkLevel) -> DelayRange {
        match level {
            LinkLevel::InterTransit => self.inter_transit_delay,
            LinkLevel::IntraTransit => self.intra_transit_delay,
            LinkLevel::TransitStub => self.transit_stub_delay,
            LinkLevel::IntraStub => self.intra_stub_delay,
        }
    }

    fn stub_size_bounds(&self) -> (usize, usize) {
        let m = self.stub_nodes_per_domain;
        (m.div_ceil(2).max(1), (3 * m / 2).max(1))
    }

    /// Expected router count under these parameters.
    pub fn expected_routers(&self) -> f64 {
        let (lo, hi) = self.stub_size_bounds();
        let stub_mean = (lo + hi) as f64 / 2.0;
        let transit = (self.transit_domains * self.transit_nodes_per_domain) as f64;
        transit * (1.0 + self.stub_domains_per_transit_node as f64 * stub_mean)
    }
}

struct Builder<'a, R> {
    params: &'a TransitStubParams,
    rng: R,
    routers: Vec<Router>,
    links: Vec<UnderlayLink>,
}

impl<R: Rng> Builder<'_, R> {
    fn add_router(&mut self, kind: RouterKind, transit_domain: u32, stub_domain: Option<u32>) -> RouterId {
        let id = RouterId(self.routers.len() as u32);
        self.routers.push(Router {
            id,
            kind,
            transit_domain,
            stub_domain,
        });
        id
    }

    fn add_link(&mut self, a: RouterId, b: RouterId, level: LinkLevel) {
        let delay = self.params.delay_range(level).draw(&mut self.rng);
        self.links.push(UnderlayLink { a, b, delay, level });
    }

    /// Bernoulli(p) edges over `members`, then chain any leftover components.
    fn random_domain(&mut self, members: &[RouterId], p: f64, level: LinkLevel) {
        let k = members.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for i in 0..k {
            for j in i + 1..k {
                if self.rng.gen_bool(p) {
                    self.add_link(members[i], members[j], level);
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        // components in order of their smallest member; link consecutive ones
        let mut heads: Vec<usize> = Vec::new();
        for i in 0..k {
            let r = find(&mut parent, i);
            if !heads.contains(&r) {
                heads.push(r);
            }
        }
        for w in heads.windows(2) {
            self.add_link(members[w[0]], members[w[1]], level);
        }
    }
}

/// Generates a connected transit-stub topology. Deterministic per seed.
pub fn generate_transit_stub(params: &TransitStubParams, seed: u64) -> Result<UnderlayGraph> {
    params.validate()?;
    let mut b = Builder {
        params,
        rng: rng_from_seed(seed),
        routers: Vec::new(),
        links: Vec::new(),
    };

    let mut domains: Vec<Vec<RouterId>> = Vec::with_capacity(params.transit_domains);
    for d in 0..params.transit_domains {
        let members: Vec<RouterId> = (0..params.transit_nodes_per_domain)
            .map(|_| b.add_router(RouterKind::Transit, d as u32, None))
            .collect();
        b.random_domain(&members, params.transit_edge_prob, LinkLevel::IntraTransit);
        domains.push(members);
    }

    if params.inter_transit_links == 0 {
        for w in 0..domains.len().saturating_sub(1) {
            let (x, y) = (domains[w][0], domains[w + 1][0]);
            b.add_link(x, y, LinkLevel::InterTransit);
        }
    } else {
        for i in 0..domains.len() {
            for j in i + 1..domains.len() {
                let mut used: Vec<(RouterId, RouterId)> = Vec::new();
                let possible = domains[i].len() * domains[j].len();
                for _ in 0..params.inter_transit_links.min(possible) {
                    let pair = loop {
                        let x = domains[i][b.rng.gen_range(0..domains[i].len())];
                        let y = domains[j][b.rng.gen_range(0..domains[j].len())];
                        if !used.contains(&(x, y)) {
                            break (x, y);
                        }
                    };
                    used.push(pair);
                    b.add_link(pair.0, pair.1, LinkLevel::InterTransit);
                }
            }
        }
    }

    let (lo, hi) = params.stub_size_bounds();
    let transit_routers: Vec<RouterId> = domains.iter().flatten().copied().collect();
    let mut stub_index = 0u32;
    for t in transit_routers {
        let tdom = b.routers[t.index()].transit_domain;
        for _ in 0..params.stub_domains_per_transit_node {
            let size = b.rng.gen_range(lo..=hi);
            let members: Vec<RouterId> = (0..size)
                .map(|_| b.add_router(RouterKind::Stub, tdom, Some(stub_index)))
                .collect();
            b.random_domain(&members, params.stub_edge_prob, LinkLevel::IntraStub);
            let gateway = members[b.rng.gen_range(0..members.len())];
            b.add_link(t, gateway, LinkLevel::TransitStub);
            stub_index += 1;
        }
    }

    UnderlayGraph::new(b.routers, b.links)
}
