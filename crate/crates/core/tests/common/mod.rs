//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use socnet_sim::embedding::{embed, select_subset, Placement};
use socnet_sim::harness::{seed, ExperimentConfig};
use socnet_sim::multicast::{DelayMatrix, OverlayTree};
use socnet_sim::socialgraph::{generate_social_graph, SocialGraph};
use socnet_sim::split_seed;
use socnet_sim::underlay::{
    generate_transit_stub, LinkLevel, Micros, Router, RouterId, RouterKind, UnderlayGraph, UnderlayLink,
};

/// Graph, underlay and placement exactly as a run of `cfg` builds them.
pub struct World {
    pub graph: SocialGraph,
    pub underlay: UnderlayGraph,
    pub placement: Placement,
}

impl World {
    pub fn build(cfg: &ExperimentConfig) -> World {
        let m = cfg.master_seed;
        let graph = generate_social_graph(&cfg.social, &cfg.geo, split_seed(m, seed::SOCIAL)).unwrap();
        let underlay = generate_transit_stub(&cfg.underlay, split_seed(m, seed::UNDERLAY)).unwrap();
        let users = select_subset(&graph, &cfg.embed, split_seed(m, seed::EMBED_SUBSET)).unwrap();
        let placement = embed(&users, &graph, &underlay, &cfg.embed, split_seed(m, seed::EMBED_PLACE)).unwrap();
        World {
            graph,
            underlay,
            placement,
        }
    }
}

/// A small configuration that runs every stage in well under a second.
pub fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_overrides([
        "social.n=400",
        "social.max_degree_cap=120",
        "social.apl_samples=200",
        "underlay.transit_domains=2",
        "underlay.transit_nodes_per_domain=3",
        "underlay.stub_domains_per_transit_node=2",
        "underlay.stub_nodes_per_domain=5",
        "search.sample_users=100",
        "search.num_queries=300",
        "search.epochs=3",
        "multicast.sizes=1,2,8,16",
        "multicast.trials=3",
    ])
    .unwrap();
    cfg
}

/// Connected random router graph with `n` routers: a random spanning tree
/// plus `extra` random links, delays uniform in 1..=`max_delay_us`.
pub fn random_underlay(n: usize, extra: usize, max_delay_us: u64, seed: u64) -> UnderlayGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let routers = (0..n)
        .map(|i| Router {
            id: RouterId(i as u32),
            kind: RouterKind::Transit,
            transit_domain: 0,
            stub_domain: None,
        })
        .collect();
    let mut links = Vec::new();
    let link = |a: usize, b: usize, rng: &mut ChaCha8Rng| UnderlayLink {
        a: RouterId(a as u32),
        b: RouterId(b as u32),
        delay: Micros(rng.gen_range(1..=max_delay_us)),
        level: LinkLevel::IntraTransit,
    };
    for v in 1..n {
        let u = rng.gen_range(0..v);
        links.push(link(u, v, &mut rng));
    }
    for _ in 0..extra {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            links.push(link(a, b, &mut rng));
        }
    }
    UnderlayGraph::new(routers, links).unwrap()
}

/// All-pairs shortest delays by Floyd–Warshall over the raw link list;
/// `u64::MAX` marks unreachable pairs.
pub fn floyd_warshall(g: &UnderlayGraph) -> Vec<Vec<u64>> {
    let n = g.router_count();
    let mut d = vec![vec![u64::MAX; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for l in g.links() {
        let (a, b) = (l.a.index(), l.b.index());
        d[a][b] = d[a][b].min(l.delay.0);
        d[b][a] = d[b][a].min(l.delay.0);
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == u64::MAX {
                continue;
            }
            for j in 0..n {
                if d[k][j] != u64::MAX && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Independent tree check: the source is the only root, every member
/// reaches it through parent links within `n` steps, and each delay is the
/// sum of direct member-to-member delays along the root path.
pub fn check_tree(t: &OverlayTree, d: &DelayMatrix) -> Result<(), String> {
    let n = t.len();
    let src = t
        .members()
        .iter()
        .position(|&u| u == t.source())
        .ok_or("source not a member")?;
    if t.parent_index(src) != src || t.delay_at(src) != Micros::ZERO {
        return Err("source is not a zero-delay root".into());
    }
    for i in 0..n {
        let mut sum = Micros::ZERO;
        let mut at = i;
        let mut steps = 0;
        while at != src {
            let p = t.parent_index(at);
            if p == at {
                return Err(format!("member {i} has a second root {at}"));
            }
            sum += d.get(p, at);
            at = p;
            steps += 1;
            if steps > n {
                return Err(format!("member {i} lies on a cycle"));
            }
        }
        if sum != t.delay_at(i) {
            return Err(format!("member {i}: delay {} but path sum {}", t.delay_at(i), sum));
        }
    }
    Ok(())
}
