//! Placement of social-graph users onto stub routers.
//!
//! Users are binned greedily by great-circle distance (bins of at most
//! `capacity` users), each bin lands in one stub domain, and bins are handed
//! out in stub-domain order so that consecutive (geographically related) bins
//! share transit domains. Inside a domain users attach round-robin to its
//! routers.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Result, SimError};
use crate::rng_from_seed;
use crate::socialgraph::{SocialGraph, UserId};
use crate::underlay::{Micros, RouterId, UnderlayGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Uniform sample without replacement.
    Random,
    /// Breadth-first ball around a seeded start user.
    BfsCluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedMode {
    /// Geographic binning.
    Geographic,
    /// Users shuffled into random stub domains (ablation control).
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedParams {
    /// Users to place; `None` places every user.
    pub subset_size: Option<usize>,
    /// Max users per stub domain; defaults to `2 * ceil(users / stub domains)`.
    pub stub_capacity: Option<usize>,
    pub selection: Selection,
    pub mode: EmbedMode,
    pub access_delay_ms: f64,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            subset_size: None,
            stub_capacity: None,
            selection: Selection::BfsCluster,
            mode: EmbedMode::Geographic,
            access_delay_ms: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attachment {
    pub router: RouterId,
    pub stub_domain: u32,
    pub access: Micros,
}

/// Immutable map from placed users to their stub-router attachment.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Placement {
    attachments: BTreeMap<UserId, Attachment>,
}

impl Placement {
    pub fn from_attachments(attachments: BTreeMap<UserId, Attachment>) -> Self {
        Placement { attachments }
    }

    pub fn len(&self) -> usize {
        self.attachments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attachments.is_empty()
    }

    pub fn get(&self, u: UserId) -> Option<&Attachment> {
        self.attachments.get(&u)
    }

    pub fn contains(&self, u: UserId) -> bool {
        self.attachments.contains_key(&u)
    }

    /// Placed users in id order.
    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        self.attachments.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (UserId, &Attachment)> + '_ {
        self.attachments.iter().map(|(u, a)| (*u, a))
    }

    /// `access(a) + shortest router path + access(b)`; zero when `a == b`.
    pub fn user_delay(&self, underlay: &UnderlayGraph, a: UserId, b: UserId) -> Result<Micros> {
        let pa = self.get(a).ok_or(SimError::Unplaced(a.0))?;
        let pb = self.get(b).ok_or(SimError::Unplaced(b.0))?;
        if a == b {
            return Ok(Micros::ZERO);
        }
        Ok(pa.access + underlay.shortest_path_delay(pa.router, pb.router) + pb.access)
    }

    /// Per-domain user counts.
    pub fn occupancy(&self) -> BTreeMap<u32, usize> {
        let mut out = BTreeMap::new();
        for a in self.attachments.values() {
            *out.entry(a.stub_domain).or_insert(0) += 1;
        }
        out
    }

    /// CSV with header `user_id,router_id,stub_domain,access_delay_ms`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("user_id,router_id,stub_domain,access_delay_ms\n");
        for (u, a) in &self.attachments {
            writeln!(out, "{u},{},{},{}", a.router, a.stub_domain, a.access).unwrap();
        }
        out
    }
}

/// Picks the user subset to embed, returned in id order.
pub fn select_subset(g: &SocialGraph, params: &EmbedParams, seed: u64) -> Result<Vec<UserId>> {
    let n = g.node_count();
    let k = params.subset_size.unwrap_or(n);
    if k > n {
        return Err(SimError::param(format!("subset_size {k} exceeds graph size {n}")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut rng = rng_from_seed(seed);
    let mut chosen: Vec<UserId> = match params.selection {
        Selection::Random => rand::seq::index::sample(&mut rng, n, k)
            .into_iter()
            .map(|i| UserId(i as u32))
            .collect(),
        Selection::BfsCluster => {
            let start = UserId(rng.gen_range(0..n as u32));
            bfs_ball(g, start, k)
        }
    };
    chosen.sort_unstable();
    Ok(chosen)
}

/// First `k` users in BFS order from `start` (neighbors by id); continues
/// from the smallest unvisited user if the component runs out.
fn bfs_ball(g: &SocialGraph, start: UserId, k: usize) -> Vec<UserId> {
    let mut seen = vec![false; g.node_count()];
    let mut out = Vec::with_capacity(k);
    let mut next_fresh = 0usize;
    let mut queue = VecDeque::from([start]);
    seen[start.index()] = true;
    while out.len() < k {
        let u = match queue.pop_front() {
            Some(u) => u,
            None => {
                while seen[next_fresh] {
                    next_fresh += 1;
                }
                seen[next_fresh] = true;
                UserId(next_fresh as u32)
            }
        };
        out.push(u);
        for &v in g.neighbors(u) {
            if !seen[v.index()] {
                seen[v.index()] = true;
                queue.push_back(v);
            }
        }
    }
    out
}

/// Attaches `users` to stub routers of `underlay`.
pub fn embed(
    users: &[UserId],
    g: &SocialGraph,
    underlay: &UnderlayGraph,
    params: &EmbedParams,
    seed: u64,
) -> Result<Placement> {
    let domains = underlay.stub_domains();
    if users.is_empty() {
        return Ok(Placement::default());
    }
    if domains.is_empty() {
        return Err(SimError::Capacity { required: users.len() });
    }
    if let Some(u) = users.iter().find(|u| u.index() >= g.node_count()) {
        return Err(SimError::param(format!("user {u} is not in the social graph")));
    }
    if !(params.access_delay_ms >= 0.0) {
        return Err(SimError::param("access_delay_ms must be >= 0"));
    }
    let required = users.len().div_ceil(domains.len());
    let capacity = params.stub_capacity.unwrap_or(2 * required);
    if capacity == 0 {
        return Err(SimError::param("stub_capacity must be >= 1"));
    }
    if capacity < required {
        return Err(SimError::Capacity { required });
    }

    let mut rng = rng_from_seed(seed);
    let (bins, domain_order): (Vec<Vec<UserId>>, Vec<usize>) = match params.mode {
        EmbedMode::Geographic => (geographic_bins(users, g, capacity), (0..domains.len()).collect()),
        EmbedMode::Random => {
            let mut shuffled = users.to_vec();
            shuffled.shuffle(&mut rng);
            let bins = shuffled.chunks(capacity).map(|c| c.to_vec()).collect();
            let mut order: Vec<usize> = (0..domains.len()).collect();
            order.shuffle(&mut rng);
            (bins, order)
        }
    };

    let access = Micros::from_ms(params.access_delay_ms);
    let mut attachments = BTreeMap::new();
    for (mut bin, &d) in bins.into_iter().zip(&domain_order) {
        let domain = &domains[d];
        bin.sort_unstable();
        for (i, u) in bin.into_iter().enumerate() {
            attachments.insert(
                u,
                Attachment {
                    router: domain.routers[i % domain.routers.len()],
                    stub_domain: domain.index,
                    access,
                },
            );
        }
    }
    Ok(Placement { attachments })
}

/// Greedy agglomeration: users ordered by `(region, id)`; the first
/// unassigned user seeds a bin and pulls in its `capacity - 1` nearest
/// unassigned users.
fn geographic_bins(users: &[UserId], g: &SocialGraph, capacity: usize) -> Vec<Vec<UserId>> {
    let mut order = users.to_vec();
    order.sort_by_key(|&u| (g.profile(u).region, u));
    order.dedup();
    let mut assigned = vec![false; order.len()];
    let mut bins = Vec::new();
    for i in 0..order.len() {
        if assigned[i] {
            continue;
        }
        assigned[i] = true;
        let seed = order[i];
        let mut near: Vec<(f64, UserId, usize)> = (0..order.len())
            .filter(|&j| !assigned[j])
            .map(|j| (g.distance_km(seed, order[j]), order[j], j))
            .collect();
        near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut bin = vec![seed];
        for &(_, u, j) in near.iter().take(capacity - 1) {
            assigned[j] = true;
            bin.push(u);
        }
        bins.push(bin);
    }
    bins
}
