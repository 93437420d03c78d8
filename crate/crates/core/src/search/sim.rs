//! Synchronous hop-round simulation of interest queries over the overlay.
//!
//! Every query is injected at its origin and propagated round by round: all
//! hop-`h` messages are delivered (ordered by emitter id, then target id)
//! before any hop-`h+1` message is sent. A peer processes a query id at most
//! once; later copies are dropped. A peer that holds the token answers the
//! origin directly and does not forward further.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::embedding::Placement;
use crate::error::{Result, SimError};
use crate::rng_from_seed;
use crate::socialgraph::{InterestCategory, SocialGraph, Token, UserId};
use crate::underlay::{Micros, UnderlayGraph};

use super::peer::{evict, on_hit_update, record_miss, AdaptParams, PeerState};
use super::{forward_set, Query, RoutingPolicy};

/// How query tokens are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TokenDistribution {
    /// A token from the origin's own profile in the chosen category.
    OwnInterests,
    /// Zipf popularity over `1..=vocab_size`.
    Zipf { vocab_size: u32, exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Workload {
    pub num_queries: usize,
    pub tokens: TokenDistribution,
}

impl Default for Workload {
    fn default() -> Self {
        Workload {
            num_queries: 10_000,
            tokens: TokenDistribution::OwnInterests,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub ttl: u32,
    /// Peers with at least this many friends keep a two-hop vicinity table.
    pub supernode_threshold: usize,
    pub adaptive: bool,
    pub adapt: AdaptParams,
    pub epochs: usize,
    /// Whether acquired friends count toward a peer's degree.
    pub acquired_in_degree: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            ttl: 5,
            supernode_threshold: 100,
            adaptive: false,
            adapt: AdaptParams::default(),
            epochs: 10,
            acquired_in_degree: true,
        }
    }
}

/// Aggregate over a batch of queries.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub queries: usize,
    pub success_rate: f64,
    /// Mean hops to the first hit, over successful queries.
    pub mean_hops: Option<f64>,
    pub mean_messages: f64,
    /// Mean of (forward path delay + direct reply delay), over successful
    /// queries, when the overlay is placed on an underlay.
    pub mean_latency_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRecord {
    pub query: Query,
    pub first_hit_hops: Option<u32>,
    pub hits: usize,
    pub messages: u64,
    pub latency: Option<Micros>,
}

/// Counters that let callers assert protocol invariants after a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimAudit {
    pub deliveries: u64,
    pub duplicates_dropped: u64,
    /// Times any peer processed a query id it had already processed.
    pub reprocessed: u64,
    pub strength_out_of_bounds: u64,
    /// Friend entries without a counterpart entry.
    pub asymmetric_entries: u64,
    /// Messages sent while the sender held ttl 0.
    pub sends_at_zero_ttl: u64,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub policy: RoutingPolicy,
    pub overall: QueryMetrics,
    pub epochs: Vec<QueryMetrics>,
    pub records: Vec<QueryRecord>,
    pub audit: SimAudit,
    pub states: Vec<Option<PeerState>>,
}

impl SimOutput {
    /// Rows for the results CSV (no header), one per epoch, with `label` in
    /// the policy column.
    pub fn csv_rows(&self, label: &str, seed: u64) -> String {
        let mut out = String::new();
        for (i, m) in self.epochs.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                label,
                seed,
                i,
                fmt_f(m.success_rate),
                fmt_opt(m.mean_hops),
                fmt_f(m.mean_messages),
                fmt_opt(m.mean_latency_ms)
            )
            .unwrap();
        }
        out
    }
}

pub const QUERY_CSV_HEADER: &str = "policy,seed,epoch,success_rate,mean_hops,mean_msgs,mean_latency_ms";

fn fmt_f(x: f64) -> String {
    format!("{x:.6}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

/// Pre-generates the query stream; identical across policies for one seed.
pub fn generate_workload(
    g: &SocialGraph,
    participants: &[UserId],
    workload: &Workload,
    ttl: u32,
    seed: u64,
) -> Result<Vec<Query>> {
    if workload.num_queries == 0 {
        return Err(SimError::param("workload needs at least one query"));
    }
    if participants.is_empty() {
        return Err(SimError::param("workload needs at least one participant"));
    }
    let zipf = match workload.tokens {
        TokenDistribution::Zipf { vocab_size, exponent } => {
            if vocab_size == 0 || !(exponent >= 0.0) {
                return Err(SimError::param("zipf workload needs vocab_size >= 1, exponent >= 0"));
            }
            Some(WeightedIndex::new((1..=vocab_size).map(|k| (k as f64).powf(-exponent))).expect("validated"))
        }
        TokenDistribution::OwnInterests => None,
    };
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(workload.num_queries);
    for i in 0..workload.num_queries {
        let origin = participants[rng.gen_range(0..participants.len())];
        let category = InterestCategory::ALL[rng.gen_range(0..InterestCategory::COUNT)];
        let token: Token = match &zipf {
            Some(z) => z.sample(&mut rng) as Token,
            None => {
                let own: Vec<Token> = g.profile(origin).interests.get(category).iter().copied().collect();
                own[rng.gen_range(0..own.len())]
            }
        };
        out.push(Query {
            id: i as u64 + 1,
            origin,
            category,
            token,
            ttl,
        });
    }
    Ok(out)
}

struct Overlay<'a> {
    states: Vec<Option<PeerState>>,
    latency: Option<(&'a Placement, &'a UnderlayGraph)>,
    acquired_in_degree: bool,
}

impl Overlay<'_> {
    fn state(&self, u: UserId) -> &PeerState {
        self.states[u.index()].as_ref().expect("participant")
    }

    fn degree(&self, u: UserId) -> usize {
        let s = self.state(u);
        if self.acquired_in_degree {
            s.degree()
        } else {
            s.original_degree()
        }
    }

    fn delay(&self, a: UserId, b: UserId) -> Option<Micros> {
        self.latency
            .map(|(p, u)| p.user_delay(u, a, b).expect("participants are placed"))
    }
}

#[derive(Clone, Copy)]
struct Holder {
    node: UserId,
    arrived_from: Option<UserId>,
    ttl: u32,
    /// Two-hop target this peer was asked to relay to.
    relay_to: Option<UserId>,
}

/// Runs the query simulation over the participants' induced overlay.
///
/// With a placement the participants are the placed users and latency is
/// measured on the underlay; without one every user participates and only
/// hop/message metrics are produced.
pub fn run_query_sim(
    g: &SocialGraph,
    placement: Option<(&Placement, &UnderlayGraph)>,
    workload: &Workload,
    policy: RoutingPolicy,
    params: &SimParams,
    seed: u64,
) -> Result<SimOutput> {
    if params.epochs == 0 || params.epochs > workload.num_queries {
        return Err(SimError::param("epochs must lie in 1..=num_queries"));
    }
    let participants = participants(g, placement);
    let queries = generate_workload(g, &participants, workload, params.ttl, seed)?;
    run_queries(g, placement, &queries, policy, params)
}

fn participants(g: &SocialGraph, placement: Option<(&Placement, &UnderlayGraph)>) -> Vec<UserId> {
    match placement {
        Some((p, _)) => p.users().collect(),
        None => g.users().collect(),
    }
}

/// Runs an explicit query sequence. Query ids must be strictly increasing
/// and every origin must participate.
pub fn run_queries(
    g: &SocialGraph,
    placement: Option<(&Placement, &UnderlayGraph)>,
    queries: &[Query],
    policy: RoutingPolicy,
    params: &SimParams,
) -> Result<SimOutput> {
    policy.validate()?;
    if params.epochs == 0 || params.epochs > queries.len() {
        return Err(SimError::param("epochs must lie in 1..=num_queries"));
    }
    if queries.windows(2).any(|w| w[0].id >= w[1].id) {
        return Err(SimError::param("query ids must be strictly increasing"));
    }
    let participants = participants(g, placement);

    let mut member = vec![false; g.node_count()];
    for &u in &participants {
        member[u.index()] = true;
    }
    if let Some(q) = queries
        .iter()
        .find(|q| !member.get(q.origin.index()).copied().unwrap_or(false))
    {
        return Err(SimError::param(format!(
            "query origin {} does not participate",
            q.origin
        )));
    }
    let mut states: Vec<Option<PeerState>> = vec![None; g.node_count()];
    for &u in &participants {
        let friends = g.neighbors(u).iter().copied().filter(|v| member[v.index()]);
        states[u.index()] = Some(PeerState::new(u, friends, g.profile(u).interests.clone()));
    }
    build_vicinity(&mut states, &participants, params.supernode_threshold);
    let mut overlay = Overlay {
        states,
        latency: placement,
        acquired_in_degree: params.acquired_in_degree,
    };

    let mut audit = SimAudit::default();
    let mut records = Vec::with_capacity(queries.len());
    for q in queries {
        records.push(run_one(&mut overlay, q, policy, params, &mut audit));
    }

    audit_states(&overlay.states, &mut audit);

    let n = records.len();
    let epochs = (0..params.epochs)
        .map(|i| summarize(&records[i * n / params.epochs..(i + 1) * n / params.epochs]))
        .collect();
    Ok(SimOutput {
        policy,
        overall: summarize(&records),
        epochs,
        records,
        audit,
        states: overlay.states,
    })
}

fn build_vicinity(states: &mut [Option<PeerState>], participants: &[UserId], threshold: usize) {
    let supers: Vec<UserId> = participants
        .iter()
        .copied()
        .filter(|u| states[u.index()].as_ref().unwrap().degree() >= threshold)
        .collect();
    for s in supers {
        let mut table: BTreeMap<UserId, UserId> = BTreeMap::new();
        let friends: Vec<UserId> = states[s.index()].as_ref().unwrap().friends().map(|e| e.peer).collect();
        for &f in &friends {
            for e in states[f.index()].as_ref().unwrap().friends() {
                let w = e.peer;
                if w != s && friends.binary_search(&w).is_err() {
                    // friends are iterated in id order: first insert wins
                    table.entry(w).or_insert(f);
                }
            }
        }
        states[s.index()].as_mut().unwrap().vicinity = Some(table);
    }
}

fn run_one(
    overlay: &mut Overlay<'_>,
    q: &Query,
    policy: RoutingPolicy,
    params: &SimParams,
    audit: &mut SimAudit,
) -> QueryRecord {
    let origin = q.origin;
    overlay.states[origin.index()].as_mut().unwrap().mark_seen(q.id);

    let mut frontier = vec![Holder {
        node: origin,
        arrived_from: None,
        ttl: q.ttl,
        relay_to: None,
    }];
    // peer -> the peer whose copy it processed
    let mut parent: BTreeMap<UserId, UserId> = BTreeMap::new();
    let mut messages = 0u64;
    let mut hop = 0u32;
    // (hop, responder)
    let mut hits: Vec<(u32, UserId)> = Vec::new();
    let mut first_targets: Vec<UserId> = Vec::new();

    while !frontier.is_empty() {
        hop += 1;
        frontier.sort_by_key(|h| h.node);
        let mut sends: Vec<(Holder, UserId, Option<UserId>)> = Vec::new();
        for h in &frontier {
            if h.ttl == 0 {
                continue;
            }
            for (target, relay) in route(overlay, h, q, policy) {
                sends.push((*h, target, relay));
            }
        }
        if hop == 1 {
            first_targets = sends.iter().map(|s| s.1).collect();
        }

        let mut next = Vec::new();
        for (from, to, relay) in sends {
            messages += 1;
            audit.deliveries += 1;
            if from.ttl == 0 {
                audit.sends_at_zero_ttl += 1;
            }
            let ttl = from.ttl.saturating_sub(1);
            let state = overlay.states[to.index()].as_mut().unwrap();
            if state.has_seen(q.id) {
                audit.duplicates_dropped += 1;
                continue;
            }
            if !state.mark_seen(q.id) {
                audit.reprocessed += 1;
            }
            parent.insert(to, from.node);
            if state.holds(q.category, q.token) {
                hits.push((hop, to));
            } else if ttl > 0 {
                next.push(Holder {
                    node: to,
                    arrived_from: Some(from.node),
                    ttl,
                    relay_to: relay,
                });
            }
        }
        frontier = next;
    }

    if params.adaptive {
        adapt(overlay, q, &hits, &first_targets, &params.adapt);
    }

    // forward path along first-processed copies, then the direct reply
    let latency = hits
        .iter()
        .filter_map(|&(_, responder)| {
            let mut total = overlay.delay(responder, origin)?;
            let mut cur = responder;
            while cur != origin {
                let prev = parent[&cur];
                total += overlay.delay(prev, cur)?;
                cur = prev;
            }
            Some(total)
        })
        .min();
    QueryRecord {
        query: *q,
        first_hit_hops: hits.iter().map(|h| h.0).min(),
        hits: hits.len(),
        messages,
        latency,
    }
}

/// Targets for one holder, each with an optional relay instruction.
fn route(overlay: &Overlay<'_>, h: &Holder, q: &Query, policy: RoutingPolicy) -> Vec<(UserId, Option<UserId>)> {
    let state = overlay.state(h.node);
    if let Some(target) = h.relay_to {
        if state.friend(target).is_some() && target != q.origin {
            return vec![(target, None)];
        }
    }
    if policy != RoutingPolicy::Flood {
        if let Some(vicinity) = &state.vicinity {
            let usable = |p: UserId| p != q.origin && Some(p) != h.arrived_from;
            if let Some(e) = state
                .friends()
                .find(|e| usable(e.peer) && overlay.state(e.peer).holds(q.category, q.token))
            {
                return vec![(e.peer, None)];
            }
            if let Some((&w, &via)) = vicinity
                .iter()
                .find(|(&w, &via)| usable(w) && usable(via) && overlay.state(w).holds(q.category, q.token))
            {
                return vec![(via, Some(w))];
            }
        }
    }
    forward_set(state, q, h.arrived_from, policy, |u| overlay.degree(u))
        .into_iter()
        .map(|t| (t, None))
        .collect()
}

fn adapt(overlay: &mut Overlay<'_>, q: &Query, hits: &[(u32, UserId)], first_targets: &[UserId], params: &AdaptParams) {
    let origin = q.origin;
    let mut ordered: Vec<(u32, UserId)> = hits.to_vec();
    ordered.sort_unstable();
    for &(_, responder) in &ordered {
        let (a, b) = pair_mut(&mut overlay.states, origin.index(), responder.index());
        on_hit_update(a.as_mut().unwrap(), b.as_mut().unwrap(), q, 1.0, params);
    }
    let requester = overlay.states[origin.index()].as_mut().unwrap();
    for &t in first_targets {
        if !ordered.iter().any(|&(_, r)| r == t) {
            record_miss(requester, t, q, params);
        }
    }
    for gone in evict(requester, params) {
        overlay.states[gone.index()].as_mut().unwrap().remove_acquired(origin);
    }
}

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

fn audit_states(states: &[Option<PeerState>], audit: &mut SimAudit) {
    for s in states.iter().flatten() {
        for e in s.friends() {
            if e.strength.iter().any(|x| !(0.0..=1.0).contains(x)) {
                audit.strength_out_of_bounds += 1;
            }
            let mutual = states[e.peer.index()]
                .as_ref()
                .is_some_and(|other| other.friend(s.owner).is_some());
            if !mutual {
                audit.asymmetric_entries += 1;
            }
        }
    }
}

fn summarize(records: &[QueryRecord]) -> QueryMetrics {
    let n = records.len();
    let hits: Vec<&QueryRecord> = records.iter().filter(|r| r.first_hit_hops.is_some()).collect();
    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            None
        } else {
            Some(xs.iter().sum::<f64>() / xs.len() as f64)
        }
    };
    QueryMetrics {
        queries: n,
        success_rate: if n == 0 { 0.0 } else { hits.len() as f64 / n as f64 },
        mean_hops: mean(hits.iter().map(|r| r.first_hit_hops.unwrap() as f64).collect()),
        mean_messages: if n == 0 {
            0.0
        } else {
            records.iter().map(|r| r.messages as f64).sum::<f64>() / n as f64
        },
        mean_latency_ms: mean(hits.iter().filter_map(|r| r.latency).map(|l| l.as_ms()).collect()),
    }
}
