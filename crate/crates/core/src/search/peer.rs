use std::collections::BTreeMap;

use crate::socialgraph::{InterestCategory, Interests, UserId};

use super::Query;

/// One routing-table entry: a friend and how well it has answered queries.
#[derive(Debug, Clone, PartialEq)]
pub struct FriendEntry {
    pub peer: UserId,
    /// Per-category strength in `[0, 1]`.
    pub strength: [f64; InterestCategory::COUNT],
    pub hits: u32,
    pub misses: u32,
    /// Entry comes from the social graph (never evicted).
    pub original: bool,
}

impl FriendEntry {
    pub fn original(peer: UserId) -> Self {
        FriendEntry {
            peer,
            strength: [0.0; InterestCategory::COUNT],
            hits: 0,
            misses: 0,
            original: true,
        }
    }

    fn acquired(peer: UserId) -> Self {
        FriendEntry {
            original: false,
            ..FriendEntry::original(peer)
        }
    }

    pub fn observations(&self) -> u32 {
        self.hits + self.misses
    }

    pub fn max_strength(&self) -> f64 {
        self.strength.iter().copied().fold(0.0, f64::max)
    }
}

/// Tunables of the friend-list evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptParams {
    /// EMA weight given to the newest observation.
    pub alpha: f64,
    /// Strength the responder assigns to a newly added requester.
    pub responder_initial: f64,
    pub evict_min_queries: u32,
    pub evict_floor: f64,
}

impl Default for AdaptParams {
    fn default() -> Self {
        AdaptParams {
            alpha: 0.3,
            responder_initial: 0.5,
            evict_min_queries: 10,
            evict_floor: 0.05,
        }
    }
}

/// Routing state of one peer.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerState {
    pub owner: UserId,
    friends: BTreeMap<UserId, FriendEntry>,
    pub content: Interests,
    /// Two-hop peers mapped to the smallest shared friend; supernodes only.
    pub vicinity: Option<BTreeMap<UserId, UserId>>,
    last_seen: Option<u64>,
}

impl PeerState {
    pub fn new(owner: UserId, friends: impl IntoIterator<Item = UserId>, content: Interests) -> Self {
        PeerState {
            owner,
            friends: friends.into_iter().map(|f| (f, FriendEntry::original(f))).collect(),
            content,
            vicinity: None,
            last_seen: None,
        }
    }

    pub fn friends(&self) -> impl Iterator<Item = &FriendEntry> + '_ {
        self.friends.values()
    }

    pub fn friend(&self, peer: UserId) -> Option<&FriendEntry> {
        self.friends.get(&peer)
    }

    pub fn friend_mut(&mut self, peer: UserId) -> Option<&mut FriendEntry> {
        self.friends.get_mut(&peer)
    }

    pub fn degree(&self) -> usize {
        self.friends.len()
    }

    pub fn original_degree(&self) -> usize {
        self.friends.values().filter(|f| f.original).count()
    }

    pub fn holds(&self, category: InterestCategory, token: u32) -> bool {
        self.content.contains(category, token)
    }

    /// Records that query `id` reached this peer. Returns false when it was
    /// already processed. Query ids are injected in increasing order, one
    /// query at a time, so remembering the latest id is enough.
    pub fn mark_seen(&mut self, id: u64) -> bool {
        match self.last_seen {
            Some(last) if last == id => false,
            Some(last) => {
                assert!(id > last, "query ids must increase: {id} after {last}");
                self.last_seen = Some(id);
                true
            }
            None => {
                self.last_seen = Some(id);
                true
            }
        }
    }

    pub fn has_seen(&self, id: u64) -> bool {
        self.last_seen == Some(id)
    }

    fn entry_or_acquired(&mut self, peer: UserId) -> &mut FriendEntry {
        self.friends.entry(peer).or_insert_with(|| FriendEntry::acquired(peer))
    }

    pub(crate) fn remove_acquired(&mut self, peer: UserId) -> bool {
        match self.friends.get(&peer) {
            Some(e) if !e.original => {
                self.friends.remove(&peer);
                true
            }
            _ => false,
        }
    }
}

/// Requester-side and responder-side bookkeeping after `responder` answered
/// query `q` with the given `precision`.
///
/// The requester's strength for the query category moves to
/// `(1 - alpha) * old + alpha * precision` (new entries start from 0). The
/// responder lists the requester with `responder_initial` strength for that
/// category if it did not know it yet.
pub fn on_hit_update(
    requester: &mut PeerState,
    responder: &mut PeerState,
    q: &Query,
    precision: f64,
    params: &AdaptParams,
) {
    let precision = precision.clamp(0.0, 1.0);
    let c = q.category.index();
    let entry = requester.entry_or_acquired(responder.owner);
    entry.strength[c] = ((1.0 - params.alpha) * entry.strength[c] + params.alpha * precision).clamp(0.0, 1.0);
    entry.hits += 1;

    let requester_id = requester.owner;
    if !responder.friends.contains_key(&requester_id) {
        let back = responder.entry_or_acquired(requester_id);
        back.strength[c] = params.responder_initial.clamp(0.0, 1.0);
    }
}

/// A forwarded-to friend that did not answer: count a miss and decay its
/// strength for the category toward zero.
pub fn record_miss(state: &mut PeerState, peer: UserId, q: &Query, params: &AdaptParams) {
    if let Some(entry) = state.friends.get_mut(&peer) {
        let c = q.category.index();
        entry.strength[c] = ((1.0 - params.alpha) * entry.strength[c]).clamp(0.0, 1.0);
        entry.misses += 1;
    }
}

/// Drops acquired friends with at least `evict_min_queries` observations
/// whose best category strength is below `evict_floor`. Original social
/// friends are never evicted. Returns the removed peers.
pub fn evict(state: &mut PeerState, params: &AdaptParams) -> Vec<UserId> {
    let doomed: Vec<UserId> = state
        .friends
        .values()
        .filter(|e| {
            !e.original && e.observations() >= params.evict_min_queries && e.max_strength() < params.evict_floor
        })
        .map(|e| e.peer)
        .collect();
    for p in &doomed {
        state.friends.remove(p);
    }
    doomed
}
