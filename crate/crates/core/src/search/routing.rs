use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SimError};
use crate::socialgraph::UserId;

use super::{PeerState, Query};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoutingPolicy {
    /// Send to every friend except the one the query came from.
    Flood,
    /// The `k` friends with the highest current degree.
    HighestDegree(usize),
    /// The `k` friends with the highest strength for the query category.
    InterestWeighted(usize),
}

impl RoutingPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RoutingPolicy::HighestDegree(0) | RoutingPolicy::InterestWeighted(0) => {
                Err(SimError::param("fan-out k must be >= 1"))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for RoutingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoutingPolicy::Flood => f.write_str("flood"),
            RoutingPolicy::HighestDegree(k) => write!(f, "highest_degree({k})"),
            RoutingPolicy::InterestWeighted(k) => write!(f, "interest_weighted({k})"),
        }
    }
}

impl FromStr for RoutingPolicy {
    type Err = SimError;

    /// Accepts `flood`, `highest_degree(k)` and `interest_weighted(k)`; the
    /// fan-out defaults to 3 when the parentheses are omitted.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, k) = match s.split_once('(') {
            Some((name, rest)) => {
                let k = rest
                    .strip_suffix(')')
                    .and_then(|k| k.trim().parse::<usize>().ok())
                    .ok_or_else(|| SimError::param(format!("bad policy `{s}`")))?;
                (name.trim(), k)
            }
            None => (s, 3),
        };
        let policy = match name {
            "flood" => RoutingPolicy::Flood,
            "highest_degree" => RoutingPolicy::HighestDegree(k),
            "interest_weighted" => RoutingPolicy::InterestWeighted(k),
            _ => return Err(SimError::param(format!("unknown policy `{s}`"))),
        };
        policy.validate()?;
        Ok(policy)
    }
}

/// Friends `state` forwards `q` to, in id order. Never contains the origin or
/// the peer the query arrived from. `degree_of` reports a peer's current
/// degree.
pub fn forward_set(
    state: &PeerState,
    q: &Query,
    arrived_from: Option<UserId>,
    policy: RoutingPolicy,
    degree_of: impl Fn(UserId) -> usize,
) -> Vec<UserId> {
    let candidates = state
        .friends()
        .filter(|e| e.peer != q.origin && Some(e.peer) != arrived_from);
    let mut out: Vec<UserId> = match policy {
        RoutingPolicy::Flood => candidates.map(|e| e.peer).collect(),
        RoutingPolicy::HighestDegree(k) => {
            let mut ranked: Vec<(usize, UserId)> = candidates.map(|e| (degree_of(e.peer), e.peer)).collect();
            ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            ranked.into_iter().take(k).map(|(_, p)| p).collect()
        }
        RoutingPolicy::InterestWeighted(k) => {
            let c = q.category.index();
            let mut ranked: Vec<(f64, usize, UserId)> =
                candidates.map(|e| (e.strength[c], degree_of(e.peer), e.peer)).collect();
            ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
            ranked.into_iter().take(k).map(|(_, _, p)| p).collect()
        }
    };
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::socialgraph::{InterestCategory, Interests};

    fn query(origin: u32) -> Query {
        Query {
            id: 1,
            origin: UserId(origin),
            category: InterestCategory::Sports,
            token: 1,
            ttl: 2,
        }
    }

    fn state(friends: &[u32]) -> PeerState {
        PeerState::new(UserId(0), friends.iter().map(|&f| UserId(f)), Interests::uniform(9))
    }

    #[test]
    fn flood_skips_the_sender() {
        let s = state(&[1, 2, 3, 4]);
        let got = forward_set(&s, &query(0), Some(UserId(2)), RoutingPolicy::Flood, |_| 1);
        assert_eq!(got, vec![UserId(1), UserId(3), UserId(4)]);
        // origin is never a target either
        let got = forward_set(&s, &query(4), Some(UserId(2)), RoutingPolicy::Flood, |_| 1);
        assert_eq!(got, vec![UserId(1), UserId(3)]);
    }

    #[test]
    fn highest_degree_breaks_ties_by_id() {
        let s = state(&[1, 2, 3]);
        let degrees = [0usize, 5, 9, 9];
        let deg = |u: UserId| degrees[u.index()];
        let brute = [1u32, 2, 3]
            .into_iter()
            .max_by(|&a, &b| deg(UserId(a)).cmp(&deg(UserId(b))).then(b.cmp(&a)))
            .unwrap();
        assert_eq!(brute, 2);
        let got = forward_set(&s, &query(0), None, RoutingPolicy::HighestDegree(1), deg);
        assert_eq!(got, vec![UserId(brute)]);
    }

    #[test]
    fn interest_weighted_picks_strongest() {
        let mut s = state(&[1, 2, 3, 4]);
        let c = InterestCategory::Sports.index();
        for (peer, w) in [(1, 0.1), (2, 0.7), (3, 0.7), (4, 0.3)] {
            s.friend_mut(UserId(peer)).unwrap().strength[c] = w;
        }
        let got = forward_set(&s, &query(0), None, RoutingPolicy::InterestWeighted(2), |_| 1);
        assert_eq!(got, vec![UserId(2), UserId(3)]);
        // ties on strength fall back to degree
        s.friend_mut(UserId(4)).unwrap().strength[c] = 0.7;
        let got = forward_set(&s, &query(0), None, RoutingPolicy::InterestWeighted(2), |u| {
            if u == UserId(4) {
                10
            } else {
                1
            }
        });
        assert_eq!(got, vec![UserId(2), UserId(4)]);
    }

    #[test]
    fn policy_text_round_trip() {
        for p in [
            RoutingPolicy::Flood,
            RoutingPolicy::HighestDegree(3),
            RoutingPolicy::InterestWeighted(7),
        ] {
            assert_eq!(p.to_string().parse::<RoutingPolicy>().unwrap(), p);
        }
        assert_eq!(
            "highest_degree".parse::<RoutingPolicy>().unwrap(),
            RoutingPolicy::HighestDegree(3)
        );
        assert!("highest_degree(0)".parse::<RoutingPolicy>().is_err());
        assert!("gossip".parse::<RoutingPolicy>().is_err());
    }
}
