//! Synthetic social graph: users, interest profiles, geography and the
//! friendship edge set, plus the analyses used to validate its structure.

mod analysis;
mod generate;
pub mod geo;
mod io;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SimError};

pub use analysis::{
    avg_shortest_path_sampled, bfs_distances, connected_components, degree_histogram, global_clustering,
    interest_search, interest_search_any, kruskal_spanning_tree, DegreeHistogram, SearchOutcome, WeightedEdge,
};
pub use generate::{generate_social_graph, SocialGenParams};
pub use geo::{haversine_km, GeoModel, Region};
pub use io::{load_graph, parse_graph, save_graph, write_graph};

/// Dense user index, contiguous in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

impl UserId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Interest categories of a user profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InterestCategory {
    Passions,
    TvShows,
    Movies,
    Music,
    Books,
    Sports,
    Activities,
}

impl InterestCategory {
    pub const ALL: [InterestCategory; 7] = [
        InterestCategory::Passions,
        InterestCategory::TvShows,
        InterestCategory::Movies,
        InterestCategory::Music,
        InterestCategory::Books,
        InterestCategory::Sports,
        InterestCategory::Activities,
    ];

    pub const COUNT: usize = 7;

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            InterestCategory::Passions => "passions",
            InterestCategory::TvShows => "tv_shows",
            InterestCategory::Movies => "movies",
            InterestCategory::Music => "music",
            InterestCategory::Books => "books",
            InterestCategory::Sports => "sports",
            InterestCategory::Activities => "activities",
        }
    }
}

impl fmt::Display for InterestCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterestCategory {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        InterestCategory::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| SimError::param(format!("unknown interest category `{s}`")))
    }
}

/// Interest token: an integer drawn from a per-category vocabulary.
pub type Token = u32;

/// Per-category token sets of one user.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Interests {
    sets: [BTreeSet<Token>; InterestCategory::COUNT],
}

impl Interests {
    /// Every category holds the single token `token`.
    pub fn uniform(token: Token) -> Self {
        let mut out = Interests::default();
        for set in &mut out.sets {
            set.insert(token);
        }
        out
    }

    pub fn get(&self, category: InterestCategory) -> &BTreeSet<Token> {
        &self.sets[category.index()]
    }

    pub fn get_mut(&mut self, category: InterestCategory) -> &mut BTreeSet<Token> {
        &mut self.sets[category.index()]
    }

    pub fn set(&mut self, category: InterestCategory, tokens: impl IntoIterator<Item = Token>) {
        self.sets[category.index()] = tokens.into_iter().collect();
    }

    pub fn contains(&self, category: InterestCategory, token: Token) -> bool {
        self.sets[category.index()].contains(&token)
    }

    /// True when some token of `category` is shared with `other`.
    pub fn shares(&self, other: &Interests, category: InterestCategory) -> bool {
        let (a, b) = (self.get(category), other.get(category));
        a.iter().any(|t| b.contains(t))
    }

    pub fn is_complete(&self) -> bool {
        self.sets.iter().all(|s| !s.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserProfile {
    pub id: UserId,
    /// Index into the [`GeoModel`] region list.
    pub region: usize,
    pub lat: f64,
    pub lon: f64,
    pub interests: Interests,
}

impl UserProfile {
    /// Profile at the origin with every category set to `{token}`. Handy for
    /// hand-built fixtures.
    pub fn placeholder(id: UserId, token: Token) -> Self {
        UserProfile {
            id,
            region: 0,
            lat: 0.0,
            lon: 0.0,
            interests: Interests::uniform(token),
        }
    }
}

/// Undirected friendship graph with one profile per user.
///
/// Immutable once built: adjacency lists are sorted, symmetric, and free of
/// self-loops and parallel edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialGraph {
    adjacency: Vec<Vec<UserId>>,
    profiles: Vec<UserProfile>,
    edge_count: usize,
}

impl SocialGraph {
    /// Builds a graph from profiles (indexed by id) and an undirected edge list.
    pub fn from_edges(profiles: Vec<UserProfile>, edges: impl IntoIterator<Item = (UserId, UserId)>) -> Result<Self> {
        let n = profiles.len();
        for (i, p) in profiles.iter().enumerate() {
            if p.id.index() != i {
                return Err(SimError::param(format!("profile at position {i} carries id {}", p.id)));
            }
            if !(-90.0..=90.0).contains(&p.lat) || !(-180.0..=180.0).contains(&p.lon) {
                return Err(SimError::param(format!("user {i} has out-of-range coordinates")));
            }
            if !p.interests.is_complete() {
                return Err(SimError::param(format!("user {i} has an empty interest category")));
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (a, b) in edges {
            if a == b {
                return Err(SimError::param(format!("self-loop on user {a}")));
            }
            if a.index() >= n || b.index() >= n {
                return Err(SimError::param(format!("edge ({a},{b}) out of range for n={n}")));
            }
            adjacency[a.index()].push(b);
            adjacency[b.index()].push(a);
            edge_count += 1;
        }
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(SimError::param(format!("parallel edge at user {i}")));
            }
        }
        Ok(SocialGraph {
            adjacency,
            profiles,
            edge_count,
        })
    }

    /// Graph with placeholder profiles; every user holds the token
    /// `1_000_000 + id` in every category so no two users share interests.
    pub fn from_edge_list(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let profiles = (0..n as u32)
            .map(|i| UserProfile::placeholder(UserId(i), 1_000_000 + i))
            .collect();
        Self::from_edges(profiles, edges.iter().map(|&(a, b)| (UserId(a), UserId(b))))
    }

    pub fn node_count(&self) -> usize {
        self.profiles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.profiles.len() as u32).map(UserId)
    }

    /// Sorted friend list of `u`.
    pub fn neighbors(&self, u: UserId) -> &[UserId] {
        &self.adjacency[u.index()]
    }

    pub fn degree(&self, u: UserId) -> usize {
        self.adjacency[u.index()].len()
    }

    pub fn has_edge(&self, a: UserId, b: UserId) -> bool {
        self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    pub fn profile(&self, u: UserId) -> &UserProfile {
        &self.profiles[u.index()]
    }

    pub fn profiles(&self) -> &[UserProfile] {
        &self.profiles
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            let u = UserId(i as u32);
            list.iter().filter(move |&&v| u < v).map(move |&v| (u, v))
        })
    }

    pub fn mean_degree(&self) -> f64 {
        if self.profiles.is_empty() {
            0.0
        } else {
            2.0 * self.edge_count as f64 / self.profiles.len() as f64
        }
    }

    /// Great-circle distance between two users' locations.
    pub fn distance_km(&self, a: UserId, b: UserId) -> f64 {
        let (pa, pb) = (self.profile(a), self.profile(b));
        haversine_km(pa.lat, pa.lon, pb.lat, pb.lon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loops_and_parallel_edges() {
        assert!(SocialGraph::from_edge_list(3, &[(1, 1)]).is_err());
        assert!(SocialGraph::from_edge_list(3, &[(0, 1), (1, 0)]).is_err());
        assert!(SocialGraph::from_edge_list(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let g = SocialGraph::from_edge_list(4, &[(2, 0), (0, 1), (3, 0)]).unwrap();
        assert_eq!(g.neighbors(UserId(0)), &[UserId(1), UserId(2), UserId(3)]);
        assert!(g.has_edge(UserId(2), UserId(0)));
        assert_eq!(g.edges().count(), 3);
        assert!(g.edges().all(|(u, v)| u < v));
    }

    #[test]
    fn category_names_round_trip() {
        for c in InterestCategory::ALL {
            assert_eq!(c.name().parse::<InterestCategory>().unwrap(), c);
        }
        assert!("films".parse::<InterestCategory>().is_err());
    }
}
