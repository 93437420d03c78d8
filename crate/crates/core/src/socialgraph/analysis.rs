use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;

use super::{InterestCategory, SocialGraph, Token, UserId};
use crate::error::{Result, SimError};
use crate::rng_from_seed;

/// Transitivity: `3 * triangles / connected triples`, 0 when there are no
/// connected triples.
pub fn global_clustering(g: &SocialGraph) -> f64 {
    let mut triangles: u64 = 0;
    for (u, v) in g.edges() {
        // count each triangle once, at its two smallest vertices
        let (nu, nv) = (g.neighbors(u), g.neighbors(v));
        let (mut i, mut j) = (0, 0);
        while i < nu.len() && j < nv.len() {
            match nu[i].cmp(&nv[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if nu[i] > v {
                        triangles += 1;
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    let triples: u64 = g
        .users()
        .map(|u| {
            let d = g.degree(u) as u64;
            d * d.saturating_sub(1) / 2
        })
        .sum();
    if triples == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triples as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeHistogram {
    pub counts: BTreeMap<usize, usize>,
    pub mean: f64,
    /// Most frequent degree, smallest on ties; `None` for the empty graph.
    pub mode: Option<usize>,
    pub max: usize,
}

impl DegreeHistogram {
    /// CSV with header `degree,count`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("degree,count\n");
        for (d, c) in &self.counts {
            out.push_str(&format!("{d},{c}\n"));
        }
        out
    }
}

pub fn degree_histogram(g: &SocialGraph) -> DegreeHistogram {
    let mut counts = BTreeMap::new();
    for u in g.users() {
        *counts.entry(g.degree(u)).or_insert(0) += 1;
    }
    let mode = counts
        .iter()
        .fold(None, |best: Option<(usize, usize)>, (&d, &c)| match best {
            Some((_, bc)) if bc >= c => best,
            _ => Some((d, c)),
        })
        .map(|(d, _)| d);
    DegreeHistogram {
        max: counts.keys().next_back().copied().unwrap_or(0),
        mean: g.mean_degree(),
        mode,
        counts,
    }
}

/// Hop distances from `source`; `u32::MAX` marks unreachable users.
pub fn bfs_distances(g: &SocialGraph, source: UserId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.node_count()];
    dist[source.index()] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u.index()] + 1;
        for &v in g.neighbors(u) {
            if dist[v.index()] == u32::MAX {
                dist[v.index()] = d;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Connected components, each sorted, ordered by smallest member.
pub fn connected_components(g: &SocialGraph) -> Vec<Vec<UserId>> {
    let mut seen = vec![false; g.node_count()];
    let mut out = Vec::new();
    for s in g.users() {
        if seen[s.index()] {
            continue;
        }
        seen[s.index()] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &v in g.neighbors(u) {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    comp.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn require_connected(g: &SocialGraph) -> Result<()> {
    let components = connected_components(g).len();
    if components > 1 {
        Err(SimError::Disconnected { components })
    } else {
        Ok(())
    }
}

/// Mean BFS hop count over `sample_pairs` distinct unordered pairs. When the
/// request covers every pair, all pairs are used.
pub fn avg_shortest_path_sampled(g: &SocialGraph, sample_pairs: usize, seed: u64) -> Result<f64> {
    if sample_pairs == 0 {
        return Err(SimError::param("sample_pairs must be >= 1"));
    }
    let n = g.node_count();
    if n < 2 {
        return Err(SimError::param("path length needs at least two users"));
    }
    require_connected(g)?;

    let total_pairs = n as u64 * (n as u64 - 1) / 2;
    let mut by_source: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    if sample_pairs as u64 >= total_pairs {
        for a in 0..n as u32 {
            by_source.insert(a, (a + 1..n as u32).collect());
        }
    } else {
        let mut rng = rng_from_seed(seed);
        let mut picked: BTreeSet<(u32, u32)> = BTreeSet::new();
        while picked.len() < sample_pairs {
            let a = rng.gen_range(0..n as u32);
            let b = rng.gen_range(0..n as u32);
            if a != b {
                picked.insert((a.min(b), a.max(b)));
            }
        }
        for (a, b) in picked {
            by_source.entry(a).or_default().push(b);
        }
    }

    let mut sum = 0u64;
    let mut count = 0u64;
    for (a, targets) in by_source {
        if targets.is_empty() {
            continue;
        }
        let dist = bfs_distances(g, UserId(a));
        for b in targets {
            sum += dist[b as usize] as u64;
            count += 1;
        }
    }
    Ok(sum as f64 / count as f64)
}

/// Result of a level-by-level interest search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(u32),
    /// No match within the searched radius (the whole component when the
    /// search was unbounded).
    NotFound {
        depth: u32,
    },
}

impl SearchOutcome {
    pub fn hops(self) -> Option<u32> {
        match self {
            SearchOutcome::Found(h) => Some(h),
            SearchOutcome::NotFound { .. } => None,
        }
    }
}

fn search_levels(
    g: &SocialGraph,
    origin: UserId,
    max_depth: Option<u32>,
    is_match: impl Fn(UserId) -> bool,
) -> SearchOutcome {
    let mut seen = vec![false; g.node_count()];
    seen[origin.index()] = true;
    let mut frontier = vec![origin];
    let mut depth = 0u32;
    while !frontier.is_empty() && max_depth.map_or(true, |m| depth < m) {
        depth += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in g.neighbors(u) {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    next.push(v);
                }
            }
        }
        if next.iter().any(|&v| is_match(v)) {
            return SearchOutcome::Found(depth);
        }
        frontier = next;
    }
    let depth = if frontier.is_empty() {
        depth.saturating_sub(1)
    } else {
        depth
    };
    SearchOutcome::NotFound { depth }
}

/// Hop distance from `origin` to the nearest other user whose `category`
/// set contains `token`.
pub fn interest_search(
    g: &SocialGraph,
    origin: UserId,
    category: InterestCategory,
    token: Token,
    max_depth: Option<u32>,
) -> SearchOutcome {
    search_levels(g, origin, max_depth, |v| {
        g.profile(v).interests.contains(category, token)
    })
}

/// Like [`interest_search`], matching any of `tokens`.
pub fn interest_search_any(
    g: &SocialGraph,
    origin: UserId,
    category: InterestCategory,
    tokens: &BTreeSet<Token>,
    max_depth: Option<u32>,
) -> SearchOutcome {
    search_levels(g, origin, max_depth, |v| {
        let theirs = g.profile(v).interests.get(category);
        tokens.iter().any(|t| theirs.contains(t))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge {
    pub u: UserId,
    pub v: UserId,
    pub weight: f64,
}

/// Minimum spanning tree by Kruskal's algorithm. Ties are broken by the
/// `(u, v)` endpoint pair with `u < v`.
pub fn kruskal_spanning_tree(g: &SocialGraph, weight: impl Fn(UserId, UserId) -> f64) -> Result<Vec<WeightedEdge>> {
    require_connected(g)?;
    let mut edges = Vec::with_capacity(g.edge_count());
    for (u, v) in g.edges() {
        let w = weight(u, v);
        if !(w >= 0.0) || !w.is_finite() {
            return Err(SimError::param(format!("edge ({u},{v}) has invalid weight {w}")));
        }
        edges.push(WeightedEdge { u, v, weight: w });
    }
    edges.sort_by(|a, b| a.weight.total_cmp(&b.weight).then((a.u, a.v).cmp(&(b.u, b.v))));

    let mut sets = DisjointSets::new(g.node_count());
    let mut tree = Vec::with_capacity(g.node_count().saturating_sub(1));
    for e in edges {
        if sets.union(e.u.index(), e.v.index()) {
            tree.push(e);
            if tree.len() + 1 == g.node_count() {
                break;
            }
        }
    }
    Ok(tree)
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}
