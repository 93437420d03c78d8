use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Result, SimError};
use crate::socialgraph::{SocialGraph, UserId};
use crate::underlay::Micros;

use super::{DelayMatrix, MulticastGroup};

/// A source-rooted delivery tree over group members, by member position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayTree {
    members: Vec<UserId>,
    source: usize,
    /// `parent[source] == source`.
    parent: Vec<usize>,
    delay: Vec<Micros>,
}

impl OverlayTree {
    /// Builds a tree from a parent array, deriving delays from `d`. Fails if
    /// the parents do not form a tree rooted at the group source.
    pub fn from_parents(group: &MulticastGroup, parent: Vec<usize>, d: &DelayMatrix) -> Result<Self> {
        let n = group.len();
        let source = group.source_index();
        if parent.len() != n || d.len() != n {
            return Err(SimError::param("parent array must cover the group"));
        }
        if parent[source] != source {
            return Err(SimError::param("source must be its own parent"));
        }
        let mut children = vec![Vec::new(); n];
        for (v, &p) in parent.iter().enumerate() {
            if p >= n {
                return Err(SimError::param(format!("parent index {p} out of range")));
            }
            if v != source {
                children[p].push(v);
            }
        }
        let mut delay = vec![Micros::ZERO; n];
        let mut reached = 1;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &c in &children[u] {
                delay[c] = delay[u] + d.get(u, c);
                reached += 1;
                queue.push_back(c);
            }
        }
        if reached != n {
            return Err(SimError::param("parent array contains a cycle or unreachable member"));
        }
        Ok(OverlayTree {
            members: group.members().to_vec(),
            source,
            parent,
            delay,
        })
    }

    pub fn members(&self) -> &[UserId] {
        &self.members
    }

    pub fn source(&self) -> UserId {
        self.members[self.source]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn parent_index(&self, i: usize) -> usize {
        self.parent[i]
    }

    pub fn parent(&self, u: UserId) -> Option<UserId> {
        let i = self.members.binary_search(&u).ok()?;
        Some(self.members[self.parent[i]])
    }

    /// Delivery delay of the member at position `i`.
    pub fn delay_at(&self, i: usize) -> Micros {
        self.delay[i]
    }

    pub fn delay(&self, u: UserId) -> Option<Micros> {
        self.members.binary_search(&u).ok().map(|i| self.delay[i])
    }

    /// `(parent, child)` position pairs, in child order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len())
            .filter(|&v| v != self.source)
            .map(|v| (self.parent[v], v))
    }

    /// Hop count from the source.
    pub fn depth_at(&self, mut i: usize) -> usize {
        let mut depth = 0;
        while i != self.source {
            i = self.parent[i];
            depth += 1;
        }
        depth
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SocialTreeMode {
    /// Minimum-delay tree over member-to-member friendships.
    #[default]
    ShortestDelay,
    /// BFS tree; each member hangs off its smallest-id friend one level up.
    Bfs,
    /// BFS levels; each member hangs off its highest-degree friend one level
    /// up (ties by id).
    HighestDegree,
}

impl std::str::FromStr for SocialTreeMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shortest_delay" => Ok(SocialTreeMode::ShortestDelay),
            "bfs" => Ok(SocialTreeMode::Bfs),
            "highest_degree" => Ok(SocialTreeMode::HighestDegree),
            _ => Err(SimError::param(format!("unknown social tree mode `{s}`"))),
        }
    }
}

/// A delivery tree that only forwards along friendships between members.
pub fn build_social_tree(
    group: &MulticastGroup,
    g: &SocialGraph,
    d: &DelayMatrix,
    mode: SocialTreeMode,
) -> Result<OverlayTree> {
    let n = group.len();
    let adj: Vec<Vec<usize>> = group
        .members()
        .iter()
        .map(|&u| g.neighbors(u).iter().filter_map(|&v| group.position(v)).collect())
        .collect();
    let src = group.source_index();
    let mut parent = vec![usize::MAX; n];
    parent[src] = src;
    match mode {
        SocialTreeMode::ShortestDelay => {
            let mut dist = vec![Micros(u64::MAX); n];
            dist[src] = Micros::ZERO;
            let mut heap = BinaryHeap::from([Reverse((Micros::ZERO, src))]);
            let mut done = vec![false; n];
            while let Some(Reverse((du, u))) = heap.pop() {
                if done[u] {
                    continue;
                }
                done[u] = true;
                for &v in &adj[u] {
                    let nd = du + d.get(u, v);
                    // equal-delay ties keep the smaller parent index
                    if !done[v] && (nd < dist[v] || (nd == dist[v] && u < parent[v])) {
                        dist[v] = nd;
                        parent[v] = u;
                        heap.push(Reverse((nd, v)));
                    }
                }
            }
        }
        SocialTreeMode::Bfs | SocialTreeMode::HighestDegree => {
            let mut level = vec![usize::MAX; n];
            level[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            for v in 0..n {
                if v == src || level[v] == usize::MAX {
                    continue;
                }
                let ups = adj[v].iter().copied().filter(|&p| level[p] + 1 == level[v]);
                parent[v] = match mode {
                    SocialTreeMode::Bfs => ups.min().expect("bfs level has a parent"),
                    _ => ups
                        .max_by_key(|&p| (g.degree(group.members()[p]), Reverse(p)))
                        .expect("bfs level has a parent"),
                };
            }
        }
    }
    if parent.contains(&usize::MAX) {
        return Err(SimError::Disconnected {
            components: count_components(&adj),
        });
    }
    OverlayTree::from_parents(group, parent, d)
}

fn count_components(adj: &[Vec<usize>]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut count = 0;
    for s in 0..adj.len() {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ms(x: u64) -> Micros {
        Micros(x * 1000)
    }

    // Six members on a line of "routers": delay = |pos_i - pos_j| + 2 ms access
    fn line(positions: &[u64]) -> DelayMatrix {
        let rows: Vec<Vec<Micros>> = positions
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                positions
                    .iter()
                    .enumerate()
                    .map(|(j, &b)| if i == j { Micros::ZERO } else { ms(a.abs_diff(b) + 2) })
                    .collect()
            })
            .collect();
        DelayMatrix::from_rows(&rows).unwrap()
    }

    // brute force: minimum over all simple paths in the friendship graph
    fn brute(adj: &[Vec<usize>], d: &DelayMatrix, s: usize, t: usize) -> Micros {
        fn go(
            adj: &[Vec<usize>],
            d: &DelayMatrix,
            u: usize,
            t: usize,
            on: &mut Vec<bool>,
            acc: Micros,
            best: &mut Micros,
        ) {
            if u == t {
                *best = (*best).min(acc);
                return;
            }
            for &v in &adj[u] {
                if !on[v] {
                    on[v] = true;
                    go(adj, d, v, t, on, acc + d.get(u, v), best);
                    on[v] = false;
                }
            }
        }
        let mut on = vec![false; adj.len()];
        on[s] = true;
        let mut best = Micros(u64::MAX);
        go(adj, d, s, t, &mut on, Micros::ZERO, &mut best);
        best
    }

    #[test]
    fn six_member_tree_matches_path_enumeration() {
        let edges = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (1, 5), (4, 5), (2, 4)];
        let g = SocialGraph::from_edge_list(6, &edges).unwrap();
        let d = line(&[0, 9, 3, 7, 5, 12]);
        let group = MulticastGroup::new(UserId(0), g.users());
        let tree = build_social_tree(&group, &g, &d, SocialTreeMode::ShortestDelay).unwrap();
        let adj: Vec<Vec<usize>> = (0..6)
            .map(|u| g.neighbors(UserId(u)).iter().map(|v| v.index()).collect())
            .collect();
        for t in 0..6 {
            let expect = if t == 0 { Micros::ZERO } else { brute(&adj, &d, 0, t) };
            assert_eq!(tree.delay_at(t), expect, "member {t}");
        }
    }

    #[test]
    fn two_members_use_the_direct_delay() {
        let g = SocialGraph::from_edge_list(2, &[(0, 1)]).unwrap();
        let d = line(&[0, 4]);
        let group = MulticastGroup::new(UserId(1), g.users());
        for mode in [
            SocialTreeMode::ShortestDelay,
            SocialTreeMode::Bfs,
            SocialTreeMode::HighestDegree,
        ] {
            let tree = build_social_tree(&group, &g, &d, mode).unwrap();
            assert_eq!(tree.delay(UserId(0)), Some(ms(6)));
            assert_eq!(tree.source(), UserId(1));
        }
    }

    #[test]
    fn star_is_depth_one() {
        let g = SocialGraph::from_edge_list(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let d = line(&[0, 1, 2, 3, 4]);
        let group = MulticastGroup::new(UserId(0), g.users());
        let tree = build_social_tree(&group, &g, &d, SocialTreeMode::ShortestDelay).unwrap();
        assert!((0..5).all(|i| tree.depth_at(i) <= 1));
    }

    #[test]
    fn highest_degree_parent() {
        // 0-1, 0-2, 1-3, 2-3, 2-4: member 3 hangs off 2 (degree 3) not 1
        let g = SocialGraph::from_edge_list(5, &[(0, 1), (0, 2), (1, 3), (2, 3), (2, 4)]).unwrap();
        let d = line(&[0, 1, 2, 3, 4]);
        let group = MulticastGroup::new(UserId(0), g.users());
        let hd = build_social_tree(&group, &g, &d, SocialTreeMode::HighestDegree).unwrap();
        assert_eq!(hd.parent(UserId(3)), Some(UserId(2)));
        let bfs = build_social_tree(&group, &g, &d, SocialTreeMode::Bfs).unwrap();
        assert_eq!(bfs.parent(UserId(3)), Some(UserId(1)));
    }

    #[test]
    fn rejects_bad_structures() {
        let g = SocialGraph::from_edge_list(3, &[(0, 1)]).unwrap();
        let d = line(&[0, 1, 2]);
        let group = MulticastGroup::new(UserId(0), g.users());
        assert!(matches!(
            build_social_tree(&group, &g, &d, SocialTreeMode::ShortestDelay),
            Err(SimError::Disconnected { components: 2 })
        ));
        // 1 <-> 2 cycle detached from the source
        assert!(OverlayTree::from_parents(&group, vec![0, 2, 1], &d).is_err());
    }
}
