use std::collections::{BTreeSet, VecDeque};

use crate::embedding::Placement;
use crate::error::{Result, SimError};
use crate::socialgraph::{SocialGraph, UserId};
use crate::underlay::{Micros, UnderlayGraph};

/// A multicast group: sorted distinct members including the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastGroup {
    members: Vec<UserId>,
    source: UserId,
}

impl MulticastGroup {
    pub fn new(source: UserId, members: impl IntoIterator<Item = UserId>) -> Self {
        let mut set: BTreeSet<UserId> = members.into_iter().collect();
        set.insert(source);
        MulticastGroup {
            members: set.into_iter().collect(),
            source,
        }
    }

    pub fn members(&self) -> &[UserId] {
        &self.members
    }

    pub fn source(&self) -> UserId {
        self.source
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, u: UserId) -> Option<usize> {
        self.members.binary_search(&u).ok()
    }

    pub(crate) fn source_index(&self) -> usize {
        self.position(self.source).expect("source is a member")
    }
}

/// Breadth-first friend group around `seed_user`, restricted to users that
/// `eligible` accepts. Neighbours are visited in id order, so the group is
/// the first `target_size` users in BFS order.
pub fn select_friend_group(
    g: &SocialGraph,
    seed_user: UserId,
    target_size: usize,
    eligible: impl Fn(UserId) -> bool,
) -> Result<MulticastGroup> {
    if target_size == 0 {
        return Err(SimError::param("group size must be >= 1"));
    }
    if seed_user.index() >= g.node_count() || !eligible(seed_user) {
        return Err(SimError::param(format!("seed user {seed_user} is not eligible")));
    }
    let mut seen = vec![false; g.node_count()];
    let mut order = vec![seed_user];
    let mut queue = VecDeque::from([seed_user]);
    seen[seed_user.index()] = true;
    'bfs: while let Some(u) = queue.pop_front() {
        for &v in g.neighbors(u) {
            if order.len() >= target_size {
                break 'bfs;
            }
            if !seen[v.index()] && eligible(v) {
                seen[v.index()] = true;
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    if order.len() < target_size {
        return Err(SimError::GroupTooSmall {
            achievable: order.len(),
        });
    }
    Ok(MulticastGroup::new(seed_user, order))
}

/// Pairwise user delays of a group, indexed by member position.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayMatrix {
    n: usize,
    d: Vec<Micros>,
}

impl DelayMatrix {
    pub fn new(group: &MulticastGroup, placement: &Placement, underlay: &UnderlayGraph) -> Result<Self> {
        let m = group.members();
        let n = m.len();
        let mut d = vec![Micros::ZERO; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let x = placement.user_delay(underlay, m[i], m[j])?;
                d[i * n + j] = x;
                d[j * n + i] = x;
            }
        }
        Ok(DelayMatrix { n, d })
    }

    /// Builds a matrix from explicit symmetric values; `rows[i][j]` for all
    /// `i, j`.
    pub fn from_rows(rows: &[Vec<Micros>]) -> Result<Self> {
        let n = rows.len();
        let mut d = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(SimError::param("delay matrix must be square"));
            }
            for (j, &x) in row.iter().enumerate() {
                if rows[j][i] != x || (i == j && x != Micros::ZERO) {
                    return Err(SimError::param("delay matrix must be symmetric with zero diagonal"));
                }
                d.push(x);
            }
        }
        Ok(DelayMatrix { n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> Micros {
        self.d[i * self.n + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::socialgraph::connected_components;

    fn grid() -> SocialGraph {
        // 3x3 grid, ids row-major
        let mut e = Vec::new();
        for r in 0..3u32 {
            for c in 0..3u32 {
                let v = r * 3 + c;
                if c < 2 {
                    e.push((v, v + 1));
                }
                if r < 2 {
                    e.push((v, v + 3));
                }
            }
        }
        SocialGraph::from_edge_list(9, &e).unwrap()
    }

    #[test]
    fn small_groups() {
        let g = grid();
        let one = select_friend_group(&g, UserId(4), 1, |_| true).unwrap();
        assert_eq!(one.members(), &[UserId(4)]);
        let two = select_friend_group(&g, UserId(4), 2, |_| true).unwrap();
        assert_eq!(two.members(), &[UserId(1), UserId(4)]);
        assert_eq!(two.source(), UserId(4));
    }

    #[test]
    fn groups_are_connected() {
        let g = grid();
        for size in 1..=9 {
            let grp = select_friend_group(&g, UserId(0), size, |u| u != UserId(8) || size == 9).unwrap();
            let members = grp.members();
            let edges: Vec<(u32, u32)> = g
                .edges()
                .filter_map(|(a, b)| Some((grp.position(a)? as u32, grp.position(b)? as u32)))
                .collect();
            let sub = SocialGraph::from_edge_list(members.len(), &edges).unwrap();
            assert_eq!(connected_components(&sub).len(), 1, "size {size}");
        }
    }

    #[test]
    fn too_small_component() {
        let g = grid();
        let err = select_friend_group(&g, UserId(0), 5, |u| u.0 <= 2).unwrap_err();
        assert!(matches!(err, SimError::GroupTooSmall { achievable: 3 }));
        assert!(select_friend_group(&g, UserId(0), 0, |_| true).is_err());
    }
}
