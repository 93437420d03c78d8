//! Static NICE hierarchy.
//!
//! Layer 0 clusters all members; layer `i + 1` clusters the leaders of layer
//! `i`. Every cluster has between `k` and `3k - 1` members, except a lone top
//! cluster, which may be smaller when the layer itself is.

use std::collections::VecDeque;

use crate::error::{Result, SimError};
use crate::underlay::Micros;

use super::{DelayMatrix, MulticastGroup, OverlayTree};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Member positions, ascending.
    pub members: Vec<usize>,
    pub leader: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NiceHierarchy {
    k: usize,
    layers: Vec<Vec<Cluster>>,
}

impl NiceHierarchy {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn layers(&self) -> &[Vec<Cluster>] {
        &self.layers
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// The leader of the single top cluster.
    pub fn top(&self) -> usize {
        self.layers.last().expect("at least one layer")[0].leader
    }

    /// Members of layer `i` (all members at layer 0).
    pub fn layer_members(&self, i: usize) -> Vec<usize> {
        let mut m: Vec<usize> = self.layers[i].iter().flat_map(|c| c.members.iter().copied()).collect();
        m.sort_unstable();
        m
    }

    /// Index of the cluster at `layer` containing `member`, if it is there.
    pub fn cluster_of(&self, layer: usize, member: usize) -> Option<usize> {
        self.layers[layer]
            .iter()
            .position(|c| c.members.binary_search(&member).is_ok())
    }
}

/// Builds the hierarchy by clustering on pairwise delay.
pub fn build_nice_hierarchy(group: &MulticastGroup, d: &DelayMatrix, k: usize) -> Result<NiceHierarchy> {
    if k < 2 {
        return Err(SimError::param("NICE cluster parameter k must be >= 2"));
    }
    if group.len() != d.len() {
        return Err(SimError::param("delay matrix does not match the group"));
    }
    let mut layers = Vec::new();
    let mut current: Vec<usize> = (0..group.len()).collect();
    loop {
        if current.len() <= 3 * k - 1 {
            layers.push(vec![make_cluster(current, d)]);
            break;
        }
        let clusters = cluster_layer(&current, d, k);
        let mut leaders: Vec<usize> = clusters.iter().map(|c| c.leader).collect();
        leaders.sort_unstable();
        layers.push(clusters);
        current = leaders;
    }
    Ok(NiceHierarchy { k, layers })
}

/// Delivery tree along the hierarchy: a member that got the data from a
/// cluster at layer `j` forwards it to every other member of each of its
/// clusters at layers other than `j`; the source forwards to all its
/// clusters.
pub fn nice_tree(group: &MulticastGroup, h: &NiceHierarchy, d: &DelayMatrix) -> Result<OverlayTree> {
    let n = group.len();
    let src = group.source_index();
    // clusters[i] = (layer, cluster index) pairs member i belongs to
    let mut memberships: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (layer, clusters) in h.layers.iter().enumerate() {
        for (ci, c) in clusters.iter().enumerate() {
            for &m in &c.members {
                memberships[m].push((layer, ci));
            }
        }
    }
    let mut parent = vec![usize::MAX; n];
    parent[src] = src;
    let mut queue = VecDeque::from([(src, None::<usize>)]);
    while let Some((u, via)) = queue.pop_front() {
        for &(layer, ci) in &memberships[u] {
            if Some(layer) == via {
                continue;
            }
            for &v in &h.layers[layer][ci].members {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back((v, Some(layer)));
                }
            }
        }
    }
    OverlayTree::from_parents(group, parent, d)
}

/// Graph-median leader: minimizes the max delay to cluster peers, ties by
/// position.
fn make_cluster(mut members: Vec<usize>, d: &DelayMatrix) -> Cluster {
    members.sort_unstable();
    let leader = *members
        .iter()
        .min_by_key(|&&c| (members.iter().map(|&m| d.get(c, m)).max().unwrap_or(Micros::ZERO), c))
        .expect("clusters are non-empty");
    Cluster { members, leader }
}

fn cluster_layer(layer: &[usize], d: &DelayMatrix, k: usize) -> Vec<Cluster> {
    let target = layer.len().div_ceil(2 * k - 1);
    // farthest-point seeding from the layer's centre
    let centre = make_cluster(layer.to_vec(), d).leader;
    let mut seeds = vec![centre];
    while seeds.len() < target {
        let next = layer
            .iter()
            .copied()
            .filter(|m| !seeds.contains(m))
            .max_by_key(|&m| (seeds.iter().map(|&s| d.get(m, s)).min().unwrap(), std::cmp::Reverse(m)))
            .expect("target <= layer size");
        seeds.push(next);
    }
    let mut groups: Vec<Vec<usize>> = assign(layer, &seeds, d);

    // merge: dissolve the smallest undersized cluster into nearest leaders
    loop {
        let leaders: Vec<usize> = groups.iter().map(|g| make_cluster(g.clone(), d).leader).collect();
        let Some(small) = (0..groups.len())
            .filter(|&i| groups[i].len() < k)
            .min_by_key(|&i| (groups[i].len(), leaders[i]))
        else {
            break;
        };
        let orphans = groups.remove(small);
        let mut remaining = leaders;
        remaining.remove(small);
        for m in orphans {
            let j = nearest(m, &remaining, d);
            groups[j].push(m);
        }
    }
    // split: oversized clusters halve around two far-apart poles
    let mut out = Vec::new();
    let mut stack = groups;
    while let Some(g) = stack.pop() {
        if g.len() <= 3 * k - 1 {
            out.push(make_cluster(g, d));
            continue;
        }
        let (a, b) = split(g, d);
        stack.push(a);
        stack.push(b);
    }
    out.sort_by_key(|c| c.members[0]);
    out
}

fn assign(layer: &[usize], leaders: &[usize], d: &DelayMatrix) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); leaders.len()];
    for &m in layer {
        groups[nearest(m, leaders, d)].push(m);
    }
    groups
}

/// Index into `leaders` of the closest one, ties by leader position.
fn nearest(m: usize, leaders: &[usize], d: &DelayMatrix) -> usize {
    (0..leaders.len())
        .min_by_key(|&i| (d.get(m, leaders[i]), leaders[i]))
        .expect("at least one leader")
}

fn split(mut g: Vec<usize>, d: &DelayMatrix) -> (Vec<usize>, Vec<usize>) {
    g.sort_unstable();
    let leader = make_cluster(g.clone(), d).leader;
    let far = |from: usize| {
        *g.iter()
            .max_by_key(|&&m| (d.get(from, m), std::cmp::Reverse(m)))
            .unwrap()
    };
    let p = far(leader);
    let q = far(p);
    // signed preference for p; the first half goes to p
    g.sort_by_key(|&m| (d.get(m, p).0 as i128 - d.get(m, q).0 as i128, m));
    let b = g.split_off(g.len() / 2);
    (g, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::socialgraph::UserId;

    fn ms(x: u64) -> Micros {
        Micros(x * 1000)
    }

    // members at positions on a line; delay = distance
    fn line(points: &[u64]) -> DelayMatrix {
        let rows: Vec<Vec<Micros>> = points
            .iter()
            .map(|&a| points.iter().map(|&b| ms(a.abs_diff(b))).collect())
            .collect();
        DelayMatrix::from_rows(&rows).unwrap()
    }

    fn group(n: u32, source: u32) -> MulticastGroup {
        MulticastGroup::new(UserId(source), (0..n).map(UserId))
    }

    fn check_bounds(h: &NiceHierarchy) {
        let k = h.k();
        for (i, layer) in h.layers().iter().enumerate() {
            for c in layer {
                assert!(c.members.len() <= 3 * k - 1, "layer {i}: {:?}", c.members);
                if layer.len() > 1 {
                    assert!(c.members.len() >= k, "layer {i}: {:?}", c.members);
                }
                assert!(c.members.contains(&c.leader));
            }
            if i + 1 < h.layer_count() {
                let mut leaders: Vec<usize> = layer.iter().map(|c| c.leader).collect();
                leaders.sort_unstable();
                assert_eq!(leaders, h.layer_members(i + 1));
            }
        }
        assert_eq!(h.layers().last().unwrap().len(), 1);
    }

    #[test]
    fn singleton_and_small_groups() {
        let d = line(&[0]);
        let h = build_nice_hierarchy(&group(1, 0), &d, 3).unwrap();
        assert_eq!(h.layer_count(), 1);
        let t = nice_tree(&group(1, 0), &h, &d).unwrap();
        assert_eq!(t.delay_at(0), Micros::ZERO);

        // one cluster: the source reaches every peer directly
        let d = line(&[0, 4, 9, 13, 20]);
        let g = group(5, 2);
        let h = build_nice_hierarchy(&g, &d, 3).unwrap();
        assert_eq!(h.layer_count(), 1);
        assert_eq!(h.top(), 2);
        let t = nice_tree(&g, &h, &d).unwrap();
        for i in 0..5 {
            assert_eq!(t.delay_at(i), d.get(2, i));
        }
    }

    #[test]
    fn twelve_member_trace() {
        // three tight groups of four, far apart
        let pts = [0, 1, 2, 3, 100, 101, 102, 103, 200, 201, 202, 203];
        let d = line(&pts);
        let g = group(12, 0);
        let h = build_nice_hierarchy(&g, &d, 3).unwrap();
        check_bounds(&h);
        assert_eq!(h.layer_count(), 2);
        let bottom: Vec<Vec<usize>> = h.layers()[0].iter().map(|c| c.members.clone()).collect();
        assert_eq!(bottom, vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7], vec![8, 9, 10, 11]]);
        // medians: ties on max delay broken by position
        let leaders: Vec<usize> = h.layers()[0].iter().map(|c| c.leader).collect();
        assert_eq!(leaders, vec![1, 5, 9]);
        assert_eq!(h.top(), 5);

        // source 0 -> {1,2,3}; leader 1 -> {5,9} via layer 1; 5 -> {4,6,7}; 9 -> {8,10,11}
        let t = nice_tree(&g, &h, &d).unwrap();
        let at = |x: usize| t.delay_at(x);
        assert_eq!(at(1), ms(1));
        assert_eq!(at(3), ms(3));
        assert_eq!(at(5), ms(1 + 100));
        assert_eq!(at(9), ms(1 + 200));
        assert_eq!(at(4), ms(101 + 1));
        assert_eq!(at(11), ms(201 + 2));
        assert_eq!(t.parent_index(7), 5);
    }

    #[test]
    fn bounds_hold_on_larger_groups() {
        for n in [9u32, 17, 40, 128] {
            let pts: Vec<u64> = (0..n as u64).map(|i| (i * 7919) % 1009).collect();
            let d = line(&pts);
            let g = group(n, n / 2);
            let h = build_nice_hierarchy(&g, &d, 3).unwrap();
            check_bounds(&h);
            let t = nice_tree(&g, &h, &d).unwrap();
            assert_eq!(t.len(), n as usize);
        }
    }
}
