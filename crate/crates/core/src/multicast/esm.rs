//! Static Narada-style mesh: a random degree-bounded mesh refined by edge
//! swaps, with the delivery tree taken as the source's shortest-path tree
//! over the mesh.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Result, SimError};
use crate::rng_from_seed;
use crate::underlay::Micros;

use super::{DelayMatrix, MulticastGroup, OverlayTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EsmParams {
    /// Maximum mesh neighbours per member.
    pub mesh_degree: usize,
    pub improvement_rounds: usize,
    /// Random neighbours each member tries to reach in the initial mesh.
    pub initial_degree: usize,
}

impl Default for EsmParams {
    fn default() -> Self {
        EsmParams {
            mesh_degree: 5,
            improvement_rounds: 20,
            initial_degree: 3,
        }
    }
}

impl EsmParams {
    pub fn validate(&self) -> Result<()> {
        if self.mesh_degree < 2 {
            return Err(SimError::param("mesh_degree must be >= 2"));
        }
        if self.initial_degree == 0 || self.initial_degree > self.mesh_degree {
            return Err(SimError::param("initial_degree must lie in 1..=mesh_degree"));
        }
        Ok(())
    }
}

/// Mesh over group positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EsmMesh {
    adjacency: Vec<BTreeSet<usize>>,
    degree_bound: usize,
    /// Sum of all-pairs mesh shortest-path delays, before any round and after
    /// each accepted round.
    round_costs: Vec<Micros>,
    /// Max mesh degree observed after each accepted round.
    round_max_degree: Vec<usize>,
}

impl EsmMesh {
    pub fn neighbors(&self, i: usize) -> &BTreeSet<usize> {
        &self.adjacency[i]
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn round_costs(&self) -> &[Micros] {
        &self.round_costs
    }

    pub fn round_max_degree(&self) -> &[usize] {
        &self.round_max_degree
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        connected(&self.adjacency)
    }

    fn add(&mut self, a: usize, b: usize) {
        self.adjacency[a].insert(b);
        self.adjacency[b].insert(a);
    }

    fn remove(&mut self, a: usize, b: usize) {
        self.adjacency[a].remove(&b);
        self.adjacency[b].remove(&a);
    }
}

/// Builds and refines the mesh. Each round every member (in position order)
/// considers dropping its least useful mesh edge in favour of the non-edge
/// that most reduces its own shortest-path sum; the swap is kept only if the
/// member's exact cost drops, degree bounds hold and the mesh stays
/// connected. A round that raises the total mesh cost is rolled back and
/// ends refinement.
pub fn build_esm_mesh(group: &MulticastGroup, d: &DelayMatrix, params: &EsmParams, seed: u64) -> Result<EsmMesh> {
    params.validate()?;
    let n = group.len();
    let mut mesh = initial_mesh(n, params, seed);
    let mut apsp = all_pairs(&mesh.adjacency, d);
    mesh.round_costs.push(total(&apsp));
    mesh.round_max_degree.push(mesh.max_degree());

    for _ in 0..params.improvement_rounds {
        let before = mesh.clone();
        let mut changed = false;
        for u in 0..n {
            if let Some((drop, add)) = propose(&mesh, &apsp, d, u) {
                mesh.remove(u, drop);
                mesh.add(u, add);
                let ok = mesh.adjacency[add].len() <= mesh.degree_bound
                    && connected(&mesh.adjacency)
                    && sssp(&mesh.adjacency, d, u).iter().copied().sum::<Micros>()
                        < apsp[u].iter().copied().sum::<Micros>();
                if ok {
                    apsp = all_pairs(&mesh.adjacency, d);
                    changed = true;
                } else {
                    mesh.remove(u, add);
                    mesh.add(u, drop);
                }
            }
        }
        if !changed {
            break;
        }
        let cost = total(&apsp);
        if cost > *mesh.round_costs.last().expect("initial cost recorded") {
            let costs = std::mem::take(&mut mesh.round_costs);
            let degrees = std::mem::take(&mut mesh.round_max_degree);
            mesh = before;
            mesh.round_costs = costs;
            mesh.round_max_degree = degrees;
            break;
        }
        mesh.round_costs.push(cost);
        mesh.round_max_degree.push(mesh.max_degree());
    }
    Ok(mesh)
}

/// ESM delivery tree: the source's shortest-path tree over the refined mesh
/// (delays are symmetric, so the reverse tree is the same).
pub fn build_esm_tree(group: &MulticastGroup, d: &DelayMatrix, params: &EsmParams, seed: u64) -> Result<OverlayTree> {
    let mesh = build_esm_mesh(group, d, params, seed)?;
    esm_tree(group, &mesh, d)
}

pub fn esm_tree(group: &MulticastGroup, mesh: &EsmMesh, d: &DelayMatrix) -> Result<OverlayTree> {
    let src = group.source_index();
    let (_, parent) = sssp_with_parents(&mesh.adjacency, d, src);
    OverlayTree::from_parents(group, parent, d)
}

fn initial_mesh(n: usize, params: &EsmParams, seed: u64) -> EsmMesh {
    let mut rng = rng_from_seed(seed);
    let mut mesh = EsmMesh {
        adjacency: vec![BTreeSet::new(); n],
        degree_bound: params.mesh_degree,
        round_costs: Vec::new(),
        round_max_degree: Vec::new(),
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    // random spanning tree: each joiner attaches to an earlier member with room
    for k in 1..n {
        // a tree always has a leaf with spare degree when the bound is >= 2
        let pool: Vec<usize> = order[..k]
            .iter()
            .copied()
            .filter(|&v| mesh.adjacency[v].len() < params.mesh_degree)
            .collect();
        let to = pool[rng.gen_range(0..pool.len())];
        mesh.add(order[k], to);
    }
    // extra random links up to the initial degree
    for &u in &order {
        let mut tries = 0;
        while mesh.adjacency[u].len() < params.initial_degree && tries < 4 * n {
            tries += 1;
            let v = rng.gen_range(0..n);
            if v != u && !mesh.adjacency[u].contains(&v) && mesh.adjacency[v].len() < params.initial_degree {
                mesh.add(u, v);
            }
        }
    }
    mesh
}

/// `(edge to drop, member to link instead)` for `u`, if any improves the
/// estimate. Requires spare degree at the new neighbour.
fn propose(mesh: &EsmMesh, apsp: &[Vec<Micros>], d: &DelayMatrix, u: usize) -> Option<(usize, usize)> {
    let n = apsp.len();
    let nbrs = &mesh.adjacency[u];
    if nbrs.len() < 2 {
        return None;
    }
    // utility of (u, x): destinations whose shortest path from u starts at x
    let (_, parent) = sssp_with_parents(&mesh.adjacency, d, u);
    let mut util = vec![0usize; n];
    for mut v in 0..n {
        if v == u {
            continue;
        }
        while parent[v] != u {
            v = parent[v];
        }
        util[v] += 1;
    }
    let drop = *nbrs.iter().min_by_key(|&&x| (util[x], Reverse(d.get(u, x)), x))?;

    let current: Micros = apsp[u].iter().copied().sum();
    let mut best: Option<(Micros, usize)> = None;
    for y in 0..n {
        if y == u || nbrs.contains(&y) || mesh.adjacency[y].len() >= mesh.degree_bound {
            continue;
        }
        let via = d.get(u, y);
        let est: Micros = (0..n).map(|v| apsp[u][v].min(via + apsp[y][v])).sum();
        if est < current && best.is_none_or(|(b, _)| est < b) {
            best = Some((est, y));
        }
    }
    best.map(|(_, y)| (drop, y))
}

fn connected(adj: &[BTreeSet<usize>]) -> bool {
    if adj.is_empty() {
        return true;
    }
    let mut seen = vec![false; adj.len()];
    seen[0] = true;
    let mut stack = vec![0];
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == adj.len()
}

fn sssp(adj: &[BTreeSet<usize>], d: &DelayMatrix, s: usize) -> Vec<Micros> {
    sssp_with_parents(adj, d, s).0
}

/// Dijkstra over the mesh; equal-delay ties keep the smaller parent.
fn sssp_with_parents(adj: &[BTreeSet<usize>], d: &DelayMatrix, s: usize) -> (Vec<Micros>, Vec<usize>) {
    let n = adj.len();
    let mut dist = vec![Micros(u64::MAX); n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    dist[s] = Micros::ZERO;
    parent[s] = s;
    let mut heap = BinaryHeap::from([Reverse((Micros::ZERO, s))]);
    while let Some(Reverse((du, u))) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for &v in &adj[u] {
            let nd = du + d.get(u, v);
            if !done[v] && (nd < dist[v] || (nd == dist[v] && u < parent[v])) {
                dist[v] = nd;
                parent[v] = u;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    (dist, parent)
}

fn all_pairs(adj: &[BTreeSet<usize>], d: &DelayMatrix) -> Vec<Vec<Micros>> {
    (0..adj.len()).map(|s| sssp(adj, d, s)).collect()
}

fn total(apsp: &[Vec<Micros>]) -> Micros {
    apsp.iter().flatten().copied().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::socialgraph::UserId;

    fn random_matrix(n: usize, seed: u64) -> DelayMatrix {
        // points on a plane: metric delays
        let mut rng = rng_from_seed(seed);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)))
            .collect();
        let rows: Vec<Vec<Micros>> = pts
            .iter()
            .map(|a| {
                pts.iter()
                    .map(|b| Micros::from_ms(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()))
                    .collect()
            })
            .collect();
        DelayMatrix::from_rows(&rows).unwrap()
    }

    fn group(n: u32) -> MulticastGroup {
        MulticastGroup::new(UserId(0), (0..n).map(UserId))
    }

    #[test]
    fn pair_is_a_direct_link() {
        let d = random_matrix(2, 1);
        let tree = build_esm_tree(&group(2), &d, &EsmParams::default(), 3).unwrap();
        assert_eq!(tree.delay_at(1), d.get(0, 1));
    }

    #[test]
    fn improvement_is_monotone_and_bounded() {
        for seed in 0..5 {
            let d = random_matrix(8, seed);
            let mesh = build_esm_mesh(&group(8), &d, &EsmParams::default(), seed).unwrap();
            let costs = mesh.round_costs();
            assert!(costs.windows(2).all(|w| w[1] <= w[0]), "{costs:?}");
            assert!(costs.last() <= costs.first());
            assert!(mesh.round_max_degree().iter().all(|&k| k <= 5));
            assert!(mesh.is_connected());
        }
    }

    #[test]
    fn complete_mesh_reaches_direct_delays() {
        // degree bound >= n-1 and enough rounds: every member can link the
        // source directly, so delays hit the triangle-inequality floor
        let n = 6;
        let d = random_matrix(n, 9);
        let params = EsmParams {
            mesh_degree: n - 1,
            improvement_rounds: 200,
            initial_degree: n - 1,
        };
        let tree = build_esm_tree(&group(n as u32), &d, &params, 2).unwrap();
        for i in 0..n {
            assert_eq!(tree.delay_at(i), d.get(0, i));
        }
    }

    #[test]
    fn degree_bound_holds_for_large_groups() {
        let d = random_matrix(60, 4);
        let mesh = build_esm_mesh(&group(60), &d, &EsmParams::default(), 4).unwrap();
        assert!(mesh.max_degree() <= 5);
        assert!(mesh.is_connected());
    }
}
