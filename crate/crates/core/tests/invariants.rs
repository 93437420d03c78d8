mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use socnet_sim::multicast::{
    build_esm_mesh, build_nice_hierarchy, build_social_tree, delivery_stats, esm_tree, nice_tree, select_friend_group,
    DelayMatrix, EsmParams, MulticastGroup, SocialTreeMode,
};
use socnet_sim::search::{run_queries, run_query_sim, Query, RoutingPolicy, SimParams, Workload};
use socnet_sim::socialgraph::{generate_social_graph, InterestCategory, SocialGenParams, SocialGraph, UserId};
use socnet_sim::underlay::Micros;

use common::{check_tree, small_config, World};

fn world() -> &'static World {
    static W: OnceLock<World> = OnceLock::new();
    W.get_or_init(|| World::build(&small_config()))
}

/// Delays between points in the plane, in microseconds.
fn plane(points: &[(u32, u32)]) -> DelayMatrix {
    let rows: Vec<Vec<Micros>> = points
        .iter()
        .map(|&(x1, y1)| {
            points
                .iter()
                .map(|&(x2, y2)| {
                    let (dx, dy) = (x1.abs_diff(x2) as f64, y1.abs_diff(y2) as f64);
                    Micros(dx.hypot(dy).round() as u64)
                })
                .collect()
        })
        .collect();
    DelayMatrix::from_rows(&rows).unwrap()
}

fn group_of(n: usize, source: usize) -> MulticastGroup {
    MulticastGroup::new(UserId(source as u32), (0..n as u32).map(UserId))
}

fn points(max: usize) -> impl Strategy<Value = Vec<(u32, u32)>> {
    prop::collection::vec((0u32..10_000, 0u32..10_000), 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn nice_clusters_respect_bounds(pts in points(160), k in 2usize..5, src in any::<prop::sample::Index>()) {
        let n = pts.len();
        let d = plane(&pts);
        let g = group_of(n, src.index(n));
        let h = build_nice_hierarchy(&g, &d, k).unwrap();
        for (i, layer) in h.layers().iter().enumerate() {
            for c in layer {
                prop_assert!(c.members.len() <= 3 * k - 1, "layer {} cluster of {}", i, c.members.len());
                // only a lone top cluster may be small, and only when its layer is
                if layer.len() > 1 || h.layer_members(i).len() >= k {
                    prop_assert!(c.members.len() >= k, "layer {} cluster of {}", i, c.members.len());
                }
                prop_assert!(c.members.contains(&c.leader));
            }
        }
        prop_assert_eq!(h.layers().last().unwrap().len(), 1);
        prop_assert_eq!(h.layer_members(0).len(), n);
        let t = nice_tree(&g, &h, &d).unwrap();
        prop_assert_eq!(check_tree(&t, &d), Ok(()));
    }

    #[test]
    fn esm_mesh_is_bounded_connected_and_improving(
        pts in points(70),
        mesh_degree in 3usize..8,
        seed: u64,
        src in any::<prop::sample::Index>(),
    ) {
        let n = pts.len();
        let d = plane(&pts);
        let g = group_of(n, src.index(n));
        let params = EsmParams { mesh_degree, ..EsmParams::default() };
        let mesh = build_esm_mesh(&g, &d, &params, seed).unwrap();
        prop_assert!(mesh.is_connected());
        prop_assert!(mesh.max_degree() <= mesh.degree_bound());
        prop_assert!(mesh.round_max_degree().iter().all(|&m| m <= mesh.degree_bound()));
        for w in mesh.round_costs().windows(2) {
            prop_assert!(w[1] <= w[0], "cost rose {:?}", mesh.round_costs());
        }
        for i in 0..n {
            for &j in mesh.neighbors(i) {
                prop_assert!(mesh.neighbors(j).contains(&i));
            }
        }
        let t = esm_tree(&g, &mesh, &d).unwrap();
        prop_assert_eq!(check_tree(&t, &d), Ok(()));
    }

    #[test]
    fn social_trees_span_along_friendships(
        n in 2usize..80,
        extra in prop::collection::vec((0usize..80, 0usize..80), 0..120),
        parents in prop::collection::vec(any::<prop::sample::Index>(), 80),
        pts in prop::collection::vec((0u32..10_000, 0u32..10_000), 80),
        size in 1usize..80,
        mode in prop::sample::select(vec![SocialTreeMode::ShortestDelay, SocialTreeMode::Bfs, SocialTreeMode::HighestDegree]),
    ) {
        let mut edges: Vec<(u32, u32)> = (1..n).map(|v| (parents[v].index(v) as u32, v as u32)).collect();
        edges.extend(extra.iter().filter(|(a, b)| a < b && *b < n).map(|&(a, b)| (a as u32, b as u32)));
        edges.sort_unstable();
        edges.dedup();
        let sg = SocialGraph::from_edge_list(n, &edges).unwrap();
        let group = select_friend_group(&sg, UserId(0), size.min(n), |_| true).unwrap();
        prop_assert_eq!(group.len(), size.min(n));
        let member_pts: Vec<(u32, u32)> = group.members().iter().map(|u| pts[u.index()]).collect();
        let d = plane(&member_pts);
        let t = build_social_tree(&group, &sg, &d, mode).unwrap();
        prop_assert_eq!(check_tree(&t, &d), Ok(()));
        for (p, c) in t.edges() {
            prop_assert!(sg.has_edge(group.members()[p], group.members()[c]));
        }
    }

    #[test]
    fn query_runs_keep_strengths_bounded_and_entries_mutual(
        seed: u64,
        policy in prop::sample::select(vec![
            RoutingPolicy::Flood,
            RoutingPolicy::HighestDegree(2),
            RoutingPolicy::InterestWeighted(1),
            RoutingPolicy::InterestWeighted(3),
        ]),
        adaptive: bool,
        ttl in 0u32..6,
    ) {
        let w = world();
        let params = SimParams { ttl, adaptive, epochs: 2, ..SimParams::default() };
        let workload = Workload { num_queries: 60, ..Workload::default() };
        let out = run_query_sim(&w.graph, Some((&w.placement, &w.underlay)), &workload, policy, &params, seed).unwrap();
        prop_assert_eq!(out.audit.strength_out_of_bounds, 0);
        prop_assert_eq!(out.audit.asymmetric_entries, 0);
        prop_assert_eq!(out.audit.reprocessed, 0);
        prop_assert_eq!(out.audit.sends_at_zero_ttl, 0);
        for s in out.states.iter().flatten() {
            for e in s.friends() {
                prop_assert!(e.strength.iter().all(|x| (0.0..=1.0).contains(x)));
            }
        }
        let msgs: u64 = out.records.iter().map(|r| r.messages).sum();
        prop_assert_eq!(msgs, out.audit.deliveries);
        for r in &out.records {
            if let Some(h) = r.first_hit_hops {
                prop_assert!(h >= 1 && h <= ttl);
            }
        }
    }
}

/// Flooding a token nobody holds with a TTL beyond the diameter sends
/// deg(origin) + sum over the rest of (deg - 1) = 2m - (n - 1) messages
/// when every peer processes the query exactly once.
#[test]
fn miss_flood_processes_each_query_once_per_peer() {
    let g = generate_social_graph(
        &SocialGenParams {
            n: 300,
            max_degree_cap: 100,
            ..SocialGenParams::default()
        },
        &Default::default(),
        5,
    )
    .unwrap();
    let (n, m) = (g.node_count() as u64, g.edge_count() as u64);
    let queries: Vec<Query> = (0..5)
        .map(|i| Query {
            id: i,
            origin: UserId(i as u32 * 37),
            category: InterestCategory::ALL[i as usize % 7],
            token: u32::MAX,
            ttl: 64,
        })
        .collect();
    let params = SimParams {
        ttl: 64,
        epochs: 1,
        ..SimParams::default()
    };
    let out = run_queries(&g, None, &queries, RoutingPolicy::Flood, &params).unwrap();
    for r in &out.records {
        assert_eq!(r.messages, 2 * m - (n - 1));
        assert_eq!(r.first_hit_hops, None);
    }
    assert_eq!(out.audit.deliveries - out.audit.duplicates_dropped, 5 * (n - 1));
}

#[test]
fn delivery_stretch_is_at_least_one() {
    let w = world();
    let placed: Vec<UserId> = w.placement.users().collect();
    for (i, &seed_user) in placed.iter().step_by(23).enumerate() {
        let size = [2, 5, 12, 30][i % 4];
        let Ok(group) = select_friend_group(&w.graph, seed_user, size, |u| w.placement.contains(u)) else {
            continue;
        };
        let d = DelayMatrix::new(&group, &w.placement, &w.underlay).unwrap();
        let social = build_social_tree(&group, &w.graph, &d, SocialTreeMode::ShortestDelay).unwrap();
        let mesh = build_esm_mesh(&group, &d, &EsmParams::default(), i as u64).unwrap();
        let esm = esm_tree(&group, &mesh, &d).unwrap();
        let h = build_nice_hierarchy(&group, &d, 3).unwrap();
        let nice = nice_tree(&group, &h, &d).unwrap();
        for t in [&social, &esm, &nice] {
            check_tree(t, &d).unwrap();
            let s = delivery_stats(t, &d, &w.placement, &w.underlay).unwrap();
            if group.len() > 1 {
                assert!(s.min_stretch >= 1.0, "stretch {}", s.min_stretch);
            }
            assert!(s.mean_delay_ms >= 0.0);
        }
    }
}
