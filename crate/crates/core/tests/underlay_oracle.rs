mod common;

use proptest::prelude::*;

use socnet_sim::underlay::{dijkstra, generate_transit_stub, Micros, RouterId, TransitStubParams};

use common::{floyd_warshall, random_underlay};

fn assert_matches_oracle(g: &socnet_sim::underlay::UnderlayGraph) {
    let fw = floyd_warshall(g);
    for s in 0..g.router_count() {
        let t = dijkstra(g, RouterId(s as u32));
        for (v, &want) in fw[s].iter().enumerate() {
            assert_eq!(t.dist[v], Micros(want), "{s} -> {v}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dijkstra_equals_floyd_warshall(n in 2usize..60, extra in 0usize..120, max_delay in 1u64..50_000, seed: u64) {
        assert_matches_oracle(&random_underlay(n, extra, max_delay, seed));
    }

    #[test]
    fn cached_paths_sum_to_their_delay(n in 2usize..40, extra in 0usize..60, seed: u64) {
        let g = random_underlay(n, extra, 10_000, seed);
        let fw = floyd_warshall(&g);
        for a in 0..n {
            for b in 0..n {
                let (ra, rb) = (RouterId(a as u32), RouterId(b as u32));
                prop_assert_eq!(g.shortest_path_delay(ra, rb), Micros(fw[a][b]));
                let sum: Micros = g.path_links(ra, rb).iter().map(|&l| g.links()[l].delay).sum();
                prop_assert_eq!(sum, Micros(fw[a][b]));
            }
        }
    }
}

#[test]
fn transit_stub_instances_match_oracle() {
    let params = TransitStubParams {
        transit_domains: 2,
        transit_nodes_per_domain: 4,
        stub_domains_per_transit_node: 2,
        stub_nodes_per_domain: 6,
        ..TransitStubParams::default()
    };
    for seed in 0..10 {
        let g = generate_transit_stub(&params, seed).unwrap();
        assert_eq!(g.component_count(), 1);
        assert_matches_oracle(&g);
    }
}

#[test]
fn disconnected_pairs_stay_unreachable() {
    use socnet_sim::underlay::{LinkLevel, Router, RouterKind, UnderlayGraph, UnderlayLink};
    let routers = (0..4)
        .map(|i| Router {
            id: RouterId(i),
            kind: RouterKind::Transit,
            transit_domain: 0,
            stub_domain: None,
        })
        .collect();
    let link = |a, b, d| UnderlayLink {
        a: RouterId(a),
        b: RouterId(b),
        delay: Micros(d),
        level: LinkLevel::IntraTransit,
    };
    let g = UnderlayGraph::new(routers, vec![link(0, 1, 5), link(2, 3, 7)]).unwrap();
    assert_eq!(g.component_count(), 2);
    assert_matches_oracle(&g);
    assert_eq!(dijkstra(&g, RouterId(0)).dist[2], Micros(u64::MAX));
}
