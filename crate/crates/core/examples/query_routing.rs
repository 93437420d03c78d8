//! Flooding versus selective forwarding, and friend lists that adapt to
//! query replies.

use socnet_sim::embedding::{embed, select_subset, EmbedParams};
use socnet_sim::search::{run_query_sim, RoutingPolicy, SimParams, Workload};
use socnet_sim::socialgraph::{generate_social_graph, GeoModel, SocialGenParams};
use socnet_sim::underlay::{generate_transit_stub, TransitStubParams};

fn main() -> socnet_sim::Result<()> {
    let g = generate_social_graph(
        &SocialGenParams {
            n: 2000,
            ..Default::default()
        },
        &GeoModel::default(),
        5,
    )?;
    let u = generate_transit_stub(&TransitStubParams::default(), 5)?;
    let params = EmbedParams::default();
    let p = embed(&select_subset(&g, &params, 5)?, &g, &u, &params, 5)?;

    let workload = Workload {
        num_queries: 500,
        ..Workload::default()
    };
    let fixed = SimParams {
        epochs: 1,
        ..SimParams::default()
    };
    for policy in [
        RoutingPolicy::Flood,
        RoutingPolicy::HighestDegree(3),
        RoutingPolicy::InterestWeighted(3),
    ] {
        let m = run_query_sim(&g, Some((&p, &u)), &workload, policy, &fixed, 5)?.overall;
        println!(
            "{:<22} success {:.3}  hops {:.2}  msgs/query {:>8.1}  latency {:.1} ms",
            policy.to_string(),
            m.success_rate,
            m.mean_hops.unwrap_or(f64::NAN),
            m.mean_messages,
            m.mean_latency_ms.unwrap_or(f64::NAN)
        );
    }

    let adaptive = SimParams {
        adaptive: true,
        ..SimParams::default()
    };
    let out = run_query_sim(
        &g,
        Some((&p, &u)),
        &Workload::default(),
        RoutingPolicy::InterestWeighted(3),
        &adaptive,
        5,
    )?;
    let hops: Vec<String> = out
        .epochs
        .iter()
        .map(|e| format!("{:.2}", e.mean_hops.unwrap_or(f64::NAN)))
        .collect();
    println!("adaptive interest_weighted(3) mean hops by epoch: {}", hops.join(" "));
    Ok(())
}
