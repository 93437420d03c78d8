//! Generates a small social graph and prints its structural summary.
//!
//!     cargo run --example social_graph -- 2000

use socnet_sim::harness::graph_stats;
use socnet_sim::socialgraph::{degree_histogram, generate_social_graph, GeoModel, SocialGenParams};

fn main() -> socnet_sim::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let params = SocialGenParams {
        n,
        ..SocialGenParams::default()
    };
    let g = generate_social_graph(&params, &GeoModel::default(), 7)?;
    let s = graph_stats(&g, 2000, 7)?;
    print!("{}", s.to_csv());
    println!("clustering / ER expectation = {:.1}", s.clustering / s.er_clustering);

    let hist = degree_histogram(&g);
    let top: Vec<_> = hist.counts.iter().rev().take(5).collect();
    println!("five largest degrees (degree, users): {top:?}");
    Ok(())
}
