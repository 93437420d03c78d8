//! Places users on stub routers and compares friend delays against random
//! pairs, geographic versus random placement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use socnet_sim::embedding::{embed, select_subset, EmbedMode, EmbedParams};
use socnet_sim::socialgraph::{generate_social_graph, GeoModel, SocialGenParams, UserId};
use socnet_sim::underlay::{generate_transit_stub, TransitStubParams};

fn main() -> socnet_sim::Result<()> {
    let g = generate_social_graph(
        &SocialGenParams {
            n: 3000,
            ..Default::default()
        },
        &GeoModel::default(),
        3,
    )?;
    let u = generate_transit_stub(&TransitStubParams::default(), 3)?;
    for mode in [EmbedMode::Geographic, EmbedMode::Random] {
        let params = EmbedParams {
            mode,
            ..EmbedParams::default()
        };
        let users = select_subset(&g, &params, 3)?;
        let p = embed(&users, &g, &u, &params, 3)?;

        let mut friend = Vec::new();
        for (a, b) in g.edges().take(3000) {
            friend.push(p.user_delay(&u, a, b)?.as_ms());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut random = Vec::new();
        for _ in 0..3000 {
            let a = UserId(rng.gen_range(0..g.node_count() as u32));
            let b = UserId(rng.gen_range(0..g.node_count() as u32));
            random.push(p.user_delay(&u, a, b)?.as_ms());
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        println!(
            "{mode:?}: {} users in {} stub domains, friend pairs {:.1} ms, random pairs {:.1} ms",
            p.len(),
            p.occupancy().len(),
            mean(&friend),
            mean(&random)
        );
    }
    Ok(())
}
