//! One friend group delivered three ways: along social links, over an ESM
//! mesh, and through a NICE hierarchy.

use socnet_sim::embedding::{embed, select_subset, EmbedParams};
use socnet_sim::multicast::{
    build_esm_tree, build_nice_hierarchy, build_social_tree, delivery_stats, nice_tree, select_friend_group,
    DelayMatrix, EsmParams, SocialTreeMode,
};
use socnet_sim::socialgraph::{generate_social_graph, GeoModel, SocialGenParams, UserId};
use socnet_sim::underlay::{generate_transit_stub, TransitStubParams};

fn main() -> socnet_sim::Result<()> {
    let g = generate_social_graph(&SocialGenParams::default(), &GeoModel::default(), 8)?;
    let u = generate_transit_stub(&TransitStubParams::default(), 8)?;
    let params = EmbedParams::default();
    let p = embed(&select_subset(&g, &params, 8)?, &g, &u, &params, 8)?;

    let group = select_friend_group(&g, UserId(100), 32, |x| p.contains(x))?;
    let d = DelayMatrix::new(&group, &p, &u)?;
    let h = build_nice_hierarchy(&group, &d, 3)?;
    println!(
        "group of {} from source {}; NICE has {} layers",
        group.len(),
        group.source(),
        h.layer_count()
    );
    let trees = [
        (
            "social",
            build_social_tree(&group, &g, &d, SocialTreeMode::ShortestDelay)?,
        ),
        ("esm", build_esm_tree(&group, &d, &EsmParams::default(), 8)?),
        ("nice", nice_tree(&group, &h, &d)?),
    ];
    for (name, t) in &trees {
        let s = delivery_stats(t, &d, &p, &u)?;
        println!(
            "{name:<7} mean {:>6.1} ms  max {:>6.1} ms  stretch {:.2}  max link stress {}",
            s.mean_delay_ms, s.max_delay_ms, s.mean_stretch, s.max_stress
        );
    }
    Ok(())
}
