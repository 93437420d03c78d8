//! Hop distance to the nearest user sharing an interest, per category.

use socnet_sim::search::{interest_search_experiment, SearchExperimentParams};
use socnet_sim::socialgraph::{generate_social_graph, GeoModel, SocialGenParams};

fn main() -> socnet_sim::Result<()> {
    let g = generate_social_graph(&SocialGenParams::default(), &GeoModel::default(), 11)?;
    let r = interest_search_experiment(&g, &SearchExperimentParams::default(), 11)?;
    print!("{}", r.summary_csv());
    println!("mean P(match within 3 hops) = {:.3}", r.mean_within(3));
    Ok(())
}
