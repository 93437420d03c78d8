//! Every stage on a reduced configuration, written to a directory.
//!
//!     cargo run --example full_pipeline -- /tmp/socnet-out

use socnet_sim::harness::{ExperimentConfig, Runner};

fn main() -> socnet_sim::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.output_dir = std::env::args().nth(1).unwrap_or_else(|| "socnet-out".into()).into();
    cfg.apply_overrides([
        "social.n=1500",
        "search.num_queries=1000",
        "search.epochs=5",
        "multicast.sizes=8,16,32",
        "multicast.trials=5",
    ])?;
    let mut runner = Runner::new(cfg)?;
    runner.all()?;
    let manifest = runner.finish()?;
    for (name, sum) in &manifest.files {
        println!("{} {name}", &sum[..12]);
    }
    Ok(())
}
