//! Builds the default transit-stub underlay and samples router delays.

use socnet_sim::underlay::{generate_transit_stub, LinkLevel, RouterId, TransitStubParams};

fn main() -> socnet_sim::Result<()> {
    let u = generate_transit_stub(&TransitStubParams::default(), 1)?;
    println!(
        "{} routers, {} links, {} stub domains, {} component(s)",
        u.router_count(),
        u.links().len(),
        u.stub_domains().len(),
        u.component_count()
    );
    for level in LinkLevel::ALL {
        let n = u.links().iter().filter(|l| l.level == level).count();
        println!("  {:<14} {n} links", level.name());
    }
    let last = RouterId(u.router_count() as u32 - 1);
    for b in [RouterId(1), RouterId(200), last] {
        let hops = u.path_links(RouterId(0), b).len();
        println!(
            "0 -> {b}: {} ms over {hops} links",
            u.shortest_path_delay(RouterId(0), b)
        );
    }
    Ok(())
}
