//! Stream labels for [`split_seed`].

pub use crate::split_seed;

pub const SOCIAL: &str = "social";
pub const UNDERLAY: &str = "underlay";
pub const EMBED_SUBSET: &str = "embed/subset";
pub const EMBED_PLACE: &str = "embed/place";
pub const ANALYZE_APL: &str = "analyze/apl";
pub const SEARCH: &str = "search";
pub const MULTICAST: &str = "multicast";

/// Workload stream `i` of the query simulation. Every policy replays the
/// same workloads.
pub fn query_label(i: usize) -> String {
    format!("query/{i}")
}

/// All labels a run with `query_seeds` workloads draws from.
pub fn labels(query_seeds: usize) -> Vec<String> {
    let mut out: Vec<String> = [
        SOCIAL,
        UNDERLAY,
        EMBED_SUBSET,
        EMBED_PLACE,
        ANALYZE_APL,
        SEARCH,
        MULTICAST,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    out.extend((0..query_seeds).map(query_label));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn shipped_labels_do_not_collide() {
        for master in [0, 42, u64::MAX] {
            let labels = labels(100);
            let seeds: BTreeSet<u64> = labels.iter().map(|l| split_seed(master, l)).collect();
            assert_eq!(seeds.len(), labels.len());
        }
    }
}
