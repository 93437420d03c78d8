use std::collections::BTreeMap;

use crate::embedding::Placement;
use crate::error::{Result, SimError};
use crate::underlay::UnderlayGraph;

use super::{DelayMatrix, OverlayTree};

#[derive(Debug, Clone, PartialEq)]
pub struct DeliveryStats {
    /// Over receivers (every member but the source); 0 for a lone source.
    pub mean_delay_ms: f64,
    pub max_delay_ms: f64,
    /// Delivery delay over direct source-to-member delay, 1 where the direct
    /// delay is 0. Mean and extremes over receivers; 1 for a lone source.
    pub mean_stretch: f64,
    pub min_stretch: f64,
    pub max_stretch: f64,
    /// Tree edges whose underlay path crosses each physical link.
    pub stress: BTreeMap<usize, u32>,
    pub max_stress: u32,
}

pub fn delivery_stats(
    tree: &OverlayTree,
    d: &DelayMatrix,
    placement: &Placement,
    underlay: &UnderlayGraph,
) -> Result<DeliveryStats> {
    if d.len() != tree.len() {
        return Err(SimError::param("delay matrix does not match the tree"));
    }
    let members = tree.members();
    let router = |i: usize| {
        placement
            .get(members[i])
            .map(|a| a.router)
            .ok_or(SimError::Unplaced(members[i].0))
    };
    let mut stress = BTreeMap::new();
    for (p, c) in tree.edges() {
        for link in underlay.path_links(router(p)?, router(c)?) {
            *stress.entry(link).or_insert(0) += 1;
        }
    }
    Ok(summarize(tree, d, stress))
}

/// Delay and stretch only; `stress` is left empty.
pub fn delay_stats(tree: &OverlayTree, d: &DelayMatrix) -> DeliveryStats {
    summarize(tree, d, BTreeMap::new())
}

fn summarize(tree: &OverlayTree, d: &DelayMatrix, stress: BTreeMap<usize, u32>) -> DeliveryStats {
    let src = tree
        .members()
        .binary_search(&tree.source())
        .expect("source is a member");
    let receivers: Vec<usize> = (0..tree.len()).filter(|&i| i != src).collect();
    let delays: Vec<f64> = receivers.iter().map(|&i| tree.delay_at(i).as_ms()).collect();
    let stretches: Vec<f64> = receivers
        .iter()
        .map(|&i| {
            let direct = d.get(src, i);
            if direct.0 == 0 {
                1.0
            } else {
                tree.delay_at(i).0 as f64 / direct.0 as f64
            }
        })
        .collect();
    let mean = |xs: &[f64], empty: f64| {
        if xs.is_empty() {
            empty
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    DeliveryStats {
        mean_delay_ms: mean(&delays, 0.0),
        max_delay_ms: delays.iter().copied().fold(0.0, f64::max),
        mean_stretch: mean(&stretches, 1.0),
        min_stretch: stretches.iter().copied().reduce(f64::min).unwrap_or(1.0),
        max_stretch: stretches.iter().copied().reduce(f64::max).unwrap_or(1.0),
        max_stress: stress.values().copied().max().unwrap_or(0),
        stress,
    }
}
