use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::embedding::Placement;
use crate::error::{Result, SimError};
use crate::socialgraph::{SocialGraph, UserId};
use crate::underlay::UnderlayGraph;
use crate::{rng_from_seed, split_seed};

use super::{
    build_esm_tree, build_nice_hierarchy, build_social_tree, delivery_stats, nice_tree, select_friend_group,
    DelayMatrix, DeliveryStats, EsmParams, SocialTreeMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    Social,
    Esm,
    Nice,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Social, Protocol::Esm, Protocol::Nice];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Social => "social",
            Protocol::Esm => "esm",
            Protocol::Nice => "nice",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig8Params {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub esm: EsmParams,
    pub nice_k: usize,
    pub social_mode: SocialTreeMode,
    /// Seed users drawn per cell before giving up on a too-small component.
    pub max_seed_attempts: usize,
}

impl Default for Fig8Params {
    fn default() -> Self {
        Fig8Params {
            sizes: vec![8, 16, 32, 64, 128],
            trials: 20,
            esm: EsmParams::default(),
            nice_k: 3,
            social_mode: SocialTreeMode::ShortestDelay,
            max_seed_attempts: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig8Row {
    pub protocol: Protocol,
    pub group_size: usize,
    pub trial: usize,
    pub source: UserId,
    pub stats: DeliveryStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig8Summary {
    pub protocol: Protocol,
    pub group_size: usize,
    pub mean_delay_ms: f64,
    /// Population standard deviation over trials.
    pub std_delay_ms: f64,
    pub mean_stretch: f64,
    pub mean_max_stress: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig8Result {
    pub rows: Vec<Fig8Row>,
}

pub const FIG8_CSV_HEADER: &str = "protocol,group_size,trial,mean_delay_ms,max_delay_ms,mean_stretch,max_stress";

impl Fig8Result {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{FIG8_CSV_HEADER}\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{}",
                r.protocol,
                r.group_size,
                r.trial,
                r.stats.mean_delay_ms,
                r.stats.max_delay_ms,
                r.stats.mean_stretch,
                r.stats.max_stress
            )
            .unwrap();
        }
        out
    }

    /// Per (protocol, size) aggregates, in protocol then size order.
    pub fn summary(&self) -> Vec<Fig8Summary> {
        let mut cells: BTreeMap<(Protocol, usize), Vec<&Fig8Row>> = BTreeMap::new();
        for r in &self.rows {
            cells.entry((r.protocol, r.group_size)).or_default().push(r);
        }
        cells
            .into_iter()
            .map(|((protocol, group_size), rows)| {
                let n = rows.len() as f64;
                let mean = rows.iter().map(|r| r.stats.mean_delay_ms).sum::<f64>() / n;
                let var = rows.iter().map(|r| (r.stats.mean_delay_ms - mean).powi(2)).sum::<f64>() / n;
                Fig8Summary {
                    protocol,
                    group_size,
                    mean_delay_ms: mean,
                    std_delay_ms: var.sqrt(),
                    mean_stretch: rows.iter().map(|r| r.stats.mean_stretch).sum::<f64>() / n,
                    mean_max_stress: rows.iter().map(|r| r.stats.max_stress as f64).sum::<f64>() / n,
                }
            })
            .collect()
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("protocol,group_size,mean_delay_ms,std_delay_ms,mean_stretch,mean_max_stress\n");
        for s in self.summary() {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6}",
                s.protocol, s.group_size, s.mean_delay_ms, s.std_delay_ms, s.mean_stretch, s.mean_max_stress
            )
            .unwrap();
        }
        out
    }

    /// Mean of per-trial mean delays for one cell.
    pub fn mean_delay(&self, protocol: Protocol, size: usize) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.protocol == protocol && s.group_size == size)
            .map(|s| s.mean_delay_ms)
    }
}

/// Evaluates the same friend groups under all three protocols. Each
/// (size, trial) cell draws its seed user from its own seed stream, so cells
/// run in parallel without changing the output.
pub fn fig8_experiment(
    g: &SocialGraph,
    placement: &Placement,
    underlay: &UnderlayGraph,
    params: &Fig8Params,
    seed: u64,
) -> Result<Fig8Result> {
    if params.sizes.is_empty() || params.sizes.contains(&0) {
        return Err(SimError::param("group sizes must be non-empty and >= 1"));
    }
    if params.trials == 0 {
        return Err(SimError::param("trials must be >= 1"));
    }
    params.esm.validate()?;
    if placement.is_empty() {
        return Err(SimError::param("no placed users"));
    }
    let placed: Vec<UserId> = placement.users().collect();
    let cells: Vec<(usize, usize)> = params
        .sizes
        .iter()
        .flat_map(|&s| (0..params.trials).map(move |t| (s, t)))
        .collect();
    let rows: Vec<Vec<Fig8Row>> = cells
        .par_iter()
        .map(|&(size, trial)| {
            let cell_seed = split_seed(seed, &format!("fig8/{size}/{trial}"));
            run_cell(g, placement, underlay, params, &placed, size, trial, cell_seed)
        })
        .collect::<Result<_>>()?;
    Ok(Fig8Result {
        rows: rows.into_iter().flatten().collect(),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_cell(
    g: &SocialGraph,
    placement: &Placement,
    underlay: &UnderlayGraph,
    params: &Fig8Params,
    placed: &[UserId],
    size: usize,
    trial: usize,
    seed: u64,
) -> Result<Vec<Fig8Row>> {
    let mut rng = rng_from_seed(seed);
    let mut best = 0;
    let mut group = None;
    for _ in 0..params.max_seed_attempts.max(1) {
        let start = placed[rng.gen_range(0..placed.len())];
        match select_friend_group(g, start, size, |u| placement.contains(u)) {
            Ok(grp) => {
                group = Some(grp);
                break;
            }
            Err(SimError::GroupTooSmall { achievable }) => best = best.max(achievable),
            Err(e) => return Err(e),
        }
    }
    let group = group.ok_or(SimError::GroupTooSmall { achievable: best })?;
    let d = DelayMatrix::new(&group, placement, underlay)?;
    let esm_seed = rng.gen();
    let trees = [
        build_social_tree(&group, g, &d, params.social_mode)?,
        build_esm_tree(&group, &d, &params.esm, esm_seed)?,
        nice_tree(&group, &build_nice_hierarchy(&group, &d, params.nice_k)?, &d)?,
    ];
    Protocol::ALL
        .iter()
        .zip(trees.iter())
        .map(|(&protocol, tree)| {
            Ok(Fig8Row {
                protocol,
                group_size: size,
                trial,
                source: group.source(),
                stats: delivery_stats(tree, &d, placement, underlay)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{embed, select_subset, EmbedParams};
    use crate::socialgraph::{generate_social_graph, GeoModel, SocialGenParams};
    use crate::underlay::{generate_transit_stub, TransitStubParams};

    fn small_world() -> (SocialGraph, UnderlayGraph, Placement) {
        let g = generate_social_graph(
            &SocialGenParams {
                n: 400,
                ..SocialGenParams::default()
            },
            &GeoModel::default(),
            5,
        )
        .unwrap();
        let tp = TransitStubParams {
            transit_domains: 3,
            transit_nodes_per_domain: 3,
            stub_domains_per_transit_node: 2,
            stub_nodes_per_domain: 5,
            ..TransitStubParams::default()
        };
        let u = generate_transit_stub(&tp, 6).unwrap();
        let ep = EmbedParams {
            subset_size: Some(200),
            ..EmbedParams::default()
        };
        let users = select_subset(&g, &ep, 7).unwrap();
        let p = embed(&users, &g, &u, &ep, 8).unwrap();
        (g, u, p)
    }

    #[test]
    fn tiny_groups_agree_across_protocols() {
        let (g, u, p) = small_world();
        let params = Fig8Params {
            sizes: vec![1, 2],
            trials: 3,
            ..Fig8Params::default()
        };
        let r = fig8_experiment(&g, &p, &u, &params, 1).unwrap();
        assert_eq!(r.rows.len(), 2 * 3 * 3);
        for cell in r.rows.chunks(3) {
            let delays: Vec<f64> = cell.iter().map(|x| x.stats.mean_delay_ms).collect();
            assert!(delays.iter().all(|&x| x == delays[0]), "{delays:?}");
            if cell[0].group_size == 1 {
                assert_eq!(delays[0], 0.0);
            }
        }
    }

    #[test]
    fn output_is_seeded_and_well_formed() {
        let (g, u, p) = small_world();
        let params = Fig8Params {
            sizes: vec![8, 16],
            trials: 2,
            ..Fig8Params::default()
        };
        let a = fig8_experiment(&g, &p, &u, &params, 3).unwrap();
        let b = fig8_experiment(&g, &p, &u, &params, 3).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert!(a.to_csv().starts_with(FIG8_CSV_HEADER));
        assert_eq!(a.summary().len(), 3 * 2);
        assert!(a.rows.iter().all(|r| r.stats.min_stretch >= 1.0));
    }

    #[test]
    fn rejects_bad_params() {
        let (g, u, p) = small_world();
        let bad = Fig8Params {
            sizes: vec![0],
            ..Fig8Params::default()
        };
        assert!(fig8_experiment(&g, &p, &u, &bad, 1).is_err());
        let huge = Fig8Params {
            sizes: vec![10_000],
            trials: 1,
            max_seed_attempts: 2,
            ..Fig8Params::default()
        };
        assert!(matches!(
            fig8_experiment(&g, &p, &u, &huge, 1),
            Err(SimError::GroupTooSmall { .. })
        ));
    }
}
