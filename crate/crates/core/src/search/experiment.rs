use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;

use crate::error::{Result, SimError};
use crate::rng_from_seed;
use crate::socialgraph::{interest_search_any, InterestCategory, SocialGraph, UserId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchExperimentParams {
    pub sample_users: usize,
    pub max_depth: u32,
}

impl Default for SearchExperimentParams {
    fn default() -> Self {
        SearchExperimentParams {
            sample_users: 1000,
            max_depth: 6,
        }
    }
}

/// Hop distribution for one category. `counts[h]` users found a match at
/// exactly `h` hops; `not_found` found none within the depth limit.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryCdf {
    pub category: InterestCategory,
    pub counts: Vec<usize>,
    pub not_found: usize,
}

impl CategoryCdf {
    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.not_found
    }

    /// Fraction of searches that matched within `hops`.
    pub fn within(&self, hops: u32) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let hit: usize = self.counts.iter().take(hops as usize + 1).sum();
        hit as f64 / total as f64
    }

    /// Smallest `h` with at least half of all searches matched within `h`;
    /// `None` when fewer than half ever match.
    pub fn median_hops(&self) -> Option<u32> {
        let total = self.total();
        let mut acc = 0;
        for (h, &c) in self.counts.iter().enumerate() {
            acc += c;
            if 2 * acc >= total && total > 0 {
                return Some(h as u32);
            }
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchExperimentResult {
    pub users: Vec<UserId>,
    pub max_depth: u32,
    pub per_category: BTreeMap<InterestCategory, CategoryCdf>,
}

pub const SEARCH_CDF_HEADER: &str = "category,hops,cum_probability";

impl SearchExperimentResult {
    /// Mean over categories of P(match within `hops`).
    pub fn mean_within(&self, hops: u32) -> f64 {
        let n = self.per_category.len();
        if n == 0 {
            return 0.0;
        }
        self.per_category.values().map(|c| c.within(hops)).sum::<f64>() / n as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{SEARCH_CDF_HEADER}\n");
        for c in self.per_category.values() {
            for h in 0..=self.max_depth {
                writeln!(out, "{},{},{:.6}", c.category.name(), h, c.within(h)).unwrap();
            }
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("category,p_within_3,median_hops,not_found\n");
        for c in self.per_category.values() {
            let median = c.median_hops().map(|m| m.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{:.6},{},{}",
                c.category.name(),
                c.within(3),
                median,
                c.not_found
            )
            .unwrap();
        }
        out
    }
}

/// For each sampled user and category, the hop distance to the nearest other
/// user sharing at least one of the sampled user's tokens.
pub fn interest_search_experiment(
    g: &SocialGraph,
    params: &SearchExperimentParams,
    seed: u64,
) -> Result<SearchExperimentResult> {
    if params.sample_users == 0 || params.sample_users > g.node_count() {
        return Err(SimError::param(format!(
            "sample_users must lie in 1..={}, got {}",
            g.node_count(),
            params.sample_users
        )));
    }
    if params.max_depth == 0 {
        return Err(SimError::param("max_depth must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let all: Vec<UserId> = g.users().collect();
    let mut users: Vec<UserId> = all.choose_multiple(&mut rng, params.sample_users).copied().collect();
    users.sort_unstable();

    let mut per_category = BTreeMap::new();
    for category in InterestCategory::ALL {
        let mut cdf = CategoryCdf {
            category,
            counts: vec![0; params.max_depth as usize + 1],
            not_found: 0,
        };
        for &u in &users {
            let tokens = g.profile(u).interests.get(category);
            match interest_search_any(g, u, category, tokens, Some(params.max_depth)).hops() {
                Some(h) => cdf.counts[h as usize] += 1,
                None => cdf.not_found += 1,
            }
        }
        per_category.insert(category, cdf);
    }
    Ok(SearchExperimentResult {
        users,
        max_depth: params.max_depth,
        per_category,
    })
}
