//! Growth model for the synthetic social graph.
//!
//! Users arrive one at a time. Each newcomer places itself geographically,
//! then attaches to existing users by degree-proportional sampling biased
//! toward nearby users, interleaved with triad-closing steps that link to a
//! friend of the previous attachment target. Interest tokens are drawn from a
//! per-category Zipf popularity law, except that each slot copies a token from
//! one of the newcomer's new friends with the category's homophily
//! probability.

use std::collections::BTreeSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;

use super::geo::{great_circle_from_units, unit_vector, GeoModel};
use super::{InterestCategory, Interests, SocialGraph, Token, UserId, UserProfile};
use crate::error::{Result, SimError};
use crate::rng_from_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SocialGenParams {
    pub n: usize,
    pub target_mean_degree: f64,
    pub max_degree_cap: usize,
    /// Probability that an attachment step closes a triangle instead of
    /// sampling preferentially.
    pub triad_prob: f64,
    /// 0 disables the distance bias; 1 makes far users nearly unreachable.
    pub locality_strength: f64,
    /// Length scale of the distance bias.
    pub locality_scale_km: f64,
    /// Per-category probability that a token slot is copied from a new friend.
    pub homophily: [f64; InterestCategory::COUNT],
    pub vocab_size: [u32; InterestCategory::COUNT],
    pub zipf_exponent: f64,
    pub max_tokens_per_category: usize,
}

impl Default for SocialGenParams {
    fn default() -> Self {
        let mut homophily = [0.4; InterestCategory::COUNT];
        homophily[InterestCategory::Music.index()] = 0.6;
        homophily[InterestCategory::Sports.index()] = 0.6;
        homophily[InterestCategory::Movies.index()] = 0.25;
        homophily[InterestCategory::TvShows.index()] = 0.25;
        SocialGenParams {
            n: 5000,
            target_mean_degree: 19.0,
            max_degree_cap: 1077,
            triad_prob: 0.7,
            locality_strength: 0.9,
            locality_scale_km: 1000.0,
            homophily,
            vocab_size: [2000; InterestCategory::COUNT],
            zipf_exponent: 0.9,
            max_tokens_per_category: 3,
        }
    }
}

impl SocialGenParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(SimError::param(format!("{name} must lie in [0,1], got {v}")))
            }
        };
        unit("triad_prob", self.triad_prob)?;
        unit("locality_strength", self.locality_strength)?;
        for (c, &h) in InterestCategory::ALL.iter().zip(&self.homophily) {
            unit(&format!("homophily.{c}"), h)?;
        }
        if !(self.target_mean_degree >= 1.0) {
            return Err(SimError::param("target_mean_degree must be >= 1"));
        }
        if (self.max_degree_cap as f64) < self.target_mean_degree {
            return Err(SimError::param("max_degree_cap must be >= target_mean_degree"));
        }
        if !(self.locality_scale_km > 0.0) {
            return Err(SimError::param("locality_scale_km must be > 0"));
        }
        if self.vocab_size.iter().any(|&v| v == 0) {
            return Err(SimError::param("vocab_size must be >= 1 for every category"));
        }
        if !(self.zipf_exponent >= 0.0) {
            return Err(SimError::param("zipf_exponent must be >= 0"));
        }
        if self.max_tokens_per_category == 0 {
            return Err(SimError::param("max_tokens_per_category must be >= 1"));
        }
        Ok(())
    }
}

/// Generates a connected social graph. Deterministic in `(params, geo, seed)`.
pub fn generate_social_graph(params: &SocialGenParams, geo: &GeoModel, seed: u64) -> Result<SocialGraph> {
    params.validate()?;
    geo.validate()?;
    let n = params.n;
    let mut rng = rng_from_seed(seed);

    let picker = geo.picker();
    let places: Vec<(usize, f64, f64)> = (0..n).map(|_| geo.sample(&picker, &mut rng)).collect();
    let units: Vec<[f64; 3]> = places.iter().map(|&(_, lat, lon)| unit_vector(lat, lon)).collect();

    let zipf: Vec<WeightedIndex<f64>> = params
        .vocab_size
        .iter()
        .map(|&v| WeightedIndex::new((1..=v).map(|k| (k as f64).powf(-params.zipf_exponent))).expect("vocab validated"))
        .collect();

    let mut growth = Growth::new(n, params.max_degree_cap);
    let mut interests: Vec<Interests> = Vec::with_capacity(n);

    let per_node = params.target_mean_degree / 2.0;
    let core = n.min(per_node.ceil() as usize + 1);
    for t in 0..core {
        for j in 0..t {
            growth.link(j, t);
        }
        let partners: Vec<usize> = (0..t).collect();
        interests.push(draw_interests(params, &zipf, &partners, &interests, &mut rng));
    }

    let mut weights = vec![0.0f64; n];
    for t in core..n {
        let whole = per_node.floor() as usize;
        let extra = usize::from(rng.gen_bool(per_node - per_node.floor()));
        let wanted = whole + extra;

        for (j, w) in weights[..t].iter_mut().enumerate() {
            let deg = growth.degree(j);
            *w = if deg >= params.max_degree_cap {
                0.0
            } else {
                let bias = if params.locality_strength > 0.0 {
                    let d = great_circle_from_units(&units[t], &units[j]);
                    (1.0 - params.locality_strength) + params.locality_strength * (-d / params.locality_scale_km).exp()
                } else {
                    1.0
                };
                deg.max(1) as f64 * bias
            };
        }

        let mut partners: Vec<usize> = Vec::with_capacity(wanted);
        let mut last_pa: Option<usize> = None;
        for _ in 0..wanted {
            let triad = match last_pa {
                Some(anchor) if rng.gen_bool(params.triad_prob) => growth.triad_target(anchor, t, &partners, &mut rng),
                _ => None,
            };
            let target = match triad {
                Some(v) => Some(v),
                None => {
                    let pick = sample_weighted(&weights[..t], &partners, &mut rng);
                    last_pa = pick;
                    pick
                }
            };
            let Some(v) = target else { break };
            growth.link(v, t);
            weights[v] = 0.0;
            partners.push(v);
        }
        interests.push(draw_interests(params, &zipf, &partners, &interests, &mut rng));
    }

    growth.repair_connectivity(&units);

    let profiles = places
        .into_iter()
        .zip(interests)
        .enumerate()
        .map(|(i, ((region, lat, lon), interests))| UserProfile {
            id: UserId(i as u32),
            region,
            lat,
            lon,
            interests,
        })
        .collect();
    SocialGraph::from_edges(profiles, growth.into_edges())
}

struct Growth {
    adjacency: Vec<Vec<usize>>,
    cap: usize,
}

impl Growth {
    fn new(n: usize, cap: usize) -> Self {
        Growth {
            adjacency: vec![Vec::new(); n],
            cap,
        }
    }

    fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    fn link(&mut self, a: usize, b: usize) {
        self.adjacency[a].push(b);
        self.adjacency[b].push(a);
    }

    /// A random friend of `anchor` that `t` can still link to.
    fn triad_target<R: Rng>(&self, anchor: usize, t: usize, partners: &[usize], rng: &mut R) -> Option<usize> {
        let candidates: Vec<usize> = self.adjacency[anchor]
            .iter()
            .copied()
            .filter(|&w| w != t && !partners.contains(&w) && self.degree(w) < self.cap)
            .collect();
        candidates.choose(rng).copied()
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let n = self.adjacency.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Joins every minor component to the giant one: the component's
    /// highest-degree user links to the geographically nearest giant member.
    fn repair_connectivity(&mut self, units: &[[f64; 3]]) {
        let comps = self.components();
        if comps.len() <= 1 {
            return;
        }
        // components are discovered in order of their smallest id, so a
        // stable max_by_key keeps the first (smallest-id) among equal sizes
        let giant_idx = comps
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|(_, c)| c.len())
            .map(|(i, _)| i)
            .unwrap();
        let mut giant = comps[giant_idx].clone();
        for (i, comp) in comps.iter().enumerate() {
            if i == giant_idx {
                continue;
            }
            let hub = comp
                .iter()
                .copied()
                .filter(|&u| self.degree(u) < self.cap)
                .max_by(|&a, &b| self.degree(a).cmp(&self.degree(b)).then(b.cmp(&a)))
                .unwrap_or(comp[0]);
            let anchor = giant
                .iter()
                .copied()
                .filter(|&v| self.degree(v) < self.cap)
                .min_by(|&a, &b| {
                    let da = great_circle_from_units(&units[hub], &units[a]);
                    let db = great_circle_from_units(&units[hub], &units[b]);
                    da.total_cmp(&db).then(a.cmp(&b))
                })
                .unwrap_or(giant[0]);
            self.link(hub, anchor);
            giant.extend_from_slice(comp);
        }
    }

    fn into_edges(self) -> Vec<(UserId, UserId)> {
        let mut edges = Vec::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if u < v {
                    edges.push((UserId(u as u32), UserId(v as u32)));
                }
            }
        }
        edges
    }
}

/// Degree-and-distance weighted draw that skips already chosen partners.
fn sample_weighted<R: Rng>(weights: &[f64], chosen: &[usize], rng: &mut R) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    // chosen entries already have weight zero, so a plain roulette draw works
    let mut x = rng.gen::<f64>() * total;
    let mut last_positive = None;
    for (j, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last_positive = Some(j);
        if x < w {
            debug_assert!(!chosen.contains(&j));
            return Some(j);
        }
        x -= w;
    }
    last_positive
}

fn draw_interests<R: Rng>(
    params: &SocialGenParams,
    zipf: &[WeightedIndex<f64>],
    partners: &[usize],
    existing: &[Interests],
    rng: &mut R,
) -> Interests {
    let mut out = Interests::default();
    for c in InterestCategory::ALL {
        let slots = rng.gen_range(1..=params.max_tokens_per_category);
        let mut set: BTreeSet<Token> = BTreeSet::new();
        for _ in 0..slots {
            let copied = if !partners.is_empty() && rng.gen_bool(params.homophily[c.index()]) {
                let friend = partners[rng.gen_range(0..partners.len())];
                let tokens: Vec<Token> = existing[friend].get(c).iter().copied().collect();
                tokens.choose(rng).copied()
            } else {
                None
            };
            let token = copied.unwrap_or_else(|| zipf[c.index()].sample(rng) as Token);
            set.insert(token);
        }
        *out.get_mut(c) = set;
    }
    out
}
