//! Experiment configuration: flat, sectioned `key = value` text.
//!
//! ```text
//! # comment
//! [social]
//! n = 5000
//! homophily.music = 0.6
//! [multicast]
//! sizes = 8,16,32
//! ```
//!
//! Every key is optional; unknown keys are errors. [`ExperimentConfig::to_text`]
//! renders every key in a fixed order and parses back to the same config.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::embedding::{EmbedMode, EmbedParams, Selection};
use crate::error::{Result, SimError};
use crate::multicast::{EsmParams, Fig8Params, SocialTreeMode};
use crate::search::{AdaptParams, RoutingPolicy, SearchExperimentParams, SimParams, TokenDistribution, Workload};
use crate::socialgraph::{GeoModel, InterestCategory, Region, SocialGenParams};
use crate::underlay::{DelayRange, TransitStubParams};

/// A routing policy plus whether friend lists adapt while it runs. Written
/// as `interest_weighted(3)+adaptive`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicySpec {
    pub policy: RoutingPolicy,
    pub adaptive: bool,
}

impl std::fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.policy, if self.adaptive { "+adaptive" } else { "" })
    }
}

impl FromStr for PolicySpec {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, adaptive) = match s.strip_suffix("+adaptive") {
            Some(b) => (b, true),
            None => (s, false),
        };
        Ok(PolicySpec {
            policy: body.parse()?,
            adaptive,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub experiment: SearchExperimentParams,
    pub policies: Vec<PolicySpec>,
    pub sim: SimParams,
    pub workload: Workload,
    /// Independent workloads per policy.
    pub seeds: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            experiment: SearchExperimentParams::default(),
            policies: vec![
                PolicySpec {
                    policy: RoutingPolicy::Flood,
                    adaptive: false,
                },
                PolicySpec {
                    policy: RoutingPolicy::HighestDegree(3),
                    adaptive: false,
                },
                PolicySpec {
                    policy: RoutingPolicy::InterestWeighted(3),
                    adaptive: true,
                },
            ],
            sim: SimParams::default(),
            workload: Workload::default(),
            seeds: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub social: SocialGenParams,
    pub geo: GeoModel,
    /// Sampled pairs for the average path length estimate.
    pub apl_samples: usize,
    pub underlay: TransitStubParams,
    pub embed: EmbedParams,
    pub search: SearchConfig,
    pub multicast: Fig8Params,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 42,
            output_dir: PathBuf::from("out"),
            social: SocialGenParams::default(),
            geo: GeoModel::default(),
            apl_samples: 2000,
            underlay: TransitStubParams::default(),
            embed: EmbedParams::default(),
            search: SearchConfig::default(),
            multicast: Fig8Params::default(),
        }
    }
}

fn cfg_err(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| cfg_err(format!("`{key}`: cannot parse `{value}`")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(cfg_err(format!("`{key}`: expected true/false, got `{value}`"))),
    }
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| num(key, x))
        .collect()
}

fn delay_range(key: &str, value: &str) -> Result<DelayRange> {
    match list::<f64>(key, value)?.as_slice() {
        &[lo_ms, hi_ms] => Ok(DelayRange { lo_ms, hi_ms }),
        _ => Err(cfg_err(format!("`{key}`: expected `lo_ms,hi_ms`"))),
    }
}

fn category(key: &str, name: &str) -> Result<usize> {
    name.parse::<InterestCategory>()
        .map(InterestCategory::index)
        .map_err(|_| cfg_err(format!("unknown key `{key}`")))
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| cfg_err(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        let mut custom_regions = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                section = name
                    .strip_suffix(']')
                    .ok_or_else(|| cfg_err(format!("line {}: malformed section header", i + 1)))?
                    .trim()
                    .to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(format!("line {}: expected `key = value`", i + 1)))?;
            if section.is_empty() {
                return Err(cfg_err(format!("line {}: key outside any section", i + 1)));
            }
            let full = format!("{section}.{}", key.trim());
            // the first explicit region replaces the built-in model
            if full.starts_with("geo.region.") && !custom_regions {
                cfg.geo.regions.clear();
                custom_regions = true;
            }
            cfg.set(&full, value.trim())
                .map_err(|e| cfg_err(format!("line {}: {}", i + 1, strip(e))))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `section.key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let s = &mut self.social;
        let u = &mut self.underlay;
        let e = &mut self.embed;
        let q = &mut self.search;
        let m = &mut self.multicast;
        match key {
            "run.seed" => self.master_seed = num(key, value)?,
            "run.output_dir" => self.output_dir = PathBuf::from(value),

            "social.n" => s.n = num(key, value)?,
            "social.target_mean_degree" => s.target_mean_degree = num(key, value)?,
            "social.max_degree_cap" => s.max_degree_cap = num(key, value)?,
            "social.triad_prob" => s.triad_prob = num(key, value)?,
            "social.locality_strength" => s.locality_strength = num(key, value)?,
            "social.locality_scale_km" => s.locality_scale_km = num(key, value)?,
            "social.zipf_exponent" => s.zipf_exponent = num(key, value)?,
            "social.max_tokens_per_category" => s.max_tokens_per_category = num(key, value)?,
            "social.apl_samples" => self.apl_samples = num(key, value)?,
            k if k.starts_with("social.homophily.") => {
                s.homophily[category(k, &k["social.homophily.".len()..])?] = num(key, value)?
            }
            k if k.starts_with("social.vocab_size.") => {
                s.vocab_size[category(k, &k["social.vocab_size.".len()..])?] = num(key, value)?
            }

            k if k.starts_with("geo.region.") => {
                let name = &k["geo.region.".len()..];
                let v: Vec<f64> = list(key, value)?;
                let &[weight, lat, lon, dispersion_km] = v.as_slice() else {
                    return Err(cfg_err(format!("`{key}`: expected `weight,lat,lon,dispersion_km`")));
                };
                let region = Region {
                    name: name.to_string(),
                    weight,
                    lat,
                    lon,
                    dispersion_km,
                };
                match self.geo.regions.iter_mut().find(|r| r.name == name) {
                    Some(r) => *r = region,
                    None => self.geo.regions.push(region),
                }
            }

            "underlay.transit_domains" => u.transit_domains = num(key, value)?,
            "underlay.transit_nodes_per_domain" => u.transit_nodes_per_domain = num(key, value)?,
            "underlay.transit_edge_prob" => u.transit_edge_prob = num(key, value)?,
            "underlay.stub_domains_per_transit_node" => u.stub_domains_per_transit_node = num(key, value)?,
            "underlay.stub_nodes_per_domain" => u.stub_nodes_per_domain = num(key, value)?,
            "underlay.stub_edge_prob" => u.stub_edge_prob = num(key, value)?,
            "underlay.inter_transit_links" => u.inter_transit_links = num(key, value)?,
            "underlay.delay.inter_transit" => u.inter_transit_delay = delay_range(key, value)?,
            "underlay.delay.intra_transit" => u.intra_transit_delay = delay_range(key, value)?,
            "underlay.delay.transit_stub" => u.transit_stub_delay = delay_range(key, value)?,
            "underlay.delay.intra_stub" => u.intra_stub_delay = delay_range(key, value)?,

            "embed.subset_size" => {
                e.subset_size = match value {
                    "all" => None,
                    v => Some(num(key, v)?),
                }
            }
            "embed.stub_capacity" => {
                e.stub_capacity = match value {
                    "auto" => None,
                    v => Some(num(key, v)?),
                }
            }
            "embed.selection" => {
                e.selection = match value {
                    "random" => Selection::Random,
                    "bfs_cluster" => Selection::BfsCluster,
                    _ => return Err(cfg_err(format!("`{key}`: expected random|bfs_cluster"))),
                }
            }
            "embed.mode" => {
                e.mode = match value {
                    "geographic" => EmbedMode::Geographic,
                    "random" => EmbedMode::Random,
                    _ => return Err(cfg_err(format!("`{key}`: expected geographic|random"))),
                }
            }
            "embed.access_delay_ms" => e.access_delay_ms = num(key, value)?,

            "search.sample_users" => q.experiment.sample_users = num(key, value)?,
            "search.max_depth" => q.experiment.max_depth = num(key, value)?,
            "search.policies" => {
                q.policies = value
                    .split(',')
                    .map(str::trim)
                    .filter(|p| !p.is_empty())
                    .map(|p| {
                        p.parse()
                            .map_err(|e: SimError| cfg_err(format!("`{key}`: {}", strip(e))))
                    })
                    .collect::<Result<_>>()?
            }
            "search.ttl" => q.sim.ttl = num(key, value)?,
            "search.supernode_threshold" => q.sim.supernode_threshold = num(key, value)?,
            "search.epochs" => q.sim.epochs = num(key, value)?,
            "search.acquired_in_degree" => q.sim.acquired_in_degree = boolean(key, value)?,
            "search.alpha" => q.sim.adapt.alpha = num(key, value)?,
            "search.responder_initial" => q.sim.adapt.responder_initial = num(key, value)?,
            "search.evict_min_queries" => q.sim.adapt.evict_min_queries = num(key, value)?,
            "search.evict_floor" => q.sim.adapt.evict_floor = num(key, value)?,
            "search.num_queries" => q.workload.num_queries = num(key, value)?,
            "search.tokens" => {
                q.workload.tokens = match value {
                    "own" => TokenDistribution::OwnInterests,
                    v => match v.strip_prefix("zipf:").map(|r| r.split_once(':')) {
                        Some(Some((vocab, exp))) => TokenDistribution::Zipf {
                            vocab_size: num(key, vocab)?,
                            exponent: num(key, exp)?,
                        },
                        _ => return Err(cfg_err(format!("`{key}`: expected own|zipf:<vocab>:<exponent>"))),
                    },
                }
            }
            "search.seeds" => q.seeds = num(key, value)?,

            "multicast.sizes" => m.sizes = list(key, value)?,
            "multicast.trials" => m.trials = num(key, value)?,
            "multicast.nice_k" => m.nice_k = num(key, value)?,
            "multicast.mesh_degree" => m.esm.mesh_degree = num(key, value)?,
            "multicast.improvement_rounds" => m.esm.improvement_rounds = num(key, value)?,
            "multicast.initial_degree" => m.esm.initial_degree = num(key, value)?,
            "multicast.social_tree" => {
                m.social_mode = value
                    .parse()
                    .map_err(|e: SimError| cfg_err(format!("`{key}`: {}", strip(e))))?
            }
            "multicast.max_seed_attempts" => m.max_seed_attempts = num(key, value)?,

            _ => return Err(cfg_err(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies `section.key=value` overrides, then revalidates.
    pub fn apply_overrides<'a>(&mut self, overrides: impl IntoIterator<Item = &'a str>) -> Result<()> {
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| cfg_err(format!("override `{o}` is not `section.key=value`")))?;
            self.set(k.trim(), v.trim())?;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |r: Result<()>| r.map_err(|e| cfg_err(strip(e)));
        wrap(self.social.validate())?;
        wrap(self.geo.validate())?;
        wrap(self.underlay.validate())?;
        wrap(self.multicast.esm.validate())?;
        if self.apl_samples == 0 {
            return Err(cfg_err("social.apl_samples must be >= 1"));
        }
        if self.embed.stub_capacity == Some(0) {
            return Err(cfg_err("embed.stub_capacity must be >= 1"));
        }
        if !(self.embed.access_delay_ms >= 0.0) {
            return Err(cfg_err("embed.access_delay_ms must be >= 0"));
        }
        if self.search.policies.is_empty() {
            return Err(cfg_err("search.policies must name at least one policy"));
        }
        for p in &self.search.policies {
            wrap(p.policy.validate())?;
        }
        if self.search.seeds == 0 {
            return Err(cfg_err("search.seeds must be >= 1"));
        }
        if self.search.sim.epochs == 0 || self.search.sim.epochs > self.search.workload.num_queries {
            return Err(cfg_err("search.epochs must lie in 1..=search.num_queries"));
        }
        let a = &self.search.sim.adapt;
        if !(0.0..=1.0).contains(&a.alpha) || !(0.0..=1.0).contains(&a.responder_initial) {
            return Err(cfg_err("search.alpha and search.responder_initial must lie in [0,1]"));
        }
        if self.multicast.sizes.is_empty() || self.multicast.sizes.contains(&0) {
            return Err(cfg_err("multicast.sizes must be a non-empty list of sizes >= 1"));
        }
        if self.multicast.trials == 0 {
            return Err(cfg_err("multicast.trials must be >= 1"));
        }
        if self.multicast.nice_k < 2 {
            return Err(cfg_err("multicast.nice_k must be >= 2"));
        }
        Ok(())
    }

    /// Canonical rendering of every key. `output_dir` is excluded, so the
    /// config hash does not depend on where results are written.
    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let s = &self.social;
        writeln!(o, "[run]\nseed = {}", self.master_seed).unwrap();
        writeln!(o, "\n[social]").unwrap();
        writeln!(o, "n = {}", s.n).unwrap();
        writeln!(o, "target_mean_degree = {}", s.target_mean_degree).unwrap();
        writeln!(o, "max_degree_cap = {}", s.max_degree_cap).unwrap();
        writeln!(o, "triad_prob = {}", s.triad_prob).unwrap();
        writeln!(o, "locality_strength = {}", s.locality_strength).unwrap();
        writeln!(o, "locality_scale_km = {}", s.locality_scale_km).unwrap();
        for c in InterestCategory::ALL {
            writeln!(o, "homophily.{} = {}", c.name(), s.homophily[c.index()]).unwrap();
        }
        for c in InterestCategory::ALL {
            writeln!(o, "vocab_size.{} = {}", c.name(), s.vocab_size[c.index()]).unwrap();
        }
        writeln!(o, "zipf_exponent = {}", s.zipf_exponent).unwrap();
        writeln!(o, "max_tokens_per_category = {}", s.max_tokens_per_category).unwrap();
        writeln!(o, "apl_samples = {}", self.apl_samples).unwrap();

        writeln!(o, "\n[geo]").unwrap();
        for r in &self.geo.regions {
            writeln!(
                o,
                "region.{} = {},{},{},{}",
                r.name, r.weight, r.lat, r.lon, r.dispersion_km
            )
            .unwrap();
        }

        let u = &self.underlay;
        writeln!(o, "\n[underlay]").unwrap();
        writeln!(o, "transit_domains = {}", u.transit_domains).unwrap();
        writeln!(o, "transit_nodes_per_domain = {}", u.transit_nodes_per_domain).unwrap();
        writeln!(o, "transit_edge_prob = {}", u.transit_edge_prob).unwrap();
        writeln!(o, "stub_domains_per_transit_node = {}", u.stub_domains_per_transit_node).unwrap();
        writeln!(o, "stub_nodes_per_domain = {}", u.stub_nodes_per_domain).unwrap();
        writeln!(o, "stub_edge_prob = {}", u.stub_edge_prob).unwrap();
        writeln!(o, "inter_transit_links = {}", u.inter_transit_links).unwrap();
        for (name, r) in [
            ("inter_transit", u.inter_transit_delay),
            ("intra_transit", u.intra_transit_delay),
            ("transit_stub", u.transit_stub_delay),
            ("intra_stub", u.intra_stub_delay),
        ] {
            writeln!(o, "delay.{name} = {},{}", r.lo_ms, r.hi_ms).unwrap();
        }

        let e = &self.embed;
        writeln!(o, "\n[embed]").unwrap();
        writeln!(
            o,
            "subset_size = {}",
            e.subset_size.map_or("all".to_string(), |k| k.to_string())
        )
        .unwrap();
        writeln!(
            o,
            "stub_capacity = {}",
            e.stub_capacity.map_or("auto".to_string(), |k| k.to_string())
        )
        .unwrap();
        let selection = match e.selection {
            Selection::Random => "random",
            Selection::BfsCluster => "bfs_cluster",
        };
        let mode = match e.mode {
            EmbedMode::Geographic => "geographic",
            EmbedMode::Random => "random",
        };
        writeln!(o, "selection = {selection}\nmode = {mode}").unwrap();
        writeln!(o, "access_delay_ms = {}", e.access_delay_ms).unwrap();

        let q = &self.search;
        writeln!(o, "\n[search]").unwrap();
        writeln!(o, "sample_users = {}", q.experiment.sample_users).unwrap();
        writeln!(o, "max_depth = {}", q.experiment.max_depth).unwrap();
        let policies: Vec<String> = q.policies.iter().map(ToString::to_string).collect();
        writeln!(o, "policies = {}", policies.join(",")).unwrap();
        writeln!(o, "ttl = {}", q.sim.ttl).unwrap();
        writeln!(o, "supernode_threshold = {}", q.sim.supernode_threshold).unwrap();
        writeln!(o, "epochs = {}", q.sim.epochs).unwrap();
        writeln!(o, "acquired_in_degree = {}", q.sim.acquired_in_degree).unwrap();
        let AdaptParams {
            alpha,
            responder_initial,
            evict_min_queries,
            evict_floor,
        } = q.sim.adapt;
        writeln!(o, "alpha = {alpha}\nresponder_initial = {responder_initial}").unwrap();
        writeln!(
            o,
            "evict_min_queries = {evict_min_queries}\nevict_floor = {evict_floor}"
        )
        .unwrap();
        writeln!(o, "num_queries = {}", q.workload.num_queries).unwrap();
        let tokens = match q.workload.tokens {
            TokenDistribution::OwnInterests => "own".to_string(),
            TokenDistribution::Zipf { vocab_size, exponent } => format!("zipf:{vocab_size}:{exponent}"),
        };
        writeln!(o, "tokens = {tokens}").unwrap();
        writeln!(o, "seeds = {}", q.seeds).unwrap();

        let m = &self.multicast;
        let EsmParams {
            mesh_degree,
            improvement_rounds,
            initial_degree,
        } = m.esm;
        let sizes: Vec<String> = m.sizes.iter().map(ToString::to_string).collect();
        let social_tree = match m.social_mode {
            SocialTreeMode::ShortestDelay => "shortest_delay",
            SocialTreeMode::Bfs => "bfs",
            SocialTreeMode::HighestDegree => "highest_degree",
        };
        writeln!(o, "\n[multicast]").unwrap();
        writeln!(o, "sizes = {}", sizes.join(",")).unwrap();
        writeln!(o, "trials = {}", m.trials).unwrap();
        writeln!(o, "nice_k = {}", m.nice_k).unwrap();
        writeln!(
            o,
            "mesh_degree = {mesh_degree}\nimprovement_rounds = {improvement_rounds}"
        )
        .unwrap();
        writeln!(o, "initial_degree = {initial_degree}").unwrap();
        writeln!(o, "social_tree = {social_tree}").unwrap();
        writeln!(o, "max_seed_attempts = {}", m.max_seed_attempts).unwrap();
        o
    }

    /// Hex SHA-256 of [`Self::to_text`].
    pub fn hash(&self) -> String {
        super::sha256_hex(self.to_text().as_bytes())
    }
}

/// Message of a config error without its "config error:" prefix.
fn strip(e: SimError) -> String {
    match e {
        SimError::Config(m) | SimError::Param(m) => m,
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_text_round_trips() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_text();
        let back = ExperimentConfig::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn overrides_and_sections() {
        let text = "[social]\nn = 300 # small\n\n[multicast]\nsizes = 1, 2\n[search]\npolicies = flood, highest_degree(2)+adaptive\ntokens = zipf:50:1.1\n";
        let cfg = ExperimentConfig::from_text(text).unwrap();
        assert_eq!(cfg.social.n, 300);
        assert_eq!(cfg.multicast.sizes, vec![1, 2]);
        assert_eq!(cfg.search.policies[1].to_string(), "highest_degree(2)+adaptive");
        assert_eq!(
            cfg.search.workload.tokens,
            TokenDistribution::Zipf {
                vocab_size: 50,
                exponent: 1.1
            }
        );
        let mut cfg = cfg;
        cfg.apply_overrides(["run.seed=7", "embed.subset_size=100"]).unwrap();
        assert_eq!(cfg.master_seed, 7);
        assert_eq!(cfg.embed.subset_size, Some(100));
        assert_ne!(cfg.hash(), ExperimentConfig::default().hash());
    }

    #[test]
    fn custom_regions_replace_defaults() {
        let cfg = ExperimentConfig::from_text("[geo]\nregion.north = 0.5,60,10,300\nregion.south = 0.5,-30,20,300\n")
            .unwrap();
        assert_eq!(cfg.geo.regions.len(), 2);
        let again = ExperimentConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(again.geo, cfg.geo);
    }

    #[test]
    fn errors_name_the_line() {
        for (text, needle) in [
            ("[social]\nbogus = 1\n", "line 2"),
            ("n = 3\n", "outside any section"),
            ("[social]\nn = many\n", "cannot parse"),
            ("[multicast]\nsizes = 0\n", "sizes"),
            ("[social\nn=1\n", "section header"),
        ] {
            let err = ExperimentConfig::from_text(text).unwrap_err();
            assert!(matches!(err, SimError::Config(_)), "{text}");
            assert!(err.to_string().contains(needle), "{err} lacks {needle}");
        }
    }
}
