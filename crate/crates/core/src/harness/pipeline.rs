//! Stages of a run and the files they write.
//!
//! | stage           | files                                              |
//! |-----------------|----------------------------------------------------|
//! | `gen-social`    | `social_graph.txt`, `degree_histogram.csv`         |
//! | `gen-underlay`  | `underlay.txt`                                     |
//! | `embed`         | `placement.csv`                                    |
//! | `analyze`       | `graph_stats.csv`, `degree_histogram.csv`, `spanning_tree.csv` |
//! | `search-exp`    | `search_cdf.csv`, `search_summary.csv`             |
//! | `query-sim`     | `query_results.csv`                                |
//! | `multicast-exp` | `fig8.csv`, `fig8_summary.csv`                     |
//!
//! Every run also writes `config.txt` (the canonical effective config) and
//! `run_manifest.txt`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::embedding::{embed, select_subset, Placement};
use crate::error::{Result, SimError};
use crate::multicast::fig8_experiment;
use crate::search::{interest_search_experiment, run_query_sim, QUERY_CSV_HEADER};
use crate::socialgraph::{
    avg_shortest_path_sampled, connected_components, degree_histogram, generate_social_graph, global_clustering,
    kruskal_spanning_tree, load_graph, write_graph, SocialGraph,
};
use crate::underlay::{generate_transit_stub, write_underlay, UnderlayGraph};

use super::config::ExperimentConfig;
use super::manifest::RunManifest;
use super::seed::{self, split_seed};

/// Summary statistics written to `graph_stats.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub components: usize,
    pub mean_degree: f64,
    pub max_degree: usize,
    pub mode_degree: Option<usize>,
    pub clustering: f64,
    /// Clustering expected of an Erdős–Rényi graph of the same density.
    pub er_clustering: f64,
    /// `None` when the graph is disconnected or has fewer than two users.
    pub avg_path_length: Option<f64>,
    /// `2 ln n / ln(mean degree)`.
    pub path_length_bound: f64,
    /// Total great-circle length of the minimum spanning tree over friendship
    /// links; `None` when disconnected.
    pub spanning_tree_km: Option<f64>,
}

impl GraphStats {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        let mut o = String::from("metric,value\n");
        writeln!(o, "nodes,{}", self.nodes).unwrap();
        writeln!(o, "edges,{}", self.edges).unwrap();
        writeln!(o, "components,{}", self.components).unwrap();
        writeln!(o, "mean_degree,{:.6}", self.mean_degree).unwrap();
        writeln!(o, "max_degree,{}", self.max_degree).unwrap();
        writeln!(
            o,
            "mode_degree,{}",
            self.mode_degree.map(|m| m.to_string()).unwrap_or_default()
        )
        .unwrap();
        writeln!(o, "clustering,{:.6}", self.clustering).unwrap();
        writeln!(o, "er_clustering,{:.6}", self.er_clustering).unwrap();
        writeln!(o, "avg_path_length,{}", opt(self.avg_path_length)).unwrap();
        writeln!(o, "path_length_bound,{:.6}", self.path_length_bound).unwrap();
        writeln!(o, "spanning_tree_km,{}", opt(self.spanning_tree_km)).unwrap();
        o
    }
}

/// Degree, clustering and path-length summary of `g`.
pub fn graph_stats(g: &SocialGraph, apl_samples: usize, seed: u64) -> Result<GraphStats> {
    let n = g.node_count();
    let hist = degree_histogram(g);
    let components = connected_components(g).len();
    let connected = components == 1;
    let avg_path_length = if connected && n >= 2 {
        Some(avg_shortest_path_sampled(g, apl_samples, seed)?)
    } else {
        None
    };
    let spanning_tree_km = if connected {
        let tree = kruskal_spanning_tree(g, |a, b| g.distance_km(a, b))?;
        Some(tree.iter().map(|e| e.weight).sum())
    } else {
        None
    };
    Ok(GraphStats {
        nodes: n,
        edges: g.edge_count(),
        components,
        mean_degree: hist.mean,
        max_degree: hist.max,
        mode_degree: hist.mode,
        clustering: global_clustering(g),
        er_clustering: if n > 1 { hist.mean / (n - 1) as f64 } else { 0.0 },
        avg_path_length,
        path_length_bound: 2.0 * (n as f64).ln() / hist.mean.ln(),
        spanning_tree_km,
    })
}

/// Executes stages against one output directory, building the graph,
/// underlay and placement on first use.
pub struct Runner {
    cfg: ExperimentConfig,
    out: PathBuf,
    manifest: RunManifest,
    graph: Option<SocialGraph>,
    underlay: Option<UnderlayGraph>,
    placement: Option<Placement>,
    quiet: bool,
}

impl Runner {
    /// Creates the output directory. Outputs go to `cfg.output_dir`.
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let out = cfg.output_dir.clone();
        std::fs::create_dir_all(&out).map_err(|e| SimError::io(&out, e))?;
        Ok(Runner {
            manifest: RunManifest::new(cfg.hash()),
            cfg,
            out,
            graph: None,
            underlay: None,
            placement: None,
            quiet: false,
        })
    }

    /// Suppresses the per-stage progress lines on stderr.
    pub fn quiet(mut self, quiet: bool) -> Self {
        self.quiet = quiet;
        self
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    fn seed(&self, label: &str) -> u64 {
        split_seed(self.cfg.master_seed, label)
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        std::fs::write(&path, contents).map_err(|e| SimError::io(&path, e))?;
        self.manifest
            .files
            .insert(name.to_string(), super::sha256_hex(contents.as_bytes()));
        Ok(())
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let r = f(self)?;
        let elapsed = start.elapsed();
        self.record(stage, elapsed);
        Ok(r)
    }

    fn record(&mut self, stage: &str, elapsed: Duration) {
        if !self.quiet {
            eprintln!("{stage}: {:.2}s", elapsed.as_secs_f64());
        }
        self.manifest.durations.push((stage.to_string(), elapsed));
    }

    fn ensure_graph(&mut self) -> Result<()> {
        if self.graph.is_none() {
            let start = Instant::now();
            let g = generate_social_graph(&self.cfg.social, &self.cfg.geo, self.seed(seed::SOCIAL))?;
            self.graph = Some(g);
            self.record("build-social", start.elapsed());
        }
        Ok(())
    }

    fn ensure_underlay(&mut self) -> Result<()> {
        if self.underlay.is_none() {
            let start = Instant::now();
            let u = generate_transit_stub(&self.cfg.underlay, self.seed(seed::UNDERLAY))?;
            self.underlay = Some(u);
            self.record("build-underlay", start.elapsed());
        }
        Ok(())
    }

    fn ensure_placement(&mut self) -> Result<()> {
        self.ensure_graph()?;
        self.ensure_underlay()?;
        if self.placement.is_none() {
            let start = Instant::now();
            let g = self.graph.as_ref().unwrap();
            let users = select_subset(g, &self.cfg.embed, self.seed(seed::EMBED_SUBSET))?;
            let p = embed(
                &users,
                g,
                self.underlay.as_ref().unwrap(),
                &self.cfg.embed,
                self.seed(seed::EMBED_PLACE),
            )?;
            self.placement = Some(p);
            self.record("build-placement", start.elapsed());
        }
        Ok(())
    }

    pub fn gen_social(&mut self) -> Result<()> {
        self.ensure_graph()?;
        self.timed("gen-social", |r| {
            let g = r.graph.as_ref().unwrap();
            let (text, hist) = (write_graph(g), degree_histogram(g).to_csv());
            r.write("social_graph.txt", &text)?;
            r.write("degree_histogram.csv", &hist)
        })
    }

    pub fn gen_underlay(&mut self) -> Result<()> {
        self.ensure_underlay()?;
        self.timed("gen-underlay", |r| {
            let text = write_underlay(r.underlay.as_ref().unwrap());
            r.write("underlay.txt", &text)
        })
    }

    pub fn embed(&mut self) -> Result<()> {
        self.ensure_placement()?;
        self.timed("embed", |r| {
            let csv = r.placement.as_ref().unwrap().to_csv();
            r.write("placement.csv", &csv)
        })
    }

    /// Structural analysis of the configured graph, or of the graph stored
    /// at `graph_file` when given.
    pub fn analyze(&mut self, graph_file: Option<&Path>) -> Result<GraphStats> {
        let loaded = match graph_file {
            Some(p) => Some(load_graph(p)?),
            None => {
                self.ensure_graph()?;
                None
            }
        };
        self.timed("analyze", |r| {
            let g = loaded.as_ref().or(r.graph.as_ref()).unwrap();
            let stats = graph_stats(g, r.cfg.apl_samples, r.seed(seed::ANALYZE_APL))?;
            let hist = degree_histogram(g).to_csv();
            let mut tree = String::from("u,v,weight_km\n");
            if stats.components == 1 {
                for e in kruskal_spanning_tree(g, |a, b| g.distance_km(a, b))? {
                    writeln!(tree, "{},{},{:.6}", e.u, e.v, e.weight).unwrap();
                }
            }
            r.write("graph_stats.csv", &stats.to_csv())?;
            r.write("degree_histogram.csv", &hist)?;
            r.write("spanning_tree.csv", &tree)?;
            Ok(stats)
        })
    }

    pub fn search_exp(&mut self) -> Result<()> {
        self.ensure_graph()?;
        self.timed("search-exp", |r| {
            let res = interest_search_experiment(
                r.graph.as_ref().unwrap(),
                &r.cfg.search.experiment,
                r.seed(seed::SEARCH),
            )?;
            r.write("search_cdf.csv", &res.to_csv())?;
            r.write("search_summary.csv", &res.summary_csv())
        })
    }

    /// Every configured policy replays the same `search.seeds` workloads.
    pub fn query_sim(&mut self) -> Result<()> {
        self.ensure_placement()?;
        self.timed("query-sim", |r| {
            let (g, u, p) = (
                r.graph.as_ref().unwrap(),
                r.underlay.as_ref().unwrap(),
                r.placement.as_ref().unwrap(),
            );
            let s = &r.cfg.search;
            let jobs: Vec<(usize, usize)> = (0..s.policies.len())
                .flat_map(|pi| (0..s.seeds).map(move |si| (pi, si)))
                .collect();
            let rows: Vec<String> = jobs
                .par_iter()
                .map(|&(pi, si)| {
                    let spec = s.policies[pi];
                    let params = crate::search::SimParams {
                        adaptive: spec.adaptive,
                        ..s.sim
                    };
                    let seed = split_seed(r.cfg.master_seed, &seed::query_label(si));
                    let out = run_query_sim(g, Some((p, u)), &s.workload, spec.policy, &params, seed)?;
                    Ok(out.csv_rows(&spec.to_string(), seed))
                })
                .collect::<Result<_>>()?;
            let csv = format!("{QUERY_CSV_HEADER}\n{}", rows.concat());
            r.write("query_results.csv", &csv)
        })
    }

    pub fn multicast_exp(&mut self) -> Result<()> {
        self.ensure_placement()?;
        self.timed("multicast-exp", |r| {
            let res = fig8_experiment(
                r.graph.as_ref().unwrap(),
                r.placement.as_ref().unwrap(),
                r.underlay.as_ref().unwrap(),
                &r.cfg.multicast,
                r.seed(seed::MULTICAST),
            )?;
            r.write("fig8.csv", &res.to_csv())?;
            r.write("fig8_summary.csv", &res.summary_csv())
        })
    }

    /// Every stage in dependency order.
    pub fn all(&mut self) -> Result<()> {
        self.gen_social()?;
        self.gen_underlay()?;
        self.embed()?;
        self.analyze(None)?;
        self.search_exp()?;
        self.query_sim()?;
        self.multicast_exp()
    }

    /// Writes `config.txt` and the manifest; returns the manifest.
    pub fn finish(mut self) -> Result<RunManifest> {
        let text = self.cfg.to_text();
        self.write("config.txt", &text)?;
        self.manifest.write_atomic(&self.out)?;
        Ok(self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn tiny_config(out: &Path) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.output_dir = out.to_path_buf();
        cfg.apply_overrides([
            "social.n=300",
            "social.max_degree_cap=100",
            "social.apl_samples=200",
            "underlay.transit_domains=2",
            "underlay.transit_nodes_per_domain=3",
            "underlay.stub_domains_per_transit_node=2",
            "underlay.stub_nodes_per_domain=4",
            "search.sample_users=100",
            "search.num_queries=200",
            "search.epochs=2",
            "multicast.sizes=1,4",
            "multicast.trials=2",
        ])
        .unwrap();
        cfg
    }

    #[test]
    fn all_writes_every_file_with_schema_headers() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Runner::new(tiny_config(dir.path())).unwrap().quiet(true);
        r.all().unwrap();
        let m = r.finish().unwrap();
        let headers = [
            ("degree_histogram.csv", "degree,count"),
            ("placement.csv", "user_id,router_id,stub_domain,access_delay_ms"),
            ("graph_stats.csv", "metric,value"),
            ("spanning_tree.csv", "u,v,weight_km"),
            ("search_cdf.csv", "category,hops,cum_probability"),
            ("search_summary.csv", "category,p_within_3,median_hops,not_found"),
            ("query_results.csv", QUERY_CSV_HEADER),
            ("fig8.csv", crate::multicast::FIG8_CSV_HEADER),
            (
                "fig8_summary.csv",
                "protocol,group_size,mean_delay_ms,std_delay_ms,mean_stretch,mean_max_stress",
            ),
        ];
        for (name, header) in headers {
            let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
            assert_eq!(text.lines().next(), Some(header), "{name}");
            assert!(m.files.contains_key(name));
        }
        assert!(m.files.contains_key("social_graph.txt"));
        assert!(m.files.contains_key("underlay.txt"));
        assert!(m.files.contains_key("config.txt"));
        // three policies x one seed x two epochs
        let q = std::fs::read_to_string(dir.path().join("query_results.csv")).unwrap();
        assert_eq!(q.lines().count(), 1 + 6);
        assert!(q.contains("interest_weighted(3)+adaptive,"));
    }

    #[test]
    fn stage_alone_matches_full_run() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut full = Runner::new(tiny_config(a.path())).unwrap().quiet(true);
        full.all().unwrap();
        let mut alone = Runner::new(tiny_config(b.path())).unwrap().quiet(true);
        alone.multicast_exp().unwrap();
        let read = |d: &Path| std::fs::read(d.join("fig8.csv")).unwrap();
        assert_eq!(read(a.path()), read(b.path()));
    }

    #[test]
    fn triangle_clustering_is_one() {
        let g = SocialGraph::from_edge_list(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let s = graph_stats(&g, 10, 1).unwrap();
        assert_eq!(s.clustering, 1.0);
        assert_eq!(s.avg_path_length, Some(1.0));
        assert!(s.to_csv().contains("clustering,1.000000\n"));
    }
}
