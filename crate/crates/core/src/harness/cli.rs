//! The `socnet-sim` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Result, SimError};

use super::config::ExperimentConfig;
use super::pipeline::Runner;

#[derive(Debug, Parser)]
#[command(name = "socnet-sim", version, about = "Social-graph overlay simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Sectioned key=value config file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (overrides `run.seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (overrides `run.output_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true, env = "SOCNET_SIM_JOBS", value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,

    /// Config override `section.key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,

    /// Suppress per-stage timing lines.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the social graph and its degree histogram.
    GenSocial,
    /// Generate the transit-stub underlay.
    GenUnderlay,
    /// Place users on stub routers.
    Embed,
    /// Degree histogram, clustering, path length and spanning tree.
    Analyze {
        /// Analyze a stored graph file instead of generating one.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Hop distance to the nearest user sharing an interest.
    SearchExp,
    /// Query routing simulation for every configured policy.
    QuerySim,
    /// Delivery delay of social, ESM and NICE trees.
    MulticastExp,
    /// Every stage.
    All,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code: 0 on success, 2 on usage errors, 1 on
/// config or runtime errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply_overrides(cli.overrides.iter().map(String::as_str))?;
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        builder = builder.num_threads(j as usize);
    }
    let pool = builder
        .build()
        .map_err(|e| SimError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        let mut r = Runner::new(cfg)?.quiet(cli.quiet);
        match &cli.command {
            Command::GenSocial => r.gen_social()?,
            Command::GenUnderlay => r.gen_underlay()?,
            Command::Embed => r.embed()?,
            Command::Analyze { graph } => {
                r.analyze(graph.as_deref())?;
            }
            Command::SearchExp => r.search_exp()?,
            Command::QuerySim => r.query_sim()?,
            Command::MulticastExp => r.multicast_exp()?,
            Command::All => r.all()?,
        }
        let out = r.output_dir().to_path_buf();
        r.finish()?;
        if !cli.quiet {
            println!("wrote {}", out.display());
        }
        Ok(())
    })
}
