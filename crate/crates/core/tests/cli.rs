use std::path::Path;
use std::process::Command;

use socnet_sim::harness::{RunManifest, MANIFEST_FILE};

#[rustfmt::skip]
const SMALL: &[&str] = &[
    "--set", "social.n=400",
    "--set", "social.max_degree_cap=120",
    "--set", "social.apl_samples=200",
    "--set", "underlay.transit_domains=2",
    "--set", "underlay.transit_nodes_per_domain=3",
    "--set", "underlay.stub_domains_per_transit_node=2",
    "--set", "underlay.stub_nodes_per_domain=5",
    "--set", "search.sample_users=100",
    "--set", "search.num_queries=300",
    "--set", "search.epochs=3",
    "--set", "multicast.sizes=1,2,8",
    "--set", "multicast.trials=3",
];

fn sim(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_socnet-sim"))
        .args(args)
        .output()
        .unwrap()
}

fn run_small(sub: &str, out: &Path, extra: &[&str]) -> std::process::Output {
    let mut args = vec![sub, "-q", "--out", out.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    sim(&args)
}

#[test]
fn exit_codes() {
    let out = sim(&["nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(sim(&["all", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(sim(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let bad = run_small("gen-social", dir.path(), &["--set", "multicast.nice_k=1"]);
    assert_eq!(bad.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert_eq!(stderr.trim().lines().count(), 1, "{stderr}");
    assert!(stderr.contains("nice_k"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[run]\nseed = 3\n[social]\nn = 250\n").unwrap();
    let out = dir.path().join("out");
    let o = sim(&[
        "gen-social",
        "-q",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let used = std::fs::read_to_string(out.join("config.txt")).unwrap();
    assert!(used.contains("seed = 9\n"));
    assert!(used.contains("n = 250\n"));
    let graph = std::fs::read_to_string(out.join("social_graph.txt")).unwrap();
    assert!(graph.starts_with("socialgraph v1 250 "));
}

#[test]
fn singleton_groups_have_zero_delay() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_small("multicast-exp", dir.path(), &["--set", "multicast.sizes=1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("fig8.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3 * 3);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f[1], "1");
        assert_eq!(f[3], "0.000000", "{r}");
        assert_eq!(f[4], "0.000000", "{r}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_small("all", a.path(), &["--seed", "42"]).status.success());
    assert!(run_small("all", b.path(), &["--seed", "42", "--jobs", "2"])
        .status
        .success());
    let ma = RunManifest::load(a.path()).unwrap();
    let mb = RunManifest::load(b.path()).unwrap();
    assert_eq!(ma.checksum_text(), mb.checksum_text());
    for name in ma.files.keys() {
        let read = |d: &Path| std::fs::read(d.join(name)).unwrap();
        assert_eq!(read(a.path()), read(b.path()), "{name}");
    }
    let listed: usize = std::fs::read_dir(a.path()).unwrap().count();
    assert_eq!(
        listed,
        ma.files.len() + 1,
        "every output except {MANIFEST_FILE} is checksummed"
    );

    let c = tempfile::tempdir().unwrap();
    assert!(run_small("all", c.path(), &["--seed", "43"]).status.success());
    assert_ne!(RunManifest::load(c.path()).unwrap().files, ma.files);
}
