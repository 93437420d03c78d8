//! `run_manifest.txt`: what a run produced and how long it took.
//!
//! ```text
//! run_manifest v1
//! tool_version 0.1.0
//! config_sha256 <hex>
//! [files]
//! <sha256> <file name>
//! [durations_ms]
//! <stage> <milliseconds>
//! ```
//!
//! Only the `[durations_ms]` section differs between two runs of the same
//! config; [`RunManifest::checksum_text`] renders everything else.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use crate::error::{Result, SimError};

pub const MANIFEST_FILE: &str = "run_manifest.txt";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    /// File name to hex SHA-256.
    pub files: BTreeMap<String, String>,
    /// Stage durations in execution order.
    pub durations: Vec<(String, Duration)>,
}

impl RunManifest {
    pub fn new(config_hash: String) -> Self {
        RunManifest {
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            ..Default::default()
        }
    }

    /// Header and file checksums, without durations.
    pub fn checksum_text(&self) -> String {
        let mut o = String::from("run_manifest v1\n");
        writeln!(o, "tool_version {}", self.tool_version).unwrap();
        writeln!(o, "config_sha256 {}", self.config_hash).unwrap();
        o.push_str("[files]\n");
        for (name, sum) in &self.files {
            writeln!(o, "{sum} {name}").unwrap();
        }
        o
    }

    pub fn to_text(&self) -> String {
        let mut o = self.checksum_text();
        o.push_str("[durations_ms]\n");
        for (stage, d) in &self.durations {
            writeln!(o, "{stage} {}", d.as_millis()).unwrap();
        }
        o
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "run_manifest v1")) => {}
            _ => return Err(SimError::parse(1, "expected `run_manifest v1`")),
        }
        let mut m = RunManifest::default();
        let mut section = "";
        for (i, line) in lines {
            let bad = |msg: &str| SimError::parse(i + 1, msg.to_string());
            if line == "[files]" || line == "[durations_ms]" {
                section = line;
                continue;
            }
            let (a, b) = line.split_once(' ').ok_or_else(|| bad("expected two fields"))?;
            match section {
                "" if a == "tool_version" => m.tool_version = b.to_string(),
                "" if a == "config_sha256" => m.config_hash = b.to_string(),
                "[files]" => {
                    m.files.insert(b.to_string(), a.to_string());
                }
                "[durations_ms]" => {
                    let ms: u64 = b.parse().map_err(|_| bad("bad duration"))?;
                    m.durations.push((a.to_string(), Duration::from_millis(ms)));
                }
                _ => return Err(bad("unexpected line")),
            }
        }
        Ok(m)
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| SimError::io(&path, e))?;
        Self::parse(&text)
    }

    /// Writes `dir/run_manifest.txt` via a temporary file and a rename, so a
    /// reader never sees a partial manifest.
    pub fn write_atomic(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&tmp, self.to_text()).map_err(|e| SimError::io(&tmp, e))?;
        std::fs::rename(&tmp, &path).map_err(|e| SimError::io(&path, e))?;
        Ok(path)
    }
}
