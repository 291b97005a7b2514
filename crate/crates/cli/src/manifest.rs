//! Single-line JSON run manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use disamb_core::ingest::IngestSummary;
use serde::Serialize;

use crate::{write_text, CmdResult, Failure};

#[derive(Debug, Serialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: serde_json::Value,
    pub inputs: Vec<InputFile>,
    pub outputs: Vec<PathBuf>,
    pub counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ingest: Option<IngestSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub headline: Option<serde_json::Value>,
    pub wall_time_seconds: f64,
    /// High-water resident set size, where the platform reports it.
    pub peak_rss_bytes: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &'static str, config: serde_json::Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            counts: BTreeMap::new(),
            ingest: None,
            headline: None,
            wall_time_seconds: 0.0,
            peak_rss_bytes: None,
        }
    }

    /// Records input sizes; an unreadable input is an I/O failure.
    pub fn add_inputs(&mut self, paths: &[PathBuf]) -> CmdResult {
        for path in paths {
            let meta = std::fs::metadata(path)
                .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
            self.inputs.push(InputFile {
                path: path.clone(),
                bytes: meta.len(),
            });
        }
        Ok(())
    }

    pub fn set_ingest(&mut self, s: &IngestSummary) {
        self.counts.insert("lines_read".into(), s.pass_a.lines_read);
        self.counts.insert("parse_errors".into(), s.pass_a.parse_errors);
        self.counts.insert("works_eligible".into(), s.pass_a.works_eligible);
        self.counts.insert("works_biomedical".into(), s.pass_a.works_biomedical);
        self.counts.insert("authors_selected".into(), s.authors_selected);
        self.counts.insert("careers_emitted".into(), s.careers_emitted);
        self.counts.insert("rows_dropped_early_debut".into(), s.dropped_early_debut);
        self.ingest = Some(s.clone());
    }

    pub fn finish(mut self, started: Instant, path: &Path) -> CmdResult {
        self.wall_time_seconds = started.elapsed().as_secs_f64();
        self.peak_rss_bytes = peak_rss_bytes();
        let mut line = serde_json::to_string(&self).map_err(|e| Failure::config(e.to_string()))?;
        line.push('\n');
        write_text(path, &line)
    }
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib * 1024)
}
