//! Output directory helpers, the per-sequence error log and batch loading.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use expression_response::batch::map_jobs;
use expression_response::seqdata::load_manifest;
use expression_response::seqdata::Sequence;

pub const ERRORS_FILE: &str = "errors.csv";

#[derive(Debug, Default)]
pub struct ErrorLog {
    rows: Vec<[String; 3]>,
}

impl ErrorLog {
    pub fn push(&mut self, sequence_id: &str, stage: &str, err: impl Display) {
        self.rows
            .push([sequence_id.to_string(), stage.to_string(), err.to_string()]);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Writes `errors.csv` (header only when empty), sorted so row order does
    /// not depend on scheduling.
    pub fn write(&mut self, dir: &Path) -> Result<()> {
        self.rows.sort();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sequence_id", "stage", "message"])?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        write_text(&dir.join(ERRORS_FILE), &String::from_utf8(w.into_inner()?)?)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn ensure_dir(path: &Path) -> Result<PathBuf> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(path.to_path_buf())
}

/// File name for a sequence or group id.
pub fn stem(id: &str) -> String {
    let s: String = id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with('.') {
        format!("_{s}")
    } else {
        s
    }
}

/// Writes one CSV row with quoting where needed.
pub fn csv_row<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields).expect("in-memory csv");
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8 fields")
}

/// Loads every manifest entry, sorted by id. Duplicate ids and unreadable
/// files go to the log. A missing or malformed manifest is fatal.
pub fn load_batch(manifest: &Path, jobs: usize, log: &mut ErrorLog) -> Result<Vec<Sequence>> {
    let entries = load_manifest(manifest)
        .with_context(|| format!("loading manifest {}", manifest.display()))?;
    let mut by_id: BTreeMap<&str, Vec<_>> = BTreeMap::new();
    for e in &entries {
        by_id.entry(e.sequence_id.as_str()).or_default().push(e);
    }
    let mut unique = Vec::new();
    for (id, group) in by_id {
        if group.len() > 1 {
            log.push(id, "manifest", format!("sequence id listed {} times", group.len()));
        } else {
            unique.push(group[0].clone());
        }
    }
    let mut out = Vec::with_capacity(unique.len());
    for (e, r) in unique.iter().zip(map_jobs(&unique, jobs, |e| e.load())) {
        match r {
            Ok(s) => out.push(s),
            Err(err) => log.push(&e.sequence_id, "load", err),
        }
    }
    Ok(out)
}
