//! Runs every instance in a directory and compares the decider with the
//! annotations and the oracle.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use bireach_core::net::SplitMode;
use bireach_core::oracle::{bfs_bireach, OracleBudget, OracleVerdict};
use bireach_core::reduce::{decide, Answer, DecideConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::input;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Agree,
    Unknown,
    Disagree,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    pub file: String,
    pub expected: Option<String>,
    pub decide: Option<String>,
    pub oracle: Option<String>,
    pub status: Status,
    pub message: Option<String>,
    #[serde(skip)]
    pub millis: u128,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub entries: Vec<Entry>,
    pub agree: usize,
    pub unknown: usize,
    pub disagree: usize,
    pub errors: usize,
}

impl Summary {
    pub fn failed(&self) -> bool {
        self.disagree + self.errors > 0
    }
}

struct Annotations {
    expect: Option<String>,
    oracle: bool,
}

fn annotations(text: &str) -> Annotations {
    let mut a = Annotations { expect: None, oracle: false };
    for line in text.lines() {
        let Some(rest) = line.trim().strip_prefix('#') else { continue };
        let rest = rest.trim();
        if let Some(v) = rest.strip_prefix("expect:") {
            a.expect = Some(v.trim().to_string());
        } else if let Some(v) = rest.strip_prefix("oracle:") {
            a.oracle = v.trim() == "yes";
        }
    }
    a
}

fn tag(a: &Answer) -> &'static str {
    match a {
        Answer::Bireachable => "BIREACHABLE",
        Answer::NotBireachable(_) => "NOT_BIREACHABLE",
        Answer::Unknown(_) => "UNKNOWN",
    }
}

fn oracle_tag(v: OracleVerdict) -> &'static str {
    match v {
        OracleVerdict::Bireachable => "BIREACHABLE",
        OracleVerdict::NotBireachable => "NOT_BIREACHABLE",
        OracleVerdict::Unknown => "UNKNOWN",
    }
}

fn run_one(path: &Path, config: &DecideConfig, budget: &OracleBudget, split: SplitMode) -> Entry {
    let start = Instant::now();
    let file = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let mut entry =
        Entry { file, expected: None, decide: None, oracle: None, status: Status::Error, message: None, millis: 0 };
    let result = (|| -> Result<()> {
        let loaded = input::load(path, split)?;
        let notes = annotations(&loaded.text);
        entry.expected = notes.expect.clone();
        let (src, tgt) = input::endpoints(&loaded.instance, None, None)?;
        let verdict = decide(&loaded.instance.net, &src, &tgt, config)?;
        let got = tag(&verdict.answer);
        entry.decide = Some(got.to_string());
        if let Answer::NotBireachable(r) | Answer::Unknown(r) = &verdict.answer {
            entry.message = Some(r.clone());
        }
        let oracle = notes.oracle.then(|| oracle_tag(bfs_bireach(&loaded.instance.net, &src, &tgt, budget)));
        entry.oracle = oracle.map(str::to_string);
        let definite = |s: &str| s != "UNKNOWN";
        let mut known: Vec<&str> = [notes.expect.as_deref(), Some(got), oracle].into_iter().flatten().collect();
        known.retain(|s| definite(s));
        entry.status = if known.windows(2).any(|w| w[0] != w[1]) {
            Status::Disagree
        } else if got == "UNKNOWN" {
            Status::Unknown
        } else {
            Status::Agree
        };
        Ok(())
    })();
    if let Err(e) = result {
        entry.status = Status::Error;
        entry.message = Some(format!("{e:#}"));
    }
    entry.millis = start.elapsed().as_millis();
    entry
}

pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("petri" | "dvass")));
    files.sort();
    Ok(files)
}

pub fn run_corpus(dir: &Path, config: &DecideConfig, budget: &OracleBudget, split: SplitMode) -> Result<Summary> {
    let files = corpus_files(dir)?;
    let entries: Vec<Entry> = files.par_iter().map(|p| run_one(p, config, budget, split)).collect();
    let count = |s: Status| entries.iter().filter(|e| e.status == s).count();
    Ok(Summary {
        agree: count(Status::Agree),
        unknown: count(Status::Unknown),
        disagree: count(Status::Disagree),
        errors: count(Status::Error),
        entries,
    })
}

pub fn print_table(s: &Summary) {
    println!("{:<28} {:<16} {:<16} {:<16} {:<9} {:>8}", "file", "expected", "decide", "oracle", "status", "ms");
    for e in &s.entries {
        let status = format!("{:?}", e.status).to_lowercase();
        println!(
            "{:<28} {:<16} {:<16} {:<16} {:<9} {:>8}",
            e.file,
            e.expected.as_deref().unwrap_or("-"),
            e.decide.as_deref().unwrap_or("-"),
            e.oracle.as_deref().unwrap_or("-"),
            status,
            e.millis
        );
        if matches!(e.status, Status::Disagree | Status::Error) {
            if let Some(m) = &e.message {
                println!("    {m}");
            }
        }
    }
    println!("{} agree, {} unknown, {} disagree, {} errors", s.agree, s.unknown, s.disagree, s.errors);
}
