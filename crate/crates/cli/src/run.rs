// SPDX-License-Identifier: Apache-2.0

//! The `run` command: bounds table, suite execution and report files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use lightcone::bounds::{bounds_table, format_sig, BoundsRow};
use lightcone::verify::{model_digest, CheckOutcome, LeakageRow};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::Experiment;

const SIG: usize = 12;

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Fail => 2,
            Status::Error => 1,
        }
    }
}

pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
}

#[derive(Serialize)]
struct SummaryEntry {
    index: usize,
    check: &'static str,
    report: Option<String>,
    leakage: Option<String>,
    verdict: &'static str,
    samples: usize,
    failures: usize,
    vacuous: usize,
    min_margin: Option<f64>,
    worst_failure: Option<String>,
    error: Option<String>,
}

fn write_bounds(path: &Path, rows: &[BoundsRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(["nu", "c_prime", "mu", "eps", "c_mu", "c"])?;
    for r in rows {
        w.write_record([r.nu, r.c_prime, r.mu, r.eps, r.c_mu, r.c].map(|x| format_sig(x, SIG)))?;
    }
    w.flush()?;
    Ok(())
}

fn write_leakage(path: &Path, rows: &[LeakageRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(["t", "d_XY", "measured", "bound", "margin", "vacuous"])?;
    for r in rows {
        w.write_record([
            format_sig(r.t, SIG),
            r.d_xy.to_string(),
            format_sig(r.measured, SIG),
            format_sig(r.bound, SIG),
            format_sig(r.margin, SIG),
            r.vacuous.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_outcome(dir: &Path, stem: &str, cone: bool, outcome: &CheckOutcome) -> Result<(String, Option<String>)> {
    let report = format!("{stem}.json");
    fs::write(dir.join(&report), outcome.report.to_json_pretty() + "\n")?;
    let leakage = if cone {
        let name = format!("{stem}_leakage.csv");
        write_leakage(&dir.join(&name), &outcome.leakage)?;
        Some(name)
    } else {
        None
    };
    Ok((report, leakage))
}

/// Executes the experiment and writes every output file; `summary.json` is
/// written last. An empty suite writes the bounds table only.
pub fn run(exp: &Experiment, opts: &RunOptions) -> Result<Status> {
    let seed = opts.seed.unwrap_or(exp.config.seed);
    let out = match (&opts.out, &exp.config.output_dir) {
        (Some(dir), _) => dir.clone(),
        (None, Some(dir)) => exp.base_dir.join(dir),
        (None, None) => PathBuf::from("out"),
    };
    fs::create_dir_all(&out).with_context(|| format!("cannot create output directory {}", out.display()))?;

    let rows = bounds_table(&exp.model, &exp.nu_rows, exp.config.eps).context("bounds table")?;
    write_bounds(&out.join("bounds.csv"), &rows)?;
    if exp.config.suite.is_empty() {
        return Ok(Status::Pass);
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().context("thread pool")?;
    let entries: Vec<SummaryEntry> = pool.install(|| {
        exp.config
            .suite
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let index = i + 1;
                let stem = format!("{index:02}_{}", spec.name());
                let mut entry = SummaryEntry {
                    index,
                    check: spec.name(),
                    report: None,
                    leakage: None,
                    verdict: "error",
                    samples: 0,
                    failures: 0,
                    vacuous: 0,
                    min_margin: None,
                    worst_failure: None,
                    error: None,
                };
                let result = spec
                    .run(&exp.model, seed)
                    .map_err(anyhow::Error::from)
                    .and_then(|o| write_outcome(&out, &stem, spec.is_cone(), &o).map(|files| (o, files)));
                match result {
                    Ok((o, (report, leakage))) => {
                        let r = &o.report;
                        entry.report = Some(report);
                        entry.leakage = leakage;
                        entry.verdict = if r.passed() { "pass" } else { "fail" };
                        entry.samples = r.samples.len();
                        entry.failures = r.failures().count();
                        entry.vacuous = r.samples.iter().filter(|s| s.vacuous).count();
                        entry.min_margin = r.min_margin();
                        entry.worst_failure = r.worst_failure().map(|s| s.digest.clone());
                    }
                    Err(e) => entry.error = Some(format!("{e:#}")),
                }
                entry
            })
            .collect()
    });

    let status = if entries.iter().any(|e| e.error.is_some()) {
        Status::Error
    } else if entries.iter().any(|e| e.verdict == "fail") {
        Status::Fail
    } else {
        Status::Pass
    };
    for e in &entries {
        match (&e.error, e.verdict) {
            (Some(err), _) => eprintln!("{:02} {}: error: {err}", e.index, e.check),
            (None, v) => eprintln!("{:02} {}: {v} ({} samples, {} failing)", e.index, e.check, e.samples, e.failures),
        }
    }
    let verdict = match status {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Error => "error",
    };
    let summary = json!({
        "model": model_digest(&exp.model),
        "seed": seed,
        "eps": exp.config.eps,
        "bounds": "bounds.csv",
        "checks": entries,
        "verdict": verdict,
    });
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(status)
}
