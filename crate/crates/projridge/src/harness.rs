//! Study and rate-check orchestration plus report emission.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use projridge_core::simgen::{build_instance, generate_design, DesignSource, GeneratedInstance, StudyConfig};
use projridge_core::study::{
    assemble_rate_report, Method, RateCheckReport, RateContext, RateScenario, StudyContext, StudyReport, RateClaim,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::io::{fmt_num, load_design_csv, read_json, write_json, write_text};

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// `f(0), …, f(count−1)` on `workers` threads, returned in index order.
pub fn par_map<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    pool.install(|| (0..count).into_par_iter().map(&f).collect())
}

/// Builds the instance, reading file designs relative to `base_dir`.
pub fn load_instance(cfg: &StudyConfig, base_dir: Option<&Path>) -> Result<GeneratedInstance> {
    cfg.validate()?;
    let (x, clip) = match &cfg.design_source {
        DesignSource::File { path } => {
            let p = PathBuf::from(path);
            let p = match base_dir {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            };
            (load_design_csv(&p)?, None)
        }
        _ => generate_design(cfg)?,
    };
    Ok(build_instance(cfg, x, clip)?)
}

pub fn run_study(cfg: &StudyConfig, workers: usize, base_dir: Option<&Path>) -> Result<StudyReport> {
    let inst = load_instance(cfg, base_dir)?;
    let ctx = StudyContext::new(cfg.clone(), inst)?;
    let per_rep = par_map(cfg.replications, workers, |r| ctx.run_replication(r));
    Ok(StudyReport::assemble(&ctx, per_rep.into_iter().flatten().collect()))
}

pub fn rate_check(sc: &RateScenario, seed: u64, workers: usize) -> Result<RateCheckReport> {
    sc.validate()?;
    let mut h_values = Vec::new();
    let mut ridge = Vec::new();
    let mut samples = Vec::new();
    for &n in &sc.n_values {
        let ctx = RateContext::new(sc, n)?;
        h_values.push(ctx.h);
        ridge.push(ctx.ridge_expected()?);
        if sc.claim == RateClaim::T3 {
            let v: std::result::Result<Vec<f64>, _> =
                par_map(sc.replications, workers, |r| ctx.thresholded_error(seed, r as u64))
                    .into_iter()
                    .collect();
            samples.push(v?);
        }
    }
    let samples = (sc.claim == RateClaim::T3).then_some(samples);
    Ok(assemble_rate_report(sc, seed, h_values, ridge, samples)?)
}

/// Run manifest: enough to regenerate the report exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: StudyConfig,
    pub master_seed: u64,
    pub fold_seed: u64,
    pub design_note: Option<String>,
    pub files: Vec<String>,
}

pub const TABLE_TXT: &str = "table.txt";
pub const TABLE_CSV: &str = "table.csv";
pub const REPLICATIONS_CSV: &str = "replications.csv";
pub const CUMULATIVE_TSV: &str = "cumulative.tsv";
pub const REPORT_JSON: &str = "report.json";
pub const MANIFEST_JSON: &str = "manifest.json";

fn table_methods(report: &StudyReport) -> Vec<Method> {
    // Fixed column order, restricted to the methods that were run.
    Method::ALL
        .into_iter()
        .filter(|m| report.config.methods.contains(m))
        .collect()
}

pub fn table_text(report: &StudyReport) -> String {
    let c = &report.config;
    let methods = table_methods(report);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "study {} n={} p={} sigma={} replications={} master_seed={}",
        c.study.name(),
        c.n,
        c.p,
        c.sigma,
        c.replications,
        c.master_seed
    );
    if let Some(note) = &report.design_note {
        let _ = writeln!(s, "note: {note}");
    }
    let _ = write!(s, "{:<8}{:>6}{:>7}", "Study", "n", "p");
    for m in &methods {
        let _ = write!(s, "{:>14}", m.heading());
    }
    s.push('\n');
    let _ = write!(s, "{:<8}{:>6}{:>7}", c.study.name(), c.n, c.p);
    for &m in &methods {
        match report.mean(m) {
            Some(v) => {
                let _ = write!(s, "{v:>14.2}");
            }
            None => {
                let _ = write!(s, "{:>14}", "failed");
            }
        }
    }
    s.push('\n');
    s
}

pub fn table_csv(report: &StudyReport) -> String {
    let c = &report.config;
    let methods = table_methods(report);
    let mut s = String::from("study,n,p");
    for m in &methods {
        s.push(',');
        s.push_str(m.key());
    }
    s.push('\n');
    let _ = write!(s, "{},{},{}", c.study.name(), c.n, c.p);
    for &m in &methods {
        s.push(',');
        if let Some(v) = report.mean(m) {
            s.push_str(&fmt_num(v));
        }
    }
    s.push('\n');
    s
}

pub fn replications_csv(report: &StudyReport) -> String {
    let mut s = String::from("replication,method,l2_error,selected_count,failure\n");
    for r in &report.results {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.replication,
            r.method.key(),
            r.l2_error.map(fmt_num).unwrap_or_default(),
            r.selected_count.map(|c| c.to_string()).unwrap_or_default(),
            r.failure.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        );
    }
    s
}

pub fn cumulative_tsv(report: &StudyReport) -> String {
    let mut s = String::from("k\tproportion\n");
    for (k, v) in report.cumulative_proportion.iter().enumerate() {
        let _ = writeln!(s, "{}\t{}", k + 1, fmt_num(*v));
    }
    s
}

pub fn manifest_for(report: &StudyReport) -> Manifest {
    Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: report.config.clone(),
        master_seed: report.config.master_seed,
        fold_seed: report.config.master_seed,
        design_note: report.design_note.clone(),
        files: [TABLE_TXT, TABLE_CSV, REPLICATIONS_CSV, CUMULATIVE_TSV, REPORT_JSON]
            .map(String::from)
            .to_vec(),
    }
}

/// Writes the table, per-replication CSV, cumulative TSV, full JSON report
/// and manifest into `dir`; returns the written paths.
pub fn emit_report(report: &StudyReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let files = [
        (TABLE_TXT, table_text(report)),
        (TABLE_CSV, table_csv(report)),
        (REPLICATIONS_CSV, replications_csv(report)),
        (CUMULATIVE_TSV, cumulative_tsv(report)),
    ];
    let mut out = Vec::new();
    for (name, text) in files {
        let p = dir.join(name);
        write_text(&p, &text)?;
        out.push(p);
    }
    let p = dir.join(REPORT_JSON);
    write_json(&p, report)?;
    out.push(p);
    let p = dir.join(MANIFEST_JSON);
    write_json(&p, &manifest_for(report))?;
    out.push(p);
    Ok(out)
}

/// Reruns the study recorded in a manifest.
pub fn rerun_manifest(path: &Path, workers: usize) -> Result<StudyReport> {
    let m: Manifest = read_json(path)?;
    if m.master_seed != m.config.master_seed {
        return Err(HarnessError::Usage("manifest seed does not match its config".into()));
    }
    run_study(&m.config, workers, path.parent())
}

pub fn rate_report_text(r: &RateCheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario {} seed={}", r.scenario.name, r.seed);
    let _ = writeln!(s, "{:>6}{:>14}{:>16}{:>16}{:>12}", "n", "h_n", "ridge", "thresholded", "se");
    for (i, n) in r.n_values.iter().enumerate() {
        let thr = r.thresholded_errors.as_ref().map(|v| v[i]);
        let se = r.thresholded_std_errors.as_ref().map(|v| v[i]);
        let _ = writeln!(
            s,
            "{:>6}{:>14.6}{:>16.6e}{:>16}{:>12}",
            n,
            r.h_values[i],
            r.ridge_errors[i],
            thr.map_or("-".into(), |v| format!("{v:.6e}")),
            se.map_or("-".into(), |v| format!("{v:.2e}")),
        );
    }
    let _ = writeln!(s, "ridge slope {:.4} (se {:.4})", r.ridge_slope.slope, r.ridge_slope.std_error);
    if let Some(t) = r.thresholded_slope {
        let _ = writeln!(s, "thresholded slope {:.4} (se {:.4})", t.slope, t.std_error);
    }
    let _ = writeln!(
        s,
        "prediction: {} -> {}",
        r.prediction,
        if r.consistent { "consistent" } else { "not consistent" }
    );
    s
}
