//! Batch SAT benchmarking: per-instance rows, CSV in and out, and per-band
//! aggregates.

use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context};
use rayon::prelude::*;
use rcm_core::sat::{brute_force, measure, parse_dimacs, sample_band, Band, SatInstance};
use serde::{Deserialize, Serialize};

/// One benchmarked instance. Every column except `wall_us` is a function
/// of the instance alone.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub id: String,
    pub band: String,
    pub vars: usize,
    pub clauses: usize,
    pub verdict: String,
    pub oracle: String,
    pub trajectory: u64,
    pub max_context: usize,
    pub max_depth: usize,
    pub steps: u64,
    pub wall_us: u64,
}

impl BenchRow {
    pub fn agrees(&self) -> bool {
        self.verdict == self.oracle
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct BandSummary {
    pub band: String,
    pub instances: usize,
    pub agree: usize,
    pub mean_trajectory: f64,
    pub mean_max_context: f64,
    /// Mean trajectory over mean context.
    pub ratio: f64,
}

fn verdict_name(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "sat",
        Some(false) => "unsat",
        None => "bottom",
    }
}

/// A named instance queued for benchmarking.
#[derive(Clone, Debug)]
pub struct Job {
    pub id: String,
    pub band: String,
    pub instance: SatInstance,
}

pub fn random_jobs(bands: &[Band], per_band: usize, vars: std::ops::RangeInclusive<usize>, seed: u64) -> Vec<Job> {
    bands
        .iter()
        .flat_map(|&band| {
            sample_band(band, per_band, vars.clone(), seed)
                .into_iter()
                .enumerate()
                .map(move |(i, instance)| Job {
                    id: format!("{}-{i:03}", band.name()),
                    band: band.name().to_string(),
                    instance,
                })
        })
        .collect()
}

/// Every `*.cnf` file in `dir`, sorted by name. The band comes from the
/// clause count, `other` when outside every band.
pub fn dir_jobs(dir: &Path) -> anyhow::Result<Vec<Job>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "cnf"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no .cnf files in {}", dir.display());
    }
    paths
        .iter()
        .map(|p| {
            let src = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let f = parse_dimacs(&src).with_context(|| format!("parsing {}", p.display()))?;
            let band = Band::of(f.clauses.len()).map_or("other", Band::name).to_string();
            Ok(Job {
                id: p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                band,
                instance: SatInstance::from_formula(f),
            })
        })
        .collect()
}

pub fn bench_one(job: &Job) -> BenchRow {
    let t = Instant::now();
    let m = measure(&job.instance);
    let wall_us = t.elapsed().as_micros() as u64;
    let f = &job.instance.formula;
    BenchRow {
        id: job.id.clone(),
        band: job.band.clone(),
        vars: f.num_vars,
        clauses: f.clauses.len(),
        verdict: verdict_name(m.satisfiable).into(),
        oracle: verdict_name(Some(brute_force(f).is_some())).into(),
        trajectory: m.trajectory,
        max_context: m.max_context,
        max_depth: m.max_depth,
        steps: m.steps,
        wall_us,
    }
}

/// Runs `jobs` on a pool of `workers` threads. Row order follows `jobs`.
pub fn run_bench(jobs: &[Job], workers: usize) -> anyhow::Result<Vec<BenchRow>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    Ok(pool.install(|| jobs.par_iter().map(bench_one).collect()))
}

pub fn write_rows<W: Write>(w: W, rows: &[BenchRow]) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> anyhow::Result<Vec<BenchRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

/// Per-band aggregates in order of first appearance.
pub fn summarize(rows: &[BenchRow]) -> Vec<BandSummary> {
    let mut bands: Vec<&str> = Vec::new();
    for r in rows {
        if !bands.contains(&r.band.as_str()) {
            bands.push(&r.band);
        }
    }
    bands
        .into_iter()
        .map(|band| {
            let rs: Vec<_> = rows.iter().filter(|r| r.band == band).collect();
            let n = rs.len() as f64;
            let mean_trajectory = rs.iter().map(|r| r.trajectory as f64).sum::<f64>() / n;
            let mean_max_context = rs.iter().map(|r| r.max_context as f64).sum::<f64>() / n;
            BandSummary {
                band: band.to_string(),
                instances: rs.len(),
                agree: rs.iter().filter(|r| r.agrees()).count(),
                mean_trajectory,
                mean_max_context,
                ratio: if mean_max_context > 0.0 { mean_trajectory / mean_max_context } else { 0.0 },
            }
        })
        .collect()
}

/// Row CSV and summary CSV.
pub fn report(rows: &[BenchRow]) -> anyhow::Result<(String, String)> {
    if rows.is_empty() {
        bail!("no rows to report");
    }
    let mut csv_rows = Vec::new();
    write_rows(&mut csv_rows, rows)?;
    let mut out = csv::Writer::from_writer(Vec::new());
    for s in summarize(rows) {
        out.serialize(s)?;
    }
    let summary = out.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    Ok((String::from_utf8(csv_rows)?, String::from_utf8(summary)?))
}
