//! Replicated experiment grid: scenarios x algorithms x user counts x seeds.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::config::SweepSpec;
use crate::engine::run_simulation;
use crate::error::{Error, Result};
use crate::output::{write_summary_file, SummaryRow, SUMMARY_SCHEMA_VERSION};
use crate::scheduler::Algorithm;
use crate::topology::ScenarioKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepPoint {
    pub scenario: ScenarioKind,
    pub algorithm: Algorithm,
    pub users: usize,
    pub run_index: usize,
    pub seed: u64,
}

/// Grid points in spec order; run `k` of every point uses `root_seed + k`.
pub fn sweep_points(spec: &SweepSpec) -> Vec<SweepPoint> {
    let s = &spec.sweep;
    let mut points = Vec::new();
    for &scenario in &s.scenarios {
        for &algorithm in &s.algorithms {
            for &users in &s.user_counts {
                for run_index in 0..s.runs_per_point {
                    points.push(SweepPoint {
                        scenario,
                        algorithm,
                        users,
                        run_index,
                        seed: s.root_seed.wrapping_add(run_index as u64),
                    });
                }
            }
        }
    }
    points
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedRun {
    pub scenario: String,
    pub algorithm: String,
    pub users: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    pub rows: Vec<SummaryRow>,
    pub failures: Vec<FailedRun>,
}

/// Runs every point and returns rows in grid order regardless of completion order.
pub fn execute_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let points = sweep_points(spec);
    let record_wall_time = spec.sweep.record_wall_time;
    let run_one = |p: &SweepPoint| {
        let mut cfg = spec.base.clone();
        cfg.scenario = p.scenario;
        cfg.scheduler = p.algorithm;
        cfg.users = p.users;
        cfg.seed = p.seed;
        run_simulation(cfg)
            .map(|r| SummaryRow::from_result(&r, record_wall_time))
            .map_err(|e| FailedRun {
                scenario: p.scenario.as_str().into(),
                algorithm: p.algorithm.as_str().into(),
                users: p.users,
                seed: p.seed,
                error: e.to_string(),
            })
    };
    let results: Vec<_> = if spec.sweep.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.sweep.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| points.par_iter().map(run_one).collect())
    } else {
        points.iter().map(run_one).collect()
    };
    let mut outcome = SweepOutcome::default();
    for r in results {
        match r {
            Ok(row) => outcome.rows.push(row),
            Err(f) => outcome.failures.push(f),
        }
    }
    Ok(outcome)
}

#[derive(Serialize)]
struct Manifest<'a> {
    summary_schema_version: u32,
    runs: usize,
    failures: usize,
    sweep: &'a crate::config::SweepParams,
    base: &'a crate::config::RunConfig,
}

/// Runs the sweep and writes `summary.csv`, `failures.csv` (if any) and
/// `manifest.json` under `out_dir`.
pub fn run_sweep(spec: &SweepSpec, out_dir: &Path) -> Result<SweepOutcome> {
    let outcome = execute_sweep(spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_summary_file(&out_dir.join("summary.csv"), &outcome.rows)?;
    let failures_path: PathBuf = out_dir.join("failures.csv");
    if !outcome.failures.is_empty() {
        let mut w = csv::Writer::from_path(&failures_path)?;
        for f in &outcome.failures {
            w.serialize(f)?;
        }
        w.flush().map_err(|e| Error::io(&failures_path, e))?;
    } else if failures_path.exists() {
        std::fs::remove_file(&failures_path).map_err(|e| Error::io(&failures_path, e))?;
    }
    let manifest = Manifest {
        summary_schema_version: SUMMARY_SCHEMA_VERSION,
        runs: outcome.rows.len(),
        failures: outcome.failures.len(),
        sweep: &spec.sweep,
        base: &spec.base,
    };
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_size() {
        let spec = SweepSpec::default();
        let pts = sweep_points(&spec);
        assert_eq!(pts.len(), 8 * 3 * 5 * 2);
        assert_eq!(pts[0].seed, 1);
        assert_eq!(pts[4].seed, 5);
        assert_eq!(pts[5].seed, 1);
        assert_eq!(pts[5].users, 20);
    }
}
