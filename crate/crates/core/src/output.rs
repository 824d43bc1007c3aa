//! CSV writers for run summaries, per-flow counters, geometry and traces.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::engine::{RunResult, TraceRow};
use crate::error::{Error, Result};
use crate::metrics;
use crate::topology::CellSite;

/// Bumped whenever the summary column set changes.
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

pub const SUMMARY_COLUMNS: [&str; 15] = [
    "scenario",
    "algorithm",
    "users",
    "seed",
    "throughput_bps_total",
    "throughput_bps_video",
    "plr_video",
    "delay_ms_video_mean",
    "fairness_eq11_video",
    "jain_video",
    "handovers",
    "dropped_bits",
    "transmitted_bits",
    "arrived_bits",
    "wall_time_s",
];

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub algorithm: String,
    pub users: usize,
    pub seed: u64,
    pub throughput_bps_total: f64,
    pub throughput_bps_video: f64,
    pub plr_video: f64,
    pub delay_ms_video_mean: f64,
    pub fairness_eq11_video: f64,
    pub jain_video: f64,
    pub handovers: u64,
    pub dropped_bits: u64,
    pub transmitted_bits: u64,
    pub arrived_bits: u64,
    pub wall_time_s: f64,
}

impl SummaryRow {
    pub fn from_result(r: &RunResult, record_wall_time: bool) -> Self {
        let s = &r.summary;
        Self {
            scenario: r.scenario.as_str().to_string(),
            algorithm: r.algorithm.as_str().to_string(),
            users: r.users,
            seed: r.seed,
            throughput_bps_total: s.throughput_bps_total,
            throughput_bps_video: s.throughput_bps_video,
            plr_video: s.plr_video,
            delay_ms_video_mean: s.delay_ms_video_mean,
            fairness_eq11_video: s.fairness_eq11_video,
            jain_video: s.jain_video,
            handovers: s.handovers,
            dropped_bits: s.dropped_bits,
            transmitted_bits: s.transmitted_bits,
            arrived_bits: s.arrived_bits,
            wall_time_s: if record_wall_time { r.wall_time_s } else { 0.0 },
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_rows<W: Write, S: Serialize>(w: W, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    for row in rows {
        csv.serialize(row)?;
    }
    csv.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    if rows.is_empty() {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(SUMMARY_COLUMNS)?;
        csv.flush().map_err(|e| Error::io("<csv>", e))?;
        return Ok(());
    }
    write_rows(w, rows)
}

pub fn write_summary_file(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_summary(create(path)?, rows)
}

#[derive(Serialize)]
struct GeometryRow<'a> {
    cell_id: usize,
    kind: &'a str,
    x: f64,
    y: f64,
    power: f64,
}

pub fn write_geometry_file(path: &Path, cells: &[CellSite]) -> Result<()> {
    write_rows(
        create(path)?,
        cells.iter().map(|c| GeometryRow {
            cell_id: c.cell_id,
            kind: c.kind.as_str(),
            x: c.position.x,
            y: c.position.y,
            power: c.tx_power_dbm,
        }),
    )
}

#[derive(Serialize)]
struct FlowRow<'a> {
    flow_id: usize,
    ue_id: usize,
    kind: &'a str,
    arrived_bits: u64,
    transmitted_bits: u64,
    discarded_bits: u64,
    delivered_packets: usize,
    delay_ms_mean: f64,
}

pub fn write_flows_file(path: &Path, result: &RunResult) -> Result<()> {
    write_rows(
        create(path)?,
        result.metrics.flows.iter().map(|f| {
            let mut single = metrics::MetricsAccumulator::new(result.metrics.window_s);
            single.add_flow(0, f.ue_id, f.kind);
            single.flows[0].delays_us.clone_from(&f.delays_us);
            FlowRow {
                flow_id: f.flow_id,
                ue_id: f.ue_id,
                kind: f.kind.as_str(),
                arrived_bits: f.arrived_bits,
                transmitted_bits: f.transmitted_bits,
                discarded_bits: f.discarded_bits,
                delivered_packets: f.delays_us.len(),
                delay_ms_mean: metrics::delay_stats::<f64>(&single, None).mean_s * 1e3,
            }
        }),
    )
}

pub fn write_trace_file(path: &Path, rows: &[TraceRow]) -> Result<()> {
    write_rows(create(path)?, rows)
}

/// Writes `summary.csv`, `flows.csv`, `geometry.csv` and, when traced, `trace.csv`.
pub fn write_run_outputs(dir: &Path, result: &RunResult, record_wall_time: bool) -> Result<()> {
    write_summary_file(&dir.join("summary.csv"), &[SummaryRow::from_result(result, record_wall_time)])?;
    write_flows_file(&dir.join("flows.csv"), result)?;
    write_geometry_file(&dir.join("geometry.csv"), &result.cells)?;
    if !result.trace.is_empty() {
        write_trace_file(&dir.join("trace.csv"), &result.trace)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_schema() {
        let row = SummaryRow {
            scenario: "macro".into(),
            algorithm: "pf".into(),
            users: 1,
            seed: 2,
            throughput_bps_total: 0.0,
            throughput_bps_video: 0.0,
            plr_video: 0.0,
            delay_ms_video_mean: 0.0,
            fairness_eq11_video: 1.0,
            jain_video: 1.0,
            handovers: 0,
            dropped_bits: 0,
            transmitted_bits: 0,
            arrived_bits: 0,
            wall_time_s: 0.0,
        };
        let mut buf = Vec::new();
        write_summary(&mut buf, &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), SUMMARY_COLUMNS.join(","));

        let mut buf = Vec::new();
        write_summary(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), SUMMARY_COLUMNS.join(","));
    }
}
