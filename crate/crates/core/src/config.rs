//! Run and sweep configuration.
//!
//! A config file is a single JSON object. Every key is optional; omitted
//! keys take the defaults below. Unknown keys are rejected. The optional
//! `sweep` object holds the experiment grid.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::FairnessDenominator;
use crate::scheduler::{Algorithm, LogBase};
use crate::topology::{LayoutParams, Placement, Point, ScenarioKind};
use crate::traffic::{FlowKind, QosParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationParams {
    pub duration_s: f64,
    pub flow_duration_s: f64,
    /// Window T of the throughput formula; defaults to the flow duration.
    pub metrics_window_s: Option<f64>,
    /// Keep a per-TTI, per-cell trace in the result.
    pub trace: bool,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            duration_s: 30.0,
            flow_duration_s: 20.0,
            metrics_window_s: None,
            trace: false,
        }
    }
}

impl SimulationParams {
    pub fn window_s(&self) -> f64 {
        self.metrics_window_s.unwrap_or(self.flow_duration_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioParams {
    pub bandwidth_mhz: f64,
    pub rb_count: usize,
    pub subcarrier_spacing_khz: f64,
    pub carrier_frequency_hz: f64,
    pub noise_density_dbm_per_hz: f64,
    pub noise_figure_db: f64,
    pub penetration_loss_db: f64,
    pub shadowing: bool,
    pub shadowing_std_db: f64,
    /// Distance a UE travels before its shadowing draws are renewed.
    pub shadowing_decorrelation_m: f64,
    pub fading: bool,
    pub fading_oscillators: usize,
    /// Spread each cell's transmit power evenly over its RB-pairs when
    /// computing per-RB SINR. Cell selection always uses total power.
    pub split_power_over_rbs: bool,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            bandwidth_mhz: 10.0,
            rb_count: 50,
            subcarrier_spacing_khz: 15.0,
            carrier_frequency_hz: 2.0e9,
            noise_density_dbm_per_hz: -174.0,
            noise_figure_db: 9.0,
            penetration_loss_db: 10.0,
            shadowing: true,
            shadowing_std_db: 10.0,
            shadowing_decorrelation_m: 50.0,
            fading: true,
            fading_oscillators: 8,
            split_power_over_rbs: true,
        }
    }
}

/// Number of RBs LTE carries in each channel bandwidth.
pub fn rbs_for_bandwidth(bandwidth_mhz: f64) -> Option<usize> {
    const TABLE: [(f64, usize); 6] =
        [(1.4, 6), (3.0, 15), (5.0, 25), (10.0, 50), (15.0, 75), (20.0, 100)];
    TABLE
        .iter()
        .find(|(bw, _)| (bw - bandwidth_mhz).abs() < 1e-9)
        .map(|&(_, n)| n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyParams {
    pub macro_radius_m: f64,
    pub macro_power_dbm: f64,
    pub pico_radius_m: f64,
    pub pico_power_dbm: f64,
    pub n_picos: usize,
    /// Pico centre distance from the macro site as a fraction of the macro radius.
    pub pico_distance_factor: f64,
    pub placement: Placement,
    pub speed_kmh: f64,
    pub mobility: bool,
    pub handover: bool,
    pub handover_hysteresis_db: f64,
    /// Fixed UE positions in metres; overrides random placement.
    pub ue_positions: Option<Vec<Point>>,
}

impl Default for TopologyParams {
    fn default() -> Self {
        let layout = LayoutParams::default();
        Self {
            macro_radius_m: layout.macro_radius_m,
            macro_power_dbm: layout.macro_power_dbm,
            pico_radius_m: layout.pico_radius_m,
            pico_power_dbm: layout.pico_power_dbm,
            n_picos: layout.n_picos,
            pico_distance_factor: layout.pico_distance_factor,
            placement: Placement::default(),
            speed_kmh: 3.0,
            mobility: true,
            handover: true,
            handover_hysteresis_db: 1.0,
            ue_positions: None,
        }
    }
}

impl TopologyParams {
    pub fn layout(&self) -> LayoutParams {
        LayoutParams {
            macro_radius_m: self.macro_radius_m,
            macro_power_dbm: self.macro_power_dbm,
            pico_radius_m: self.pico_radius_m,
            pico_power_dbm: self.pico_power_dbm,
            n_picos: self.n_picos,
            pico_distance_factor: self.pico_distance_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VideoParams {
    pub qos: QosParams,
    /// Frame sizes in bytes, one per line, played at 25 fps.
    pub trace_file: Option<PathBuf>,
}

impl Default for VideoParams {
    fn default() -> Self {
        Self { qos: QosParams::DEFAULT_REALTIME, trace_file: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VoipParams {
    pub qos: QosParams,
    pub mean_on_s: f64,
    pub mean_off_s: f64,
}

impl Default for VoipParams {
    fn default() -> Self {
        Self { qos: QosParams::DEFAULT_REALTIME, mean_on_s: 3.0, mean_off_s: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CbrParams {
    pub qos: QosParams,
    pub rate_bps: f64,
}

impl Default for CbrParams {
    fn default() -> Self {
        Self {
            qos: QosParams { is_realtime: false, ..QosParams::DEFAULT_REALTIME },
            rate_bps: 1.0e6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficParams {
    /// Flows attached to every UE.
    pub flows: Vec<FlowKind>,
    pub video: VideoParams,
    pub voip: VoipParams,
    pub cbr: CbrParams,
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self {
            flows: vec![FlowKind::Video, FlowKind::Voip],
            video: VideoParams::default(),
            voip: VoipParams::default(),
            cbr: CbrParams::default(),
        }
    }
}

impl TrafficParams {
    pub fn qos(&self, kind: FlowKind) -> &QosParams {
        match kind {
            FlowKind::Video => &self.video.qos,
            FlowKind::Voip => &self.voip.qos,
            FlowKind::Cbr => &self.cbr.qos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchedulerParams {
    pub window_tc_tti: f64,
    pub initial_avg_rate_bps: f64,
    pub epsilon: f64,
    pub k_const: f64,
    pub w0: f64,
    pub log_base: LogBase,
    /// Defaults to the largest delay budget among real-time flow kinds.
    pub tau_max_s: Option<f64>,
}

impl Default for SchedulerParams {
    fn default() -> Self {
        Self {
            window_tc_tti: 1000.0,
            initial_avg_rate_bps: 1.0,
            epsilon: 0.02,
            k_const: 10.0,
            w0: 1.0,
            log_base: LogBase::Natural,
            tau_max_s: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricsParams {
    pub fairness_denominator: FairnessDenominator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    pub scheduler: Algorithm,
    pub users: usize,
    pub seed: u64,
    pub simulation: SimulationParams,
    pub radio: RadioParams,
    pub topology: TopologyParams,
    pub traffic: TrafficParams,
    pub scheduling: SchedulerParams,
    pub metrics: MetricsParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Hetnet,
            scheduler: Algorithm::Pf,
            users: 10,
            seed: 1,
            simulation: SimulationParams::default(),
            radio: RadioParams::default(),
            topology: TopologyParams::default(),
            traffic: TrafficParams::default(),
            scheduling: SchedulerParams::default(),
            metrics: MetricsParams::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    /// Real-time delay budget τ_max used by EXP/PF.
    pub fn tau_max_s(&self) -> f64 {
        self.scheduling.tau_max_s.unwrap_or_else(|| {
            self.traffic
                .flows
                .iter()
                .map(|k| self.traffic.qos(*k))
                .filter(|q| q.is_realtime)
                .map(|q| q.delay_threshold_s)
                .fold(0.0, f64::max)
        })
    }

    pub fn validate(&self) -> Result<()> {
        let sim = &self.simulation;
        positive("simulation.duration_s", sim.duration_s)?;
        positive("simulation.flow_duration_s", sim.flow_duration_s)?;
        positive("simulation.metrics_window_s", sim.window_s())?;
        if sim.flow_duration_s > sim.duration_s {
            return Err(Error::Config(format!(
                "flow duration {} s exceeds simulation time {} s",
                sim.flow_duration_s, sim.duration_s
            )));
        }

        let radio = &self.radio;
        match rbs_for_bandwidth(radio.bandwidth_mhz) {
            Some(n) if n == radio.rb_count => {}
            Some(n) => {
                return Err(Error::Config(format!(
                    "{} MHz carries {n} RBs, config says {}",
                    radio.bandwidth_mhz, radio.rb_count
                )))
            }
            None => {
                return Err(Error::Config(format!(
                    "unsupported bandwidth {} MHz",
                    radio.bandwidth_mhz
                )))
            }
        }
        if (radio.subcarrier_spacing_khz - 15.0).abs() > 1e-9 {
            return Err(Error::Config("subcarrier spacing must be 15 kHz".into()));
        }
        positive("radio.carrier_frequency_hz", radio.carrier_frequency_hz)?;
        if radio.penetration_loss_db < 0.0 || radio.shadowing_std_db < 0.0 {
            return Err(Error::Config("loss parameters must be non-negative".into()));
        }
        positive("radio.shadowing_decorrelation_m", radio.shadowing_decorrelation_m)?;
        if radio.fading_oscillators < 8 {
            return Err(Error::Config(format!(
                "fading needs at least 8 oscillators, got {}",
                radio.fading_oscillators
            )));
        }

        let topo = &self.topology;
        topo.layout().validate()?;
        crate::topology::build_scenario(ScenarioKind::Hetnet, &topo.layout())?;
        if topo.speed_kmh < 0.0 || !topo.speed_kmh.is_finite() {
            return Err(Error::Config(format!("invalid UE speed {}", topo.speed_kmh)));
        }
        if topo.handover_hysteresis_db < 0.0 {
            return Err(Error::Config("handover hysteresis must be non-negative".into()));
        }
        if let Placement::Split { macro_fraction } = topo.placement {
            if !(0.0..=1.0).contains(&macro_fraction) {
                return Err(Error::Config(format!(
                    "macro fraction must lie in [0, 1], got {macro_fraction}"
                )));
            }
        }
        if let Some(pos) = &topo.ue_positions {
            if pos.len() != self.users {
                return Err(Error::Config(format!(
                    "{} fixed UE positions given for {} users",
                    pos.len(),
                    self.users
                )));
            }
            let r = topo.macro_radius_m;
            if let Some(p) = pos.iter().find(|p| !(p.norm() <= r)) {
                return Err(Error::InvalidGeometry(format!(
                    "fixed UE position ({}, {}) lies outside the macro cell",
                    p.x, p.y
                )));
            }
        }

        let traffic = &self.traffic;
        if traffic.flows.is_empty() {
            return Err(Error::Config("traffic.flows must name at least one flow kind".into()));
        }
        for kind in &traffic.flows {
            traffic.qos(*kind).validate()?;
        }
        positive("traffic.voip.mean_on_s", traffic.voip.mean_on_s)?;
        positive("traffic.voip.mean_off_s", traffic.voip.mean_off_s)?;
        positive("traffic.cbr.rate_bps", traffic.cbr.rate_bps)?;

        let s = &self.scheduling;
        if !(s.window_tc_tti >= 1.0) {
            return Err(Error::Config(format!("PF window must be >= 1 TTI, got {}", s.window_tc_tti)));
        }
        positive("scheduling.initial_avg_rate_bps", s.initial_avg_rate_bps)?;
        positive("scheduling.epsilon", s.epsilon)?;
        positive("scheduling.k_const", s.k_const)?;
        positive("scheduling.w0", s.w0)?;
        if let Some(t) = s.tau_max_s {
            positive("scheduling.tau_max_s", t)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub user_counts: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub scenarios: Vec<ScenarioKind>,
    pub runs_per_point: usize,
    pub root_seed: u64,
    pub workers: usize,
    /// Write measured wall-clock time per run; off gives byte-stable CSVs.
    pub record_wall_time: bool,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            user_counts: (1..=8).map(|k| 10 * k).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            scenarios: ScenarioKind::ALL.to_vec(),
            runs_per_point: 5,
            root_seed: 1,
            workers: 1,
            record_wall_time: true,
        }
    }
}

impl SweepParams {
    pub fn validate(&self) -> Result<()> {
        if self.runs_per_point == 0 {
            return Err(Error::Config("sweep.runs_per_point must be at least 1".into()));
        }
        if self.user_counts.is_empty() || self.algorithms.is_empty() || self.scenarios.is_empty() {
            return Err(Error::Config(
                "sweep needs at least one user count, algorithm and scenario".into(),
            ));
        }
        Ok(())
    }
}

/// Base run settings plus the grid swept over them.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepSpec {
    pub base: RunConfig,
    pub sweep: SweepParams,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.sweep.validate()?;
        self.base.validate()
    }
}

/// Parses config text. An empty document yields the defaults.
pub fn parse_config(text: &str, origin: &Path) -> Result<SweepSpec> {
    let parse_err = |source| Error::ConfigParse { path: origin.to_path_buf(), source };
    let mut value: serde_json::Value = if text.trim().is_empty() {
        serde_json::Value::Object(Default::default())
    } else {
        serde_json::from_str(text).map_err(parse_err)?
    };
    let sweep = match value.as_object_mut().and_then(|o| o.remove("sweep")) {
        Some(v) => serde_json::from_value(v).map_err(parse_err)?,
        None => SweepParams::default(),
    };
    let base: RunConfig = serde_json::from_value(value).map_err(parse_err)?;
    let spec = SweepSpec { base, sweep };
    spec.validate()?;
    Ok(spec)
}

pub fn load_config(path: &Path) -> Result<SweepSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}
