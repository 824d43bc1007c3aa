//! TTI-driven simulation loop.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{
    doppler_hz, noise_dbm, pathloss_db, rb_pair_bits_at, shadowing_sample, FadingField,
    RB_BANDWIDTH_HZ,
};
use crate::config::RunConfig;
use crate::error::Result;
use crate::metrics::{self, FairnessDenominator, MetricsAccumulator};
use crate::scalar::{db_to_linear, linear_to_db};
use crate::scheduler::{
    mlwdf_alpha, schedule_tti, Algorithm, Candidate, ExpPfState, PerFlowSchedState,
};
use crate::time::{SimTime, TTI};
use crate::topology::{
    best_server, build_scenario, kmh_to_mps, move_ue, place_users, CellId, CellSite,
    ScenarioKind, UePosition,
};
use crate::traffic::{
    CbrSource, FlowId, FlowKind, FlowQueue, TrafficSource, VideoSource, VoipSource,
};

/// Independent random streams derived from the run seed.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
enum Stream {
    Placement = 1,
    Shadowing = 2,
    Fading = 3,
    Traffic = 4,
    Mobility = 5,
}

fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone)]
pub struct Flow {
    pub id: FlowId,
    pub ue: usize,
    pub queue: FlowQueue,
    pub source: TrafficSource,
    pub sched: PerFlowSchedState<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone)]
pub struct UeState {
    pub position: UePosition,
    pub serving: CellId,
    /// Shadowing toward each cell, dB.
    pub shadow_db: Vec<f64>,
    travelled_since_shadow_m: f64,
    pub flows: Vec<FlowId>,
}

#[derive(Debug, Clone)]
pub struct CellState {
    pub site: CellSite,
    /// Transmit power applied to one RB-pair, dBm.
    pub rb_tx_dbm: f64,
    pub exp_pf: ExpPfState<f64>,
}

/// One row of the optional per-TTI trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct TraceRow {
    pub tti: u64,
    pub cell_id: CellId,
    pub granted_rbs: usize,
    pub served_bits: u64,
    pub backlogged_flows: usize,
}

/// What happened in one TTI.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TtiReport {
    pub tti: u64,
    /// Served bits per cell.
    pub served_bits: Vec<u64>,
    pub granted_rbs: Vec<usize>,
    pub handovers: u64,
}

/// Headline numbers of one run; video is the reported class for PLR, delay
/// and fairness.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
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
}

impl RunSummary {
    pub fn from_metrics(acc: &MetricsAccumulator, fairness: FairnessDenominator, handovers: u64) -> Self {
        let video = Some(FlowKind::Video);
        Self {
            throughput_bps_total: metrics::throughput(acc, None),
            throughput_bps_video: metrics::throughput(acc, video),
            plr_video: metrics::plr(acc, video),
            delay_ms_video_mean: metrics::delay_stats::<f64>(acc, video).mean_s * 1e3,
            fairness_eq11_video: metrics::fairness_spread(acc, video, fairness),
            jain_video: metrics::jain_index(&metrics::per_flow_throughputs::<f64>(acc, video)),
            handovers,
            dropped_bits: acc.discarded_bits(None),
            transmitted_bits: acc.transmitted_bits(None),
            arrived_bits: acc.arrived_bits(None),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub scenario: ScenarioKind,
    pub algorithm: Algorithm,
    pub users: usize,
    pub seed: u64,
    pub summary: RunSummary,
    pub metrics: MetricsAccumulator,
    pub cells: Vec<CellSite>,
    pub trace: Vec<TraceRow>,
    pub ttis: u64,
    pub wall_time_s: f64,
}

pub struct Simulation {
    config: RunConfig,
    cells: Vec<CellState>,
    ues: Vec<UeState>,
    flows: Vec<Flow>,
    fading: Option<FadingField<f64>>,
    metrics: MetricsAccumulator,
    noise_mw: f64,
    tau_max_s: f64,
    tti: u64,
    total_ttis: u64,
    flow_end: SimTime,
    handovers: u64,
    trace: Vec<TraceRow>,
    rb_bits: Vec<Vec<u32>>,
    served_scratch: Vec<u64>,
    shadow_rng: ChaCha8Rng,
    traffic_rng: ChaCha8Rng,
    mobility_rng: ChaCha8Rng,
}

impl Simulation {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let seed = config.seed;
        let radio = &config.radio;
        let topo = &config.topology;
        let rb_count = radio.rb_count;

        let sites = build_scenario(config.scenario, &topo.layout())?;
        let rb_share_db = if radio.split_power_over_rbs {
            linear_to_db(rb_count as f64)
        } else {
            0.0
        };
        let tau_max_s = config.tau_max_s();
        let sp = &config.scheduling;
        let cells: Vec<CellState> = sites
            .into_iter()
            .map(|site| CellState {
                rb_tx_dbm: site.tx_power_dbm - rb_share_db,
                exp_pf: ExpPfState::new(sp.w0, sp.epsilon, sp.k_const, tau_max_s, sp.window_tc_tti),
                site,
            })
            .collect();

        let speed = kmh_to_mps(topo.speed_kmh);
        let mut placement_rng = stream_rng(seed, Stream::Placement);
        let sites: Vec<CellSite> = cells.iter().map(|c| c.site.clone()).collect();
        let positions = match &topo.ue_positions {
            Some(fixed) => fixed
                .iter()
                .enumerate()
                .map(|(i, p)| UePosition {
                    ue_id: i,
                    position: *p,
                    heading: rand::Rng::random_range(&mut placement_rng, 0.0..std::f64::consts::TAU),
                    speed_mps: speed,
                    home_cell: 0,
                })
                .collect(),
            None => place_users(config.users, &sites, topo.placement, speed, &mut placement_rng),
        };

        let mut shadow_rng = stream_rng(seed, Stream::Shadowing);
        let mut traffic_rng = stream_rng(seed, Stream::Traffic);
        let mut metrics = MetricsAccumulator::new(config.simulation.window_s());

        let video_frames = match &config.traffic.video.trace_file {
            Some(path) => Some(VideoSource::load_trace(path)?),
            None => None,
        };

        let mut ues = Vec::with_capacity(positions.len());
        let mut flows = Vec::new();
        for pos in positions {
            let shadow_db = draw_shadowing(&config, cells.len(), &mut shadow_rng);
            let mut ue_flows = Vec::new();
            for &kind in &config.traffic.flows {
                let id = flows.len();
                let qos = *config.traffic.qos(kind);
                let source = match kind {
                    FlowKind::Video => TrafficSource::Video(match &video_frames {
                        Some(frames) => {
                            let phase = rand::Rng::random_range(&mut traffic_rng, 0..40u64);
                            let start = rand::Rng::random_range(&mut traffic_rng, 0..frames.len());
                            VideoSource::new(frames.clone(), SimTime::from_tti(phase), start)?
                        }
                        None => VideoSource::synthetic(&mut traffic_rng),
                    }),
                    FlowKind::Voip => TrafficSource::Voip(VoipSource::new(
                        config.traffic.voip.mean_on_s,
                        config.traffic.voip.mean_off_s,
                        &mut traffic_rng,
                    )?),
                    FlowKind::Cbr => TrafficSource::Cbr(CbrSource::new(config.traffic.cbr.rate_bps)?),
                };
                metrics.add_flow(id, pos.ue_id, kind);
                flows.push(Flow {
                    id,
                    ue: pos.ue_id,
                    queue: FlowQueue::new(id, kind, qos),
                    source,
                    sched: PerFlowSchedState::new(sp.initial_avg_rate_bps, sp.window_tc_tti),
                    alpha: mlwdf_alpha(&qos, sp.log_base),
                });
                ue_flows.push(id);
            }
            ues.push(UeState {
                position: pos,
                serving: 0,
                shadow_db,
                travelled_since_shadow_m: 0.0,
                flows: ue_flows,
            });
        }

        let fading = radio.fading.then(|| {
            let fd = doppler_hz(speed, radio.carrier_frequency_hz);
            let mut rng = stream_rng(seed, Stream::Fading);
            FadingField::new(ues.len(), rb_count, fd, radio.fading_oscillators, &mut rng)
        });

        let noise_mw = db_to_linear(noise_dbm(
            radio.noise_density_dbm_per_hz,
            radio.noise_figure_db,
            RB_BANDWIDTH_HZ,
        ));
        let tti_s = TTI.as_secs_f64();
        let total_ttis = (config.simulation.duration_s / tti_s).round() as u64;
        let flow_end = SimTime::from_secs_f64(config.simulation.flow_duration_s);
        let n_ues = ues.len();
        let n_flows = flows.len();

        let mut sim = Self {
            config,
            cells,
            ues,
            flows,
            fading,
            metrics,
            noise_mw,
            tau_max_s,
            tti: 0,
            total_ttis,
            flow_end,
            handovers: 0,
            trace: Vec::new(),
            rb_bits: vec![vec![0; rb_count]; n_ues],
            served_scratch: vec![0; n_flows],
            shadow_rng,
            traffic_rng,
            mobility_rng: stream_rng(seed, Stream::Mobility),
        };
        for ue in 0..n_ues {
            let rx = sim.rx_total_dbm(ue)?;
            sim.ues[ue].serving = best_server(&rx, None, 0.0);
        }
        Ok(sim)
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn ues(&self) -> &[UeState] {
        &self.ues
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn metrics(&self) -> &MetricsAccumulator {
        &self.metrics
    }

    pub fn now(&self) -> SimTime {
        SimTime::from_tti(self.tti)
    }

    pub fn tti_index(&self) -> u64 {
        self.tti
    }

    pub fn total_ttis(&self) -> u64 {
        self.total_ttis
    }

    pub fn handovers(&self) -> u64 {
        self.handovers
    }

    pub fn is_finished(&self) -> bool {
        self.tti >= self.total_ttis
    }

    /// Received power from every cell at full transmit power, dBm.
    fn rx_total_dbm(&self, ue: usize) -> Result<Vec<f64>> {
        let u = &self.ues[ue];
        let pen = self.config.radio.penetration_loss_db;
        self.cells
            .iter()
            .zip(&u.shadow_db)
            .map(|(c, sh)| {
                let d_km = u.position.position.distance(c.site.position) / 1000.0;
                Ok(c.site.tx_power_dbm - pathloss_db(d_km)? - pen - sh)
            })
            .collect()
    }

    /// `arrived = transmitted + discarded + buffered` for every flow.
    pub fn conservation_holds(&self) -> bool {
        self.flows.iter().all(|f| {
            let c = &self.metrics.flows[f.id];
            c.arrived_bits == c.transmitted_bits + c.discarded_bits + f.queue.buffered_bits()
        })
    }

    /// Advances the simulation by one TTI.
    pub fn tti_step(&mut self) -> Result<TtiReport> {
        let now = self.now();
        let tti_s = TTI.as_secs_f64();
        let mut report = TtiReport {
            tti: self.tti,
            served_bits: vec![0; self.cells.len()],
            granted_rbs: vec![0; self.cells.len()],
            handovers: 0,
        };

        // traffic arrivals
        if now < self.flow_end {
            for f in &mut self.flows {
                let packets = f.source.generate(f.id, &f.queue.qos, now, &mut self.traffic_rng);
                if !packets.is_empty() {
                    let bits = f.queue.enqueue(packets);
                    self.metrics.record_arrival(f.id, bits);
                }
            }
        }

        // mobility, shadowing renewal and handover
        let topo = &self.config.topology;
        if topo.mobility {
            let step = TTI.as_secs_f64();
            let radius = topo.macro_radius_m;
            let decorrelation = self.config.radio.shadowing_decorrelation_m;
            for ue in &mut self.ues {
                move_ue(&mut ue.position, step, radius, &mut self.mobility_rng);
                ue.travelled_since_shadow_m += ue.position.speed_mps * step;
                if ue.travelled_since_shadow_m >= decorrelation {
                    ue.travelled_since_shadow_m -= decorrelation;
                    ue.shadow_db = draw_shadowing(&self.config, self.cells.len(), &mut self.shadow_rng);
                }
            }
        }
        let mut rx_all = Vec::with_capacity(self.ues.len());
        for ue in 0..self.ues.len() {
            rx_all.push(self.rx_total_dbm(ue)?);
        }
        if self.config.topology.handover && self.cells.len() > 1 {
            let hyst = self.config.topology.handover_hysteresis_db;
            for (ue, rx) in self.ues.iter_mut().zip(&rx_all) {
                let target = best_server(rx, Some(ue.serving), hyst);
                if target != ue.serving {
                    // queues follow the UE; packets keep their timestamps
                    ue.serving = target;
                    report.handovers += 1;
                }
            }
            self.handovers += report.handovers;
        }

        // expired packets leave before the scheduler looks at the queues
        for f in &mut self.flows {
            let dropped = f.queue.drop_expired(now);
            if dropped > 0 {
                self.metrics.record_discard(f.id, dropped);
            }
        }

        // ideal per-RB channel reports for UEs with data waiting
        let rb_count = self.config.radio.rb_count;
        let t = now.as_secs_f64();
        for (ue_idx, ue) in self.ues.iter().enumerate() {
            let backlogged = ue.flows.iter().any(|&f| !self.flows[f].queue.is_empty());
            if !backlogged {
                continue;
            }
            let share = self.cells[ue.serving].site.tx_power_dbm - self.cells[ue.serving].rb_tx_dbm;
            let rx = &rx_all[ue_idx];
            let serving_mw = db_to_linear(rx[ue.serving] - share);
            let interference_mw: f64 = rx
                .iter()
                .enumerate()
                .filter(|(c, _)| *c != ue.serving)
                .map(|(c, p)| db_to_linear(p - (self.cells[c].site.tx_power_dbm - self.cells[c].rb_tx_dbm)))
                .sum();
            let mean_sinr = serving_mw / (interference_mw + self.noise_mw);
            let bits = &mut self.rb_bits[ue_idx];
            for (rb, slot) in bits.iter_mut().enumerate().take(rb_count) {
                let gain = self.fading.as_ref().map_or(1.0, |f| f.power_gain(ue_idx, rb, t));
                *slot = rb_pair_bits_at(linear_to_db(mean_sinr * gain));
            }
        }

        // per-cell scheduling
        let algorithm = self.config.scheduler;
        self.served_scratch.iter_mut().for_each(|s| *s = 0);
        for cell_idx in 0..self.cells.len() {
            let ues = &self.ues;
            let rb_bits = &self.rb_bits;
            let mut candidates: Vec<Candidate<'_, f64>> = self
                .flows
                .iter_mut()
                .filter(|f| ues[f.ue].serving == cell_idx && !f.queue.is_empty())
                .map(|f| Candidate {
                    rb_bits: &rb_bits[f.ue],
                    alpha: f.alpha,
                    state: &f.sched,
                    queue: &mut f.queue,
                })
                .collect();
            let backlogged = candidates.len();
            let cell = &mut self.cells[cell_idx];
            let (alloc, ctx) = schedule_tti(algorithm, &mut candidates, rb_count, now, &cell.exp_pf);
            drop(candidates);

            let queued_packets: usize = self
                .flows
                .iter()
                .filter(|f| ues[f.ue].serving == cell_idx)
                .map(|f| f.queue.len())
                .sum();
            cell.exp_pf.update_w(ctx.w_max_hol, self.tau_max_s);
            cell.exp_pf.update_avg_buffer(queued_packets);

            for g in alloc.grants.iter().flatten() {
                self.served_scratch[g.flow_id] += g.served_bits as u64;
            }
            for d in &alloc.delivered {
                self.metrics.record_delivery(d);
            }
            let served = alloc.served_bits();
            report.served_bits[cell_idx] = served;
            report.granted_rbs[cell_idx] = alloc.granted_rbs();
            if self.config.simulation.trace {
                self.trace.push(TraceRow {
                    tti: self.tti,
                    cell_id: cell_idx,
                    granted_rbs: alloc.granted_rbs(),
                    served_bits: served,
                    backlogged_flows: backlogged,
                });
            }
        }

        // service accounting and average-rate update, one per flow per TTI
        for f in &mut self.flows {
            let served = self.served_scratch[f.id];
            if served > 0 {
                self.metrics.record_transmit(f.id, served);
            }
            f.sched.update_avg_rate(served as f64 / tti_s);
        }

        self.tti += 1;
        Ok(report)
    }

    pub fn run(mut self) -> Result<RunResult> {
        let started = Instant::now();
        while !self.is_finished() {
            self.tti_step()?;
        }
        Ok(self.finish(started.elapsed().as_secs_f64()))
    }

    fn finish(self, wall_time_s: f64) -> RunResult {
        let summary = RunSummary::from_metrics(
            &self.metrics,
            self.config.metrics.fairness_denominator,
            self.handovers,
        );
        RunResult {
            scenario: self.config.scenario,
            algorithm: self.config.scheduler,
            users: self.config.users,
            seed: self.config.seed,
            summary,
            metrics: self.metrics,
            cells: self.cells.into_iter().map(|c| c.site).collect(),
            trace: self.trace,
            ttis: self.tti,
            wall_time_s,
        }
    }
}

fn draw_shadowing(config: &RunConfig, n_cells: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n_cells)
        .map(|_| {
            let draw: f64 = shadowing_sample(rng, config.radio.shadowing_std_db);
            if config.radio.shadowing {
                draw
            } else {
                0.0
            }
        })
        .collect()
}

/// Builds and runs one simulation to completion.
pub fn run_simulation(config: RunConfig) -> Result<RunResult> {
    Simulation::new(config)?.run()
}
