use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::{FlowId, PacketDescriptor, QosParams};
use crate::error::{Error, Result};
use crate::time::{SimTime, TTI};

/// 21-byte voice frame every 20 ms gives 8.4 kbps while talking.
pub const VOIP_PACKET_BITS: u32 = 21 * 8;
pub const VOIP_PACKET_INTERVAL: SimTime = SimTime::from_millis(20);

pub const VIDEO_FRAME_INTERVAL: SimTime = SimTime::from_millis(40);
pub const VIDEO_MAX_PACKET_BYTES: u32 = 1500;
/// I:P:P:P byte sizes; the cycle mean is 1210 bytes/frame, i.e. 242 kbps at 25 fps.
pub const VIDEO_GOP_BYTES: [u32; 4] = [2200, 880, 880, 880];

/// Two-state talk-spurt model with exponential ON and OFF holding times.
#[derive(Debug, Clone)]
pub struct VoipSource {
    on: bool,
    next_toggle: Option<SimTime>,
    next_packet: SimTime,
    on_dist: Option<Exp<f64>>,
    off_dist: Option<Exp<f64>>,
}

impl VoipSource {
    pub fn new<R: Rng + ?Sized>(mean_on_s: f64, mean_off_s: f64, rng: &mut R) -> Result<Self> {
        let on_dist = Exp::new(1.0 / mean_on_s)
            .map_err(|_| Error::Config(format!("invalid VoIP mean ON time {mean_on_s}")))?;
        let off_dist = Exp::new(1.0 / mean_off_s)
            .map_err(|_| Error::Config(format!("invalid VoIP mean OFF time {mean_off_s}")))?;
        let on = rng.random_bool(mean_on_s / (mean_on_s + mean_off_s));
        // Memoryless holding time, so the residual at t=0 has the same law.
        let first = if on { on_dist.sample(rng) } else { off_dist.sample(rng) };
        Ok(Self {
            on,
            next_toggle: Some(SimTime::from_secs_f64(first)),
            next_packet: SimTime::ZERO,
            on_dist: Some(on_dist),
            off_dist: Some(off_dist),
        })
    }

    /// A source that talks continuously.
    pub fn always_on() -> Self {
        Self {
            on: true,
            next_toggle: None,
            next_packet: SimTime::ZERO,
            on_dist: None,
            off_dist: None,
        }
    }

    pub fn is_on(&self) -> bool {
        self.on
    }

    fn advance_state<R: Rng + ?Sized>(&mut self, now: SimTime, rng: &mut R) {
        while let Some(toggle) = self.next_toggle {
            if toggle > now {
                break;
            }
            self.on = !self.on;
            let dist = if self.on { self.on_dist } else { self.off_dist };
            let hold = dist.expect("toggling source has distributions").sample(rng);
            self.next_toggle = Some(toggle + SimTime::from_secs_f64(hold).max(TTI));
            if self.on {
                self.next_packet = toggle;
            }
        }
    }

    pub fn generate<R: Rng + ?Sized>(
        &mut self,
        flow_id: FlowId,
        qos: &QosParams,
        now: SimTime,
        rng: &mut R,
    ) -> Vec<PacketDescriptor> {
        self.advance_state(now, rng);
        let mut out = Vec::new();
        if !self.on {
            return out;
        }
        while self.next_packet <= now {
            out.push(PacketDescriptor::new(flow_id, VOIP_PACKET_BITS, now, qos));
            self.next_packet = self.next_packet + VOIP_PACKET_INTERVAL;
        }
        out
    }
}

/// 25 fps video with a repeating frame-size pattern, each frame split into
/// packets of at most 1500 bytes.
#[derive(Debug, Clone)]
pub struct VideoSource {
    frames_bytes: Vec<u32>,
    position: usize,
    next_frame: SimTime,
}

impl VideoSource {
    pub fn new(frames_bytes: Vec<u32>, first_frame: SimTime, start_index: usize) -> Result<Self> {
        if frames_bytes.is_empty() || frames_bytes.contains(&0) {
            return Err(Error::Config(
                "video frame pattern must be non-empty with positive sizes".into(),
            ));
        }
        let position = start_index % frames_bytes.len();
        Ok(Self {
            frames_bytes,
            position,
            next_frame: first_frame,
        })
    }

    /// Default GOP pattern with a random frame phase and GOP position.
    pub fn synthetic<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let phase_ttis = rng.random_range(0..VIDEO_FRAME_INTERVAL.as_micros() / TTI.as_micros());
        let start = rng.random_range(0..VIDEO_GOP_BYTES.len());
        Self::new(VIDEO_GOP_BYTES.to_vec(), SimTime::from_tti(phase_ttis), start)
            .expect("built-in pattern is valid")
    }

    /// Reads one frame size in bytes per line; blank lines and `#` comments are skipped.
    pub fn load_trace(path: &Path) -> Result<Vec<u32>> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut frames = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bytes: u32 = line.parse().map_err(|_| Error::Trace {
                path: path.to_path_buf(),
                reason: format!("line {}: not a frame size: {line:?}", n + 1),
            })?;
            if bytes == 0 {
                return Err(Error::Trace {
                    path: path.to_path_buf(),
                    reason: format!("line {}: zero-sized frame", n + 1),
                });
            }
            frames.push(bytes);
        }
        if frames.is_empty() {
            return Err(Error::Trace {
                path: path.to_path_buf(),
                reason: "no frames".into(),
            });
        }
        Ok(frames)
    }

    pub fn generate(
        &mut self,
        flow_id: FlowId,
        qos: &QosParams,
        now: SimTime,
    ) -> Vec<PacketDescriptor> {
        let mut out = Vec::new();
        while self.next_frame <= now {
            let mut left = self.frames_bytes[self.position];
            self.position = (self.position + 1) % self.frames_bytes.len();
            while left > 0 {
                let chunk = left.min(VIDEO_MAX_PACKET_BYTES);
                out.push(PacketDescriptor::new(flow_id, chunk * 8, now, qos));
                left -= chunk;
            }
            self.next_frame = self.next_frame + VIDEO_FRAME_INTERVAL;
        }
        out
    }
}

/// Emits `rate_bps * TTI` bits every TTI in packets of at most 1500 bytes.
#[derive(Debug, Clone)]
pub struct CbrSource {
    bits_per_tti: u64,
}

impl CbrSource {
    pub fn new(rate_bps: f64) -> Result<Self> {
        if !(rate_bps > 0.0 && rate_bps.is_finite()) {
            return Err(Error::Config(format!("CBR rate must be positive, got {rate_bps}")));
        }
        let bits = (rate_bps * TTI.as_secs_f64()).round() as u64;
        Ok(Self { bits_per_tti: bits.max(1) })
    }

    pub fn generate(
        &mut self,
        flow_id: FlowId,
        qos: &QosParams,
        now: SimTime,
    ) -> Vec<PacketDescriptor> {
        let max = (VIDEO_MAX_PACKET_BYTES * 8) as u64;
        let mut left = self.bits_per_tti;
        let mut out = Vec::new();
        while left > 0 {
            let chunk = left.min(max);
            out.push(PacketDescriptor::new(flow_id, chunk as u32, now, qos));
            left -= chunk;
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum TrafficSource {
    Voip(VoipSource),
    Video(VideoSource),
    Cbr(CbrSource),
}

impl TrafficSource {
    /// Packets arriving at the eNB during the TTI that starts at `now`.
    pub fn generate<R: Rng + ?Sized>(
        &mut self,
        flow_id: FlowId,
        qos: &QosParams,
        now: SimTime,
        rng: &mut R,
    ) -> Vec<PacketDescriptor> {
        match self {
            TrafficSource::Voip(s) => s.generate(flow_id, qos, now, rng),
            TrafficSource::Video(s) => s.generate(flow_id, qos, now),
            TrafficSource::Cbr(s) => s.generate(flow_id, qos, now),
        }
    }
}
