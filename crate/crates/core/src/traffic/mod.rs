//! Per-flow eNB buffers and the traffic sources that fill them.

mod source;

pub use source::{CbrSource, TrafficSource, VideoSource, VoipSource};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::SimTime;

pub type FlowId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Video,
    Voip,
    /// Constant-bit-rate source; a rate above the link capacity gives a full buffer.
    Cbr,
}

impl FlowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowKind::Video => "video",
            FlowKind::Voip => "voip",
            FlowKind::Cbr => "cbr",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosParams {
    /// Delay budget τ, seconds.
    pub delay_threshold_s: f64,
    /// Target probability δ of exceeding the delay budget.
    pub max_hol_violation_prob: f64,
    pub is_realtime: bool,
}

impl QosParams {
    pub const DEFAULT_REALTIME: QosParams = QosParams {
        delay_threshold_s: 0.1,
        max_hol_violation_prob: 0.005,
        is_realtime: true,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.delay_threshold_s > 0.0 && self.delay_threshold_s.is_finite()) {
            return Err(Error::Config(format!(
                "delay threshold must be positive, got {}",
                self.delay_threshold_s
            )));
        }
        let p = self.max_hol_violation_prob;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Config(format!(
                "HOL violation probability must lie in (0, 1), got {p}"
            )));
        }
        Ok(())
    }

    pub fn delay_threshold(&self) -> SimTime {
        SimTime::from_secs_f64(self.delay_threshold_s)
    }
}

impl Default for QosParams {
    fn default() -> Self {
        Self::DEFAULT_REALTIME
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketDescriptor {
    pub flow_id: FlowId,
    pub size_bits: u32,
    /// Bits still waiting; less than `size_bits` once partially sent.
    pub remaining_bits: u32,
    pub arrival: SimTime,
    pub deadline: SimTime,
}

impl PacketDescriptor {
    pub fn new(flow_id: FlowId, size_bits: u32, arrival: SimTime, qos: &QosParams) -> Self {
        debug_assert!(size_bits > 0);
        Self {
            flow_id,
            size_bits,
            remaining_bits: size_bits,
            arrival,
            deadline: arrival + qos.delay_threshold(),
        }
    }
}

/// A packet whose last bit left the eNB.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub flow_id: FlowId,
    pub size_bits: u32,
    pub arrival: SimTime,
    pub delay: SimTime,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DrainOutcome {
    pub served_bits: u64,
    pub delivered: Vec<Delivery>,
}

/// FIFO buffer of one flow at its serving eNB.
#[derive(Debug, Clone)]
pub struct FlowQueue {
    pub flow_id: FlowId,
    pub kind: FlowKind,
    pub qos: QosParams,
    fifo: VecDeque<PacketDescriptor>,
    buffered_bits: u64,
}

impl FlowQueue {
    pub fn new(flow_id: FlowId, kind: FlowKind, qos: QosParams) -> Self {
        Self {
            flow_id,
            kind,
            qos,
            fifo: VecDeque::new(),
            buffered_bits: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.fifo.is_empty()
    }

    pub fn len(&self) -> usize {
        self.fifo.len()
    }

    pub fn buffered_bits(&self) -> u64 {
        self.buffered_bits
    }

    pub fn packets(&self) -> impl Iterator<Item = &PacketDescriptor> {
        self.fifo.iter()
    }

    pub fn head(&self) -> Option<&PacketDescriptor> {
        self.fifo.front()
    }

    /// Head-of-line delay; zero for an empty queue.
    pub fn hol_delay(&self, now: SimTime) -> SimTime {
        self.fifo
            .front()
            .map_or(SimTime::ZERO, |p| now.saturating_sub(p.arrival))
    }

    /// Appends packets in order and returns the number of bits added.
    pub fn enqueue<I>(&mut self, packets: I) -> u64
    where
        I: IntoIterator<Item = PacketDescriptor>,
    {
        let mut added = 0u64;
        for p in packets {
            debug_assert!(
                self.fifo.back().is_none_or(|b| b.arrival <= p.arrival),
                "packets must arrive in timestamp order"
            );
            added += p.remaining_bits as u64;
            self.fifo.push_back(p);
        }
        self.buffered_bits += added;
        added
    }

    /// Removes every packet whose deadline has passed; returns the dropped bits.
    pub fn drop_expired(&mut self, now: SimTime) -> u64 {
        let before = self.buffered_bits;
        // Deadlines follow arrival order, so expired packets form a prefix.
        while let Some(head) = self.fifo.front() {
            if head.deadline < now {
                self.buffered_bits -= head.remaining_bits as u64;
                self.fifo.pop_front();
            } else {
                break;
            }
        }
        // Guards against a non-uniform delay budget inside one queue.
        if self.fifo.iter().any(|p| p.deadline < now) {
            let mut dropped = 0u64;
            self.fifo.retain(|p| {
                let keep = p.deadline >= now;
                if !keep {
                    dropped += p.remaining_bits as u64;
                }
                keep
            });
            self.buffered_bits -= dropped;
        }
        before - self.buffered_bits
    }

    /// Sends up to `capacity_bits` from the head of the queue at time `now`.
    pub fn drain(&mut self, capacity_bits: u64, now: SimTime) -> DrainOutcome {
        let mut out = DrainOutcome::default();
        let mut budget = capacity_bits;
        while budget > 0 {
            let Some(head) = self.fifo.front_mut() else { break };
            debug_assert!(head.deadline >= now, "serving an expired packet");
            let take = budget.min(head.remaining_bits as u64);
            head.remaining_bits -= take as u32;
            budget -= take;
            out.served_bits += take;
            if head.remaining_bits == 0 {
                let p = self.fifo.pop_front().expect("head exists");
                out.delivered.push(Delivery {
                    flow_id: p.flow_id,
                    size_bits: p.size_bits,
                    arrival: p.arrival,
                    delay: now.saturating_sub(p.arrival),
                });
            }
        }
        self.buffered_bits -= out.served_bits;
        out
    }
}
