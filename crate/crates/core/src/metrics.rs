//! Per-flow counters and the KPIs derived from them.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::traffic::{Delivery, FlowId, FlowKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowCounters {
    pub flow_id: FlowId,
    pub ue_id: usize,
    pub kind: FlowKind,
    pub arrived_bits: u64,
    pub transmitted_bits: u64,
    pub discarded_bits: u64,
    /// Queuing delay of every fully delivered packet, microseconds.
    pub delays_us: Vec<u64>,
}

impl FlowCounters {
    pub fn buffered_bits(&self) -> u64 {
        self.arrived_bits - self.transmitted_bits - self.discarded_bits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsAccumulator {
    pub flows: Vec<FlowCounters>,
    /// Measurement window T, seconds.
    pub window_s: f64,
}

impl MetricsAccumulator {
    pub fn new(window_s: f64) -> Self {
        Self { flows: Vec::new(), window_s }
    }

    /// Registers a flow; ids must be dense and added in order.
    pub fn add_flow(&mut self, flow_id: FlowId, ue_id: usize, kind: FlowKind) {
        assert_eq!(flow_id, self.flows.len(), "flow ids must be dense");
        self.flows.push(FlowCounters {
            flow_id,
            ue_id,
            kind,
            arrived_bits: 0,
            transmitted_bits: 0,
            discarded_bits: 0,
            delays_us: Vec::new(),
        });
    }

    pub fn record_arrival(&mut self, flow: FlowId, bits: u64) {
        self.flows[flow].arrived_bits += bits;
    }

    pub fn record_transmit(&mut self, flow: FlowId, bits: u64) {
        self.flows[flow].transmitted_bits += bits;
    }

    pub fn record_discard(&mut self, flow: FlowId, bits: u64) {
        self.flows[flow].discarded_bits += bits;
    }

    pub fn record_delivery(&mut self, d: &Delivery) {
        self.flows[d.flow_id].delays_us.push(d.delay.as_micros());
    }

    pub fn class(&self, class: Option<FlowKind>) -> impl Iterator<Item = &FlowCounters> {
        self.flows.iter().filter(move |f| class.is_none_or(|k| f.kind == k))
    }

    pub fn flow_count(&self, class: Option<FlowKind>) -> usize {
        self.class(class).count()
    }

    pub fn arrived_bits(&self, class: Option<FlowKind>) -> u64 {
        self.class(class).map(|f| f.arrived_bits).sum()
    }

    pub fn transmitted_bits(&self, class: Option<FlowKind>) -> u64 {
        self.class(class).map(|f| f.transmitted_bits).sum()
    }

    pub fn discarded_bits(&self, class: Option<FlowKind>) -> u64 {
        self.class(class).map(|f| f.discarded_bits).sum()
    }

    pub fn buffered_bits(&self, class: Option<FlowKind>) -> u64 {
        self.class(class).map(FlowCounters::buffered_bits).sum()
    }
}

/// Total transmitted bits over the window, bits/s. Zero for an empty window.
pub fn throughput<T: Scalar>(acc: &MetricsAccumulator, class: Option<FlowKind>) -> T {
    if !(acc.window_s > 0.0) {
        return T::zero();
    }
    T::from_count(acc.transmitted_bits(class)) / T::lit(acc.window_s)
}

/// Discarded over arrived bits; 0 when nothing arrived.
pub fn plr<T: Scalar>(acc: &MetricsAccumulator, class: Option<FlowKind>) -> T {
    let arrived = acc.arrived_bits(class);
    if arrived == 0 {
        return T::zero();
    }
    T::from_count(acc.discarded_bits(class)) / T::from_count(arrived)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FairnessDenominator {
    #[default]
    Arrived,
    Transmitted,
}

/// `1 - (max - min) / total` over per-flow transmitted bits, `total` being
/// the class's arrived (default) or transmitted bits. 1 for empty classes.
pub fn fairness_spread<T: Scalar>(
    acc: &MetricsAccumulator,
    class: Option<FlowKind>,
    denominator: FairnessDenominator,
) -> T {
    let mut iter = acc.class(class).map(|f| f.transmitted_bits);
    let Some(first) = iter.next() else {
        return T::one();
    };
    let (lo, hi) = iter.fold((first, first), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let total = match denominator {
        FairnessDenominator::Arrived => acc.arrived_bits(class),
        FairnessDenominator::Transmitted => acc.transmitted_bits(class),
    };
    if total == 0 {
        return T::one();
    }
    T::one() - T::from_count(hi - lo) / T::from_count(total)
}

/// Jain's index `(sum x)^2 / (n sum x^2)`; 1 for an empty or all-zero vector.
pub fn jain_index<T: Scalar>(values: &[T]) -> T {
    let n = values.len();
    let sum = values.iter().fold(T::zero(), |a, &x| a + x);
    let sum_sq = values.iter().fold(T::zero(), |a, &x| a + x * x);
    if n == 0 || sum_sq == T::zero() {
        return T::one();
    }
    sum * sum / (T::from_count(n as u64) * sum_sq)
}

/// Per-flow throughputs of a class, bits/s.
pub fn per_flow_throughputs<T: Scalar>(acc: &MetricsAccumulator, class: Option<FlowKind>) -> Vec<T> {
    let window = T::lit(acc.window_s.max(f64::MIN_POSITIVE));
    acc.class(class)
        .map(|f| T::from_count(f.transmitted_bits) / window)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayStats<T> {
    pub mean_s: T,
    pub max_s: T,
    pub packets: u64,
}

/// Mean and max queuing delay of delivered packets; zeros when none were delivered.
pub fn delay_stats<T: Scalar>(acc: &MetricsAccumulator, class: Option<FlowKind>) -> DelayStats<T> {
    let mut sum = 0u128;
    let mut max = 0u64;
    let mut count = 0u64;
    for d in acc.class(class).flat_map(|f| f.delays_us.iter()) {
        sum += *d as u128;
        max = max.max(*d);
        count += 1;
    }
    if count == 0 {
        return DelayStats { mean_s: T::zero(), max_s: T::zero(), packets: 0 };
    }
    let micro = T::lit(1e-6);
    DelayStats {
        mean_s: T::lit(sum as f64) / T::from_count(count) * micro,
        max_s: T::from_count(max) * micro,
        packets: count,
    }
}
