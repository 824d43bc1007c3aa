//! Priority metrics of the three schedulers and the state they carry.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::traffic::QosParams;

/// Stand-in for a zero or negative average rate, bits/s.
pub const STARTUP_AVG_RATE: f64 = 1.0;

/// Moving-average throughput of one flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerFlowSchedState<T> {
    /// R_i(t), bits/s.
    pub avg_rate: T,
    /// Rate the flow was served at in the previous TTI, bits/s.
    pub last_served_rate: T,
    /// Averaging window t_c, in TTIs.
    pub window_tc: T,
}

impl<T: Scalar> PerFlowSchedState<T> {
    pub fn new(initial_avg_rate: T, window_tc: T) -> Self {
        Self {
            avg_rate: initial_avg_rate,
            last_served_rate: T::zero(),
            window_tc,
        }
    }

    /// `R(t) = (1 - 1/t_c) R(t-1) + (1/t_c) r(t-1)`, with `r = 0` when unserved.
    pub fn update_avg_rate(&mut self, served_rate: T) -> T {
        let inv = T::one() / self.window_tc;
        self.avg_rate = (T::one() - inv) * self.avg_rate + inv * served_rate;
        self.last_served_rate = served_rate;
        self.avg_rate
    }
}

fn guarded_avg<T: Scalar>(avg_rate: T) -> T {
    if avg_rate > T::zero() {
        avg_rate
    } else {
        T::lit(STARTUP_AVG_RATE)
    }
}

/// `r / R`.
pub fn pf_metric<T: Scalar>(achievable_rate: T, avg_rate: T) -> T {
    achievable_rate / guarded_avg(avg_rate)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Ten,
}

/// `a = -log(δ) / τ`.
pub fn mlwdf_alpha<T: Scalar>(qos: &QosParams, base: LogBase) -> T {
    let delta = T::lit(qos.max_hol_violation_prob);
    let log = match base {
        LogBase::Natural => delta.ln(),
        LogBase::Ten => delta.log10(),
    };
    -log / T::lit(qos.delay_threshold_s)
}

/// `a W r / R`.
pub fn mlwdf_metric<T: Scalar>(alpha: T, hol_delay_s: T, achievable_rate: T, avg_rate: T) -> T {
    alpha * hol_delay_s * pf_metric(achievable_rate, avg_rate)
}

/// Per-TTI quantities shared by every EXP/PF metric evaluation in a cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TtiScheduleContext<T> {
    /// Mean of `a_i W_i` over backlogged real-time flows.
    pub aw_bar: T,
    pub n_rt: usize,
    /// Largest HOL delay among real-time flows, seconds.
    pub w_max_hol: T,
}

/// Arithmetic mean of `a_i W_i`; 0 for an empty set.
pub fn compute_aw_bar<T: Scalar, I: IntoIterator<Item = T>>(rt_alpha_w: I) -> T {
    let (sum, n) = rt_alpha_w
        .into_iter()
        .fold((T::zero(), 0u64), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        T::zero()
    } else {
        sum / T::from_count(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPfState<T> {
    pub w: T,
    pub epsilon: T,
    pub k_const: T,
    pub tau_max: T,
    /// Smoothed number of packets queued in the cell, M(t).
    pub avg_buffer_packets: T,
    pub window_tc: T,
}

impl<T: Scalar> ExpPfState<T> {
    pub fn new(w0: T, epsilon: T, k_const: T, tau_max: T, window_tc: T) -> Self {
        Self {
            w: w0,
            epsilon,
            k_const,
            tau_max,
            avg_buffer_packets: T::zero(),
            window_tc,
        }
    }

    /// Steps `w` down by ε when the worst real-time HOL delay exceeds `tau_max`,
    /// up by ε/k when below it. `w` never falls under ε.
    pub fn update_w(&mut self, w_max_hol: T, tau_max: T) -> T {
        if w_max_hol > tau_max {
            self.w = self.w - self.epsilon;
        } else if w_max_hol < tau_max {
            self.w = self.w + self.epsilon / self.k_const;
        }
        self.w = self.w.max(self.epsilon);
        self.w
    }

    pub fn update_avg_buffer(&mut self, queued_packets: usize) -> T {
        let inv = T::one() / self.window_tc;
        self.avg_buffer_packets =
            (T::one() - inv) * self.avg_buffer_packets + inv * T::from_count(queued_packets as u64);
        self.avg_buffer_packets
    }

    fn m_divisor(&self) -> T {
        self.avg_buffer_packets.max(T::one())
    }
}

/// Real-time branch: `exp((aW - aW̄) / (1 + sqrt(aW̄))) r / R`.
/// Non-real-time branch: `(w / M) r / R`.
pub fn exppf_metric<T: Scalar>(
    alpha_w: T,
    is_realtime: bool,
    achievable_rate: T,
    avg_rate: T,
    ctx: &TtiScheduleContext<T>,
    state: &ExpPfState<T>,
) -> T {
    let pf = pf_metric(achievable_rate, avg_rate);
    if is_realtime {
        let aw_bar = ctx.aw_bar.max(T::zero());
        ((alpha_w - aw_bar) / (T::one() + aw_bar.sqrt())).exp() * pf
    } else {
        state.w / state.m_divisor() * pf
    }
}
