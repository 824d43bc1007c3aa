//! Downlink packet scheduling: per-RB-pair metric evaluation and grant loop.

mod metrics;

pub use metrics::{
    compute_aw_bar, exppf_metric, mlwdf_alpha, mlwdf_metric, pf_metric, ExpPfState, LogBase,
    PerFlowSchedState, TtiScheduleContext, STARTUP_AVG_RATE,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::time::{SimTime, TTI};
use crate::traffic::{Delivery, FlowId, FlowQueue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Pf,
    Mlwdf,
    Exppf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Pf, Algorithm::Mlwdf, Algorithm::Exppf];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Pf => "pf",
            Algorithm::Mlwdf => "mlwdf",
            Algorithm::Exppf => "exppf",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pf" => Ok(Algorithm::Pf),
            "mlwdf" | "m-lwdf" => Ok(Algorithm::Mlwdf),
            "exppf" | "exp/pf" | "exp-pf" => Ok(Algorithm::Exppf),
            other => Err(format!("unknown scheduler {other:?} (expected pf, mlwdf or exppf)")),
        }
    }
}

/// A flow competing for RB-pairs in one cell during one TTI.
pub struct Candidate<'a, T> {
    pub queue: &'a mut FlowQueue,
    pub state: &'a PerFlowSchedState<T>,
    /// Achievable bits per TTI on each RB-pair; 0 where no MCS fits.
    pub rb_bits: &'a [u32],
    /// M-LWDF weight `a_i` of the flow.
    pub alpha: T,
}

impl<T> Candidate<'_, T> {
    pub fn flow_id(&self) -> FlowId {
        self.queue.flow_id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grant {
    pub flow_id: FlowId,
    /// RB-pair capacity at the granted flow's MCS, bits.
    pub capacity_bits: u32,
    pub served_bits: u32,
}

/// Outcome of one TTI in one cell.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RbAllocation {
    /// Indexed by RB-pair.
    pub grants: Vec<Option<Grant>>,
    pub delivered: Vec<Delivery>,
}

impl RbAllocation {
    pub fn served_bits(&self) -> u64 {
        self.grants.iter().flatten().map(|g| g.served_bits as u64).sum()
    }

    pub fn served_bits_of(&self, flow: FlowId) -> u64 {
        self.grants
            .iter()
            .flatten()
            .filter(|g| g.flow_id == flow)
            .map(|g| g.served_bits as u64)
            .sum()
    }

    pub fn granted_rbs(&self) -> usize {
        self.grants.iter().flatten().count()
    }
}

impl<T: Scalar> TtiScheduleContext<T> {
    /// Gathers `aW̄`, `N_RT` and `W_max` from the backlogged real-time candidates.
    pub fn from_candidates(candidates: &[Candidate<'_, T>], now: SimTime) -> Self {
        let mut aw = Vec::new();
        let mut w_max = T::zero();
        for c in candidates.iter().filter(|c| c.queue.qos.is_realtime && !c.queue.is_empty()) {
            let w = T::lit(c.queue.hol_delay(now).as_secs_f64());
            aw.push(c.alpha * w);
            w_max = w_max.max(w);
        }
        Self {
            aw_bar: compute_aw_bar(aw.iter().copied()),
            n_rt: aw.len(),
            w_max_hol: w_max,
        }
    }
}

/// Grants RB-pairs in index order to the candidate with the largest
/// `metric(candidate, achievable_rate_bps, now)`; ties go to the lowest flow id.
///
/// Flows with an empty queue or no usable MCS on an RB-pair do not compete
/// for it. A flow drained mid-TTI stops competing for later RB-pairs.
pub fn allocate_rbs<T, F>(
    candidates: &mut [Candidate<'_, T>],
    rb_count: usize,
    now: SimTime,
    mut metric: F,
) -> RbAllocation
where
    T: Scalar,
    F: FnMut(&Candidate<'_, T>, T) -> T,
{
    let tti_s = T::lit(TTI.as_secs_f64());
    let mut alloc = RbAllocation {
        grants: vec![None; rb_count],
        delivered: Vec::new(),
    };
    for rb in 0..rb_count {
        let mut best: Option<(usize, T)> = None;
        for (idx, c) in candidates.iter().enumerate() {
            let bits = c.rb_bits.get(rb).copied().unwrap_or(0);
            if bits == 0 || c.queue.is_empty() {
                continue;
            }
            let m = metric(c, T::from_count(bits as u64) / tti_s);
            let better = match best {
                None => true,
                Some((b, bm)) => {
                    m > bm || (m == bm && c.flow_id() < candidates[b].flow_id())
                }
            };
            if better {
                best = Some((idx, m));
            }
        }
        let Some((idx, _)) = best else { continue };
        let c = &mut candidates[idx];
        let capacity = c.rb_bits[rb];
        let out = c.queue.drain(capacity as u64, now);
        alloc.grants[rb] = Some(Grant {
            flow_id: c.queue.flow_id,
            capacity_bits: capacity,
            served_bits: out.served_bits as u32,
        });
        alloc.delivered.extend(out.delivered);
    }
    alloc
}

/// One TTI of the chosen scheduler in one cell.
pub fn schedule_tti<T: Scalar>(
    algorithm: Algorithm,
    candidates: &mut [Candidate<'_, T>],
    rb_count: usize,
    now: SimTime,
    exp_state: &ExpPfState<T>,
) -> (RbAllocation, TtiScheduleContext<T>) {
    let ctx = TtiScheduleContext::from_candidates(candidates, now);
    let hol = |c: &Candidate<'_, T>| T::lit(c.queue.hol_delay(now).as_secs_f64());
    let alloc = match algorithm {
        Algorithm::Pf => allocate_rbs(candidates, rb_count, now, |c, r| {
            pf_metric(r, c.state.avg_rate)
        }),
        Algorithm::Mlwdf => allocate_rbs(candidates, rb_count, now, |c, r| {
            mlwdf_metric(c.alpha, hol(c), r, c.state.avg_rate)
        }),
        Algorithm::Exppf => allocate_rbs(candidates, rb_count, now, |c, r| {
            exppf_metric(
                c.alpha * hol(c),
                c.queue.qos.is_realtime,
                r,
                c.state.avg_rate,
                &ctx,
                exp_state,
            )
        }),
    };
    (alloc, ctx)
}
