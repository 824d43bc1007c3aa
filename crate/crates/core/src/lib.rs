//! System-level LTE downlink simulator.
//!
//! A single macro cell, optionally overlaid with low-power pico cells on the
//! same carrier, serves mobile users carrying video and VoIP flows. Each 1 ms
//! TTI the serving eNB grants its RB-pairs with a proportional fair, M-LWDF
//! or EXP/PF scheduler from ideal per-RB SINR reports.
//!
//! The link-budget, scheduling-metric and KPI formulas are generic over
//! [`Scalar`] (`f32` or `f64`); the simulation engine runs in [`Real`].

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod output;
pub mod scalar;
pub mod scheduler;
pub mod sweep;
pub mod time;
pub mod topology;
pub mod traffic;

pub use config::{RunConfig, SweepSpec};
pub use engine::{run_simulation, RunResult, Simulation};
pub use error::{Error, Result};
pub use scalar::Scalar;
pub use scheduler::Algorithm;
pub use time::SimTime;
pub use topology::ScenarioKind;

/// Scalar type used by the simulation engine.
pub type Real = f64;

pub type FlowSchedState = scheduler::PerFlowSchedState<Real>;
pub type ExpPfState = scheduler::ExpPfState<Real>;
pub type TtiScheduleContext = scheduler::TtiScheduleContext<Real>;
pub type LinkState = channel::LinkState<Real>;
pub type PropagationLoss = channel::PropagationLoss<Real>;
pub type FadingField = channel::FadingField<Real>;
