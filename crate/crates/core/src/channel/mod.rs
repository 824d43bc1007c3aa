//! Link budget: large-scale loss, small-scale fading, SINR and AMC.

mod fading;
mod mcs;
mod pathloss;

pub use fading::{doppler_hz, FadingField, JakesProcess, SPEED_OF_LIGHT_MPS};
pub use mcs::{
    rb_pair_bits_at, rb_pair_rate_bits, snr_to_mcs, McsEntry, Modulation, MAX_RB_PAIR_BITS,
    MCS_TABLE, SLOTS_PER_TTI, SUBCARRIERS_PER_RB, SYMBOLS_PER_SLOT,
};
pub use pathloss::{
    pathloss_db, shadowing_sample, PropagationLoss, MIN_DISTANCE_KM, PATHLOSS_INTERCEPT_DB,
    PATHLOSS_SLOPE_DB, PENETRATION_LOSS_DB, SHADOWING_STD_DB,
};

use crate::scalar::{db_to_linear, linear_to_db, Scalar};

/// Bandwidth of one RB, Hz.
pub const RB_BANDWIDTH_HZ: f64 = 180_000.0;

/// Thermal noise plus receiver noise figure over `bandwidth_hz`, dBm.
pub fn noise_dbm<T: Scalar>(density_dbm_per_hz: T, noise_figure_db: T, bandwidth_hz: T) -> T {
    density_dbm_per_hz + linear_to_db(bandwidth_hz) + noise_figure_db
}

/// Sum of powers given in dBm, in mW.
pub fn sum_mw<T: Scalar>(powers_dbm: &[T]) -> T {
    powers_dbm.iter().fold(T::zero(), |acc, p| acc + db_to_linear(*p))
}

/// Serving power over interference plus noise, combined in linear mW.
pub fn sinr_db<T: Scalar>(serving_rx_dbm: T, interferer_rx_dbm: &[T], noise_dbm: T) -> T {
    let denom = sum_mw(interferer_rx_dbm) + db_to_linear(noise_dbm);
    serving_rx_dbm - linear_to_db(denom)
}

/// Idealised per-RB channel report of one UE toward its serving cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState<T> {
    pub ue_id: usize,
    pub cell_id: usize,
    pub sinr_per_rb_db: Vec<T>,
}

impl<T: Scalar> LinkState<T> {
    /// Bits per TTI the UE can receive on each RB-pair.
    pub fn rb_bits(&self) -> Vec<u32> {
        self.sinr_per_rb_db.iter().map(|s| rb_pair_bits_at(*s)).collect()
    }
}
