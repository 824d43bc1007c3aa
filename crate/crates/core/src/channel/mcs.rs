//! Adaptive modulation and coding table.
//!
//! Rate per RB-pair and TTI is `bits/symbol * 7 symbols/slot * 2 slots/TTI
//! * 12 subcarriers/RB * code rate`. Per 1 ms TTI, bits/TTI equals kbps.

use crate::scalar::Scalar;

pub const SYMBOLS_PER_SLOT: u32 = 7;
pub const SLOTS_PER_TTI: u32 = 2;
pub const SUBCARRIERS_PER_RB: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modulation {
    Qpsk,
    Qam16,
    Qam64,
}

impl Modulation {
    pub const fn bits_per_symbol(self) -> u32 {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsEntry {
    pub index: u8,
    pub min_snr_db: f64,
    pub modulation: Modulation,
    /// Code rate as numerator/denominator so the rate stays an exact integer.
    pub code_rate: (u32, u32),
    /// Data-rate column of the published mapping table, kbps.
    pub table_rate_kbps: u32,
}

impl McsEntry {
    pub const fn modulation_bits(&self) -> u32 {
        self.modulation.bits_per_symbol()
    }

    pub fn code_rate_fraction<T: Scalar>(&self) -> T {
        T::from_count(self.code_rate.0 as u64) / T::from_count(self.code_rate.1 as u64)
    }

    /// Bits carried by one RB-pair in one TTI.
    pub const fn rb_pair_rate_bits(&self) -> u32 {
        let raw = self.modulation_bits() * SYMBOLS_PER_SLOT * SLOTS_PER_TTI * SUBCARRIERS_PER_RB;
        raw * self.code_rate.0 / self.code_rate.1
    }
}

const fn row(
    index: u8,
    min_snr_db: f64,
    modulation: Modulation,
    code_rate: (u32, u32),
    table_rate_kbps: u32,
) -> McsEntry {
    McsEntry {
        index,
        min_snr_db,
        modulation,
        code_rate,
        table_rate_kbps,
    }
}

/// Ordered by increasing threshold and rate.
pub const MCS_TABLE: [McsEntry; 8] = [
    row(0, 1.7, Modulation::Qpsk, (1, 2), 168),
    row(1, 3.7, Modulation::Qpsk, (2, 3), 224),
    row(2, 4.5, Modulation::Qpsk, (3, 4), 252),
    row(3, 7.2, Modulation::Qam16, (1, 2), 336),
    row(4, 9.5, Modulation::Qam16, (2, 3), 448),
    row(5, 10.7, Modulation::Qam16, (3, 4), 504),
    row(6, 14.8, Modulation::Qam64, (2, 3), 672),
    row(7, 16.1, Modulation::Qam64, (3, 4), 756),
];

pub const MAX_RB_PAIR_BITS: u32 = MCS_TABLE[MCS_TABLE.len() - 1].rb_pair_rate_bits();

/// Highest-rate entry whose threshold does not exceed `snr_db`.
/// `None` means the link cannot carry data on this RB.
pub fn snr_to_mcs<T: Scalar>(snr_db: T) -> Option<&'static McsEntry> {
    let snr = snr_db.to_f64_lossy();
    if snr.is_nan() {
        return None;
    }
    MCS_TABLE.iter().rev().find(|e| e.min_snr_db <= snr)
}

/// Bits per TTI achievable on one RB-pair at `snr_db`; 0 below the lowest threshold.
pub fn rb_pair_bits_at<T: Scalar>(snr_db: T) -> u32 {
    snr_to_mcs(snr_db).map_or(0, McsEntry::rb_pair_rate_bits)
}

pub fn rb_pair_rate_bits(mcs: &McsEntry) -> u32 {
    mcs.rb_pair_rate_bits()
}
