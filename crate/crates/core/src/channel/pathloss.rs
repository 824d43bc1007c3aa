use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest eNB-UE separation fed to the distance law, in km (1 m).
pub const MIN_DISTANCE_KM: f64 = 0.001;

/// Urban macro distance law intercept, dB at 1 km.
pub const PATHLOSS_INTERCEPT_DB: f64 = 128.1;
/// Urban macro distance law slope, dB per decade of km.
pub const PATHLOSS_SLOPE_DB: f64 = 37.6;
pub const PENETRATION_LOSS_DB: f64 = 10.0;
pub const SHADOWING_STD_DB: f64 = 10.0;

/// Distance-dependent loss `128.1 + 37.6 log10(d)` with `d` in kilometres.
///
/// Distances in `[0, 1 m)` are clamped to the 1 m floor. Negative or
/// non-finite input is rejected.
pub fn pathloss_db<T: Scalar>(d_km: T) -> Result<T> {
    if !d_km.is_finite() || d_km < T::zero() {
        return Err(Error::InvalidGeometry(format!(
            "eNB-UE distance must be finite and non-negative, got {d_km} km"
        )));
    }
    let d = d_km.max(T::lit(MIN_DISTANCE_KM));
    Ok(T::lit(PATHLOSS_INTERCEPT_DB) + T::lit(PATHLOSS_SLOPE_DB) * d.log10())
}

/// One zero-mean log-normal shadowing draw, returned in dB.
pub fn shadowing_sample<T: Scalar, R: Rng + ?Sized>(rng: &mut R, std_db: T) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::lit(z) * std_db
}

/// Large-scale loss components between one cell and one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationLoss<T> {
    pub pathloss_db: T,
    pub penetration_db: T,
    pub shadow_db: T,
    /// Small-scale term for one RB, 0 when fading is evaluated separately.
    pub multipath_db: T,
}

impl<T: Scalar> PropagationLoss<T> {
    pub fn large_scale(d_km: T, penetration_db: T, shadow_db: T) -> Result<Self> {
        Ok(Self {
            pathloss_db: pathloss_db(d_km)?,
            penetration_db,
            shadow_db,
            multipath_db: T::zero(),
        })
    }

    /// Total attenuation in dB. A positive shadow draw is treated as extra loss.
    pub fn total_db(&self) -> T {
        self.pathloss_db + self.penetration_db + self.shadow_db - self.multipath_db
    }

    pub fn received_dbm(&self, tx_dbm: T) -> T {
        tx_dbm - self.total_db()
    }
}
