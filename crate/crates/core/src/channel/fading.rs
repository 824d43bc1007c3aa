//! Time-correlated Rayleigh fading by sum of sinusoids.
//!
//! Each stream is `h(t) = N^-1/2 * sum_n exp(j(2 pi f_d cos(a_n) t + phi_n))`
//! with arrival angles `a_n = (2 pi n - pi + theta) / N` and independent
//! uniform phases. E|h|^2 = 1 and the ensemble autocorrelation of h is
//! J0(2 pi f_d tau).

use rand::Rng;

use crate::scalar::{linear_to_db, Scalar};

pub const SPEED_OF_LIGHT_MPS: f64 = 299_792_458.0;

/// Maximum Doppler shift for a terminal moving at `speed_mps`.
pub fn doppler_hz<T: Scalar>(speed_mps: T, carrier_hz: T) -> T {
    speed_mps * carrier_hz / T::lit(SPEED_OF_LIGHT_MPS)
}

#[derive(Debug, Clone)]
pub struct JakesProcess<T> {
    /// Angular Doppler of each oscillator, rad/s.
    omega: Vec<T>,
    phase: Vec<T>,
}

impl<T: Scalar> JakesProcess<T> {
    pub fn new<R: Rng + ?Sized>(doppler_hz: T, oscillators: usize, rng: &mut R) -> Self {
        assert!(oscillators > 0, "fading process needs at least one oscillator");
        let two_pi = T::TAU();
        let n = T::from_count(oscillators as u64);
        let theta = T::lit(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI));
        let wd = two_pi * doppler_hz;
        let mut omega = Vec::with_capacity(oscillators);
        let mut phase = Vec::with_capacity(oscillators);
        for i in 1..=oscillators {
            let i = T::from_count(i as u64);
            let alpha = (two_pi * i - T::PI() + theta) / n;
            omega.push(wd * alpha.cos());
            phase.push(T::lit(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)));
        }
        Self { omega, phase }
    }

    pub fn oscillators(&self) -> usize {
        self.omega.len()
    }

    /// Complex gain (re, im) at time `t` seconds.
    pub fn gain(&self, t: T) -> (T, T) {
        let mut re = T::zero();
        let mut im = T::zero();
        for (w, p) in self.omega.iter().zip(&self.phase) {
            let (s, c) = (*w * t + *p).sin_cos();
            re = re + c;
            im = im + s;
        }
        let norm = T::from_count(self.omega.len() as u64).sqrt();
        (re / norm, im / norm)
    }

    /// Power gain |h(t)|^2.
    pub fn power_gain(&self, t: T) -> T {
        let (re, im) = self.gain(t);
        re * re + im * im
    }

    pub fn gain_db(&self, t: T) -> T {
        linear_to_db(self.power_gain(t).max(T::min_positive_value()))
    }
}

/// Independent fading streams, one per (UE, RB-pair).
#[derive(Debug, Clone)]
pub struct FadingField<T> {
    rb_count: usize,
    streams: Vec<JakesProcess<T>>,
}

impl<T: Scalar> FadingField<T> {
    /// Streams are drawn UE-major, RB-minor from `rng`.
    pub fn new<R: Rng + ?Sized>(
        ue_count: usize,
        rb_count: usize,
        doppler_hz: T,
        oscillators: usize,
        rng: &mut R,
    ) -> Self {
        let streams = (0..ue_count * rb_count)
            .map(|_| JakesProcess::new(doppler_hz, oscillators, rng))
            .collect();
        Self { rb_count, streams }
    }

    pub fn stream(&self, ue: usize, rb: usize) -> &JakesProcess<T> {
        &self.streams[ue * self.rb_count + rb]
    }

    pub fn power_gain(&self, ue: usize, rb: usize, t: T) -> T {
        self.stream(ue, rb).power_gain(t)
    }

    /// Fading term in dB for `(ue, rb)` at time `t`.
    pub fn jakes_fading_db(&self, ue: usize, rb: usize, t: T) -> T {
        self.stream(ue, rb).gain_db(t)
    }
}
