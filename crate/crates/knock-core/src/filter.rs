//! Linear-phase FIR band-pass filtering for knock-frequency isolation.
//!
//! The filter is a Kaiser-windowed sinc band-pass. Taps are symmetric, so a
//! centered convolution has exactly zero phase; the signal is reflect-padded
//! by one filter length before convolution and trimmed afterwards, keeping
//! output length equal to input length. The tap sum is forced to exactly
//! zero, so constant (DC) inputs map to exactly zero output.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Extra stop-band attenuation designed in beyond the requested floor,
/// absorbing the error of the Kaiser order estimate.
const DESIGN_MARGIN_DB: f64 = 6.0;

/// Band-pass filter requirements.
///
/// `transition_fraction` sets the width of each transition band as a fraction
/// of its cut frequency: the pass-band is guaranteed flat (within ripple) on
/// `[low_cut*(1+tf), high_cut*(1-tf)]` and the stop-band attenuation of at
/// least `attenuation_floor_db` holds outside `[low_cut*(1-tf), high_cut*(1+tf)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub low_cut_hz: f64,
    pub high_cut_hz: f64,
    pub attenuation_floor_db: f64,
    pub transition_fraction: f64,
}

impl FilterSpec {
    pub const DEFAULT_ATTENUATION_DB: f64 = 40.0;
    pub const DEFAULT_TRANSITION_FRACTION: f64 = 0.15;

    /// Band-pass spec with default attenuation floor and transition width.
    pub fn new(low_cut_hz: f64, high_cut_hz: f64) -> Result<Self> {
        Self::with_shape(
            low_cut_hz,
            high_cut_hz,
            Self::DEFAULT_ATTENUATION_DB,
            Self::DEFAULT_TRANSITION_FRACTION,
        )
    }

    pub fn with_shape(
        low_cut_hz: f64,
        high_cut_hz: f64,
        attenuation_floor_db: f64,
        transition_fraction: f64,
    ) -> Result<Self> {
        if !(low_cut_hz > 0.0 && low_cut_hz.is_finite()) || !(high_cut_hz > low_cut_hz && high_cut_hz.is_finite()) {
            return Err(Error::Domain(format!(
                "band edges must satisfy 0 < low < high, got {low_cut_hz}..{high_cut_hz} Hz"
            )));
        }
        if !(attenuation_floor_db > 0.0 && attenuation_floor_db.is_finite()) {
            return Err(Error::Domain(format!(
                "attenuation floor must be positive, got {attenuation_floor_db} dB"
            )));
        }
        if !(transition_fraction > 0.0 && transition_fraction < 1.0) {
            return Err(Error::Domain(format!(
                "transition fraction must lie in (0, 1), got {transition_fraction}"
            )));
        }
        Ok(Self {
            low_cut_hz,
            high_cut_hz,
            attenuation_floor_db,
            transition_fraction,
        })
    }
}

/// A designed band-pass filter bound to one sample rate.
#[derive(Debug, Clone)]
pub struct BandpassFilter {
    taps: Vec<f64>,
    sample_rate_hz: f64,
}

/// Design a zero-phase FIR band-pass for the given spec and sample rate.
///
/// The filter order follows the Kaiser estimate sized on the narrower of the
/// two transition bands, with a fixed design margin above the attenuation
/// floor.
pub fn design_bandpass(spec: &FilterSpec, sample_rate_hz: f64) -> Result<BandpassFilter> {
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(Error::Domain(format!(
            "sample rate must be positive, got {sample_rate_hz} Hz"
        )));
    }
    if sample_rate_hz / 2.0 <= spec.high_cut_hz {
        return Err(Error::Precondition(format!(
            "Nyquist frequency {} Hz does not exceed high cut {} Hz",
            sample_rate_hz / 2.0,
            spec.high_cut_hz
        )));
    }

    let design_db = spec.attenuation_floor_db + DESIGN_MARGIN_DB;
    // Full transition width at the low edge is 2*tf*low_cut, which is the
    // narrower of the two bands since low_cut < high_cut.
    let transition_hz = 2.0 * spec.transition_fraction * spec.low_cut_hz;
    let delta_omega = 2.0 * PI * transition_hz / sample_rate_hz;
    let beta = kaiser_beta(design_db);
    let mut len = if design_db > 21.0 {
        ((design_db - 7.95) / (2.285 * delta_omega)).ceil() as usize + 1
    } else {
        (5.79 / delta_omega).ceil() as usize + 1
    };
    len = len.max(11);
    if len % 2 == 0 {
        len += 1;
    }

    let mid = (len - 1) / 2;
    let omega_low = 2.0 * PI * spec.low_cut_hz / sample_rate_hz;
    let omega_high = 2.0 * PI * spec.high_cut_hz / sample_rate_hz;
    let i0_beta = bessel_i0(beta);
    let mut taps: Vec<f64> = (0..len)
        .map(|i| {
            let k = i as f64 - mid as f64;
            let ideal = if k == 0.0 {
                (omega_high - omega_low) / PI
            } else {
                ((omega_high * k).sin() - (omega_low * k).sin()) / (PI * k)
            };
            let r = 2.0 * i as f64 / (len - 1) as f64 - 1.0;
            let window = bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
            ideal * window
        })
        .collect();

    // Force an exact DC null: with reflect padding a constant input then
    // yields exactly zero at every output sample.
    let mean = taps.iter().sum::<f64>() / len as f64;
    for t in &mut taps {
        *t -= mean;
    }

    Ok(BandpassFilter {
        taps,
        sample_rate_hz,
    })
}

impl BandpassFilter {
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Magnitude of the frequency response at `freq_hz`.
    pub fn magnitude_response(&self, freq_hz: f64) -> f64 {
        let omega = 2.0 * PI * freq_hz / self.sample_rate_hz;
        let (mut re, mut im) = (0.0, 0.0);
        for (k, &h) in self.taps.iter().enumerate() {
            re += h * (omega * k as f64).cos();
            im -= h * (omega * k as f64).sin();
        }
        re.hypot(im)
    }

    /// Filter a signal with zero phase; output length equals input length.
    pub fn apply(&self, samples: &[f64]) -> Vec<f64> {
        let n = samples.len();
        if n == 0 {
            return Vec::new();
        }
        let len = self.taps.len();
        let mid = (len - 1) / 2;
        let pad = len;
        let mut padded = Vec::with_capacity(n + 2 * pad);
        for t in -(pad as isize)..(n + pad) as isize {
            padded.push(samples[mirror_index(t, n)]);
        }
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let base = i + pad - mid;
            let mut acc = 0.0;
            for (k, &h) in self.taps.iter().enumerate() {
                acc += h * padded[base + k];
            }
            out.push(acc);
        }
        out
    }
}

/// Reflect an out-of-range index back into `[0, n)` without repeating the
/// boundary sample (even, whole-sample symmetry).
fn mirror_index(mut t: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    loop {
        if t < 0 {
            t = -t;
        } else if t >= n {
            t = 2 * n - 2 - t;
        } else {
            return t as usize;
        }
    }
}

/// Zero-phase band-pass of `samples`; designs the filter and applies it.
pub fn bandpass_filter(samples: &[f64], sample_rate_hz: f64, spec: &FilterSpec) -> Result<Vec<f64>> {
    Ok(design_bandpass(spec, sample_rate_hz)?.apply(samples))
}

fn kaiser_beta(attenuation_db: f64) -> f64 {
    if attenuation_db > 50.0 {
        0.1102 * (attenuation_db - 8.7)
    } else if attenuation_db >= 21.0 {
        0.5842 * (attenuation_db - 21.0).powf(0.4) + 0.07886 * (attenuation_db - 21.0)
    } else {
        0.0
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-16 {
            break;
        }
    }
    sum
}
