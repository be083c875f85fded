//! Synthetic inputs shared by the benchmarks.

use knock_core::{KIDataset, PressureTrace};

/// One 720-degree cycle at 0.1 degree resolution (90 kHz at 1500 rpm):
/// compression hump plus a 10 kHz knock burst inside the analysis window.
pub fn bench_trace() -> PressureTrace {
    let n = 7200;
    let fs = 90_000.0;
    let mut angles = Vec::with_capacity(n);
    let mut pressure = Vec::with_capacity(n);
    for i in 0..n {
        let a = -360.0 + 0.1 * i as f64;
        let t = i as f64 / fs;
        let mut p = 1.0 + 28.0 * (-(a / 40.0) * (a / 40.0)).exp();
        p += 0.4
            * (-((a - 45.0) / 10.0f64).powi(2)).exp()
            * (2.0 * std::f64::consts::PI * 10_000.0 * t).sin();
        angles.push(a);
        pressure.push(p);
    }
    PressureTrace::new(0, angles, pressure, 1500.0, 20.0).unwrap()
}

/// A full operating point's worth of mixture draws.
pub fn bench_dataset(n: usize, seed: u64) -> KIDataset {
    knock_core::sample_mixture(&knock_core::canonical_mixture(), n, seed).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(bench_trace().pressure_bar().len(), 7200);
        assert_eq!(bench_dataset(1116, 1).len(), 1116);
    }
}
