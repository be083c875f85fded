//! Cylinder-pressure trace ingestion and per-cycle knock-intensity extraction.
//!
//! A knock-intensity (KI) value is computed from one combustion cycle in
//! three steps: select a crank-angle window relative to spark timing,
//! band-pass the pressure signal in the knock frequency band, and take the
//! maximum absolute value of the filtered signal inside the window.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::filter::{bandpass_filter, FilterSpec};

/// Smallest reportable KI. Band-passed synthetic signals can be exactly
/// zero, but downstream lognormal models require strictly positive samples.
pub const KI_FLOOR: f64 = 1e-6;

/// Tolerance on crank-angle spacing uniformity, in degrees.
pub const ANGLE_SPACING_TOL_DEG: f64 = 1e-9;

/// One combustion cycle's crank-angle-indexed pressure samples.
///
/// Crank angles are degrees relative to firing TDC (negative = before TDC);
/// spark timing is degrees before TDC (positive = advanced).
#[derive(Debug, Clone, PartialEq)]
pub struct PressureTrace {
    cycle_id: u64,
    crank_angle_deg: Vec<f64>,
    pressure_bar: Vec<f64>,
    rpm: f64,
    spark_timing_btdc: f64,
}

impl PressureTrace {
    pub fn new(
        cycle_id: u64,
        crank_angle_deg: Vec<f64>,
        pressure_bar: Vec<f64>,
        rpm: f64,
        spark_timing_btdc: f64,
    ) -> Result<Self> {
        if crank_angle_deg.len() < 2 {
            return Err(Error::Format(format!(
                "cycle {cycle_id}: need at least 2 samples, got {}",
                crank_angle_deg.len()
            )));
        }
        if crank_angle_deg.len() != pressure_bar.len() {
            return Err(Error::Format(format!(
                "cycle {cycle_id}: {} angles but {} pressure samples",
                crank_angle_deg.len(),
                pressure_bar.len()
            )));
        }
        if !(rpm > 0.0 && rpm.is_finite()) {
            return Err(Error::Format(format!("cycle {cycle_id}: rpm must be positive, got {rpm}")));
        }
        if crank_angle_deg.iter().any(|a| !a.is_finite())
            || pressure_bar.iter().any(|p| !p.is_finite())
            || !spark_timing_btdc.is_finite()
        {
            return Err(Error::Format(format!("cycle {cycle_id}: non-finite sample")));
        }
        let step = crank_angle_deg[1] - crank_angle_deg[0];
        if step <= 0.0 {
            return Err(Error::Format(format!(
                "cycle {cycle_id}: crank angles must be strictly increasing"
            )));
        }
        for w in crank_angle_deg.windows(2) {
            let d = w[1] - w[0];
            if (d - step).abs() > ANGLE_SPACING_TOL_DEG {
                return Err(Error::Format(format!(
                    "cycle {cycle_id}: non-uniform crank-angle spacing ({d} deg vs {step} deg)"
                )));
            }
        }
        Ok(Self {
            cycle_id,
            crank_angle_deg,
            pressure_bar,
            rpm,
            spark_timing_btdc,
        })
    }

    pub fn cycle_id(&self) -> u64 {
        self.cycle_id
    }

    pub fn crank_angle_deg(&self) -> &[f64] {
        &self.crank_angle_deg
    }

    pub fn pressure_bar(&self) -> &[f64] {
        &self.pressure_bar
    }

    pub fn rpm(&self) -> f64 {
        self.rpm
    }

    pub fn spark_timing_btdc(&self) -> f64 {
        self.spark_timing_btdc
    }

    /// Angular resolution in degrees per sample.
    pub fn resolution_deg(&self) -> f64 {
        let n = self.crank_angle_deg.len();
        (self.crank_angle_deg[n - 1] - self.crank_angle_deg[0]) / (n - 1) as f64
    }
}

/// An operating point's ordered sequence of per-cycle KI values.
///
/// Order is acquisition order; every value is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct KIDataset {
    pub label: String,
    ki: Vec<f64>,
    pub metadata: BTreeMap<String, String>,
}

impl KIDataset {
    pub fn new(label: impl Into<String>, ki: Vec<f64>, metadata: BTreeMap<String, String>) -> Result<Self> {
        for (i, &v) in ki.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("ki[{i}] = {v} is not strictly positive")));
            }
        }
        Ok(Self {
            label: label.into(),
            ki,
            metadata,
        })
    }

    pub fn from_values(label: impl Into<String>, ki: Vec<f64>) -> Result<Self> {
        Self::new(label, ki, BTreeMap::new())
    }

    pub fn ki(&self) -> &[f64] {
        &self.ki
    }

    pub fn len(&self) -> usize {
        self.ki.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ki.is_empty()
    }
}

/// Trace-file formats understood by [`load_traces`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    /// Comment headers `# rpm=`, `# spark_btdc=`, `# resolution_deg=` followed
    /// by `cycle_id,crank_angle_deg,pressure_bar` rows.
    Csv,
}

/// Load all cycles from a trace file; one [`PressureTrace`] per cycle block.
pub fn load_traces(path: impl AsRef<Path>, format: TraceFormat) -> Result<Vec<PressureTrace>> {
    match format {
        TraceFormat::Csv => {
            let file = File::open(path.as_ref())?;
            parse_traces_csv(BufReader::new(file))
        }
    }
}

/// Parse the trace CSV format from any reader (see [`TraceFormat::Csv`]).
pub fn parse_traces_csv(reader: impl BufRead) -> Result<Vec<PressureTrace>> {
    let mut rpm: Option<f64> = None;
    let mut spark: Option<f64> = None;
    let mut resolution: Option<f64> = None;

    let mut traces = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();
    let mut current: Option<(u64, Vec<f64>, Vec<f64>)> = None;

    let flush = |block: Option<(u64, Vec<f64>, Vec<f64>)>,
                     traces: &mut Vec<PressureTrace>,
                     rpm: f64,
                     spark: f64,
                     resolution: f64|
     -> Result<()> {
        if let Some((id, angles, pressures)) = block {
            let trace = PressureTrace::new(id, angles, pressures, rpm, spark)?;
            if (trace.resolution_deg() - resolution).abs() > ANGLE_SPACING_TOL_DEG {
                return Err(Error::Format(format!(
                    "cycle {id}: angle spacing {} deg disagrees with header resolution_deg={resolution}",
                    trace.resolution_deg()
                )));
            }
            traces.push(trace);
        }
        Ok(())
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((key, value)) = rest.split_once('=') {
                let parsed: f64 = value.trim().parse().map_err(|_| {
                    Error::Format(format!("line {}: bad header value `{rest}`", lineno + 1))
                })?;
                match key.trim() {
                    "rpm" => rpm = Some(parsed),
                    "spark_btdc" => spark = Some(parsed),
                    "resolution_deg" => resolution = Some(parsed),
                    other => {
                        return Err(Error::Format(format!(
                            "line {}: unknown header `{other}`",
                            lineno + 1
                        )))
                    }
                }
            }
            continue;
        }
        if line.eq_ignore_ascii_case("cycle_id,crank_angle_deg,pressure_bar") {
            continue;
        }

        let (rpm_v, spark_v, res_v) = match (rpm, spark, resolution) {
            (Some(r), Some(s), Some(d)) => (r, s, d),
            _ => {
                return Err(Error::Format(format!(
                    "line {}: data row before rpm/spark_btdc/resolution_deg headers",
                    lineno + 1
                )))
            }
        };

        let mut fields = line.split(',');
        let (id_s, angle_s, pressure_s) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => {
                return Err(Error::Format(format!(
                    "line {}: expected `cycle_id,crank_angle_deg,pressure_bar`",
                    lineno + 1
                )))
            }
        };
        let id: u64 = id_s
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad cycle id `{id_s}`", lineno + 1)))?;
        let angle: f64 = angle_s
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad crank angle `{angle_s}`", lineno + 1)))?;
        let pressure: f64 = pressure_s
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad pressure `{pressure_s}`", lineno + 1)))?;

        match &mut current {
            Some((cur_id, angles, pressures)) if *cur_id == id => {
                angles.push(angle);
                pressures.push(pressure);
            }
            _ => {
                flush(current.take(), &mut traces, rpm_v, spark_v, res_v)?;
                if !seen_ids.insert(id) {
                    return Err(Error::Format(format!(
                        "line {}: cycle {id} appears in two separate blocks",
                        lineno + 1
                    )));
                }
                current = Some((id, vec![angle], vec![pressure]));
            }
        }
    }

    match (rpm, spark, resolution) {
        (Some(r), Some(s), Some(d)) => flush(current.take(), &mut traces, r, s, d)?,
        _ => {
            return Err(Error::Format(
                "missing rpm/spark_btdc/resolution_deg headers".into(),
            ))
        }
    }
    if traces.is_empty() {
        return Err(Error::Format("no cycle data rows".into()));
    }
    Ok(traces)
}

/// A pressure signal relabeled onto a uniform time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub samples: Vec<f64>,
    pub sample_rate_hz: f64,
}

/// Relabel a crank-angle-indexed trace as a uniformly time-sampled signal.
///
/// Assumes constant engine speed within the cycle, so the mapping is
/// one-to-one: `sample_rate = rpm/60 * 360/resolution`. Sample count and
/// order are preserved exactly.
pub fn resample_to_time(trace: &PressureTrace) -> TimeSeries {
    let sample_rate_hz = trace.rpm() / 60.0 * 360.0 / trace.resolution_deg();
    TimeSeries {
        samples: trace.pressure_bar().to_vec(),
        sample_rate_hz,
    }
}

/// Knock analysis window, as crank-angle offsets after spark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnockWindow {
    pub start_offset_deg: f64,
    pub end_offset_deg: f64,
}

impl Default for KnockWindow {
    fn default() -> Self {
        Self {
            start_offset_deg: 20.0,
            end_offset_deg: 110.0,
        }
    }
}

/// Knock intensity of one cycle: max |band-passed pressure| over the knock
/// window, floored at [`KI_FLOOR`].
pub fn extract_ki(trace: &PressureTrace, spec: &FilterSpec, window: &KnockWindow) -> Result<f64> {
    if !window.start_offset_deg.is_finite()
        || !window.end_offset_deg.is_finite()
        || window.end_offset_deg <= window.start_offset_deg
    {
        return Err(Error::Precondition(format!(
            "knock window must have positive width, got {}..{} deg",
            window.start_offset_deg, window.end_offset_deg
        )));
    }
    // Spark at s degBTDC fires at crank angle -s; the window follows it.
    let spark_angle = -trace.spark_timing_btdc();
    let win_lo = spark_angle + window.start_offset_deg;
    let win_hi = spark_angle + window.end_offset_deg;
    let angles = trace.crank_angle_deg();
    let first = angles[0];
    let last = angles[angles.len() - 1];
    if win_lo < first || win_hi > last {
        return Err(Error::Range(format!(
            "knock window [{win_lo}, {win_hi}] deg exceeds trace range [{first}, {last}] deg"
        )));
    }

    let ts = resample_to_time(trace);
    let filtered = bandpass_filter(&ts.samples, ts.sample_rate_hz, spec)?;
    let mut ki = f64::NEG_INFINITY;
    for (i, &a) in angles.iter().enumerate() {
        if a >= win_lo && a <= win_hi {
            ki = ki.max(filtered[i].abs());
        }
    }
    if !ki.is_finite() {
        return Err(Error::Range("knock window contains no samples".into()));
    }
    Ok(ki.max(KI_FLOOR))
}

/// Extract one KI per trace, keeping the traces' cycle ids.
pub fn extract_ki_series(
    traces: &[PressureTrace],
    spec: &FilterSpec,
    window: &KnockWindow,
) -> Result<Vec<(u64, f64)>> {
    traces
        .iter()
        .map(|t| Ok((t.cycle_id(), extract_ki(t, spec, window)?)))
        .collect()
}

/// Write `cycle,ki_bar` rows.
pub fn write_ki_csv(mut w: impl Write, rows: &[(u64, f64)]) -> Result<()> {
    writeln!(w, "cycle,ki_bar")?;
    for (cycle, ki) in rows {
        writeln!(w, "{cycle},{ki}")?;
    }
    Ok(())
}

/// Read `cycle,ki_bar` rows; `#` comment lines are skipped.
pub fn read_ki_csv(reader: impl BufRead) -> Result<Vec<(u64, f64)>> {
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.eq_ignore_ascii_case("cycle,ki_bar") {
            continue;
        }
        let (cycle_s, ki_s) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("line {}: expected `cycle,ki_bar`", lineno + 1)))?;
        let cycle: u64 = cycle_s
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad cycle `{cycle_s}`", lineno + 1)))?;
        let ki: f64 = ki_s
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: bad ki `{ki_s}`", lineno + 1)))?;
        if !(ki > 0.0 && ki.is_finite()) {
            return Err(Error::Format(format!(
                "line {}: ki must be strictly positive, got {ki}",
                lineno + 1
            )));
        }
        rows.push((cycle, ki));
    }
    Ok(rows)
}

/// Load a KI CSV as a dataset labeled by the file stem.
pub fn load_ki_dataset(path: impl AsRef<Path>) -> Result<KIDataset> {
    let path = path.as_ref();
    let rows = read_ki_csv(BufReader::new(File::open(path)?))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    KIDataset::from_values(label, rows.into_iter().map(|(_, ki)| ki).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;
    use std::io::Cursor;

    fn make_trace_csv(cycles: usize, rows_per_cycle: usize) -> String {
        let mut s = String::from("# rpm=1500\n# spark_btdc=20\n# resolution_deg=0.1\ncycle_id,crank_angle_deg,pressure_bar\n");
        for c in 0..cycles {
            for i in 0..rows_per_cycle {
                let angle = -180.0 + 0.1 * i as f64;
                s.push_str(&format!("{c},{angle},{}\n", 1.0 + 0.001 * i as f64));
            }
        }
        s
    }

    /// Synthetic cycle: smooth compression hump plus an optional tone burst.
    fn synth_trace(spark_btdc: f64, burst: Option<(f64, f64, f64)>) -> PressureTrace {
        let n = 7200; // 720 deg at 0.1 deg
        let res = 0.1;
        let mut angles = Vec::with_capacity(n);
        let mut pressure = Vec::with_capacity(n);
        let fs = 1500.0 / 60.0 * 360.0 / res; // 90 kHz
        for i in 0..n {
            let a = -360.0 + res * i as f64;
            let smooth = 1.0 + 30.0 * (-(a / 40.0) * (a / 40.0)).exp();
            let mut p = smooth;
            if let Some((freq, amp, center_deg)) = burst {
                let t = i as f64 / fs;
                let envelope = (-((a - center_deg) / 10.0).powi(2)).exp();
                p += amp * envelope * (2.0 * PI * freq * t).sin();
            }
            angles.push(a);
            pressure.push(p);
        }
        PressureTrace::new(0, angles, pressure, 1500.0, spark_btdc).unwrap()
    }

    #[test]
    fn parses_two_cycle_blocks() {
        let csv = make_trace_csv(2, 7200);
        let traces = parse_traces_csv(Cursor::new(csv)).unwrap();
        assert_eq!(traces.len(), 2);
        assert_eq!(traces[0].pressure_bar().len(), 7200);
        assert_eq!(traces[1].cycle_id(), 1);
        for t in &traces {
            assert_eq!(t.rpm(), 1500.0);
            assert_eq!(t.spark_timing_btdc(), 20.0);
        }
    }

    #[test]
    fn rejects_decreasing_angles() {
        let csv = "# rpm=1500\n# spark_btdc=20\n# resolution_deg=0.1\n0,0.2,1.0\n0,0.1,1.0\n";
        let err = parse_traces_csv(Cursor::new(csv)).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn rejects_duplicate_angles_and_gaps() {
        let dup = "# rpm=1500\n# spark_btdc=20\n# resolution_deg=0.1\n0,0.1,1.0\n0,0.1,1.0\n";
        assert!(matches!(parse_traces_csv(Cursor::new(dup)), Err(Error::Format(_))));
        let gap = "# rpm=1500\n# spark_btdc=20\n# resolution_deg=0.1\n0,0.0,1.0\n0,0.1,1.0\n0,0.3,1.0\n";
        assert!(matches!(parse_traces_csv(Cursor::new(gap)), Err(Error::Format(_))));
    }

    #[test]
    fn rejects_missing_headers_and_split_blocks() {
        let no_header = "0,0.0,1.0\n0,0.1,1.0\n";
        assert!(matches!(parse_traces_csv(Cursor::new(no_header)), Err(Error::Format(_))));
        let split = "# rpm=1500\n# spark_btdc=20\n# resolution_deg=0.1\n\
                     0,0.0,1.0\n0,0.1,1.0\n1,0.0,1.0\n1,0.1,1.0\n0,0.2,1.0\n0,0.3,1.0\n";
        assert!(matches!(parse_traces_csv(Cursor::new(split)), Err(Error::Format(_))));
    }

    #[test]
    fn sample_rate_from_rpm_and_resolution() {
        let t = synth_trace(20.0, None);
        let ts = resample_to_time(&t);
        assert_relative_eq!(ts.sample_rate_hz, 90_000.0, max_relative = 1e-12);
        assert_eq!(ts.samples, t.pressure_bar());

        // 1 deg resolution at 1500 rpm -> 9 kHz
        let t2 = PressureTrace::new(
            0,
            (0..100).map(|i| i as f64).collect(),
            vec![1.0; 100],
            1500.0,
            20.0,
        )
        .unwrap();
        assert_relative_eq!(resample_to_time(&t2).sample_rate_hz, 9_000.0);

        // 3000 rpm at 0.5 deg -> 36 kHz
        let t3 = PressureTrace::new(
            0,
            (0..100).map(|i| 0.5 * i as f64).collect(),
            vec![1.0; 100],
            3000.0,
            20.0,
        )
        .unwrap();
        assert_relative_eq!(resample_to_time(&t3).sample_rate_hz, 36_000.0);
    }

    #[test]
    fn constant_trace_clamps_to_the_floor() {
        let spec = FilterSpec::new(3_000.0, 25_000.0).unwrap();
        let n = 7200;
        let angles: Vec<f64> = (0..n).map(|i| -360.0 + 0.1 * i as f64).collect();
        let t = PressureTrace::new(0, angles, vec![18.0; n], 1500.0, 20.0).unwrap();
        let ki = extract_ki(&t, &spec, &KnockWindow::default()).unwrap();
        assert_eq!(ki, KI_FLOOR);
    }

    #[test]
    fn smooth_compression_curve_leaves_only_stopband_residue() {
        // a 30 bar compression hump has no in-band content; what survives is
        // bounded by the stop-band floor applied to the hump amplitude
        let spec = FilterSpec::new(3_000.0, 25_000.0).unwrap();
        let ki = extract_ki(&synth_trace(20.0, None), &spec, &KnockWindow::default()).unwrap();
        assert!(ki <= 30.0 * 0.01, "smooth trace KI {ki}");
        assert!(ki >= KI_FLOOR);
    }

    #[test]
    fn in_window_burst_is_measured() {
        let spec = FilterSpec::new(3_000.0, 25_000.0).unwrap();
        // spark 20 degBTDC puts the window at [0, 90] deg; burst at 45 deg
        let t = synth_trace(20.0, Some((10_000.0, 0.5, 45.0)));
        let ki = extract_ki(&t, &spec, &KnockWindow::default()).unwrap();
        assert!((0.45..=0.53).contains(&ki), "KI {ki}");
    }

    #[test]
    fn out_of_window_burst_is_ignored() {
        let spec = FilterSpec::new(3_000.0, 25_000.0).unwrap();
        // burst well before the [0, 90] window
        let t = synth_trace(20.0, Some((10_000.0, 0.5, -120.0)));
        let ki = extract_ki(&t, &spec, &KnockWindow::default()).unwrap();
        assert!(ki < 0.01, "KI {ki}");
    }

    #[test]
    fn dc_offset_does_not_change_ki() {
        let spec = FilterSpec::new(3_000.0, 25_000.0).unwrap();
        let t = synth_trace(20.0, Some((10_000.0, 0.5, 45.0)));
        let shifted = PressureTrace::new(
            1,
            t.crank_angle_deg().to_vec(),
            t.pressure_bar().iter().map(|p| p + 12.5).collect(),
            t.rpm(),
            t.spark_timing_btdc(),
        )
        .unwrap();
        let a = extract_ki(&t, &spec, &KnockWindow::default()).unwrap();
        let b = extract_ki(&shifted, &spec, &KnockWindow::default()).unwrap();
        assert_relative_eq!(a, b, epsilon = 1e-9);
    }

    #[test]
    fn pressure_scaling_scales_ki() {
        let spec = FilterSpec::new(3_000.0, 25_000.0).unwrap();
        let t = synth_trace(20.0, Some((10_000.0, 0.5, 45.0)));
        let scaled = PressureTrace::new(
            1,
            t.crank_angle_deg().to_vec(),
            t.pressure_bar().iter().map(|p| 2.5 * p).collect(),
            t.rpm(),
            t.spark_timing_btdc(),
        )
        .unwrap();
        let a = extract_ki(&t, &spec, &KnockWindow::default()).unwrap();
        let b = extract_ki(&scaled, &spec, &KnockWindow::default()).unwrap();
        assert_relative_eq!(b, 2.5 * a, max_relative = 1e-9);
    }

    #[test]
    fn window_outside_trace_is_a_range_error() {
        let spec = FilterSpec::new(3_000.0, 25_000.0).unwrap();
        let t = synth_trace(20.0, None);
        let w = KnockWindow {
            start_offset_deg: 20.0,
            end_offset_deg: 500.0,
        };
        assert!(matches!(extract_ki(&t, &spec, &w), Err(Error::Range(_))));
    }

    #[test]
    fn nyquist_violation_propagates_from_extraction() {
        // 1 deg resolution -> 9 kHz sampling; 25 kHz band must fail
        let angles: Vec<f64> = (0..200).map(|i| -50.0 + i as f64).collect();
        let t = PressureTrace::new(0, angles, vec![1.0; 200], 1500.0, 20.0).unwrap();
        let spec = FilterSpec::new(3_000.0, 25_000.0).unwrap();
        assert!(matches!(
            extract_ki(&t, &spec, &KnockWindow::default()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn ki_csv_round_trips() {
        let rows = vec![(0u64, 0.123), (1, 4.5e-3), (2, 1.0)];
        let mut buf = Vec::new();
        write_ki_csv(&mut buf, &rows).unwrap();
        let back = read_ki_csv(Cursor::new(buf)).unwrap();
        assert_eq!(rows, back);
    }

    #[test]
    fn ki_csv_rejects_nonpositive_values() {
        let bad = "cycle,ki_bar\n0,0.0\n";
        assert!(matches!(read_ki_csv(Cursor::new(bad)), Err(Error::Format(_))));
    }

    #[test]
    fn dataset_requires_positive_values() {
        assert!(KIDataset::from_values("x", vec![1.0, -2.0]).is_err());
        assert!(KIDataset::from_values("x", vec![1.0, 2.0]).is_ok());
    }
}
