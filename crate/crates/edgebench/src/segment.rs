//! Marker-based segmentation of current traces into active and idle phases.
//!
//! A window is a maximal run of marker-true samples; boundary samples belong
//! to the window. Idle spans are the complement intervals between windows, so
//! window plus idle durations always add up to the trace duration. Idle mean
//! current, however, is integrated only over marker-false samples, keeping the
//! ramp samples around each window edge out of the idle statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{CurrentTrace, TraceSample};

#[derive(Debug, Error)]
pub enum SegmentationError {
    #[error("trace contains no usable active windows")]
    NoActiveWindows,
    #[error("inferences_per_window must be >= 1")]
    ZeroInferencesPerWindow,
    #[error("supply voltage must be > 0, got {0}")]
    NonPositiveVoltage(f64),
    #[error("need at least 2 samples to integrate, got {0}")]
    TooFewSamples(usize),
    #[error("timestamps must be strictly increasing (sample {index})")]
    NonMonotoneSamples { index: usize },
}

/// Index and time bounds of one maximal marker-true run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowBounds {
    pub first_index: usize,
    pub last_index: usize,
    pub start_s: f64,
    pub end_s: f64,
}

/// One active window with its integrated statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveWindow {
    pub start: f64,
    pub end: f64,
    /// Trapezoidal mean current over the window, mA.
    pub mean_current: f64,
    /// Energy drawn during the window, mJ.
    pub energy: f64,
    pub sample_count: usize,
}

/// A complement interval between active windows (or trace edge and window).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdleSpan {
    pub start: f64,
    pub end: f64,
    /// Mean over marker-false samples inside the span; None when the span has
    /// fewer than 2 such samples to integrate.
    pub mean_current: Option<f64>,
    /// Marker-false samples inside the span.
    pub sample_count: usize,
}

/// Per-phase statistics for one segmented trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMetrics {
    pub windows: Vec<ActiveWindow>,
    pub idle_spans: Vec<IdleSpan>,
    pub inferences_per_window: u32,
    /// Mean window duration divided by inferences per window, s.
    pub inference_time: f64,
    /// Energy of one inference at the measured active current, mJ.
    pub inference_energy: f64,
    /// Duration-weighted mean current across all windows, mA.
    pub active_current: f64,
    /// Duration-weighted mean over idle samples; None if no idle span had
    /// enough samples.
    pub idle_current: Option<f64>,
    pub total_duration: f64,
    pub supply_voltage: f64,
    pub warnings: Vec<String>,
}

/// Finds every maximal marker-true run, single-sample runs included.
pub fn detect_windows(trace: &CurrentTrace) -> Vec<WindowBounds> {
    let samples = trace.samples();
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        if samples[i].marker {
            let first = i;
            while i + 1 < samples.len() && samples[i + 1].marker {
                i += 1;
            }
            out.push(WindowBounds {
                first_index: first,
                last_index: i,
                start_s: samples[first].timestamp_s,
                end_s: samples[i].timestamp_s,
            });
        }
        i += 1;
    }
    out
}

fn trapezoid_charge(samples: &[TraceSample]) -> f64 {
    samples
        .windows(2)
        .map(|p| 0.5 * (p[0].current_ma + p[1].current_ma) * (p[1].timestamp_s - p[0].timestamp_s))
        .sum()
}

/// Integrates a sample slice to energy at the given supply voltage, mJ.
pub fn integrate_energy(samples: &[TraceSample], voltage: f64) -> Result<f64, SegmentationError> {
    if !(voltage > 0.0) {
        return Err(SegmentationError::NonPositiveVoltage(voltage));
    }
    if samples.len() < 2 {
        return Err(SegmentationError::TooFewSamples(samples.len()));
    }
    for (i, p) in samples.windows(2).enumerate() {
        if p[1].timestamp_s <= p[0].timestamp_s {
            return Err(SegmentationError::NonMonotoneSamples { index: i + 1 });
        }
    }
    Ok(voltage * trapezoid_charge(samples))
}

/// Maximal marker-false runs with >= 2 samples inside [from, to], as
/// (charge, duration) pairs plus the count of false samples seen.
fn false_run_integrals(samples: &[TraceSample], from: usize, to: usize) -> (f64, f64, usize) {
    let mut charge = 0.0;
    let mut duration = 0.0;
    let mut false_count = 0;
    let mut i = from;
    while i <= to {
        if !samples[i].marker {
            let first = i;
            while i + 1 <= to && !samples[i + 1].marker {
                i += 1;
            }
            false_count += i - first + 1;
            if i > first {
                charge += trapezoid_charge(&samples[first..=i]);
                duration += samples[i].timestamp_s - samples[first].timestamp_s;
            }
        }
        i += 1;
    }
    (charge, duration, false_count)
}

/// Segments a trace and derives per-inference time and energy.
///
/// Marker runs shorter than 2 samples cannot be integrated; they are dropped
/// from the window list with a warning and their samples count as neither
/// active nor idle.
pub fn compute_phase_metrics(
    trace: &CurrentTrace,
    inferences_per_window: u32,
    voltage: f64,
) -> Result<PhaseMetrics, SegmentationError> {
    if inferences_per_window == 0 {
        return Err(SegmentationError::ZeroInferencesPerWindow);
    }
    if !(voltage > 0.0) {
        return Err(SegmentationError::NonPositiveVoltage(voltage));
    }

    let samples = trace.samples();
    let mut warnings = Vec::new();
    let mut kept = Vec::new();
    for w in detect_windows(trace) {
        if w.last_index == w.first_index {
            warnings.push(format!(
                "ignored 1-sample active run at t={:.6}; too short to integrate",
                w.start_s
            ));
        } else {
            kept.push(w);
        }
    }
    if kept.is_empty() {
        return Err(SegmentationError::NoActiveWindows);
    }

    let mut windows = Vec::with_capacity(kept.len());
    let mut active_charge = 0.0;
    let mut active_duration = 0.0;
    for w in &kept {
        let slice = &samples[w.first_index..=w.last_index];
        let charge = trapezoid_charge(slice);
        let duration = w.end_s - w.start_s;
        active_charge += charge;
        active_duration += duration;
        windows.push(ActiveWindow {
            start: w.start_s,
            end: w.end_s,
            mean_current: charge / duration,
            energy: voltage * charge,
            sample_count: w.last_index - w.first_index + 1,
        });
    }

    // Complement intervals; their durations plus the window durations
    // telescope to the trace duration.
    let mut gaps: Vec<(f64, f64, usize, usize)> = Vec::new();
    let first = &kept[0];
    if first.first_index > 0 {
        gaps.push((trace.start(), first.start_s, 0, first.first_index - 1));
    }
    for pair in kept.windows(2) {
        gaps.push((
            pair[0].end_s,
            pair[1].start_s,
            pair[0].last_index + 1,
            pair[1].first_index - 1,
        ));
    }
    let last = &kept[kept.len() - 1];
    if last.last_index < samples.len() - 1 {
        gaps.push((last.end_s, trace.end(), last.last_index + 1, samples.len() - 1));
    }

    let mut idle_spans = Vec::with_capacity(gaps.len());
    let mut idle_charge = 0.0;
    let mut idle_duration = 0.0;
    for (start, end, from, to) in gaps {
        let (charge, duration, false_count) = false_run_integrals(samples, from, to);
        let mean_current = if duration > 0.0 {
            idle_charge += charge;
            idle_duration += duration;
            Some(charge / duration)
        } else {
            warnings.push(format!(
                "idle span [{start:.6}, {end:.6}] has fewer than 2 idle samples; \
                 excluded from idle current"
            ));
            None
        };
        idle_spans.push(IdleSpan {
            start,
            end,
            mean_current,
            sample_count: false_count,
        });
    }

    let active_current = active_charge / active_duration;
    let inference_time =
        active_duration / kept.len() as f64 / f64::from(inferences_per_window);
    Ok(PhaseMetrics {
        windows,
        idle_spans,
        inferences_per_window,
        inference_time,
        inference_energy: voltage * active_current * inference_time,
        active_current,
        idle_current: (idle_duration > 0.0).then(|| idle_charge / idle_duration),
        total_duration: trace.duration(),
        supply_voltage: voltage,
        warnings,
    })
}
