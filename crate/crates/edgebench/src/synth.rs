//! Synthetic device-under-test: generates annotated current traces with the
//! square-wave active/idle shape of a real measurement run.
//!
//! Traces are reproducible from a 64-bit seed via the SplitMix64 generator in
//! [`crate::rng`], so fixtures can be regenerated identically anywhere. Every
//! trace carries its scenario in the CSV metadata and returns a ground-truth
//! record for oracle-style testing.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::regression::CalibrationPoint;
use crate::rng::SplitMix64;
use crate::trace::{CurrentTrace, TraceSample};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("need at least 2 distinct flops values, got {0}")]
    DegenerateFlops(usize),
}

/// Full parameterization of one synthetic benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthScenario {
    pub processor_id: String,
    pub model_id: String,
    /// Duration of one inference, s.
    pub true_inference_time: f64,
    /// Plateau current while inferring, mA.
    pub true_active_current: f64,
    /// Plateau current while idle, mA.
    pub true_idle_current: f64,
    pub inferences_per_window: u32,
    pub n_windows: u32,
    /// Idle time before, between, and after windows, s.
    pub idle_gap: f64,
    pub sample_rate: f64,
    /// Additive Gaussian current noise, mA; 0 disables noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SynthScenario {
    pub fn validate(&self) -> Result<(), SynthError> {
        let positive = [
            ("true_inference_time", self.true_inference_time),
            ("true_active_current", self.true_active_current),
            ("true_idle_current", self.true_idle_current),
            ("idle_gap", self.idle_gap),
            ("sample_rate", self.sample_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SynthError::InvalidScenario(format!(
                    "{name} must be > 0 and finite, got {v}"
                )));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SynthError::InvalidScenario(format!(
                "noise_sigma must be >= 0 and finite, got {}",
                self.noise_sigma
            )));
        }
        if self.inferences_per_window == 0 {
            return Err(SynthError::InvalidScenario(
                "inferences_per_window must be >= 1".to_string(),
            ));
        }
        if self.n_windows == 0 {
            return Err(SynthError::InvalidScenario("n_windows must be >= 1".to_string()));
        }
        if self.sample_rate * self.true_inference_time < 10.0 {
            return Err(SynthError::InvalidScenario(format!(
                "sample_rate * true_inference_time must be >= 10, got {}",
                self.sample_rate * self.true_inference_time
            )));
        }
        Ok(())
    }

    /// Duration of one active window, s.
    pub fn window_duration(&self) -> f64 {
        f64::from(self.inferences_per_window) * self.true_inference_time
    }

    /// Total trace duration: gap, window, gap, ..., window, gap.
    pub fn total_duration(&self) -> f64 {
        self.idle_gap + f64::from(self.n_windows) * (self.window_duration() + self.idle_gap)
    }

    /// Trace metadata. The processor/model/runs keys are the association
    /// contract consumed downstream; the rest reproduces the scenario.
    fn meta(&self) -> BTreeMap<String, String> {
        let mut meta = BTreeMap::new();
        meta.insert("source".to_string(), "edgebench-synth".to_string());
        meta.insert("processor".to_string(), self.processor_id.clone());
        meta.insert("model".to_string(), self.model_id.clone());
        meta.insert("runs".to_string(), self.n_windows.to_string());
        meta.insert("true_inference_time".to_string(), self.true_inference_time.to_string());
        meta.insert("true_active_current".to_string(), self.true_active_current.to_string());
        meta.insert("true_idle_current".to_string(), self.true_idle_current.to_string());
        meta.insert(
            "inferences_per_window".to_string(),
            self.inferences_per_window.to_string(),
        );
        meta.insert("idle_gap".to_string(), self.idle_gap.to_string());
        meta.insert("sample_rate".to_string(), self.sample_rate.to_string());
        meta.insert("noise_sigma".to_string(), self.noise_sigma.to_string());
        meta.insert("seed".to_string(), self.seed.to_string());
        meta
    }
}

/// Exact boundaries of one generated active window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthWindow {
    pub start: f64,
    pub end: f64,
}

/// What the generator actually produced, for checking recovery against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub scenario: SynthScenario,
    pub windows: Vec<TruthWindow>,
    pub total_duration: f64,
}

/// Generates the square-wave trace described by the scenario.
///
/// The marker is true exactly for samples inside a window, boundary samples
/// included. Noise is additive Gaussian per sample, clipped at 0 mA, drawn
/// from SplitMix64 seeded with `scenario.seed`.
pub fn generate_trace(scenario: &SynthScenario) -> Result<(CurrentTrace, GroundTruth), SynthError> {
    scenario.validate()?;
    let rate = scenario.sample_rate;
    let win = scenario.window_duration();
    let stride = win + scenario.idle_gap;
    let windows: Vec<TruthWindow> = (0..scenario.n_windows)
        .map(|j| {
            let start = scenario.idle_gap + f64::from(j) * stride;
            TruthWindow { start, end: start + win }
        })
        .collect();

    // Window membership by index so float rounding at boundaries cannot
    // flip a marker: sample k is active when k/rate lies in [start, end]
    // within a 1e-6 sample tolerance.
    let bounds: Vec<(usize, usize)> = windows
        .iter()
        .map(|w| {
            (
                (w.start * rate - 1e-6).ceil() as usize,
                (w.end * rate + 1e-6).floor() as usize,
            )
        })
        .collect();

    let total = scenario.total_duration();
    let n = (total * rate).round() as usize;
    let mut rng = SplitMix64::new(scenario.seed);
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let marker = bounds.iter().any(|&(a, b)| (a..=b).contains(&k));
        let base = if marker {
            scenario.true_active_current
        } else {
            scenario.true_idle_current
        };
        let current = if scenario.noise_sigma > 0.0 {
            (base + scenario.noise_sigma * rng.next_normal()).max(0.0)
        } else {
            base
        };
        samples.push(TraceSample {
            timestamp_s: k as f64 / rate,
            current_ma: current,
            marker,
        });
    }

    let trace = CurrentTrace::new(samples, scenario.meta())
        .map_err(|e| SynthError::InvalidScenario(format!("generated trace invalid: {e}")))?;
    let truth = GroundTruth {
        scenario: scenario.clone(),
        windows,
        total_duration: total,
    };
    Ok((trace, truth))
}

/// Synthetic processor for calibration suites: a known latency line plus
/// electrical constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDevice {
    pub processor_id: String,
    /// Seconds per FLOP of the true latency line.
    pub latency_slope: f64,
    /// Fixed per-inference overhead, s.
    pub latency_intercept: f64,
    pub active_current: f64,
    pub idle_current: f64,
    pub supply_voltage: f64,
}

/// One generated calibration run: the trace plus its exact truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub scenario: SynthScenario,
    pub trace: CurrentTrace,
    /// The latency/current/energy the device actually simulated.
    pub truth: CalibrationPoint,
}

/// A set of calibration runs for one synthetic device.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSuite {
    pub processor_id: String,
    pub supply_voltage: f64,
    pub runs: Vec<SuiteRun>,
}

/// Generates one trace per flops value with true latency on the device's
/// line, optionally perturbed by multiplicative noise.
///
/// Per run, the parent generator yields a latency factor (when noise > 0)
/// and then a child seed for the trace, so suites are reproducible from the
/// single top-level seed.
pub fn generate_calibration_suite(
    device: &SyntheticDevice,
    flops: &[u64],
    relative_noise: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<CalibrationSuite, SynthError> {
    let distinct = {
        let mut f = flops.to_vec();
        f.sort_unstable();
        f.dedup();
        f.len()
    };
    if distinct < 2 {
        return Err(SynthError::DegenerateFlops(distinct));
    }
    if !(relative_noise >= 0.0 && relative_noise < 1.0) {
        return Err(SynthError::InvalidScenario(format!(
            "relative_noise must be in [0, 1), got {relative_noise}"
        )));
    }

    let mut parent = SplitMix64::new(seed);
    let mut runs = Vec::with_capacity(flops.len());
    for &f in flops {
        let t_true = device.latency_slope * f as f64 + device.latency_intercept;
        let t_noisy = if relative_noise > 0.0 {
            t_true * (1.0 + relative_noise * parent.next_normal())
        } else {
            t_true
        };
        if !(t_noisy > 0.0) {
            return Err(SynthError::InvalidScenario(format!(
                "noisy inference time {t_noisy} s is not positive (flops {f})"
            )));
        }
        let scenario = SynthScenario {
            processor_id: device.processor_id.clone(),
            model_id: format!("flops-{f}"),
            true_inference_time: t_noisy,
            true_active_current: device.active_current,
            true_idle_current: device.idle_current,
            inferences_per_window: 1,
            n_windows: 1,
            idle_gap: 0.05,
            sample_rate,
            noise_sigma: 0.0,
            seed: parent.next_u64(),
        };
        let (trace, _) = generate_trace(&scenario)?;
        let truth = CalibrationPoint {
            model_id: scenario.model_id.clone(),
            flops: f,
            inference_time: t_noisy,
            active_current: device.active_current,
            inference_energy: device.supply_voltage * device.active_current * t_noisy,
        };
        runs.push(SuiteRun { scenario, trace, truth });
    }
    Ok(CalibrationSuite {
        processor_id: device.processor_id.clone(),
        supply_voltage: device.supply_voltage,
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycle::{cycle_energy, CycleParams};
    use crate::regression::fit_latency_model;
    use crate::segment::{compute_phase_metrics, detect_windows};
    use crate::trace::write_trace;

    fn scenario() -> SynthScenario {
        SynthScenario {
            processor_id: "m4".to_string(),
            model_id: "lenet5".to_string(),
            true_inference_time: 0.01,
            true_active_current: 10.0,
            true_idle_current: 1.0,
            inferences_per_window: 10,
            n_windows: 3,
            idle_gap: 0.1,
            sample_rate: 10_000.0,
            noise_sigma: 0.0,
            seed: 42,
        }
    }

    fn render(trace: &CurrentTrace) -> Vec<u8> {
        let mut buf = Vec::new();
        write_trace(trace, &mut buf).unwrap();
        buf
    }

    #[test]
    fn noiseless_trace_inverts_exactly() {
        let s = scenario();
        let (trace, truth) = generate_trace(&s).unwrap();
        let found = detect_windows(&trace);
        assert_eq!(found.len(), 3);
        let period = 1.0 / s.sample_rate;
        for (f, t) in found.iter().zip(&truth.windows) {
            assert!((f.start_s - t.start).abs() <= period, "{} vs {}", f.start_s, t.start);
            assert!((f.end_s - t.end).abs() <= period);
        }
        let m = compute_phase_metrics(&trace, s.inferences_per_window, 3.3).unwrap();
        assert!((m.active_current - 10.0).abs() < 1e-12);
        assert!((m.idle_current.unwrap() - 1.0).abs() < 1e-12);
        assert!((m.inference_time - 0.01).abs() < 1e-12);
        assert!(m.warnings.is_empty());
    }

    #[test]
    fn trace_meta_round_trips_the_scenario() {
        let s = scenario();
        let (trace, _) = generate_trace(&s).unwrap();
        let meta = trace.meta();
        assert_eq!(meta["processor"], "m4");
        assert_eq!(meta["model"], "lenet5");
        assert_eq!(meta["runs"], "3");
        assert_eq!(meta["seed"], "42");
        assert_eq!(meta["true_inference_time"].parse::<f64>().unwrap(), 0.01);
        assert_eq!(meta["inferences_per_window"].parse::<u32>().unwrap(), 10);
        assert_eq!(meta["source"], "edgebench-synth");
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let mut s = scenario();
        s.noise_sigma = 0.1;
        let a = render(&generate_trace(&s).unwrap().0);
        let b = render(&generate_trace(&s).unwrap().0);
        assert_eq!(a, b);
        s.seed = 43;
        let c = render(&generate_trace(&s).unwrap().0);
        assert_ne!(a, c);
    }

    #[test]
    fn noisy_trace_stays_valid_and_segmentable() {
        let mut s = scenario();
        s.noise_sigma = 0.5;
        let (trace, _) = generate_trace(&s).unwrap();
        assert!(trace.samples().iter().all(|p| p.current_ma >= 0.0));
        let m = compute_phase_metrics(&trace, s.inferences_per_window, 3.3).unwrap();
        assert_eq!(m.windows.len(), 3);
        // mean of ~3000 active samples with sigma 0.5 lands well within 0.1
        assert!((m.active_current - 10.0).abs() < 0.1, "{}", m.active_current);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let mut s = scenario();
        s.sample_rate = 500.0; // 500 * 0.01 = 5 < 10 samples per inference
        assert!(matches!(generate_trace(&s), Err(SynthError::InvalidScenario(_))));
        let mut s = scenario();
        s.idle_gap = 0.0;
        assert!(generate_trace(&s).is_err());
        let mut s = scenario();
        s.noise_sigma = -0.1;
        assert!(generate_trace(&s).is_err());
        let mut s = scenario();
        s.n_windows = 0;
        assert!(generate_trace(&s).is_err());
    }

    #[test]
    fn pipeline_reproduces_closed_form_cycle_energy() {
        let s = scenario();
        let (trace, _) = generate_trace(&s).unwrap();
        let m = compute_phase_metrics(&trace, s.inferences_per_window, 3.3).unwrap();
        let params = CycleParams {
            supply_voltage: 3.3,
            idle_current: m.idle_current.unwrap(),
            active_current: m.active_current,
            inference_time: m.inference_time,
        };
        let measured = cycle_energy(&params, 1.0).unwrap().cycle_energy;
        let closed_form = 3.3 * (10.0 * 0.01 + 1.0 * (1.0 - 0.01));
        assert!(
            (measured - closed_form).abs() <= 1e-6 * closed_form,
            "{measured} vs {closed_form}"
        );
    }

    fn device() -> SyntheticDevice {
        SyntheticDevice {
            processor_id: "m4".to_string(),
            latency_slope: 2e-8,
            latency_intercept: 0.02,
            active_current: 10.0,
            idle_current: 0.30,
            supply_voltage: 3.3,
        }
    }

    #[test]
    fn noiseless_suite_recovers_the_line() {
        let flops = [5_000_000, 10_000_000, 20_000_000, 30_000_000];
        let suite = generate_calibration_suite(&device(), &flops, 0.0, 10_000.0, 7).unwrap();
        assert_eq!(suite.runs.len(), 4);
        let points: Vec<_> = suite.runs.iter().map(|r| r.truth.clone()).collect();
        let cal = fit_latency_model(&points).unwrap();
        assert!((cal.latency_slope - 2e-8).abs() <= 1e-9 * 2e-8);
        assert!((cal.latency_intercept - 0.02).abs() <= 1e-9 * 0.02);
        assert!((cal.r_squared - 1.0).abs() < 1e-12);
        // traces segment back to the truth within a sample period; current
        // only drifts by accumulation error over the longest window
        for run in &suite.runs {
            let m = compute_phase_metrics(&run.trace, 1, 3.3).unwrap();
            assert!((m.inference_time - run.truth.inference_time).abs() <= 1e-4);
            assert!((m.active_current - 10.0).abs() < 1e-9, "{}", m.active_current);
        }
    }

    #[test]
    fn suite_is_deterministic_and_noise_moves_points() {
        let flops = [5_000_000, 10_000_000, 20_000_000];
        let a = generate_calibration_suite(&device(), &flops, 0.02, 10_000.0, 11).unwrap();
        let b = generate_calibration_suite(&device(), &flops, 0.02, 10_000.0, 11).unwrap();
        assert_eq!(a, b);
        let c = generate_calibration_suite(&device(), &flops, 0.0, 10_000.0, 11).unwrap();
        assert!(a.runs[0].truth.inference_time != c.runs[0].truth.inference_time);
    }

    #[test]
    fn flops_scaling_leaves_latencies_unchanged() {
        let flops: Vec<u64> = vec![5_000_000, 10_000_000, 20_000_000];
        let scaled: Vec<u64> = flops.iter().map(|f| f * 1000).collect();
        let mut dev = device();
        let a = generate_calibration_suite(&dev, &flops, 0.0, 10_000.0, 3).unwrap();
        dev.latency_slope /= 1000.0;
        let b = generate_calibration_suite(&dev, &scaled, 0.0, 10_000.0, 3).unwrap();
        for (ra, rb) in a.runs.iter().zip(&b.runs) {
            assert!((ra.truth.inference_time - rb.truth.inference_time).abs() < 1e-15);
        }
    }

    #[test]
    fn degenerate_flops_rejected() {
        assert!(matches!(
            generate_calibration_suite(&device(), &[5_000_000], 0.0, 10_000.0, 1),
            Err(SynthError::DegenerateFlops(1))
        ));
        assert!(matches!(
            generate_calibration_suite(&device(), &[5_000_000, 5_000_000], 0.0, 10_000.0, 1),
            Err(SynthError::DegenerateFlops(1))
        ));
    }
}
