//! FLOPS to latency regression, energy prediction, and repeated-run
//! reliability statistics.
//!
//! Latency scales linearly with model FLOPS on a given processor, so an
//! ordinary least squares fit with intercept turns a handful of measured
//! models into a predictor for unmeasured ones. Reliability summarises
//! repeated benchmark runs of one metric as mean, sample stddev and cv.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::Calibration;
use crate::segment::PhaseMetrics;

/// Default cv threshold below which repeated runs count as reliable.
pub const DEFAULT_CV_THRESHOLD: f64 = 0.05;

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("need at least 2 calibration points, got {0}")]
    TooFewPoints(usize),
    #[error("need at least 2 distinct flops values to fit a line")]
    DegenerateDesign,
    #[error("invalid calibration point for `{model_id}`: {what}")]
    InvalidPoint { model_id: String, what: String },
    #[error("flops must be > 0")]
    ZeroFlops,
    #[error("need at least 2 runs, got {0}")]
    TooFewRuns(usize),
    #[error("cv undefined: mean is 0 with nonzero stddev")]
    UndefinedCv,
}

/// One measured model on one processor, input to the latency fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub model_id: String,
    pub flops: u64,
    /// Measured per-inference latency, s.
    pub inference_time: f64,
    /// Mean current while inferring, mA.
    pub active_current: f64,
    /// Measured energy per inference, mJ.
    pub inference_energy: f64,
}

impl CalibrationPoint {
    /// Lifts segmented trace metrics into a calibration point.
    pub fn from_metrics(model_id: impl Into<String>, flops: u64, metrics: &PhaseMetrics) -> Self {
        Self {
            model_id: model_id.into(),
            flops,
            inference_time: metrics.inference_time,
            active_current: metrics.active_current,
            inference_energy: metrics.inference_energy,
        }
    }
}

/// Which PhaseMetrics field a reliability report summarises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReliabilityMetric {
    InferenceTime,
    ActiveCurrent,
    InferenceEnergy,
}

impl ReliabilityMetric {
    fn extract(self, m: &PhaseMetrics) -> f64 {
        match self {
            ReliabilityMetric::InferenceTime => m.inference_time,
            ReliabilityMetric::ActiveCurrent => m.active_current,
            ReliabilityMetric::InferenceEnergy => m.inference_energy,
        }
    }
}

/// Spread statistics for one metric over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub metric: ReliabilityMetric,
    pub mean: f64,
    pub sample_stddev: f64,
    /// Coefficient of variation: sample_stddev / |mean|.
    pub cv: f64,
    pub n_runs: usize,
    pub cv_threshold: f64,
    pub reliable: bool,
}

/// A latency prediction, flagged when the raw line went negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyPrediction {
    pub seconds: f64,
    /// True when slope*flops + intercept was negative and clamped to 0.
    pub clamped: bool,
}

/// Ordinary least squares of inference_time on flops, with intercept.
///
/// Also characterizes the processor's active current as the
/// duration-weighted mean over the contributing points.
pub fn fit_latency_model(points: &[CalibrationPoint]) -> Result<Calibration, RegressionError> {
    if points.len() < 2 {
        return Err(RegressionError::TooFewPoints(points.len()));
    }
    for p in points {
        let bad = if p.flops == 0 {
            Some("flops must be > 0")
        } else if !(p.inference_time > 0.0 && p.inference_time.is_finite()) {
            Some("inference_time must be > 0 and finite")
        } else if !(p.active_current > 0.0 && p.active_current.is_finite()) {
            Some("active_current must be > 0 and finite")
        } else {
            None
        };
        if let Some(what) = bad {
            return Err(RegressionError::InvalidPoint {
                model_id: p.model_id.clone(),
                what: what.to_string(),
            });
        }
    }

    let n = points.len() as f64;
    let x_mean = points.iter().map(|p| p.flops as f64).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.inference_time).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for p in points {
        let dx = p.flops as f64 - x_mean;
        sxx += dx * dx;
        sxy += dx * (p.inference_time - y_mean);
    }
    if sxx == 0.0 {
        return Err(RegressionError::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for p in points {
        let r = p.inference_time - (slope * p.flops as f64 + intercept);
        ss_res += r * r;
        ss_tot += (p.inference_time - y_mean).powi(2);
    }
    let r_squared = if ss_res == 0.0 || ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };

    let weighted: f64 = points.iter().map(|p| p.active_current * p.inference_time).sum();
    let total_time: f64 = points.iter().map(|p| p.inference_time).sum();

    Ok(Calibration {
        latency_slope: slope,
        latency_intercept: intercept,
        r_squared,
        active_current: weighted / total_time,
        n_points: points.len(),
    })
}

/// Evaluates the latency line at `flops`, clamping negatives to zero.
pub fn predict_latency(
    calibration: &Calibration,
    flops: u64,
) -> Result<LatencyPrediction, RegressionError> {
    if flops == 0 {
        return Err(RegressionError::ZeroFlops);
    }
    let raw = calibration.latency_slope * flops as f64 + calibration.latency_intercept;
    if raw < 0.0 {
        Ok(LatencyPrediction { seconds: 0.0, clamped: true })
    } else {
        Ok(LatencyPrediction { seconds: raw, clamped: false })
    }
}

/// Predicted energy of one inference, mJ: V * I_active * t_predicted.
pub fn predict_inference_energy(
    calibration: &Calibration,
    supply_voltage: f64,
    flops: u64,
) -> Result<f64, RegressionError> {
    let t = predict_latency(calibration, flops)?;
    Ok(supply_voltage * calibration.active_current * t.seconds)
}

/// Mean, sample stddev and cv of one metric across repeated runs.
pub fn reliability(
    runs: &[PhaseMetrics],
    metric: ReliabilityMetric,
    cv_threshold: f64,
) -> Result<ReliabilityReport, RegressionError> {
    if runs.len() < 2 {
        return Err(RegressionError::TooFewRuns(runs.len()));
    }
    let values: Vec<f64> = runs.iter().map(|m| metric.extract(m)).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sample_stddev = var.sqrt();
    let cv = if sample_stddev == 0.0 {
        0.0
    } else if mean == 0.0 {
        return Err(RegressionError::UndefinedCv);
    } else {
        sample_stddev / mean.abs()
    };
    Ok(ReliabilityReport {
        metric,
        mean,
        sample_stddev,
        cv,
        n_runs: values.len(),
        cv_threshold,
        reliable: cv <= cv_threshold,
    })
}
