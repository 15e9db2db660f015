//! Inference-cycle energy model.
//!
//! A cycle is one inference followed by idle until the next trigger. Energy
//! over a cycle of length T is V*(I_act*t_inf + I_idle*(T - t_inf)), affine in
//! T with slope V*I_idle. Comparing two processors therefore reduces to
//! comparing two lines: the faster, hungrier core wins short cycles, the
//! low-idle core wins long ones, and the break-even point is their
//! intersection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::registry::ProcessorProfile;
use crate::segment::PhaseMetrics;

#[derive(Debug, Error)]
pub enum CycleError {
    #[error("cycle time {cycle_time} s is shorter than inference time {inference_time} s")]
    InfeasibleDutyCycle { cycle_time: f64, inference_time: f64 },
    #[error("cycle times must be strictly increasing (index {index})")]
    NonIncreasingSweep { index: usize },
    #[error("invalid cycle parameters: {0}")]
    InvalidParams(String),
}

/// Electrical and timing inputs of the cycle model for one processor+model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleParams {
    pub supply_voltage: f64,
    /// Idle (sleep) current, mA.
    pub idle_current: f64,
    /// Mean current while inferring, mA.
    pub active_current: f64,
    /// Duration of one inference, s.
    pub inference_time: f64,
}

impl CycleParams {
    /// Datasheet idle current from the profile, measured activity supplied by
    /// the caller.
    pub fn from_profile(
        profile: &ProcessorProfile,
        inference_time: f64,
        active_current: f64,
    ) -> Self {
        Self {
            supply_voltage: profile.supply_voltage,
            idle_current: profile.idle_current,
            active_current,
            inference_time,
        }
    }

    /// Everything measured where possible: idle current from the segmented
    /// trace when the trace had usable idle spans, datasheet otherwise.
    pub fn from_measured(profile: &ProcessorProfile, metrics: &PhaseMetrics) -> Self {
        Self {
            supply_voltage: profile.supply_voltage,
            idle_current: metrics.idle_current.unwrap_or(profile.idle_current),
            active_current: metrics.active_current,
            inference_time: metrics.inference_time,
        }
    }

    pub fn validate(&self) -> Result<(), CycleError> {
        let check = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CycleError::InvalidParams(format!("{name} must be > 0 and finite, got {v}")))
            }
        };
        check("supply_voltage", self.supply_voltage)?;
        check("idle_current", self.idle_current)?;
        check("active_current", self.active_current)?;
        check("inference_time", self.inference_time)
    }

    /// Slope of the energy line, mJ per second of cycle time.
    pub fn energy_slope(&self) -> f64 {
        self.supply_voltage * self.idle_current
    }

    /// Intercept of the energy line at T = 0 (extrapolated), mJ.
    pub fn energy_intercept(&self) -> f64 {
        self.supply_voltage * (self.active_current - self.idle_current) * self.inference_time
    }
}

/// One evaluated point on the cycle-energy curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CyclePoint {
    pub cycle_time: f64,
    /// Energy of one full cycle, mJ.
    pub cycle_energy: f64,
    /// Cycle energy divided by V*T, mA.
    pub mean_cycle_current: f64,
    /// inference_time / cycle_time, in (0, 1].
    pub active_fraction: f64,
}

/// Energy of one inference cycle of length `cycle_time`.
pub fn cycle_energy(params: &CycleParams, cycle_time: f64) -> Result<CyclePoint, CycleError> {
    params.validate()?;
    if !cycle_time.is_finite() {
        return Err(CycleError::InvalidParams(format!("cycle_time must be finite, got {cycle_time}")));
    }
    if cycle_time < params.inference_time {
        return Err(CycleError::InfeasibleDutyCycle {
            cycle_time,
            inference_time: params.inference_time,
        });
    }
    let energy = params.supply_voltage
        * (params.active_current * params.inference_time
            + params.idle_current * (cycle_time - params.inference_time));
    Ok(CyclePoint {
        cycle_time,
        cycle_energy: energy,
        mean_cycle_current: energy / (params.supply_voltage * cycle_time),
        active_fraction: params.inference_time / cycle_time,
    })
}

/// Evaluates the cycle model over a strictly increasing grid of cycle times.
pub fn sweep_cycle_energy(
    params: &CycleParams,
    cycle_times: &[f64],
) -> Result<Vec<CyclePoint>, CycleError> {
    for (i, pair) in cycle_times.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(CycleError::NonIncreasingSweep { index: i + 1 });
        }
    }
    cycle_times.iter().map(|&t| cycle_energy(params, t)).collect()
}

/// Cycle time at which two processors cost the same energy per cycle.
///
/// None when the energy lines are parallel (equal V*I_idle) or when the
/// intersection falls below the longer of the two inference times, where one
/// side could not actually run at that cycle time.
pub fn crossover_time(a: &CycleParams, b: &CycleParams) -> Option<f64> {
    let slope_a = a.energy_slope();
    let slope_b = b.energy_slope();
    if slope_a == slope_b {
        return None;
    }
    let t = (b.energy_intercept() - a.energy_intercept()) / (slope_a - slope_b);
    (t >= a.inference_time.max(b.inference_time)).then_some(t)
}
