//! Energy benchmarking toolkit for embedded AI inference.
//!
//! `edgebench` turns marker-annotated current traces of on-device inference
//! into per-inference energy metrics, per-processor calibrations, cycle-time
//! energy models, and Pareto-based processor/model recommendations. No
//! hardware is required: the [`synth`] module generates ground-truth-annotated
//! traces with the same shape a power profiler would export.
//!
//! # Units
//!
//! One convention everywhere: time in **seconds**, current in **milliamps**,
//! voltage in **volts**, energy in **millijoules** (V × mA × s = mJ), memory
//! in **bytes**.
//!
//! # Pipeline
//!
//! 1. [`trace`] reads and writes the canonical trace CSV (current + marker).
//! 2. [`segment`] splits a trace into active windows and idle spans and
//!    derives per-inference time, current, and energy.
//! 3. [`regression`] fits the FLOPS→latency line per processor and checks
//!    run-to-run reliability.
//! 4. [`cycle`] models total energy per inference cycle (active + idle) over
//!    configurable cycle times.
//! 5. [`pareto`] gates candidates on RAM/ROM, predicts their cycle energy,
//!    and computes the energy/quality Pareto front.
//!
//! The `examples/` directory has one runnable program per capability; the
//! `edgebench` binary wires the same functions into a small CLI.

pub mod cycle;
pub mod pareto;
pub mod registry;
pub mod regression;
pub mod report;
pub mod rng;
pub mod segment;
pub mod synth;
pub mod trace;

pub use cycle::{crossover_time, cycle_energy, sweep_cycle_energy, CycleParams, CyclePoint};
pub use pareto::{feasibility_gate, pareto_front, recommend, ParetoEntry, Recommendation};
pub use registry::{
    estimate_quantized_rom, Calibration, ModelDescriptor, ProcessorProfile, QualityKind, Registry,
    UseCaseTarget,
};
pub use regression::{
    fit_latency_model, predict_inference_energy, predict_latency, reliability, CalibrationPoint,
    ReliabilityMetric, ReliabilityReport,
};
pub use report::{
    cmd_calibrate, cmd_pareto, cmd_segment, cmd_sweep, cmd_synth, resolve_registry_path,
    CalibrateRequest, CalibrationFile, CommandError, ParetoRequest, ProcessorCalibration,
    RunReport, SegmentRequest, SweepRequest, SweepSeries, SynthRequest, TraceReport,
};
pub use segment::{compute_phase_metrics, detect_windows, integrate_energy, PhaseMetrics};
pub use synth::{generate_calibration_suite, generate_trace, SynthScenario};
pub use trace::{read_trace, write_trace, CurrentTrace, TraceSample};
