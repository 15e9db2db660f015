//! Command implementations and the RunReport they all emit.
//!
//! Every subcommand produces one RunReport: a versioned JSON document
//! embedding the resolved configuration, the registry snapshot it worked
//! from, and whatever the command computed. Errors carry an exit-code
//! category so the binary can distinguish usage, I/O, parse, and analysis
//! failures.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycle::{sweep_cycle_energy, CycleParams, CyclePoint};
use crate::pareto::{recommend, EnergySource, MeasuredMap, ParetoError, Recommendation};
use crate::registry::{Calibration, Registry, RegistryError};
use crate::regression::{
    fit_latency_model, predict_latency, reliability, CalibrationPoint, ReliabilityMetric,
    ReliabilityReport,
};
use crate::segment::compute_phase_metrics;
use crate::segment::PhaseMetrics;
use crate::synth::{generate_trace, SynthScenario};
use crate::trace::{read_trace_from_path, write_trace_to_path, CurrentTrace, TraceError};

pub const REPORT_SCHEMA_VERSION: &str = "1";
pub const CALIBRATION_SCHEMA_VERSION: &str = "1";

/// Environment variable that may supply the registry path.
pub const CONFIG_ENV_VAR: &str = "EDGEBENCH_CONFIG";

#[derive(Debug, Error)]
pub enum CommandError {
    /// Bad invocation; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Filesystem problem such as a missing file; exit code 3.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Unparseable or inconsistent input; exit code 4.
    #[error("{path}: {what}")]
    Parse { path: String, what: String },
    /// The computation itself failed; exit code 5.
    #[error("{0}")]
    Analysis(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Usage(_) => 2,
            CommandError::Io { .. } => 3,
            CommandError::Parse { .. } => 4,
            CommandError::Analysis(_) => 5,
        }
    }
}

/// Segmentation result for one ingested trace file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub path: String,
    pub metrics: PhaseMetrics,
}

/// One fitted processor in a calibration file or report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessorCalibration {
    pub processor_id: String,
    pub calibration: Calibration,
}

/// On-disk calibration document produced by `calibrate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub schema_version: String,
    pub calibrations: Vec<ProcessorCalibration>,
}

/// Cycle-energy series for one (processor, model) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub processor_id: String,
    pub model_id: String,
    /// Predicted per-inference latency, the duty-cycle floor, s.
    pub inference_time: f64,
    pub active_current: f64,
    pub points: Vec<CyclePoint>,
}

/// The single report document every command emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: String,
    pub command: String,
    /// Resolved configuration, flag name to value.
    pub config: BTreeMap<String, String>,
    pub registry: Option<Registry>,
    pub traces: Vec<TraceReport>,
    pub calibrations: Vec<ProcessorCalibration>,
    pub reliability: Vec<ReliabilityReport>,
    pub sweeps: Vec<SweepSeries>,
    pub fronts: Vec<Recommendation>,
    pub warnings: Vec<String>,
    /// Files written by the command.
    pub outputs: Vec<String>,
}

impl RunReport {
    fn new(command: &str, config: BTreeMap<String, String>) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            config,
            registry: None,
            traces: Vec::new(),
            calibrations: Vec::new(),
            reliability: Vec::new(),
            sweeps: Vec::new(),
            fronts: Vec::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut doc = serde_json::to_string_pretty(self).expect("report serializes");
        doc.push('\n');
        doc
    }
}

/// Resolves the registry path from the flag or EDGEBENCH_CONFIG.
pub fn resolve_registry_path(flag: Option<PathBuf>) -> Result<PathBuf, CommandError> {
    if let Some(p) = flag {
        return Ok(p);
    }
    match std::env::var_os(CONFIG_ENV_VAR) {
        Some(v) if !v.is_empty() => Ok(PathBuf::from(v)),
        _ => Err(CommandError::Usage(format!(
            "no registry given: pass --registry or set {CONFIG_ENV_VAR}"
        ))),
    }
}

fn load_registry(path: &Path) -> Result<Registry, CommandError> {
    Registry::from_path(path).map_err(|e| match e {
        RegistryError::Io(source) => CommandError::Io { path: path.display().to_string(), source },
        other => CommandError::Parse {
            path: path.display().to_string(),
            what: other.to_string(),
        },
    })
}

fn load_trace(path: &Path) -> Result<CurrentTrace, CommandError> {
    read_trace_from_path(path).map_err(|e| match e {
        TraceError::Io(source) => CommandError::Io { path: path.display().to_string(), source },
        other => CommandError::Parse {
            path: path.display().to_string(),
            what: other.to_string(),
        },
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CommandError> {
    fs::write(path, contents).map_err(|source| CommandError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// All .csv files directly inside `dir`, sorted for determinism.
fn csv_files_in(dir: &Path) -> Result<Vec<PathBuf>, CommandError> {
    let entries = fs::read_dir(dir).map_err(|source| CommandError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| CommandError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("csv") {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

fn meta_u32(trace: &CurrentTrace, key: &str) -> Option<u32> {
    trace.meta().get(key).and_then(|v| v.parse().ok())
}

// ---------------------------------------------------------------- segment

#[derive(Debug, Clone)]
pub struct SegmentRequest {
    pub traces: Vec<PathBuf>,
    /// Overrides the trace's own inferences_per_window meta when set.
    pub inferences_per_window: Option<u32>,
    pub voltage: f64,
    pub reliability: bool,
    pub cv_threshold: f64,
}

/// Segments trace files into phase metrics, optionally with reliability
/// statistics across them.
pub fn cmd_segment(req: &SegmentRequest) -> Result<RunReport, CommandError> {
    if req.traces.is_empty() {
        return Err(CommandError::Usage("at least one trace path is required".to_string()));
    }
    let mut config = BTreeMap::new();
    config.insert(
        "traces".to_string(),
        req.traces.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","),
    );
    if let Some(ipw) = req.inferences_per_window {
        config.insert("inferences_per_window".to_string(), ipw.to_string());
    }
    config.insert("voltage".to_string(), req.voltage.to_string());
    config.insert("reliability".to_string(), req.reliability.to_string());
    config.insert("cv_threshold".to_string(), req.cv_threshold.to_string());
    let mut report = RunReport::new("segment", config);

    let mut all_metrics = Vec::new();
    for path in &req.traces {
        let trace = load_trace(path)?;
        let ipw = req
            .inferences_per_window
            .or_else(|| meta_u32(&trace, "inferences_per_window"))
            .ok_or_else(|| {
                CommandError::Analysis(format!(
                    "{}: inferences per window unknown; pass --inferences-per-window or \
                     add an inferences_per_window meta key",
                    path.display()
                ))
            })?;
        let metrics = compute_phase_metrics(&trace, ipw, req.voltage)
            .map_err(|e| CommandError::Analysis(format!("{}: {e}", path.display())))?;
        for w in &metrics.warnings {
            report.warnings.push(format!("{}: {w}", path.display()));
        }
        report.traces.push(TraceReport {
            path: path.display().to_string(),
            metrics: metrics.clone(),
        });
        all_metrics.push(metrics);
    }

    if req.reliability {
        for metric in [
            ReliabilityMetric::InferenceTime,
            ReliabilityMetric::ActiveCurrent,
            ReliabilityMetric::InferenceEnergy,
        ] {
            let rep = reliability(&all_metrics, metric, req.cv_threshold)
                .map_err(|e| CommandError::Analysis(e.to_string()))?;
            report.reliability.push(rep);
        }
    }
    Ok(report)
}

// -------------------------------------------------------------- calibrate

#[derive(Debug, Clone)]
pub struct CalibrateRequest {
    pub registry: PathBuf,
    pub traces_dir: PathBuf,
    pub out_calibration: PathBuf,
    pub force: bool,
}

/// Fits one latency model per processor from a directory of traces and
/// writes the calibration file.
pub fn cmd_calibrate(req: &CalibrateRequest) -> Result<RunReport, CommandError> {
    if req.out_calibration.exists() && !req.force {
        return Err(CommandError::Usage(format!(
            "refusing to overwrite {}; pass --force to replace it",
            req.out_calibration.display()
        )));
    }
    let mut config = BTreeMap::new();
    config.insert("registry".to_string(), req.registry.display().to_string());
    config.insert("traces_dir".to_string(), req.traces_dir.display().to_string());
    config.insert("out_calibration".to_string(), req.out_calibration.display().to_string());
    config.insert("force".to_string(), req.force.to_string());
    let mut report = RunReport::new("calibrate", config);

    let mut registry = load_registry(&req.registry)?;
    let paths = csv_files_in(&req.traces_dir)?;
    if paths.is_empty() {
        return Err(CommandError::Analysis(format!(
            "no .csv traces found in {}",
            req.traces_dir.display()
        )));
    }

    let mut points: BTreeMap<String, Vec<CalibrationPoint>> = BTreeMap::new();
    for path in &paths {
        let name = path.display().to_string();
        let trace = load_trace(path)?;
        let mut skip = |why: String| report.warnings.push(format!("{name}: skipped: {why}"));
        let Some(processor_id) = trace.meta().get("processor").cloned() else {
            skip("no processor meta key".to_string());
            continue;
        };
        let Some(model_id) = trace.meta().get("model").cloned() else {
            skip("no model meta key".to_string());
            continue;
        };
        let Some(ipw) = meta_u32(&trace, "inferences_per_window") else {
            skip("no inferences_per_window meta key".to_string());
            continue;
        };
        let Some(profile) = registry.processor(&processor_id) else {
            skip(format!("processor `{processor_id}` not in registry"));
            continue;
        };
        let Some(model) = registry.model(&model_id) else {
            skip(format!("model `{model_id}` not in registry"));
            continue;
        };
        let metrics = match compute_phase_metrics(&trace, ipw, profile.supply_voltage) {
            Ok(m) => m,
            Err(e) => {
                skip(e.to_string());
                continue;
            }
        };
        for w in &metrics.warnings {
            report.warnings.push(format!("{name}: {w}"));
        }
        points
            .entry(processor_id)
            .or_default()
            .push(CalibrationPoint::from_metrics(&model.id, model.flops, &metrics));
        report.traces.push(TraceReport { path: name, metrics });
    }

    let mut fits = Vec::new();
    for (processor_id, pts) in &points {
        match fit_latency_model(pts) {
            Ok(calibration) => fits.push(ProcessorCalibration {
                processor_id: processor_id.clone(),
                calibration,
            }),
            Err(e) => report.warnings.push(format!("processor {processor_id}: {e}")),
        }
    }
    for profile in &registry.processors {
        if !points.contains_key(&profile.id) {
            report.warnings.push(format!("processor {}: no usable traces", profile.id));
        }
    }
    if fits.is_empty() {
        return Err(CommandError::Analysis(format!(
            "no processor could be calibrated: {}",
            report.warnings.join("; ")
        )));
    }

    let file = CalibrationFile {
        schema_version: CALIBRATION_SCHEMA_VERSION.to_string(),
        calibrations: fits.clone(),
    };
    let mut doc = serde_json::to_string_pretty(&file).expect("calibration file serializes");
    doc.push('\n');
    write_file(&req.out_calibration, &doc)?;
    report.outputs.push(req.out_calibration.display().to_string());

    for fit in &fits {
        if let Some(p) = registry.processors.iter_mut().find(|p| p.id == fit.processor_id) {
            p.calibration = Some(fit.calibration.clone());
        }
    }
    report.calibrations = fits;
    report.registry = Some(registry);
    Ok(report)
}

/// Loads a calibration file and attaches its fits to the registry profiles.
fn apply_calibration_file(registry: &mut Registry, path: &Path) -> Result<(), CommandError> {
    let text = fs::read_to_string(path).map_err(|source| CommandError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: CalibrationFile = serde_json::from_str(&text).map_err(|e| CommandError::Parse {
        path: path.display().to_string(),
        what: e.to_string(),
    })?;
    for entry in file.calibrations {
        let Some(profile) = registry.processors.iter_mut().find(|p| p.id == entry.processor_id)
        else {
            return Err(CommandError::Parse {
                path: path.display().to_string(),
                what: format!("unknown processor `{}`", entry.processor_id),
            });
        };
        profile.calibration = Some(entry.calibration);
    }
    Ok(())
}

// ------------------------------------------------------------------ sweep

#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub registry: PathBuf,
    pub calibration: Option<PathBuf>,
    pub cycle_min: f64,
    pub cycle_max: f64,
    pub steps: usize,
    /// When set, one plot-ready CSV per pair is written here.
    pub csv_dir: Option<PathBuf>,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 || b <= a {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Sweeps cycle energy over a cycle-time grid for every feasible
/// (processor, model) pair, starting each series at the pair's own
/// inference time.
pub fn cmd_sweep(req: &SweepRequest) -> Result<RunReport, CommandError> {
    if !(req.cycle_max > 0.0 && req.cycle_max >= req.cycle_min && req.cycle_min >= 0.0) {
        return Err(CommandError::Usage(format!(
            "need 0 <= cycle-min <= cycle-max and cycle-max > 0, got {} and {}",
            req.cycle_min, req.cycle_max
        )));
    }
    if req.steps == 0 {
        return Err(CommandError::Usage("steps must be >= 1".to_string()));
    }
    let mut config = BTreeMap::new();
    config.insert("registry".to_string(), req.registry.display().to_string());
    if let Some(p) = &req.calibration {
        config.insert("calibration".to_string(), p.display().to_string());
    }
    config.insert("cycle_min".to_string(), req.cycle_min.to_string());
    config.insert("cycle_max".to_string(), req.cycle_max.to_string());
    config.insert("steps".to_string(), req.steps.to_string());
    if let Some(d) = &req.csv_dir {
        config.insert("csv_dir".to_string(), d.display().to_string());
    }
    let mut report = RunReport::new("sweep", config);

    let mut registry = load_registry(&req.registry)?;
    if let Some(path) = &req.calibration {
        apply_calibration_file(&mut registry, path)?;
    }
    if let Some(dir) = &req.csv_dir {
        fs::create_dir_all(dir).map_err(|source| CommandError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }

    let mut processors: Vec<_> = registry.processors.iter().collect();
    processors.sort_by(|a, b| a.id.cmp(&b.id));
    let mut models: Vec<_> = registry.models.iter().collect();
    models.sort_by(|a, b| a.id.cmp(&b.id));

    for profile in &processors {
        for model in &models {
            let pair = format!("{}/{}", profile.id, model.id);
            let (feasible, reason) = crate::pareto::feasibility_gate(model, profile);
            if !feasible {
                report.warnings.push(format!("{pair}: {}", reason.unwrap_or_default()));
                continue;
            }
            let Some(cal) = &profile.calibration else {
                report.warnings.push(format!("{pair}: processor has no calibration"));
                continue;
            };
            let latency = predict_latency(cal, model.flops)
                .map_err(|e| CommandError::Analysis(format!("{pair}: {e}")))?;
            if latency.seconds == 0.0 {
                report.warnings.push(format!("{pair}: predicted latency clamped to 0"));
                continue;
            }
            if latency.seconds > req.cycle_max {
                report.warnings.push(format!(
                    "{pair}: inference time {} s exceeds cycle-max {} s",
                    latency.seconds, req.cycle_max
                ));
                continue;
            }
            let start = req.cycle_min.max(latency.seconds);
            let grid = linspace(start, req.cycle_max, req.steps);
            let params = CycleParams::from_profile(profile, latency.seconds, cal.active_current);
            let points = sweep_cycle_energy(&params, &grid)
                .map_err(|e| CommandError::Analysis(format!("{pair}: {e}")))?;

            if let Some(dir) = &req.csv_dir {
                let path = dir.join(format!("{}__{}.csv", profile.id, model.id));
                let mut csv = String::from("cycle_time_s,energy_mj,mean_current_ma\n");
                for p in &points {
                    writeln!(csv, "{},{},{}", p.cycle_time, p.cycle_energy, p.mean_cycle_current)
                        .expect("writing to a String cannot fail");
                }
                write_file(&path, &csv)?;
                report.outputs.push(path.display().to_string());
            }
            report.sweeps.push(SweepSeries {
                processor_id: profile.id.clone(),
                model_id: model.id.clone(),
                inference_time: latency.seconds,
                active_current: cal.active_current,
                points,
            });
        }
    }

    if report.sweeps.is_empty() {
        return Err(CommandError::Analysis(format!(
            "no sweepable pairs: {}",
            report.warnings.join("; ")
        )));
    }
    report.registry = Some(registry);
    Ok(report)
}

// ----------------------------------------------------------------- pareto

#[derive(Debug, Clone)]
pub struct ParetoRequest {
    pub registry: PathBuf,
    pub calibration: Option<PathBuf>,
    /// Directory of measured traces to prefer over predictions.
    pub traces_dir: Option<PathBuf>,
    pub cycle_times: Vec<f64>,
    pub quality_threshold: f64,
    pub source: EnergySource,
    /// Additionally enforce each model's use-case quality target.
    pub use_targets: bool,
}

fn source_name(source: EnergySource) -> &'static str {
    match source {
        EnergySource::Auto => "auto",
        EnergySource::Predicted => "predicted",
        EnergySource::Measured => "measured",
    }
}

/// Builds one Pareto front and recommendation per requested cycle time.
pub fn cmd_pareto(req: &ParetoRequest) -> Result<RunReport, CommandError> {
    if req.cycle_times.is_empty() {
        return Err(CommandError::Usage("at least one --cycle-times value is required".to_string()));
    }
    let mut config = BTreeMap::new();
    config.insert("registry".to_string(), req.registry.display().to_string());
    if let Some(p) = &req.calibration {
        config.insert("calibration".to_string(), p.display().to_string());
    }
    if let Some(p) = &req.traces_dir {
        config.insert("traces_dir".to_string(), p.display().to_string());
    }
    config.insert(
        "cycle_times".to_string(),
        req.cycle_times.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    );
    config.insert("quality_threshold".to_string(), req.quality_threshold.to_string());
    config.insert("source".to_string(), source_name(req.source).to_string());
    config.insert("use_targets".to_string(), req.use_targets.to_string());
    let mut report = RunReport::new("pareto", config);

    let mut registry = load_registry(&req.registry)?;
    if let Some(path) = &req.calibration {
        apply_calibration_file(&mut registry, path)?;
    }

    let mut measured = MeasuredMap::new();
    if let Some(dir) = &req.traces_dir {
        for path in csv_files_in(dir)? {
            let name = path.display().to_string();
            let trace = load_trace(&path)?;
            let meta = trace.meta();
            let (Some(processor_id), Some(model_id)) =
                (meta.get("processor").cloned(), meta.get("model").cloned())
            else {
                report.warnings.push(format!("{name}: skipped: no processor/model meta keys"));
                continue;
            };
            let Some(ipw) = meta_u32(&trace, "inferences_per_window") else {
                report
                    .warnings
                    .push(format!("{name}: skipped: no inferences_per_window meta key"));
                continue;
            };
            let Some(profile) = registry.processor(&processor_id) else {
                report
                    .warnings
                    .push(format!("{name}: skipped: processor `{processor_id}` not in registry"));
                continue;
            };
            let metrics = match compute_phase_metrics(&trace, ipw, profile.supply_voltage) {
                Ok(m) => m,
                Err(e) => {
                    report.warnings.push(format!("{name}: skipped: {e}"));
                    continue;
                }
            };
            report.traces.push(TraceReport { path: name.clone(), metrics: metrics.clone() });
            let key = (processor_id, model_id);
            if measured.contains_key(&key) {
                report.warnings.push(format!(
                    "{name}: duplicate measured trace for {}/{}; keeping the first",
                    key.0, key.1
                ));
            } else {
                measured.insert(key, metrics);
            }
        }
    }

    if req.use_targets {
        let targets = registry.targets.clone();
        registry.models.retain(|m| {
            let Some(target) = targets.iter().find(|t| t.use_case == m.use_case) else {
                return true;
            };
            if m.quality < target.quality_threshold {
                report.warnings.push(format!(
                    "model {} dropped: quality {} below use-case target {}",
                    m.id, m.quality, target.quality_threshold
                ));
                false
            } else {
                true
            }
        });
    }

    for &cycle_time in &req.cycle_times {
        match recommend(&registry, &measured, cycle_time, req.quality_threshold, req.source) {
            Ok(rec) => report.fronts.push(rec),
            Err(ParetoError::EmptyCandidateSet { cycle_time, excluded }) => {
                let reasons: Vec<String> = excluded
                    .iter()
                    .map(|x| format!("{}/{}: {}", x.processor_id, x.model_id, x.reason))
                    .collect();
                return Err(CommandError::Analysis(format!(
                    "no candidates at cycle time {cycle_time} s: {}",
                    reasons.join("; ")
                )));
            }
            Err(e) => return Err(CommandError::Analysis(e.to_string())),
        }
    }
    report.registry = Some(registry);
    Ok(report)
}

// ------------------------------------------------------------------ synth

#[derive(Debug, Clone)]
pub struct SynthRequest {
    pub scenario: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScenarioFile {
    One(Box<SynthScenario>),
    Many(Vec<SynthScenario>),
}

fn safe_file_component(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

/// Generates traces plus .truth.json sidecars from a scenario file holding
/// one scenario object or an array of them.
pub fn cmd_synth(req: &SynthRequest) -> Result<RunReport, CommandError> {
    let mut config = BTreeMap::new();
    config.insert("scenario".to_string(), req.scenario.display().to_string());
    config.insert("out_dir".to_string(), req.out_dir.display().to_string());
    let mut report = RunReport::new("synth", config);

    let text = fs::read_to_string(&req.scenario).map_err(|source| CommandError::Io {
        path: req.scenario.display().to_string(),
        source,
    })?;
    let scenarios = match serde_json::from_str::<ScenarioFile>(&text).map_err(|e| {
        CommandError::Parse {
            path: req.scenario.display().to_string(),
            what: e.to_string(),
        }
    })? {
        ScenarioFile::One(s) => vec![*s],
        ScenarioFile::Many(v) => v,
    };
    if scenarios.is_empty() {
        return Err(CommandError::Parse {
            path: req.scenario.display().to_string(),
            what: "scenario file holds an empty array".to_string(),
        });
    }

    fs::create_dir_all(&req.out_dir).map_err(|source| CommandError::Io {
        path: req.out_dir.display().to_string(),
        source,
    })?;

    for scenario in &scenarios {
        for (what, id) in [("processor_id", &scenario.processor_id), ("model_id", &scenario.model_id)]
        {
            if !safe_file_component(id) {
                return Err(CommandError::Parse {
                    path: req.scenario.display().to_string(),
                    what: format!(
                        "{what} `{id}` is not filename-safe (letters, digits, . - _ only)"
                    ),
                });
            }
        }
        let (trace, truth) = generate_trace(scenario)
            .map_err(|e| CommandError::Analysis(e.to_string()))?;
        let base = format!(
            "{}__{}__{}",
            scenario.processor_id, scenario.model_id, scenario.seed
        );
        let trace_path = req.out_dir.join(format!("{base}.csv"));
        write_trace_to_path(&trace, &trace_path).map_err(|e| match e {
            TraceError::Io(source) => CommandError::Io {
                path: trace_path.display().to_string(),
                source,
            },
            other => CommandError::Analysis(other.to_string()),
        })?;
        let truth_path = req.out_dir.join(format!("{base}.truth.json"));
        let mut doc = serde_json::to_string_pretty(&truth).expect("truth serializes");
        doc.push('\n');
        write_file(&truth_path, &doc)?;
        report.outputs.push(trace_path.display().to_string());
        report.outputs.push(truth_path.display().to_string());
    }
    Ok(report)
}
