//! The whole flow in one program: synthesize benchmark traces for two cores
//! and six models, segment them, calibrate both cores, and watch the Pareto
//! recommendation flip as the cycle time grows.
//!
//! Run: cargo run --example full_pipeline

use std::fs;

use edgebench::pareto::EnergySource;
use edgebench::registry::{ModelDescriptor, ProcessorProfile, QualityKind, Registry};
use edgebench::report::{
    cmd_calibrate, cmd_pareto, cmd_synth, CalibrateRequest, ParetoRequest, SynthRequest,
};
use edgebench::synth::SynthScenario;

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let registry = demo_registry();
    let registry_path = dir.path().join("registry.json");
    fs::write(&registry_path, registry.to_json()).expect("writable temp dir");

    // two device truths: m7 is faster per FLOP but idles at 1.60 mA,
    // m4 is slower but sleeps at 0.30 mA
    let lines = [("m7", 1e-8, 0.01, 1.60), ("m4", 2e-8, 0.02, 0.30)];
    let scenarios: Vec<SynthScenario> = lines
        .iter()
        .flat_map(|&(id, slope, intercept, idle)| {
            registry.models.iter().map(move |m| SynthScenario {
                processor_id: id.to_string(),
                model_id: m.id.clone(),
                true_inference_time: slope * m.flops as f64 + intercept,
                true_active_current: 10.0,
                true_idle_current: idle,
                inferences_per_window: 1,
                n_windows: 2,
                idle_gap: 0.05,
                sample_rate: 10_000.0,
                noise_sigma: 0.0,
                seed: m.flops / 1_000_000,
            })
        })
        .collect();
    let scenario_path = dir.path().join("scenarios.json");
    fs::write(&scenario_path, serde_json::to_string_pretty(&scenarios).unwrap()).unwrap();

    let traces_dir = dir.path().join("traces");
    let synth = cmd_synth(&SynthRequest {
        scenario: scenario_path,
        out_dir: traces_dir.clone(),
    })
    .expect("synthesis succeeds");
    println!("synthesized {} files", synth.outputs.len());

    let cal_path = dir.path().join("calibrations.json");
    let cal = cmd_calibrate(&CalibrateRequest {
        registry: registry_path.clone(),
        traces_dir,
        out_calibration: cal_path.clone(),
        force: false,
    })
    .expect("calibration succeeds");
    for c in &cal.calibrations {
        println!(
            "{}: slope {:.3e} s/FLOP, intercept {:.4} s, r^2 {:.5}",
            c.processor_id,
            c.calibration.latency_slope,
            c.calibration.latency_intercept,
            c.calibration.r_squared
        );
    }

    let pareto = cmd_pareto(&ParetoRequest {
        registry: registry_path,
        calibration: Some(cal_path),
        traces_dir: None,
        cycle_times: vec![0.5, 5.0],
        quality_threshold: 0.0,
        source: EnergySource::Predicted,
        use_targets: false,
    })
    .expect("candidates survive");
    for rec in &pareto.fronts {
        let top = rec.top().expect("non-empty front");
        println!(
            "at {} s the pick is {}/{} at {:.3} mJ per cycle",
            rec.cycle_time, top.processor_id, top.model_id, top.cycle_energy
        );
    }
}

fn demo_registry() -> Registry {
    let models = [5u64, 10, 15, 20, 25, 30]
        .iter()
        .enumerate()
        .map(|(i, mflops)| ModelDescriptor {
            id: format!("n{}", i + 1),
            use_case: "kws".to_string(),
            params: 50_000 * (i as u64 + 1),
            flops: mflops * 1_000_000,
            ram_bytes: 40_000,
            rom_bytes: 60_000,
            quality: 0.80 + 0.02 * i as f64,
            quality_kind: QualityKind::Accuracy,
            quantized: true,
        })
        .collect();
    Registry {
        processors: vec![
            ProcessorProfile {
                id: "m7".to_string(),
                idle_current: 1.60,
                supply_voltage: 3.3,
                ram_capacity: 1 << 20,
                rom_capacity: 8 << 20,
                calibration: None,
            },
            ProcessorProfile {
                id: "m4".to_string(),
                idle_current: 0.30,
                supply_voltage: 3.3,
                ram_capacity: 1 << 20,
                rom_capacity: 8 << 20,
                calibration: None,
            },
        ],
        models,
        targets: Vec::new(),
    }
}
