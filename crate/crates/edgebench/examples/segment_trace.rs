//! Segment a marker-annotated trace into active windows and idle spans,
//! then derive per-inference time, current, and energy.
//!
//! Run: cargo run --example segment_trace [trace.csv]

use edgebench::segment::compute_phase_metrics;
use edgebench::synth::{generate_trace, SynthScenario};
use edgebench::trace::read_trace_from_path;

fn main() {
    // segment a file when given one, otherwise synthesize a demo trace
    let trace = match std::env::args().nth(1) {
        Some(path) => read_trace_from_path(&path).expect("readable trace CSV"),
        None => {
            let scenario = SynthScenario {
                processor_id: "m7".to_string(),
                model_id: "resnet-cifar10".to_string(),
                true_inference_time: 0.03,
                true_active_current: 12.0,
                true_idle_current: 1.60,
                inferences_per_window: 5,
                n_windows: 4,
                idle_gap: 0.2,
                sample_rate: 10_000.0,
                noise_sigma: 0.2,
                seed: 7,
            };
            generate_trace(&scenario).expect("valid scenario").0
        }
    };

    let inferences_per_window: u32 = trace
        .meta()
        .get("inferences_per_window")
        .and_then(|v| v.parse().ok())
        .unwrap_or(1);
    let metrics = compute_phase_metrics(&trace, inferences_per_window, 3.3)
        .expect("trace has active windows");

    println!("windows:");
    for w in &metrics.windows {
        println!(
            "  [{:.4}, {:.4}] s  mean {:.3} mA  {:.4} mJ  ({} samples)",
            w.start, w.end, w.mean_current, w.energy, w.sample_count
        );
    }
    println!("idle spans: {}", metrics.idle_spans.len());
    println!("inference time   {:.6} s", metrics.inference_time);
    println!("active current   {:.3} mA", metrics.active_current);
    match metrics.idle_current {
        Some(i) => println!("idle current     {i:.3} mA"),
        None => println!("idle current     (no usable idle span)"),
    }
    println!("inference energy {:.4} mJ", metrics.inference_energy);
    for w in &metrics.warnings {
        println!("warning: {w}");
    }
}
