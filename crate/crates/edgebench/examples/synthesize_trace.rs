//! Generate a synthetic current trace and write it next to its ground truth.
//!
//! Run: cargo run --example synthesize_trace

use edgebench::synth::{generate_trace, SynthScenario};
use edgebench::trace::write_trace_to_path;

fn main() {
    let scenario = SynthScenario {
        processor_id: "m4".to_string(),
        model_id: "lenet5-mnist".to_string(),
        true_inference_time: 0.012,
        true_active_current: 9.5,
        true_idle_current: 0.30,
        inferences_per_window: 10,
        n_windows: 5,
        idle_gap: 0.25,
        sample_rate: 10_000.0,
        noise_sigma: 0.15,
        seed: 42,
    };

    let (trace, truth) = generate_trace(&scenario).expect("valid scenario");
    println!(
        "generated {} samples over {:.3} s ({} windows of {} inferences)",
        trace.len(),
        truth.total_duration,
        scenario.n_windows,
        scenario.inferences_per_window
    );
    for (i, w) in truth.windows.iter().enumerate() {
        println!("  window {i}: [{:.4}, {:.4}] s", w.start, w.end);
    }

    let out = std::env::temp_dir().join("edgebench_demo_trace.csv");
    write_trace_to_path(&trace, &out).expect("writable temp dir");
    println!("wrote {}", out.display());
    println!("meta keys travel with the file:");
    for (k, v) in trace.meta() {
        println!("  # {k}={v}");
    }
}
