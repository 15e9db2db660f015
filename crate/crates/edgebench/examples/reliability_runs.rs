//! Check run-to-run reliability: benchmark the same model five times and
//! summarise the spread of each metric as a coefficient of variation.
//!
//! Run: cargo run --example reliability_runs

use edgebench::regression::{reliability, ReliabilityMetric, DEFAULT_CV_THRESHOLD};
use edgebench::segment::compute_phase_metrics;
use edgebench::synth::{generate_trace, SynthScenario};

fn main() {
    let runs: Vec<_> = (0..5)
        .map(|run| {
            let scenario = SynthScenario {
                processor_id: "m0plus".to_string(),
                model_id: "autoencoder-toyadmos".to_string(),
                true_inference_time: 0.008,
                true_active_current: 11.0,
                true_idle_current: 4.20,
                inferences_per_window: 20,
                n_windows: 4,
                idle_gap: 0.15,
                sample_rate: 10_000.0,
                noise_sigma: 0.25,
                seed: 9000 + run,
            };
            let (trace, _) = generate_trace(&scenario).expect("valid scenario");
            compute_phase_metrics(&trace, 20, 3.3).expect("active windows present")
        })
        .collect();

    println!("metric            mean        stddev      cv        verdict");
    for metric in [
        ReliabilityMetric::InferenceTime,
        ReliabilityMetric::ActiveCurrent,
        ReliabilityMetric::InferenceEnergy,
    ] {
        let r = reliability(&runs, metric, DEFAULT_CV_THRESHOLD).expect("5 runs");
        println!(
            "{:<17} {:<11.6} {:<11.6} {:<9.6} {}",
            format!("{metric:?}"),
            r.mean,
            r.sample_stddev,
            r.cv,
            if r.reliable { "reliable" } else { "NOISY" }
        );
    }
    println!("(cv threshold {DEFAULT_CV_THRESHOLD})");
}
