//! Fit the FLOPS-to-latency line for a device from repeated benchmark runs,
//! then predict latency and energy for a model that was never measured.
//!
//! Run: cargo run --example calibrate_flops_latency

use edgebench::regression::{fit_latency_model, predict_inference_energy, predict_latency};
use edgebench::synth::{generate_calibration_suite, SyntheticDevice};

fn main() {
    let device = SyntheticDevice {
        processor_id: "m4".to_string(),
        latency_slope: 2.1e-8,
        latency_intercept: 0.018,
        active_current: 9.8,
        idle_current: 0.30,
        supply_voltage: 3.3,
    };
    let flops: Vec<u64> = vec![
        500_000, 1_200_000, 4_000_000, 9_000_000, 16_000_000, 25_000_000,
    ];

    // 3% run-to-run latency noise, as a real board would show
    let suite = generate_calibration_suite(&device, &flops, 0.03, 10_000.0, 2024)
        .expect("valid suite parameters");
    let points: Vec<_> = suite.runs.iter().map(|r| r.truth.clone()).collect();
    let cal = fit_latency_model(&points).expect("non-degenerate design");

    println!("fitted over {} models:", cal.n_points);
    println!("  slope      {:.4e} s/FLOP (true {:.4e})", cal.latency_slope, device.latency_slope);
    println!(
        "  intercept  {:.6} s (true {:.6})",
        cal.latency_intercept, device.latency_intercept
    );
    println!("  r^2        {:.5}", cal.r_squared);
    println!("  current    {:.3} mA", cal.active_current);

    let unseen_flops = 12_345_678;
    let latency = predict_latency(&cal, unseen_flops).expect("positive flops");
    let energy = predict_inference_energy(&cal, device.supply_voltage, unseen_flops)
        .expect("positive flops");
    println!("prediction for a {unseen_flops}-FLOP model:");
    println!("  latency {:.6} s, energy {:.4} mJ", latency.seconds, energy);
}
