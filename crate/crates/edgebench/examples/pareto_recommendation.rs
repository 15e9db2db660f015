//! Rank processor/model pairs on the energy/quality Pareto front.
//!
//! Loads the bundled registry, attaches demo calibrations, and prints the
//! recommendation at a short and a long cycle time.
//!
//! Run: cargo run --example pareto_recommendation

use edgebench::pareto::{recommend, EnergySource, MeasuredMap};
use edgebench::registry::{Calibration, Registry};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/registry.json");
    let mut registry = Registry::from_path(path).expect("bundled registry parses");

    // demo fits: the M7 runs roughly twice as fast per FLOP as the M4,
    // and the M0+ is an order of magnitude slower
    let fits = [("m0plus", 2.0e-7, 0.005), ("m4", 2.0e-8, 0.02), ("m7", 1.0e-8, 0.01)];
    for (id, slope, intercept) in fits {
        let p = registry.processors.iter_mut().find(|p| p.id == id).expect("fixture id");
        p.calibration = Some(Calibration {
            latency_slope: slope,
            latency_intercept: intercept,
            r_squared: 0.99,
            active_current: 10.0,
            n_points: 6,
        });
    }

    let measured = MeasuredMap::new();
    for cycle_time in [0.5, 5.0] {
        let rec = recommend(&registry, &measured, cycle_time, 0.8, EnergySource::Predicted)
            .expect("candidates survive");
        println!("cycle time {cycle_time} s:");
        for e in &rec.front {
            println!(
                "  front: {}/{}  {:.3} mJ  quality {:.2}",
                e.processor_id, e.model_id, e.cycle_energy, e.quality
            );
        }
        println!("  dominated: {}, excluded: {}", rec.dominated.len(), rec.excluded.len());
        for x in rec.excluded.iter().take(3) {
            println!("    excluded {}/{}: {}", x.processor_id, x.model_id, x.reason);
        }
        if let Some(top) = rec.top() {
            println!("  pick: {}/{}", top.processor_id, top.model_id);
        }
    }
}
