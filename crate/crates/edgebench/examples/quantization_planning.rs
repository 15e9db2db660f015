//! Estimate whether quantization makes an oversized model deployable.
//!
//! The 4:1 size estimate is a planning figure for float32 weights going to
//! int8; it never replaces a measured footprint.
//!
//! Run: cargo run --example quantization_planning

use edgebench::pareto::feasibility_gate;
use edgebench::registry::{estimate_quantized_rom, Registry};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/registry.json");
    let registry = Registry::from_path(path).expect("bundled registry parses");

    let float_model = registry
        .model("mobilenetv1-vww-float")
        .expect("fixture carries the float wake-word model");
    println!(
        "{}: {} params, {} ROM bytes unquantized",
        float_model.id, float_model.params, float_model.rom_bytes
    );

    for p in &registry.processors {
        let (ok, reason) = feasibility_gate(float_model, p);
        println!(
            "  on {:<7} {}",
            p.id,
            if ok { "fits".to_string() } else { reason.unwrap_or_default() }
        );
    }

    let estimated = estimate_quantized_rom(float_model).expect("model is not quantized yet");
    println!("estimated ROM after int8 quantization: {estimated} bytes");

    // re-run the gate with the estimated footprint
    let mut planned = float_model.clone();
    planned.rom_bytes = estimated;
    planned.quantized = true;
    for p in &registry.processors {
        let (ok, reason) = feasibility_gate(&planned, p);
        println!(
            "  on {:<7} {}",
            p.id,
            if ok { "fits after quantization".to_string() } else { reason.unwrap_or_default() }
        );
    }
}
