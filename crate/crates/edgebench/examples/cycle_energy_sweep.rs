//! Compare two cores over a range of inference cycle times.
//!
//! A fast core with a hungry sleep current wins short cycles; a slower core
//! that sleeps deeply wins long ones. The crossover is where the two affine
//! energy curves intersect.
//!
//! Run: cargo run --example cycle_energy_sweep

use edgebench::cycle::{crossover_time, sweep_cycle_energy, CycleParams};

fn main() {
    // measured activity, datasheet idle currents
    let m7 = CycleParams {
        supply_voltage: 3.3,
        idle_current: 1.60,
        active_current: 10.0,
        inference_time: 0.11,
    };
    let m4 = CycleParams {
        supply_voltage: 3.3,
        idle_current: 0.30,
        active_current: 10.0,
        inference_time: 0.22,
    };

    let grid = [0.5, 1.0, 2.5, 5.0];
    let e7 = sweep_cycle_energy(&m7, &grid).expect("grid above inference time");
    let e4 = sweep_cycle_energy(&m4, &grid).expect("grid above inference time");

    println!("cycle time   M7 energy   M4 energy   cheaper");
    for (a, b) in e7.iter().zip(&e4) {
        println!(
            "{:>7.2} s   {:>7.3} mJ  {:>7.3} mJ   {}",
            a.cycle_time,
            a.cycle_energy,
            b.cycle_energy,
            if a.cycle_energy < b.cycle_energy { "M7" } else { "M4" }
        );
    }

    match crossover_time(&m7, &m4) {
        Some(t) => println!("ranking flips at {t:.4} s"),
        None => println!("one core dominates at every feasible cycle time"),
    }
    println!(
        "energy lines: M7 slope {:.3} mJ/s, M4 slope {:.3} mJ/s",
        m7.energy_slope(),
        m4.energy_slope()
    );
}
