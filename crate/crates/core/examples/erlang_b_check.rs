//! A single link with one-slot requests behaves like an M/M/c/c loss
//! system. Compares simulated blocking with the Erlang-B formula.

use sdm_rmcsa::{run_simulation, Policy, PolicyConfig, SimOptions, SpectrumConfig, Topology, TrafficConfig};

fn erlang_b(erlangs: f64, servers: usize) -> f64 {
    (1..=servers).fold(1.0, |b, k| erlangs * b / (k as f64 + erlangs * b))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = Topology::new("link", 2, [(0, 1, 100.0)])?;
    let slots = 10;
    let spectrum = SpectrumConfig { cores: 1, slots_per_core: slots, slot_bandwidth_ghz: 12.5, guard_slots: 0 };
    println!("{:>6} {:>10} {:>10}", "E", "simulated", "Erlang-B");
    for load in [4.0, 6.0, 8.0, 10.0, 12.0, 16.0] {
        let mut sum = 0.0;
        let reps = 5;
        for seed in 0..reps {
            let traffic = TrafficConfig {
                bandwidth_set: vec![25.0],
                total_requests: 100_000,
                warmup_requests: 10_000,
                seed,
                ..TrafficConfig::default()
            }
            .with_load(load, 2);
            let r = run_simulation(&t, &spectrum, &traffic, &PolicyConfig::new(Policy::Sp), SimOptions::default())?;
            sum += r.metrics.rbp;
        }
        // Two directions, each offered half the load.
        println!("{load:>6} {:>10.5} {:>10.5}", sum / reps as f64, erlang_b(load / 2.0, slots));
    }
    Ok(())
}
