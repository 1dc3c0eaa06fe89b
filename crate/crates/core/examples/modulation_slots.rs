//! Slot demand of each bandwidth class as the path gets longer.

use sdm_rmcsa::modulation::{required_slots, ModulationTable};
use sdm_rmcsa::SpectrumConfig;

fn main() {
    let table = ModulationTable::default();
    let cfg = SpectrumConfig::default();
    for e in table.entries() {
        println!("{:>6}  m={}  {:>5} Gb/s per slot  reach {} km", e.name, e.m, e.supported_rate_gbps, e.max_reach_km);
    }
    let rates = [25.0, 50.0, 75.0, 100.0, 125.0, 150.0];
    print!("\n{:>8}", "km");
    for b in rates {
        print!("{b:>6}");
    }
    println!();
    for km in [100.0, 400.0, 800.0, 1500.0, 3000.0, 6000.0, 9000.0] {
        print!("{km:>8}");
        for b in rates {
            match table.select(km) {
                Some(e) => print!("{:>6}", required_slots(b, e.m, &cfg)),
                None => print!("{:>6}", "-"),
            }
        }
        println!();
    }
}
