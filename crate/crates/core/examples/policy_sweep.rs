//! Runs an experiment file in-process and prints the blocking table.
//!
//! ```text
//! cargo run --release --example policy_sweep -- [config.toml] [workers]
//! ```

use sdm_rmcsa::experiment::{run_cells, summarize, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/configs/tiny.toml").into());
    let workers = args.next().map(|w| w.parse()).transpose()?;
    let cfg = ExperimentConfig::from_file(&path)?;

    let records = run_cells(&cfg, workers)?;
    let rows = summarize(&records, cfg.confidence);
    println!("{:>5} {:>8} {:>10} {:>10} {:>8} {:>7}", "alg", "load", "RBP", "BBP", "NRU", "AHL");
    for r in rows {
        println!(
            "{:>5} {:>8} {:>10.5} {:>10.5} {:>8.4} {:>7.3}",
            r.policy.name(),
            r.load_erlangs,
            r.rbp_mean,
            r.bbp_mean,
            r.nru_mean,
            r.ahl_mean.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
