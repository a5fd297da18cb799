//! Acceptance battery: one line per criterion, nonzero exit on any failure.
//!
//! Select criteria with `cargo test --test acceptance -- 3 7`.

use cramer_model::experiments::battery::{run_battery, BatteryConfig};
use cramer_model::experiments::default_workers;

const SEED: u64 = 42;

fn main() {
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    // `cargo test --workspace -- <filter>` forwards libtest flags here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let cfg = BatteryConfig { seed: SEED, workers: default_workers() };
    println!("acceptance battery: seed {SEED}, {} workers", cfg.workers);
    let mut failed = 0;
    for (id, name, res) in run_battery(&cfg, &only) {
        match res {
            Ok(o) => {
                println!("{}", o.line());
                failed += !o.passed as u32;
            }
            Err(e) => {
                println!("[FAIL] {id:>2} {name}: error: {e}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
