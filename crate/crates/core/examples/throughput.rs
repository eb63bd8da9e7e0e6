//! Events per second of the trajectory engine on the default parameters.
//!
//! `cargo run --release -p shelving-core --example throughput [trajectories]`

use std::time::Instant;

use shelving_core::ensemble::{run_ensemble, EnsembleConfig};
use shelving_core::SystemParams;

fn main() {
    let count = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(100);
    let p = SystemParams::default();
    let cfg = EnsembleConfig {
        count,
        t_end: 50.0 / p.weak_decay,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        ..EnsembleConfig::default()
    };
    let started = Instant::now();
    let stats = run_ensemble(&p, &cfg).expect("default ensemble runs");
    let took = started.elapsed().as_secs_f64();
    println!(
        "{} trajectories, {} events in {took:.2} s ({:.2} us/event, {} workers)",
        stats.trajectory_count,
        stats.event_count,
        took * 1e6 / stats.event_count as f64,
        cfg.workers
    );
}
