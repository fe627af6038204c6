// Timing of GLS against half-truncated spectral reconstruction. Pass grid
// sizes as arguments, e.g. `cargo run --release --example benchmark 128 256 512`.

use gradsurf::cli::run_bench;

pub fn run_example() -> gradsurf::Result<()> {
    let sizes: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let sizes = if sizes.is_empty() {
        vec![32, 64]
    } else {
        sizes
    };
    println!(
        "{:<14} {:>6} {:>12} {:>14}",
        "method", "size", "mean [s]", "work model"
    );
    for r in run_bench(&sizes, 3, 2)? {
        println!(
            "{:<14} {:>6} {:>12.5} {:>14.3e}",
            r.method, r.size, r.mean_seconds, r.work_estimate
        );
    }
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
