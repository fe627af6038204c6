// L-curve sweep in the singular bases and automatic choice of λ.

use gradsurf::regparam::corner;
use gradsurf::simulate::{add_noise, evaluate, GroundTruth, NoiseKind, NoiseSpec};
use gradsurf::SpectralCache;

pub fn run_example() -> gradsurf::Result<()> {
    let truth = GroundTruth::bumps(16, 16)?;
    let (dx, dy) = truth.gradient.operators(2)?;
    let noisy = add_noise(
        &truth.gradient,
        &NoiseSpec {
            kind: NoiseKind::Iid,
            level: 0.1,
            seed: 5,
        },
    )?;

    let cache = SpectralCache::build(&noisy, &dx, &dy)?;
    let curve = cache.l_curve(&cache.default_grid(20))?;
    println!("{:>12} {:>10} {:>10}", "lambda", "rho", "eta");
    for p in &curve {
        println!("{:>12.4e} {:>10.4} {:>10.4}", p.lambda, p.rho, p.eta);
    }

    let best = corner(&curve)?;
    let z = cache.reconstruct(best)?;
    let z0 = cache.reconstruct(0.0)?;
    println!("corner λ = {best:.4e}");
    println!(
        "rel_error at corner {:.4}",
        evaluate(&z, &truth.surface, &noisy, &dx, &dy)?.rel_error
    );
    println!(
        "rel_error at λ = 0  {:.4}",
        evaluate(&z0, &truth.surface, &noisy, &dx, &dy)?.rel_error
    );
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
