// Fixing the boundary heights: robust to gross outliers and recovers the
// absolute height level, which gradients alone cannot.

use gradsurf::simulate::{add_noise, evaluate, GroundTruth, NoiseKind, NoiseSpec};
use gradsurf::{reconstruct, MethodSpec};

pub fn run_example() -> gradsurf::Result<()> {
    let truth = GroundTruth::bumps(64, 64)?;
    let (dx, dy) = truth.gradient.operators(2)?;
    let boundary = truth.surface.heights.clone();

    let exact = reconstruct(
        &truth.gradient,
        &dx,
        &dy,
        &MethodSpec::dirichlet(boundary.clone()),
    )?;
    let offset = (exact.mean() - truth.surface.mean()).abs();
    println!("noiseless: mean offset from truth {offset:.2e}");

    let noisy = add_noise(
        &truth.gradient,
        &NoiseSpec {
            kind: NoiseKind::Outliers,
            level: 0.1,
            seed: 1,
        },
    )?;
    for (name, spec) in [
        ("gls", MethodSpec::Gls),
        ("dirichlet", MethodSpec::dirichlet(boundary)),
    ] {
        let z = reconstruct(&noisy, &dx, &dy, &spec)?;
        let e = evaluate(&z, &truth.surface, &noisy, &dx, &dy)?;
        println!("10% outliers, {name:<9} rel_error {:.4}", e.rel_error);
    }
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
