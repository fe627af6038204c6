// Covariance-weighted least squares under heteroscedastic noise.

use gradsurf::simulate::{
    add_noise, evaluate, radial_covariance, GroundTruth, NoiseKind, NoiseSpec,
};
use gradsurf::{reconstruct, CovarianceSet, MethodSpec};

pub fn run_example() -> gradsurf::Result<()> {
    let truth = GroundTruth::bumps(64, 64)?;
    let (dx, dy) = truth.gradient.operators(2)?;
    let cov = radial_covariance(&truth.gradient)?;

    let methods = [
        ("gls", MethodSpec::Gls),
        (
            "identity",
            MethodSpec::Weighted(CovarianceSet::identity(64, 64)),
        ),
        ("radial", MethodSpec::Weighted(cov)),
    ];
    for seed in 0..3 {
        let noisy = add_noise(
            &truth.gradient,
            &NoiseSpec {
                kind: NoiseKind::HeteroscedasticRadial,
                level: 0.2,
                seed,
            },
        )?;
        for (name, spec) in &methods {
            let z = reconstruct(&noisy, &dx, &dy, spec)?;
            let e = evaluate(&z, &truth.surface, &noisy, &dx, &dy)?;
            println!("seed {seed} {name:<9} rel_error {:.4}", e.rel_error);
        }
    }
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
