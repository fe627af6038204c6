// Plain global least squares on a noisy gradient of the bump surface.

use gradsurf::simulate::{add_noise, evaluate, GroundTruth, NoiseKind, NoiseSpec};
use gradsurf::{reconstruct, MethodSpec};

pub fn run_example() -> gradsurf::Result<()> {
    let truth = GroundTruth::bumps(64, 64)?;
    let (dx, dy) = truth.gradient.operators(4)?;

    for level in [0.0, 0.05, 0.1] {
        let noisy = add_noise(
            &truth.gradient,
            &NoiseSpec {
                kind: NoiseKind::Iid,
                level,
                seed: 7,
            },
        )?;
        let z = reconstruct(&noisy, &dx, &dy, &MethodSpec::Gls)?;
        let m = evaluate(&z, &truth.surface, &noisy, &dx, &dy)?;
        println!(
            "noise {level:>4}: cost {:.3e}  rel_error {:.3e}  KS p {:.3}",
            m.cost_residual,
            m.rel_error,
            m.ks_p_value()
        );
    }
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
