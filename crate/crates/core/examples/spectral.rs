// Band-limited reconstruction with each basis family, keeping half of the
// basis functions in each direction, plus a custom column subset.

use gradsurf::simulate::{add_noise, evaluate, GroundTruth, NoiseKind, NoiseSpec};
use gradsurf::{reconstruct, BasisFamily, BasisSet, MethodSpec};

pub fn run_example() -> gradsurf::Result<()> {
    let truth = GroundTruth::bumps(64, 64)?;
    let (dx, dy) = truth.gradient.operators(2)?;
    let noisy = add_noise(
        &truth.gradient,
        &NoiseSpec {
            kind: NoiseKind::Iid,
            level: 0.1,
            seed: 3,
        },
    )?;

    let gls = reconstruct(&noisy, &dx, &dy, &MethodSpec::Gls)?;
    let e = evaluate(&gls, &truth.surface, &noisy, &dx, &dy)?;
    println!("{:<10} rel_error {:.4}", "gls", e.rel_error);

    for family in [BasisFamily::Cosine, BasisFamily::Gram, BasisFamily::Haar] {
        let spec = MethodSpec::spectral_half(family, 64, 64)?;
        let z = reconstruct(&noisy, &dx, &dy, &spec)?;
        let e = evaluate(&z, &truth.surface, &noisy, &dx, &dy)?;
        println!("{:<10} rel_error {:.4}", family.to_string(), e.rel_error);
    }

    // every other low-order cosine, to show arbitrary subsets
    let keep: Vec<usize> = (0..24).filter(|k| k % 2 == 0 || *k < 8).collect();
    let basis = BasisSet::new(BasisFamily::Cosine, 64, 64)?.select(&keep)?;
    let spec = MethodSpec::Spectral {
        basis_y: basis.clone(),
        basis_x: basis,
    };
    let z = reconstruct(&noisy, &dx, &dy, &spec)?;
    let e = evaluate(&z, &truth.surface, &noisy, &dx, &dy)?;
    println!(
        "{:<10} rel_error {:.4} ({} functions)",
        "subset",
        e.rel_error,
        keep.len()
    );
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
