// The dense Kronecker-product formulation as a cross-check of the
// Sylvester solver, and the work it costs.

use gradsurf::simulate::oracle_gls;
use gradsurf::sylvester::{work_estimate, WorkModel};
use gradsurf::{reconstruct, GradientField, Matrix, MethodSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> gradsurf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for (m, n) in [(6, 8), (10, 12), (24, 20)] {
        let zx = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let zy = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let g = GradientField::new(zx, zy, 0.1, 0.1)?;
        let (dx, dy) = g.operators(2)?;

        let dense = oracle_gls(&g, &dx, &dy)?;
        let sylv = reconstruct(&g, &dx, &dy, &MethodSpec::Gls)?.mean_free();
        println!(
            "{m}×{n}: max deviation {:.1e}, work {:.2e} dense vs {:.2e} Sylvester",
            (&dense.heights - &sylv.heights).amax(),
            work_estimate(m, n, WorkModel::Vectorized),
            work_estimate(m, n, WorkModel::Sylvester)
        );
    }
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
