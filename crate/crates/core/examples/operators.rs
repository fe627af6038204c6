// Differentiation matrices and the three orthonormal basis families.

use gradsurf::basis::{cosine_basis, gram_basis, haar_basis};
use gradsurf::{diff_matrix, Matrix};

pub fn run_example() -> gradsurf::Result<()> {
    let d = diff_matrix(6, 0.5, 2)?;
    println!("order-2 operator, n=6, h=0.5:{}", d.matrix());

    // a cubic is differentiated exactly by the order-4 stencils
    let x: Vec<f64> = (0..9).map(|i| i as f64 * 0.25).collect();
    let f: Vec<f64> = x.iter().map(|t| t * t * t - t).collect();
    let df = diff_matrix(9, 0.25, 4)?.apply(&f)?;
    let worst = x
        .iter()
        .zip(&df)
        .map(|(t, d)| (3.0 * t * t - 1.0 - d).abs())
        .fold(0.0, f64::max);
    println!("order-4 derivative of t³ − t: max error {worst:.1e}");

    for (name, b) in [
        ("cosine", cosine_basis(8, 8)?),
        ("gram", gram_basis(8, 8)?),
        ("haar", haar_basis(8, 8)?),
    ] {
        let gram = b.matrix().tr_mul(b.matrix());
        println!(
            "{name:<6} ‖BᵀB − I‖ = {:.1e}",
            (gram - Matrix::identity(8, 8)).amax()
        );
    }
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
