// A small Monte-Carlo study of every method, written as CSV to stdout.

use gradsurf::simulate::{monte_carlo, standard_methods, GroundTruth, MonteCarloConfig, NoiseKind};

pub fn run_example() -> gradsurf::Result<()> {
    let truth = GroundTruth::bumps(32, 32)?;
    for noise in [
        NoiseKind::Iid,
        NoiseKind::HeteroscedasticRadial,
        NoiseKind::Outliers,
    ] {
        let methods = standard_methods(&truth, noise)?;
        let cfg = MonteCarloConfig {
            noise,
            levels: vec![0.0, 0.05, 0.1],
            trials: 5,
            base_seed: 2024,
            order: 2,
        };
        let table = monte_carlo(&truth, &methods, &cfg)?;
        println!("# {noise}");
        print!("{}", table.to_csv_string()?);
    }
    Ok(())
}

fn main() -> gradsurf::Result<()> {
    run_example()
}
