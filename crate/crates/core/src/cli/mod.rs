//! Command-line front end: grid-file I/O, method selection and the
//! Monte-Carlo and benchmark drivers behind the `gradsurf` binary.

mod gridfile;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use gridfile::{
    decode_binary, decode_csv, encode_binary, encode_csv, is_csv, read_grid, write_grid, Grid,
    MAGIC,
};

use crate::basis::{BasisFamily, BasisSet};
use crate::diffops::{gradient_cost, GradientField};
use crate::error::{Error, Result};
use crate::reconstruct::{prepare, reconstruct, CovarianceSet, MethodSpec, TikhonovSpec};
use crate::regparam::{corner, SpectralCache};
use crate::simulate::{monte_carlo, standard_methods, GroundTruth, MonteCarloConfig, NoiseKind};
use crate::sylvester::{work_estimate, WorkModel};
use crate::Matrix;

/// Process exit codes, one per failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const FORMAT: i32 = 4;
    pub const DIMENSION: i32 = 5;
    pub const SINGULAR: i32 = 6;
    pub const GUARD: i32 = 7;
    pub const ARGUMENT: i32 = 8;
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => exit::IO,
        Error::Format(_) => exit::FORMAT,
        Error::Dimension(_) => exit::DIMENSION,
        Error::Singular(_) | Error::NotSymmetric(_) | Error::NotPositiveDefinite(_) => {
            exit::SINGULAR
        }
        Error::Guard(_) => exit::GUARD,
        Error::InvalidArgument(_) => exit::ARGUMENT,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "gradsurf",
    version,
    about = "Reconstruct surfaces from gradient fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Unregularized global least squares.
    Gls(Reconstruction),
    /// Reconstruction restricted to a truncated basis.
    Spectral {
        #[command(flatten)]
        io: Reconstruction,
        #[arg(long, default_value = "cosine")]
        basis: BasisFamily,
        /// Basis functions along y (rows); default ⌈m/2⌉.
        #[arg(long)]
        p: Option<usize>,
        /// Basis functions along x (columns); default ⌈n/2⌉.
        #[arg(long)]
        q: Option<usize>,
        /// Basis function indices removed from both bases.
        #[arg(long, value_delimiter = ',')]
        drop_cols: Vec<usize>,
    },
    /// Tikhonov-regularized least squares.
    Tikhonov {
        #[command(flatten)]
        io: Reconstruction,
        #[arg(long, required_unless_present = "lcurve", conflicts_with = "lcurve")]
        lambda: Option<f64>,
        /// Choose λ at the L-curve corner (degree 0, μ = λ, zero prior).
        #[arg(long)]
        lcurve: bool,
        /// Weight on the y-regularizer; defaults to λ.
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
        degree: u8,
        /// A-priori surface grid.
        #[arg(long)]
        prior: Option<PathBuf>,
    },
    /// Least squares with heights fixed on the grid boundary.
    Dirichlet {
        #[command(flatten)]
        io: Reconstruction,
        /// Grid whose outer frame holds the boundary heights.
        #[arg(long)]
        boundary: PathBuf,
    },
    /// Covariance-weighted least squares. Missing covariances are identities.
    Wls {
        #[command(flatten)]
        io: Reconstruction,
        #[arg(long)]
        cov_xx: Option<PathBuf>,
        #[arg(long)]
        cov_xy: Option<PathBuf>,
        #[arg(long)]
        cov_yx: Option<PathBuf>,
        #[arg(long)]
        cov_yy: Option<PathBuf>,
    },
    /// Tabulate the Tikhonov L-curve (lambda, rho, eta) as CSV.
    Lcurve {
        #[command(flatten)]
        input: GradientInput,
        #[arg(long, default_value_t = 20)]
        points: usize,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo evaluation of every method on a synthetic surface.
    Simulate(SimulateArgs),
    /// Time GLS and half-truncated spectral solves across grid sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GradientInput {
    /// x-gradient grid.
    pub zx: PathBuf,
    /// y-gradient grid.
    pub zy: PathBuf,
    /// x-spacing for CSV input.
    #[arg(long, default_value_t = 1.0)]
    pub hx: f64,
    /// y-spacing for CSV input.
    #[arg(long, default_value_t = 1.0)]
    pub hy: f64,
    #[arg(long, default_value_t = 2, value_parser = parse_order)]
    pub order: usize,
}

#[derive(Debug, Args)]
pub struct Reconstruction {
    #[command(flatten)]
    pub input: GradientInput,
    /// Output surface grid.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value = "iid")]
    pub noise: NoiseKind,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.05, 0.1])]
    pub levels: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub rows: usize,
    #[arg(long, default_value_t = 64)]
    pub cols: usize,
    #[arg(long, default_value = "bumps")]
    pub truth: Truth,
    #[arg(long, default_value_t = 2, value_parser = parse_order)]
    pub order: usize,
    /// Restrict to these method names (default: all).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<String>,
    /// Metrics CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory receiving the noiseless `surface`, `zx` and `zy` grids.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Truth {
    Bumps,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [128, 256, 512])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 2, value_parser = parse_order)]
    pub order: usize,
    /// Timing CSV; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_order(s: &str) -> std::result::Result<usize, String> {
    match s {
        "2" => Ok(2),
        "4" => Ok(4),
        _ => Err(format!("order must be 2 or 4, got '{s}'")),
    }
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code; diagnostics go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let _ = e.print();
            code
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match execute(cli.command) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("gradsurf: {e}");
            exit_code(&e)
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Gls(io) => solve_and_write(&io, |_| Ok(MethodSpec::Gls)),
        Command::Spectral {
            io,
            basis,
            p,
            q,
            drop_cols,
        } => solve_and_write(&io, |g| {
            let (m, n) = (g.rows(), g.cols());
            let by = BasisSet::new(basis, m, p.unwrap_or(m.div_ceil(2)))?;
            let bx = BasisSet::new(basis, n, q.unwrap_or(n.div_ceil(2)))?;
            let (by, bx) = if drop_cols.is_empty() {
                (by, bx)
            } else {
                (by.without(&drop_cols)?, bx.without(&drop_cols)?)
            };
            Ok(MethodSpec::Spectral {
                basis_y: by,
                basis_x: bx,
            })
        }),
        Command::Tikhonov {
            io,
            lambda,
            lcurve,
            mu,
            degree,
            prior,
        } => {
            if lcurve {
                if mu.is_some() || degree != 0 || prior.is_some() {
                    return Err(Error::arg(
                        "--lcurve selects degree 0 with μ = λ and no prior; drop --mu/--degree/--prior",
                    ));
                }
                let g = read_gradient(&io.input)?;
                let (dx, dy) = g.operators(io.input.order)?;
                let cache = SpectralCache::build(&g, &dx, &dy)?;
                let lambda = corner(&cache.l_curve(&cache.default_grid(20))?)?;
                println!("lambda: {lambda:e}");
                let spec = MethodSpec::tikhonov(lambda, 0);
                return finish(&io, &g, &spec);
            }
            let prior = prior
                .map(|p| read_grid(&p, (io.input.hx, io.input.hy)).map(|g| g.values))
                .transpose()?;
            let spec = MethodSpec::Tikhonov(TikhonovSpec {
                lambda: lambda.expect("clap enforces --lambda without --lcurve"),
                mu,
                degree: degree as usize,
                prior,
            });
            solve_and_write(&io, |_| Ok(spec.clone()))
        }
        Command::Dirichlet { io, boundary } => {
            let b = read_grid(&boundary, (io.input.hx, io.input.hy))?;
            solve_and_write(&io, |_| Ok(MethodSpec::dirichlet(b.values.clone())))
        }
        Command::Wls {
            io,
            cov_xx,
            cov_xy,
            cov_yx,
            cov_yy,
        } => solve_and_write(&io, |g| {
            let (m, n) = (g.rows(), g.cols());
            let load = |p: &Option<PathBuf>, k: usize| -> Result<Matrix> {
                match p {
                    Some(p) => Ok(read_grid(p, (1.0, 1.0))?.values),
                    None => Ok(Matrix::identity(k, k)),
                }
            };
            Ok(MethodSpec::Weighted(CovarianceSet::new(
                load(&cov_xx, n)?,
                load(&cov_xy, m)?,
                load(&cov_yx, n)?,
                load(&cov_yy, m)?,
            )?))
        }),
        Command::Lcurve { input, points, out } => {
            let g = read_gradient(&input)?;
            let (dx, dy) = g.operators(input.order)?;
            let cache = SpectralCache::build(&g, &dx, &dy)?;
            let curve = cache.l_curve(&cache.default_grid(points))?;
            let mut text = String::from("lambda,rho,eta\n");
            for p in &curve {
                text.push_str(&format!("{:e},{:e},{:e}\n", p.lambda, p.rho, p.eta));
            }
            if curve.len() >= 5 {
                eprintln!("corner lambda: {:e}", corner(&curve)?);
            }
            emit(out.as_deref(), text.as_bytes())
        }
        Command::Simulate(args) => simulate(args),
        Command::Bench(args) => bench(args),
    }
}

fn read_gradient(input: &GradientInput) -> Result<GradientField> {
    let spacing = (input.hx, input.hy);
    let zx = read_grid(&input.zx, spacing)?;
    let zy = read_grid(&input.zy, spacing)?;
    if zx.values.shape() != zy.values.shape() {
        return Err(Error::dim(format!(
            "x-gradient is {:?} but y-gradient is {:?}",
            zx.values.shape(),
            zy.values.shape()
        )));
    }
    if (zx.hx, zx.hy) != (zy.hx, zy.hy) {
        return Err(Error::arg(format!(
            "gradient spacings disagree: ({}, {}) vs ({}, {})",
            zx.hx, zx.hy, zy.hx, zy.hy
        )));
    }
    GradientField::new(zx.values, zy.values, zx.hx, zx.hy)
}

fn solve_and_write(
    io: &Reconstruction,
    spec: impl FnOnce(&GradientField) -> Result<MethodSpec>,
) -> Result<()> {
    let g = read_gradient(&io.input)?;
    let spec = spec(&g)?;
    finish(io, &g, &spec)
}

fn finish(io: &Reconstruction, g: &GradientField, spec: &MethodSpec) -> Result<()> {
    let (dx, dy) = g.operators(io.input.order)?;
    let z = reconstruct(g, &dx, &dy, spec)?;
    let cost = gradient_cost(&z.heights, g, &dx, &dy)?;
    write_grid(&io.out, &Grid::new(z.heights, z.hx, z.hy))?;
    println!("cost: {cost:e}");
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => gridfile::write_atomic(path, bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let truth = match args.truth {
        Truth::Bumps => GroundTruth::bumps(args.rows, args.cols)?,
        Truth::Quadratic => GroundTruth::quadratic(args.rows, args.cols)?,
    };
    if let Some(dir) = &args.dump {
        std::fs::create_dir_all(dir)?;
        let (hx, hy) = (truth.surface.hx, truth.surface.hy);
        write_grid(
            &dir.join("surface.g2s"),
            &Grid::new(truth.surface.heights.clone(), hx, hy),
        )?;
        write_grid(
            &dir.join("zx.g2s"),
            &Grid::new(truth.gradient.zx.clone(), hx, hy),
        )?;
        write_grid(
            &dir.join("zy.g2s"),
            &Grid::new(truth.gradient.zy.clone(), hx, hy),
        )?;
    }
    let mut methods = standard_methods(&truth, args.noise)?;
    if !args.methods.is_empty() {
        if let Some(unknown) = args
            .methods
            .iter()
            .find(|m| !methods.iter().any(|(n, _)| n == *m))
        {
            let known: Vec<&str> = methods.iter().map(|(n, _)| n.as_str()).collect();
            return Err(Error::arg(format!(
                "unknown method '{unknown}', expected one of {known:?}"
            )));
        }
        methods.retain(|(n, _)| args.methods.contains(n));
    }
    let cfg = MonteCarloConfig {
        noise: args.noise,
        levels: args.levels,
        trials: args.trials,
        base_seed: args.seed,
        order: args.order,
    };
    let table = monte_carlo(&truth, &methods, &cfg)?;
    emit(args.out.as_deref(), table.to_csv_string()?.as_bytes())
}

/// One benchmark row: mean wall time of assembling and solving a method at
/// one grid size.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: String,
    pub size: usize,
    pub repeats: usize,
    pub mean_seconds: f64,
    pub min_seconds: f64,
    pub work_estimate: f64,
}

/// Times GLS and half-truncated cosine spectral reconstruction of the
/// standard bump surface at each `size×size` grid.
pub fn run_bench(sizes: &[usize], repeats: usize, order: usize) -> Result<Vec<BenchRow>> {
    if repeats == 0 || sizes.is_empty() {
        return Err(Error::arg("bench needs at least one size and one repeat"));
    }
    let mut rows = Vec::new();
    for &size in sizes {
        let truth = GroundTruth::bumps(size, size)?;
        let g = &truth.gradient;
        let (dx, dy) = g.operators(order)?;
        let methods = [
            ("gls", MethodSpec::Gls, WorkModel::Sylvester),
            (
                "spectral-half",
                MethodSpec::spectral_half(BasisFamily::Cosine, size, size)?,
                WorkModel::Spectral { k: 1 },
            ),
        ];
        for (name, spec, model) in methods {
            let assembled = prepare(g, &dx, &dy, &spec)?;
            let mut times = Vec::with_capacity(repeats);
            for _ in 0..repeats {
                let t = Instant::now();
                let phi = std::hint::black_box(assembled.solve()?);
                times.push(t.elapsed().as_secs_f64());
                drop(phi);
            }
            rows.push(BenchRow {
                method: name.to_string(),
                size,
                repeats,
                mean_seconds: times.iter().sum::<f64>() / repeats as f64,
                min_seconds: times.iter().copied().fold(f64::INFINITY, f64::min),
                work_estimate: work_estimate(size, size, model),
            });
        }
    }
    Ok(rows)
}

fn bench(args: BenchArgs) -> Result<()> {
    let rows = run_bench(&args.sizes, args.repeats, args.order)?;
    let mut text = String::from("method,size,repeats,mean_seconds,min_seconds,work_estimate\n");
    for r in &rows {
        text.push_str(&format!(
            "{},{},{},{:e},{:e},{:e}\n",
            r.method, r.size, r.repeats, r.mean_seconds, r.min_seconds, r.work_estimate
        ));
    }
    emit(args.out.as_deref(), text.as_bytes())
}
