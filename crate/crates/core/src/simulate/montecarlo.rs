use std::io::Write;

use rayon::prelude::*;

use crate::basis::BasisFamily;
use crate::diffops::{GradientField, Surface};
use crate::error::{Error, Result};
use crate::reconstruct::{reconstruct, MethodSpec};
use crate::simulate::bump::{bump_surface, BumpSurfaceSpec};
use crate::simulate::metrics::{evaluate, TrialMetrics};
use crate::simulate::noise::{add_noise, iid_covariance, radial_covariance, NoiseKind, NoiseSpec};

/// Tikhonov weight used by [`standard_methods`].
pub const DEFAULT_TIKHONOV_LAMBDA: f64 = 0.05;

/// A reference surface together with its exact gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub surface: Surface,
    pub gradient: GradientField,
}

impl GroundTruth {
    pub fn new(surface: Surface, gradient: GradientField) -> Result<Self> {
        if surface.heights.shape() != gradient.zx.shape() {
            return Err(Error::dim(format!(
                "surface {:?} does not match gradient {:?}",
                surface.heights.shape(),
                gradient.zx.shape()
            )));
        }
        Ok(GroundTruth { surface, gradient })
    }

    /// The standard three-bump surface.
    pub fn bumps(rows: usize, cols: usize) -> Result<Self> {
        Self::from_spec(&BumpSurfaceSpec::standard(rows, cols))
    }

    pub fn from_spec(spec: &BumpSurfaceSpec) -> Result<Self> {
        let (surface, gradient) = bump_surface(spec)?;
        Ok(GroundTruth { surface, gradient })
    }

    /// A quadratic on `[-1, 1]²`. Both operator orders differentiate it
    /// exactly, so noiseless reconstructions recover it to rounding error.
    pub fn quadratic(rows: usize, cols: usize) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::arg("quadratic surface needs at least 2×2 nodes"));
        }
        let hx = 2.0 / (cols - 1) as f64;
        let hy = 2.0 / (rows - 1) as f64;
        let o = (-1.0, -1.0);
        let surface = Surface::sample(rows, cols, o, (hx, hy), |x, y| {
            0.8 * x * x - 0.5 * x * y + 0.3 * y * y + 0.2 * x - 0.1 * y
        })?;
        let zx = Surface::sample(rows, cols, o, (hx, hy), |x, y| 1.6 * x - 0.5 * y + 0.2)?;
        let zy = Surface::sample(rows, cols, o, (hx, hy), |x, y| -0.5 * x + 0.6 * y - 0.1)?;
        let gradient = GradientField::new(zx.heights, zy.heights, hx, hy)?;
        Ok(GroundTruth { surface, gradient })
    }

    pub fn rows(&self) -> usize {
        self.surface.rows()
    }

    pub fn cols(&self) -> usize {
        self.surface.cols()
    }
}

/// Every implemented method, configured for `truth` and noise `kind`:
/// GLS, half-truncated cosine spectral, Tikhonov of degrees 0–2, Dirichlet
/// with the true boundary and weighted least squares with the covariance
/// model matching `kind` (i.i.d. for outliers).
pub fn standard_methods(truth: &GroundTruth, kind: NoiseKind) -> Result<Vec<(String, MethodSpec)>> {
    let (m, n) = (truth.rows(), truth.cols());
    let cov = match kind {
        NoiseKind::HeteroscedasticRadial => radial_covariance(&truth.gradient)?,
        NoiseKind::Iid | NoiseKind::Outliers => iid_covariance(&truth.gradient)?,
    };
    let mut methods = vec![
        ("gls".to_string(), MethodSpec::Gls),
        (
            "spectral-cosine".to_string(),
            MethodSpec::spectral_half(BasisFamily::Cosine, m, n)?,
        ),
    ];
    for k in 0..=2 {
        methods.push((
            format!("tikhonov-k{k}"),
            MethodSpec::tikhonov(DEFAULT_TIKHONOV_LAMBDA, k),
        ));
    }
    methods.push((
        "dirichlet".to_string(),
        MethodSpec::dirichlet(truth.surface.heights.clone()),
    ));
    methods.push(("weighted".to_string(), MethodSpec::Weighted(cov)));
    Ok(methods)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloConfig {
    pub noise: NoiseKind,
    pub levels: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    /// Differentiation order (2 or 4).
    pub order: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            noise: NoiseKind::Iid,
            levels: vec![0.0, 0.05, 0.1],
            trials: 10,
            base_seed: 0,
            order: 2,
        }
    }
}

/// The seed of trial `trial` at level index `level`.
pub fn trial_seed(base_seed: u64, level: usize, trial: usize) -> u64 {
    splitmix64(base_seed ^ splitmix64(((level as u64) << 32) | trial as u64))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub method: String,
    pub level: f64,
    pub trial: usize,
    pub seed: u64,
    pub metrics: TrialMetrics,
}

/// Mean and sample standard deviation of the metrics of one (method, level).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsCell {
    pub method: String,
    pub level: f64,
    pub trials: usize,
    pub mean: TrialMetrics,
    pub std: TrialMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsTable {
    pub cells: Vec<MetricsCell>,
    /// Every trial, ordered by level, trial, then method.
    pub records: Vec<TrialRecord>,
}

impl MetricsTable {
    pub fn cell(&self, method: &str, level: f64) -> Option<&MetricsCell> {
        self.cells
            .iter()
            .find(|c| c.method == method && c.level == level)
    }

    /// Records of one method at one level, in trial order.
    pub fn trials(&self, method: &str, level: f64) -> impl Iterator<Item = &TrialRecord> {
        let method = method.to_string();
        self.records
            .iter()
            .filter(move |r| r.method == method && r.level == level)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header = [
            "method",
            "level",
            "trials",
            "cost_residual_mean",
            "cost_residual_std",
            "rel_error_mean",
            "rel_error_std",
            "ks_statistic_mean",
            "ks_statistic_std",
        ];
        w.write_record(header).map_err(csv_error)?;
        for c in &self.cells {
            w.write_record([
                c.method.clone(),
                format!("{}", c.level),
                c.trials.to_string(),
                format!("{:e}", c.mean.cost_residual),
                format!("{:e}", c.std.cost_residual),
                format!("{:e}", c.mean.rel_error),
                format!("{:e}", c.std.rel_error),
                format!("{:e}", c.mean.ks_statistic),
                format!("{:e}", c.std.ks_statistic),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}

/// Runs every method on `trials` noisy copies of `truth`'s gradient at each
/// noise level. All methods see the same noisy field within a trial. The
/// result depends only on the inputs and `cfg.base_seed`.
pub fn monte_carlo(
    truth: &GroundTruth,
    methods: &[(String, MethodSpec)],
    cfg: &MonteCarloConfig,
) -> Result<MetricsTable> {
    if cfg.trials == 0 {
        return Err(Error::arg("monte carlo needs at least one trial"));
    }
    if methods.is_empty() || cfg.levels.is_empty() {
        return Err(Error::arg(
            "monte carlo needs at least one method and one level",
        ));
    }
    let (dx, dy) = truth.gradient.operators(cfg.order)?;
    let jobs: Vec<(usize, usize)> = (0..cfg.levels.len())
        .flat_map(|l| (0..cfg.trials).map(move |t| (l, t)))
        .collect();

    let per_job = jobs
        .par_iter()
        .map(|&(li, ti)| -> Result<Vec<TrialRecord>> {
            let level = cfg.levels[li];
            let seed = trial_seed(cfg.base_seed, li, ti);
            let noisy = add_noise(
                &truth.gradient,
                &NoiseSpec {
                    kind: cfg.noise,
                    level,
                    seed,
                },
            )?;
            methods
                .iter()
                .map(|(name, spec)| {
                    let z = reconstruct(&noisy, &dx, &dy, spec)?;
                    Ok(TrialRecord {
                        method: name.clone(),
                        level,
                        trial: ti,
                        seed,
                        metrics: evaluate(&z, &truth.surface, &noisy, &dx, &dy)?,
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<TrialRecord> = per_job.into_iter().flatten().collect();

    let mut cells = Vec::with_capacity(methods.len() * cfg.levels.len());
    for (name, _) in methods {
        for &level in &cfg.levels {
            let sample: Vec<TrialMetrics> = records
                .iter()
                .filter(|r| &r.method == name && r.level == level)
                .map(|r| r.metrics)
                .collect();
            cells.push(aggregate(name, level, &sample));
        }
    }
    Ok(MetricsTable { cells, records })
}

fn aggregate(method: &str, level: f64, sample: &[TrialMetrics]) -> MetricsCell {
    let stats = |f: fn(&TrialMetrics) -> f64| {
        let n = sample.len() as f64;
        let mean = sample.iter().map(f).sum::<f64>() / n;
        let var = if sample.len() > 1 {
            sample.iter().map(|t| (f(t) - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (mean, var.sqrt())
    };
    let (cm, cs) = stats(|t| t.cost_residual);
    let (rm, rs) = stats(|t| t.rel_error);
    let (km, ks) = stats(|t| t.ks_statistic);
    let samples = sample.first().map_or(0, |t| t.ks_samples);
    MetricsCell {
        method: method.to_string(),
        level,
        trials: sample.len(),
        mean: TrialMetrics {
            cost_residual: cm,
            rel_error: rm,
            ks_statistic: km,
            ks_samples: samples,
        },
        std: TrialMetrics {
            cost_residual: cs,
            rel_error: rs,
            ks_statistic: ks,
            ks_samples: samples,
        },
    }
}
