//! Repeated independent trials against closed-form solutions: the max-norm
//! Walsh-coefficient error per trial, its mean, sample standard deviation, and
//! 95% normal confidence interval, plus convergence sweeps across resolutions.
//!
//! Each trial owns one Brownian path (stream `base + trial_index`), solves on
//! it, samples the exact solution at the cell midpoints of the same path, and
//! compares Walsh coefficients like for like. Results are aggregated in trial
//! order and are bit-reproducible for a fixed configuration.

use std::sync::Arc;

use crate::brownian::{NoiseMode, RngSpec};
use crate::solver::{solve_on_path, SvieProblem};
use crate::walsh::{cell_to_walsh, project_scalar, reconstruct, WalshBasis};
use crate::{Error, Result};

/// 95% two-sided normal quantile used for confidence intervals.
pub const NORMAL_95_QUANTILE: f64 = 1.96;

/// `‖E‖_∞` of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSample {
    pub trial_index: usize,
    pub error: f64,
}

/// Aggregated error statistics of `n` trials at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStatistics {
    pub problem: String,
    pub m: usize,
    pub n: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub seed: RngSpec,
}

/// `mean ± 1.96·std/√n`.
pub fn confidence_interval(mean: f64, std: f64, n: usize) -> (f64, f64) {
    let half = NORMAL_95_QUANTILE * std / (n as f64).sqrt();
    (mean - half, mean + half)
}

/// Max absolute difference of two coefficient vectors.
pub fn error_metric(exact_coeffs: &[f64], approx_coeffs: &[f64]) -> Result<f64> {
    if exact_coeffs.len() != approx_coeffs.len() {
        return Err(Error::DimensionMismatch {
            context: "error metric",
            expected: exact_coeffs.len(),
            actual: approx_coeffs.len(),
        });
    }
    Ok(exact_coeffs
        .iter()
        .zip(approx_coeffs)
        .fold(0.0, |acc, (x, y)| acc.max((x - y).abs())))
}

impl TrialStatistics {
    /// Mean, sample standard deviation (n−1 divisor), and 95% CI of a batch of
    /// error samples.
    pub fn from_samples(
        problem: &str,
        m: usize,
        seed: RngSpec,
        samples: &[ErrorSample],
    ) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::TooFewTrials { n });
        }
        let mean = samples.iter().map(|s| s.error).sum::<f64>() / n as f64;
        let var = samples
            .iter()
            .map(|s| {
                let d = s.error - mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1) as f64;
        let std = var.sqrt();
        let (ci_lower, ci_upper) = confidence_interval(mean, std, n);
        Ok(Self {
            problem: problem.to_string(),
            m,
            n,
            mean_error: mean,
            std_error: std,
            ci_lower,
            ci_upper,
            seed,
        })
    }
}

/// Runs one trial: path from `spec`, solve, exact coefficients on the same
/// path, max-norm coefficient difference.
fn one_trial(
    problem: &SvieProblem,
    basis: &Arc<WalshBasis>,
    exact: &crate::solver::ScalarField,
    spec: RngSpec,
    refine: u32,
    noise: NoiseMode,
) -> Result<f64> {
    let path = noise.build_path(spec, basis.size(), refine, problem.horizon);
    let result = solve_on_path(problem, basis, &path, spec)?;
    let exact_cells = project_scalar(exact.as_ref(), basis, Some(&path))?;
    let exact_coeffs = cell_to_walsh(&exact_cells, basis)?;
    error_metric(&exact_coeffs, &result.walsh_coeffs)
}

/// Per-trial error samples for `n` trials on streams `base.stream + 0..n-1`.
pub fn error_samples(
    problem: &SvieProblem,
    basis: &Arc<WalshBasis>,
    n: usize,
    base_seed: RngSpec,
    refine: u32,
    noise: NoiseMode,
) -> Result<Vec<ErrorSample>> {
    let exact = problem.exact.clone().ok_or_else(|| Error::MissingExact {
        problem: problem.name.clone(),
    })?;
    (0..n)
        .map(|trial| {
            let spec = base_seed.offset(trial as u64);
            let error = one_trial(problem, basis, &exact, spec, refine, noise).map_err(|e| {
                Error::TrialFailed {
                    trial,
                    source: Box::new(e),
                }
            })?;
            Ok(ErrorSample {
                trial_index: trial,
                error,
            })
        })
        .collect()
}

/// `n` independent trials at dyadic level `k`, aggregated into statistics.
pub fn run_trials(
    problem: &SvieProblem,
    level: u32,
    n: usize,
    base_seed: RngSpec,
    refine: u32,
) -> Result<TrialStatistics> {
    run_trials_with(problem, level, n, base_seed, refine, NoiseMode::Gaussian)
}

/// [`run_trials`] with an explicit noise mode (zero-noise runs are used for
/// deterministic checks).
pub fn run_trials_with(
    problem: &SvieProblem,
    level: u32,
    n: usize,
    base_seed: RngSpec,
    refine: u32,
    noise: NoiseMode,
) -> Result<TrialStatistics> {
    if n < 2 {
        return Err(Error::TooFewTrials { n });
    }
    let basis = Arc::new(problem.basis(level)?);
    let samples = error_samples(problem, &basis, n, base_seed, refine, noise)?;
    TrialStatistics::from_samples(&problem.name, basis.size(), base_seed, &samples)
}

/// Fixed probe grid `t = 0.1·j`, `j = 1..=9`, clipped to the problem horizon.
pub fn probe_points(horizon: f64) -> Vec<f64> {
    (1..=9)
        .map(|j| j as f64 * 0.1)
        .filter(|t| *t < horizon)
        .collect()
}

/// Mean solution value over trials at one probe point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbePoint {
    pub t: f64,
    pub mean_value: f64,
}

/// Probe-point means for one resolution level.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeLevel {
    pub m: usize,
    pub points: Vec<ProbePoint>,
}

/// Result of a convergence sweep: error statistics when an exact solution
/// exists, probe-point means otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepOutput {
    Statistics(Vec<TrialStatistics>),
    ProbeTable(Vec<ProbeLevel>),
}

/// Sweeps the dyadic levels with independent streams per level×trial
/// (level `idx` uses streams `base + idx·n + 0..n-1`).
pub fn convergence_sweep(
    problem: &SvieProblem,
    levels: &[u32],
    n: usize,
    base_seed: RngSpec,
    refine: u32,
) -> Result<SweepOutput> {
    convergence_sweep_with(problem, levels, n, base_seed, refine, NoiseMode::Gaussian)
}

pub fn convergence_sweep_with(
    problem: &SvieProblem,
    levels: &[u32],
    n: usize,
    base_seed: RngSpec,
    refine: u32,
    noise: NoiseMode,
) -> Result<SweepOutput> {
    if levels.is_empty() {
        return Err(Error::NoLevels);
    }
    if problem.exact.is_some() {
        let stats = levels
            .iter()
            .enumerate()
            .map(|(idx, &level)| {
                let level_seed = base_seed.offset((idx * n) as u64);
                run_trials_with(problem, level, n, level_seed, refine, noise)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SweepOutput::Statistics(stats))
    } else {
        if n < 1 {
            return Err(Error::TooFewTrials { n });
        }
        let probes = probe_points(problem.horizon);
        let mut table = Vec::with_capacity(levels.len());
        for (idx, &level) in levels.iter().enumerate() {
            let basis = Arc::new(problem.basis(level)?);
            let mut sums = vec![0.0; probes.len()];
            for trial in 0..n {
                let spec = base_seed.offset((idx * n + trial) as u64);
                let path = noise.build_path(spec, basis.size(), refine, problem.horizon);
                let result = solve_on_path(problem, &basis, &path, spec).map_err(|e| {
                    Error::TrialFailed {
                        trial,
                        source: Box::new(e),
                    }
                })?;
                for (sum, &t) in sums.iter_mut().zip(&probes) {
                    *sum += reconstruct(&result.cell_values, &basis, t)?;
                }
            }
            table.push(ProbeLevel {
                m: basis.size(),
                points: probes
                    .iter()
                    .zip(&sums)
                    .map(|(&t, &sum)| ProbePoint {
                        t,
                        mean_value: sum / n as f64,
                    })
                    .collect(),
            });
        }
        Ok(SweepOutput::ProbeTable(table))
    }
}
