//! Brownian motion sample paths on a fine uniform grid, with left-point Itô
//! sums. One path is the sole source of randomness for a trial: the solver's
//! stochastic operational matrix and the closed-form exact solution both read
//! the same object, so error statistics measure method error rather than the
//! difference of two independent noises.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{Error, Result};

/// Relative tolerance for deciding that a time lies on a grid point.
const GRID_SNAP: f64 = 1e-9;

/// Seed plus per-trial substream id. Identical specs reproduce identical paths
/// bit for bit within one build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Same seed, stream shifted by `delta`.
    pub fn offset(self, delta: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream.wrapping_add(delta),
        }
    }

    fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Whether paths carry Gaussian increments or are identically zero (for
/// deterministic runs and tests).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    Gaussian,
    Zero,
}

impl NoiseMode {
    pub fn build_path(self, spec: RngSpec, m: usize, refine: u32, horizon: f64) -> BrownianPath {
        match self {
            NoiseMode::Gaussian => BrownianPath::sample(spec, m, refine, horizon),
            NoiseMode::Zero => BrownianPath::zero(m, refine, horizon),
        }
    }
}

/// One sampled trajectory `B(jδ)`, `j = 0..=N`, with `B(0) = 0` and
/// `N = 2·m·R` so that every half-cell point of an `m`-cell basis is a grid
/// point.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    horizon: f64,
    step: f64,
    values: Vec<f64>,
}

impl BrownianPath {
    fn grid(m: usize, refine: u32, horizon: f64) -> (usize, f64) {
        assert!(m > 0 && m.is_power_of_two(), "basis size must be 2^k");
        assert!(refine >= 1, "refinement factor must be at least 1");
        assert!(
            horizon.is_finite() && horizon > 0.0,
            "horizon must be positive"
        );
        let n = 2 * m * refine as usize;
        (n, horizon / n as f64)
    }

    /// Samples a path with independent `N(0, δ)` increments from the stream
    /// identified by `spec`.
    pub fn sample(spec: RngSpec, m: usize, refine: u32, horizon: f64) -> Self {
        let (n, step) = Self::grid(m, refine, horizon);
        let normal = Normal::new(0.0, step.sqrt()).expect("step is positive and finite");
        let mut rng = spec.rng();
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for _ in 0..n {
            acc += normal.sample(&mut rng);
            values.push(acc);
        }
        Self {
            horizon,
            step,
            values,
        }
    }

    /// All-zero path on the same grid (zero-noise mode).
    pub fn zero(m: usize, refine: u32, horizon: f64) -> Self {
        let (n, step) = Self::grid(m, refine, horizon);
        Self {
            horizon,
            step,
            values: vec![0.0; n + 1],
        }
    }

    /// Wraps externally supplied grid values; `values[0]` must be zero.
    pub fn from_values(horizon: f64, values: Vec<f64>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::OutOfDomain {
                quantity: "horizon",
                value: horizon,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        if values.len() < 2 {
            return Err(Error::GridMismatch {
                points: values.len(),
                m: 1,
            });
        }
        if values[0] != 0.0 {
            return Err(Error::OutOfDomain {
                quantity: "values[0]",
                value: values[0],
                min: 0.0,
                max: 0.0,
            });
        }
        let n = values.len() - 1;
        Ok(Self {
            horizon,
            step: horizon / n as f64,
            values,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Grid step δ.
    pub fn step(&self) -> f64 {
        self.step
    }

    /// Number of grid points, `N + 1`.
    pub fn num_points(&self) -> usize {
        self.values.len()
    }

    /// Number of increments, `N`.
    pub fn num_steps(&self) -> usize {
        self.values.len() - 1
    }

    /// Grid value `B(jδ)`; panics if `j` is off the grid.
    pub fn value(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `B(t)` for `t ∈ [0, T]`: the stored value at grid points, linear
    /// interpolation in between.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfDomain {
                quantity: "t",
                value: t,
                min: 0.0,
                max: self.horizon,
            });
        }
        let u = t / self.step;
        let nearest = u.round();
        if (u - nearest).abs() < GRID_SNAP {
            return Ok(self.values[nearest as usize]);
        }
        let lo = u.floor() as usize;
        let frac = u - lo as f64;
        Ok(self.values[lo] * (1.0 - frac) + self.values[lo + 1] * frac)
    }

    fn snapped_index(&self, t: f64) -> Option<usize> {
        let u = t / self.step;
        let nearest = u.round();
        if (u - nearest).abs() < GRID_SNAP {
            Some(nearest as usize)
        } else {
            None
        }
    }

    /// Left-point Itô sum `Σ g(jδ)·(B((j+1)δ) − B(jδ))` over `jδ < t_end`.
    /// `t_end` must be a grid point.
    pub fn ito_integral<G>(&self, mut g: G, t_end: f64) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        if !(t_end >= 0.0 && t_end <= self.horizon) {
            return Err(Error::OutOfDomain {
                quantity: "t_end",
                value: t_end,
                min: 0.0,
                max: self.horizon,
            });
        }
        let end = self.snapped_index(t_end).ok_or(Error::OffGrid {
            t: t_end,
            step: self.step,
        })?;
        let mut acc = 0.0;
        for j in 0..end {
            acc += g(j as f64 * self.step)? * (self.values[j + 1] - self.values[j]);
        }
        Ok(acc)
    }

    /// Left-point Itô sum up to an arbitrary `t ∈ [0, T]`: full increments
    /// below `t` plus a partial increment ending at the interpolated `B(t)`.
    /// Coincides exactly with [`Self::ito_integral`] at grid points.
    pub fn ito_integral_interp<G>(&self, mut g: G, t: f64) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfDomain {
                quantity: "t",
                value: t,
                min: 0.0,
                max: self.horizon,
            });
        }
        let (full, partial) = match self.snapped_index(t) {
            Some(end) => (end, None),
            None => {
                let lo = (t / self.step).floor() as usize;
                (lo, Some(lo))
            }
        };
        let mut acc = 0.0;
        for j in 0..full {
            acc += g(j as f64 * self.step)? * (self.values[j + 1] - self.values[j]);
        }
        if let Some(lo) = partial {
            let b_t = self.value_at(t)?;
            acc += g(lo as f64 * self.step)? * (b_t - self.values[lo]);
        }
        Ok(acc)
    }
}
