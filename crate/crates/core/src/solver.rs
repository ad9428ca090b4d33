//! Reduction of the integral equation to an `m × m` linear system and its
//! solution.
//!
//! In the cell-average convention the unknown cell vector satisfies
//!
//! ```text
//! x̄_i = F̄_i + Σ_j K̄₁[j][i]·P[j][i]·x̄_j + Σ_j K̄₂[j][i]·P_S[j][i]·x̄_j
//! ```
//!
//! i.e. `A·x̄ = F̄` with `A = I − (K̄₁ ∘ P)ᵀ − (K̄₂ ∘ P_S)ᵀ` (`∘` entrywise).
//! The same system conjugated by the Walsh transform acts on Walsh
//! coefficients; both routes are assembled here and must agree, which pins the
//! change-of-basis bookkeeping. The production path is a direct LU solve; a
//! Picard fixed-point iteration is kept as an independent oracle.

use std::fmt;
use std::sync::Arc;

use crate::brownian::{BrownianPath, RngSpec};
use crate::linalg::{max_abs_diff, Mat};
use crate::opmat::OperationalSet;
use crate::walsh::{cell_to_walsh, project_kernel, project_scalar, walsh_to_cell};
use crate::walsh::{CellVector, WalshBasis};
use crate::{Error, Result};

/// Scalar field of `t`, optionally reading a Brownian path (forcing terms and
/// exact solutions).
pub type ScalarField = Arc<dyn Fn(f64, Option<&BrownianPath>) -> Result<f64> + Send + Sync>;

/// Deterministic kernel field of `(s, t)`.
pub type KernelField = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

/// Wraps a plain `t`-function as a [`ScalarField`].
pub fn scalar_field(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarField {
    Arc::new(move |t, _| Ok(f(t)))
}

/// Wraps a plain `(s, t)`-function as a [`KernelField`].
pub fn kernel_field(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> KernelField {
    Arc::new(move |s, t| Ok(f(s, t)))
}

/// One linear stochastic Volterra problem: forcing `f`, drift kernel `k₁`,
/// diffusion kernel `k₂`, horizon `T`, and an optional closed-form solution.
#[derive(Clone)]
pub struct SvieProblem {
    pub name: String,
    pub horizon: f64,
    pub forcing: ScalarField,
    pub drift_kernel: KernelField,
    pub diffusion_kernel: KernelField,
    pub exact: Option<ScalarField>,
}

impl SvieProblem {
    pub fn new(
        name: impl Into<String>,
        horizon: f64,
        forcing: ScalarField,
        drift_kernel: KernelField,
        diffusion_kernel: KernelField,
    ) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::OutOfDomain {
                quantity: "horizon",
                value: horizon,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        Ok(Self {
            name: name.into(),
            horizon,
            forcing,
            drift_kernel,
            diffusion_kernel,
            exact: None,
        })
    }

    pub fn with_exact(mut self, exact: ScalarField) -> Self {
        self.exact = Some(exact);
        self
    }

    /// Builds the basis this problem is solved on at dyadic level `k`.
    pub fn basis(&self, level: u32) -> Result<WalshBasis> {
        WalshBasis::new(level, self.horizon)
    }
}

impl fmt::Debug for SvieProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SvieProblem")
            .field("name", &self.name)
            .field("horizon", &self.horizon)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

/// Solution of one solve: cell values, their Walsh coefficients, and the
/// max-norm residual of the linear system.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub cell_values: CellVector,
    pub walsh_coeffs: Vec<f64>,
    pub basis: Arc<WalshBasis>,
    pub path_ref: RngSpec,
    pub residual: f64,
}

fn check_problem_basis(problem: &SvieProblem, basis: &WalshBasis) -> Result<()> {
    if basis.horizon() != problem.horizon {
        return Err(Error::HorizonMismatch {
            expected: problem.horizon,
            path: basis.horizon(),
        });
    }
    Ok(())
}

fn check_ops(basis: &WalshBasis, ops: &OperationalSet) -> Result<()> {
    if ops.size() != basis.size() {
        return Err(Error::DimensionMismatch {
            context: "operational set",
            expected: basis.size(),
            actual: ops.size(),
        });
    }
    Ok(())
}

/// Assembles the cell-domain system `(A, b)` with
/// `A = I − (K̄₁ ∘ P)ᵀ − (K̄₂ ∘ P_S)ᵀ` and `b = F̄`.
pub fn assemble_system(
    problem: &SvieProblem,
    basis: &WalshBasis,
    ops: &OperationalSet,
    path: &BrownianPath,
) -> Result<(Mat, Vec<f64>)> {
    check_problem_basis(problem, basis)?;
    check_ops(basis, ops)?;
    let fbar = project_scalar(problem.forcing.as_ref(), basis, Some(path))?;
    let k1 = project_kernel(problem.drift_kernel.as_ref(), basis)?;
    let k2 = project_kernel(problem.diffusion_kernel.as_ref(), basis)?;
    let m = basis.size();
    let a = Mat::from_fn(m, m, |i, j| {
        let eye = if i == j { 1.0 } else { 0.0 };
        eye - k1.get(j, i) * ops.p().get(j, i) - k2.get(j, i) * ops.p_s().get(j, i)
    });
    Ok((a, fbar.into_values()))
}

/// Assembles the same system in the Walsh domain: every cell-domain operator
/// is conjugated by `T_W`, and the right-hand side becomes the Walsh
/// coefficient vector of the forcing term. Solving it and mapping back to cell
/// values must agree with [`assemble_system`] because the conjugation is an
/// exact similarity.
pub fn assemble_walsh_system(
    problem: &SvieProblem,
    basis: &WalshBasis,
    ops: &OperationalSet,
    path: &BrownianPath,
) -> Result<(Mat, Vec<f64>)> {
    check_problem_basis(problem, basis)?;
    check_ops(basis, ops)?;
    let fbar = project_scalar(problem.forcing.as_ref(), basis, Some(path))?;
    let k1 = project_kernel(problem.drift_kernel.as_ref(), basis)?;
    let k2 = project_kernel(problem.diffusion_kernel.as_ref(), basis)?;
    let drift = basis.conjugate(&k1.mat().hadamard(ops.p()).transpose())?;
    let diffusion = basis.conjugate(&k2.mat().hadamard(ops.p_s()).transpose())?;
    let a = Mat::identity(basis.size()).sub(&drift).sub(&diffusion);
    let b = cell_to_walsh(&fbar, basis)?;
    Ok((a, b))
}

/// Direct solve by LU with partial pivoting. The residual is verified against
/// `1e-9·(1 + ‖b‖_∞)`; ill-conditioned systems that miss the bound are
/// reported rather than returned silently.
pub fn solve_linear(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() || a.rows() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "linear solve",
            expected: a.rows(),
            actual: b.len(),
        });
    }
    let x = a.lu()?.solve(b);
    let residual = max_abs_diff(&a.mul_vec(&x), b);
    let norm_b = b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let bound = 1e-9 * (1.0 + norm_b);
    if residual > bound {
        return Err(Error::ResidualTooLarge { residual, bound });
    }
    Ok(x)
}

/// Samples a fresh path for `rng` and solves on it.
pub fn solve(
    problem: &SvieProblem,
    basis: &Arc<WalshBasis>,
    rng: RngSpec,
    refine: u32,
) -> Result<SolveResult> {
    check_problem_basis(problem, basis)?;
    let path = BrownianPath::sample(rng, basis.size(), refine, problem.horizon);
    solve_on_path(problem, basis, &path, rng)
}

/// Solves on a caller-supplied path (`path_ref` labels the randomness used).
pub fn solve_on_path(
    problem: &SvieProblem,
    basis: &Arc<WalshBasis>,
    path: &BrownianPath,
    path_ref: RngSpec,
) -> Result<SolveResult> {
    check_problem_basis(problem, basis)?;
    let ops = OperationalSet::build(basis, path)?;
    let (a, b) = assemble_system(problem, basis, &ops, path)?;
    let x = solve_linear(&a, &b)?;
    let residual = max_abs_diff(&a.mul_vec(&x), &b);
    let cell_values = CellVector::new(x);
    let walsh_coeffs = cell_to_walsh(&cell_values, basis)?;
    Ok(SolveResult {
        cell_values,
        walsh_coeffs,
        basis: Arc::clone(basis),
        path_ref,
        residual,
    })
}

/// Solves the Walsh-domain form and maps the coefficients back to cell values.
pub fn solve_walsh_domain(
    problem: &SvieProblem,
    basis: &WalshBasis,
    ops: &OperationalSet,
    path: &BrownianPath,
) -> Result<CellVector> {
    let (a, b) = assemble_walsh_system(problem, basis, ops, path)?;
    let y = solve_linear(&a, &b)?;
    walsh_to_cell(&y, basis)
}

/// Independent verification oracle: iterates
/// `x̄ ← F̄ + (K̄₁∘P)ᵀ·x̄ + (K̄₂∘P_S)ᵀ·x̄` from `x̄⁰ = F̄` until the max-norm
/// change drops below `tol`. Fails loudly when the iteration map is not a
/// contraction at this resolution.
pub fn picard_oracle(
    problem: &SvieProblem,
    basis: &WalshBasis,
    ops: &OperationalSet,
    path: &BrownianPath,
    max_iter: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    check_problem_basis(problem, basis)?;
    check_ops(basis, ops)?;
    let fbar = project_scalar(problem.forcing.as_ref(), basis, Some(path))?.into_values();
    let k1 = project_kernel(problem.drift_kernel.as_ref(), basis)?;
    let k2 = project_kernel(problem.diffusion_kernel.as_ref(), basis)?;
    let m = basis.size();
    let iteration = Mat::from_fn(m, m, |i, j| {
        k1.get(j, i) * ops.p().get(j, i) + k2.get(j, i) * ops.p_s().get(j, i)
    });

    let mut x = fbar.clone();
    let mut last_delta = f64::INFINITY;
    for _ in 0..max_iter {
        let mut next = iteration.mul_vec(&x);
        for (n, f) in next.iter_mut().zip(&fbar) {
            *n += f;
        }
        last_delta = max_abs_diff(&next, &x);
        x = next;
        if last_delta < tol {
            return Ok(x);
        }
        if !last_delta.is_finite() {
            break; // diverged; no point iterating on overflowed values
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_delta,
    })
}
