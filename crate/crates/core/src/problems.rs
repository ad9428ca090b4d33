//! Built-in problem registry.
//!
//! Four problems with a shared shape: `example1` (trigonometric kernels on
//! `[0, 0.5)`, closed form known), `example2` (polynomial/exponential kernels
//! with a Brownian forcing component, no closed form), and the cash-bond /
//! risky-asset pair `bond` and `stock` (closed forms known; the bond is purely
//! deterministic). Closed forms that contain a stochastic integral evaluate it
//! on the trial's own path via the interpolating left-point sum, so solver and
//! reference always share one source of randomness.

use std::sync::Arc;

use crate::solver::{kernel_field, scalar_field, ScalarField, SvieProblem};
use crate::{Error, Result};

/// Names accepted by [`lookup`].
pub const REGISTRY_NAMES: [&str; 4] = ["example1", "example2", "stock", "bond"];

/// Registry switches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RegistryOptions {
    /// Use the 1/12 prefactor variant of example1's closed form instead of the
    /// prefactor-1 form (the prefactor-1 form satisfies x(0) = f(0) = 1).
    pub paper_prefactor: bool,
}

pub fn lookup(name: &str) -> Result<SvieProblem> {
    lookup_with(name, RegistryOptions::default())
}

pub fn lookup_with(name: &str, options: RegistryOptions) -> Result<SvieProblem> {
    match name {
        "example1" => Ok(example1(options.paper_prefactor)),
        "example2" => Ok(example2()),
        "stock" => Ok(stock()),
        "bond" => Ok(bond()),
        _ => Err(Error::UnknownProblem {
            name: name.to_string(),
            available: REGISTRY_NAMES.join(", "),
        }),
    }
}

/// `x(t) = 1 + ∫₀ᵗ cos(s)·x(s) ds + ∫₀ᵗ sin(s)·x(s) dB(s)` on `[0, 0.5)`,
/// with the closed form
/// `x(t) = c·exp(−t/4 + sin t + sin(2t)/8 + ∫₀ᵗ sin s dB)`.
pub fn example1(paper_prefactor: bool) -> SvieProblem {
    let prefactor = if paper_prefactor { 1.0 / 12.0 } else { 1.0 };
    let exact: ScalarField = Arc::new(move |t, path| {
        let path = path.ok_or(Error::PathRequired)?;
        let stochastic = path.ito_integral_interp(|s| Ok(s.sin()), t)?;
        Ok(prefactor * (-t / 4.0 + t.sin() + (2.0 * t).sin() / 8.0 + stochastic).exp())
    });
    SvieProblem::new(
        "example1",
        0.5,
        scalar_field(|_| 1.0),
        kernel_field(|s, _| s.cos()),
        kernel_field(|s, _| s.sin()),
    )
    .expect("fixed horizon is valid")
    .with_exact(exact)
}

/// `x(t) = f(t) + ∫₀ᵗ (s+t)·x(s) ds + ∫₀ᵗ e^{−3(s+t)}·x(s) dB(s)` on `[0, 1)`
/// with `f(t) = t² + sin(1+t) − cos(1+t) − 2 sin t − 7t⁴/12 + B(t)/40`; no
/// closed form is known.
pub fn example2() -> SvieProblem {
    let forcing: ScalarField = Arc::new(|t, path| {
        let path = path.ok_or(Error::PathRequired)?;
        let b_t = path.value_at(t)?;
        Ok(
            t * t + (1.0 + t).sin() - (1.0 + t).cos() - 2.0 * t.sin() - 7.0 * t.powi(4) / 12.0
                + b_t / 40.0,
        )
    });
    SvieProblem::new(
        "example2",
        1.0,
        forcing,
        kernel_field(|s, t| s + t),
        kernel_field(|s, t| (-3.0 * (s + t)).exp()),
    )
    .expect("fixed horizon is valid")
}

/// Risky asset `S(t) = 1/10 + ∫₀ᵗ ln(1+s)·S(s) ds + ∫₀ᵗ s·S(s) dB(s)` with
/// `S(t) = (1/10)·exp((1+t)ln(1+t) − t − t³/6 + ∫₀ᵗ s dB)`.
pub fn stock() -> SvieProblem {
    let exact: ScalarField = Arc::new(|t, path| {
        let path = path.ok_or(Error::PathRequired)?;
        let stochastic = path.ito_integral_interp(Ok, t)?;
        let exponent = (1.0 + t) * (1.0 + t).ln() - t - t * t * t / 6.0 + stochastic;
        Ok(0.1 * exponent.exp())
    });
    SvieProblem::new(
        "stock",
        1.0,
        scalar_field(|_| 0.1),
        kernel_field(|s, _| (1.0 + s).ln()),
        kernel_field(|s, _| s),
    )
    .expect("fixed horizon is valid")
    .with_exact(exact)
}

/// Risk-less cash bond `C(t) = 1 + ∫₀ᵗ sin(s)·C(s) ds` (no diffusion term)
/// with `C(t) = e^{1−cos t}`.
pub fn bond() -> SvieProblem {
    SvieProblem::new(
        "bond",
        1.0,
        scalar_field(|_| 1.0),
        kernel_field(|s, _| s.sin()),
        kernel_field(|_, _| 0.0),
    )
    .expect("fixed horizon is valid")
    .with_exact(scalar_field(|t| (1.0 - t.cos()).exp()))
}
