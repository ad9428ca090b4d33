//! Operational matrices of integration for the block-pulse basis and their
//! Walsh-domain conjugates.
//!
//! `P` represents the running integral of each block pulse evaluated at cell
//! midpoints: integrating the `i`-th pulse up to the midpoint of cell `j`
//! gives `0` below the diagonal, `h/2` on it, and `h` above it, hence
//! `P = (h/2)·M` with `M` the unit upper-triangular pattern `{1, 2, …, 2}`.
//! `P_S` is the Itô counterpart built from Brownian increments at the cell
//! half-grid. Conjugation by the Walsh transform yields `Λ = (1/m)T_W·P·T_W`
//! and `Λ_S = (1/m)T_W·P_S·T_W`.

use crate::brownian::BrownianPath;
use crate::linalg::Mat;
use crate::walsh::WalshBasis;
use crate::{Error, Result};

/// Deterministic matrix `P`: `P[i][j] = ∫₀^{t_j} φ_i(s) ds` at the cell-`j`
/// midpoint `t_j`.
pub fn build_p(basis: &WalshBasis) -> Mat {
    let h = basis.cell_width();
    Mat::from_fn(basis.size(), basis.size(), |i, j| {
        if j < i {
            0.0
        } else if j == i {
            h / 2.0
        } else {
            h
        }
    })
}

/// Stochastic matrix `P_S`: `P_S[i][j] = ∫₀^{t_j} φ_i(s) dB(s)` at the cell-`j`
/// midpoint, i.e. `B(mid_i) − B(ih)` on the diagonal and `B((i+1)h) − B(ih)`
/// above it. The path must resolve every half-cell point `j·h/2` exactly,
/// which holds whenever its step count is a multiple of `2m`.
pub fn build_ps(basis: &WalshBasis, path: &BrownianPath) -> Result<Mat> {
    let m = basis.size();
    let steps = path.num_steps();
    if !steps.is_multiple_of(2 * m) {
        return Err(Error::GridMismatch {
            points: path.num_points(),
            m,
        });
    }
    if path.horizon() != basis.horizon() {
        return Err(Error::HorizonMismatch {
            expected: basis.horizon(),
            path: path.horizon(),
        });
    }
    // index stride of one half-cell on the fine grid
    let r = steps / (2 * m);
    Ok(Mat::from_fn(m, m, |i, j| {
        if j < i {
            0.0
        } else if j == i {
            path.value((2 * i + 1) * r) - path.value(2 * i * r)
        } else {
            path.value(2 * (i + 1) * r) - path.value(2 * i * r)
        }
    }))
}

/// Walsh-domain form `(1/m)·T_W·M·T_W` of a cell-domain operator.
pub fn to_walsh_domain(mat: &Mat, basis: &WalshBasis) -> Result<Mat> {
    basis.conjugate(mat)
}

/// The four operational matrices for one basis/path pair.
#[derive(Debug, Clone)]
pub struct OperationalSet {
    level: u32,
    size: usize,
    p: Mat,
    p_s: Mat,
    lambda: Mat,
    lambda_s: Mat,
}

impl OperationalSet {
    pub fn build(basis: &WalshBasis, path: &BrownianPath) -> Result<Self> {
        let p = build_p(basis);
        let p_s = build_ps(basis, path)?;
        let lambda = to_walsh_domain(&p, basis)?;
        let lambda_s = to_walsh_domain(&p_s, basis)?;
        Ok(Self {
            level: basis.level(),
            size: basis.size(),
            p,
            p_s,
            lambda,
            lambda_s,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn p(&self) -> &Mat {
        &self.p
    }

    pub fn p_s(&self) -> &Mat {
        &self.p_s
    }

    pub fn lambda(&self) -> &Mat {
        &self.lambda
    }

    pub fn lambda_s(&self) -> &Mat {
        &self.lambda_s
    }
}
