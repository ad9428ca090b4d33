//! Rademacher/Walsh functions, the Walsh–block-pulse transform matrix, and
//! projections of functions onto the piecewise-constant cell basis.
//!
//! The domain `[0, T)` is split into `m = 2^k` right-open cells of width
//! `h = T/m`. A function is represented by its values at the cell midpoints
//! (the midpoint rule for the cell average); the same vector doubles as the
//! block-pulse coefficient vector. Walsh coefficients are obtained by the
//! conjugation `Y = (1/m)·T_W·x̄` where `T_W` is the ±1 matrix of Walsh values
//! at cell midpoints, which satisfies `T_W·T_W = m·I` and `T_W = T_Wᵀ` exactly.
//!
//! Rademacher signs are computed from the dyadic digits of `t` rather than from
//! a floating-point sine, so midpoint evaluations are exact and never hit a
//! sign ambiguity at the square-wave breakpoints; breakpoints themselves
//! resolve by right-continuity.

use crate::brownian::BrownianPath;
use crate::linalg::Mat;
use crate::{Error, Result};

/// Largest accepted dyadic level; guards against accidental huge allocations
/// (`m = 2^16` already means a 2^32-entry transform).
pub const MAX_LEVEL: u32 = 16;

/// The `i`-th dyadic digit of `t ∈ [0, 1)`, by repeated doubling. Doubling and
/// the conditional subtraction are exact in IEEE arithmetic, so the digits are
/// those of the stored value of `t` with no rounding.
fn dyadic_digit(t: f64, i: u32) -> u8 {
    debug_assert!((0.0..1.0).contains(&t));
    let mut frac = t;
    let mut bit = 0u8;
    for _ in 0..i {
        frac *= 2.0;
        if frac >= 1.0 {
            frac -= 1.0;
            bit = 1;
        } else {
            bit = 0;
        }
    }
    bit
}

fn check_unit_domain(t: f64) -> Result<()> {
    if (0.0..1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            quantity: "t",
            value: t,
            min: 0.0,
            max: 1.0,
        })
    }
}

/// `i`-th Rademacher square wave at `t ∈ [0, 1)`: `r_0 ≡ 1`, otherwise the sign
/// of `sin(2^i π t)` with breakpoints resolved by right-continuity (digit `d`
/// of `t` maps to `(-1)^d`), so the result is always ±1.
pub fn rademacher(i: u32, t: f64) -> Result<i32> {
    check_unit_domain(t)?;
    if i == 0 {
        return Ok(1);
    }
    Ok(if dyadic_digit(t, i) == 0 { 1 } else { -1 })
}

/// `n`-th Walsh function at `t ∈ [0, 1)`: the product of the Rademacher
/// functions selected by the binary digits of `n` (bit `j-1` of `n` selects
/// `r_j`); `w_0 ≡ 1` as the empty product.
pub fn walsh_eval(n: u64, t: f64) -> Result<i32> {
    check_unit_domain(t)?;
    let mut parity = 0u8;
    let mut bits = n;
    let mut frac = t;
    while bits != 0 {
        frac *= 2.0;
        let digit = if frac >= 1.0 {
            frac -= 1.0;
            1u8
        } else {
            0u8
        };
        if bits & 1 == 1 {
            parity ^= digit;
        }
        bits >>= 1;
    }
    Ok(if parity == 0 { 1 } else { -1 })
}

/// Walsh basis at dyadic level `k` on `[0, T)`: `m = 2^k` cells of width
/// `h = T/m` plus the midpoint transform matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct WalshBasis {
    level: u32,
    size: usize,
    horizon: f64,
    cell_width: f64,
    transform: Vec<i8>,
}

impl WalshBasis {
    /// Builds the basis, including the `m × m` transform `T_W` with
    /// `T_W[i][j] = w_i((2j+1)/(2m))`.
    pub fn new(level: u32, horizon: f64) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::LevelTooLarge {
                level,
                max: MAX_LEVEL,
            });
        }
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::OutOfDomain {
                quantity: "horizon",
                value: horizon,
                min: 0.0,
                max: f64::INFINITY,
            });
        }
        let size = 1usize << level;
        let denom = (2 * size) as f64;
        let mut transform = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let t = (2 * j + 1) as f64 / denom;
                let v = walsh_eval(i as u64, t).expect("midpoints lie in [0,1)");
                transform.push(v as i8);
            }
        }
        Ok(Self {
            level,
            size,
            horizon,
            cell_width: horizon / size as f64,
            transform,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Basis size `m = 2^k`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// Domain length `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Cell width `h = T/m`.
    pub fn cell_width(&self) -> f64 {
        self.cell_width
    }

    /// Midpoint of cell `i`, i.e. `(2i+1)h/2`.
    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.cell_width
    }

    pub fn transform_entry(&self, i: usize, j: usize) -> i8 {
        self.transform[i * self.size + j]
    }

    pub fn transform_row(&self, i: usize) -> &[i8] {
        &self.transform[i * self.size..(i + 1) * self.size]
    }

    /// The transform as a dense `f64` matrix.
    pub fn transform_mat(&self) -> Mat {
        Mat::from_fn(self.size, self.size, |i, j| {
            self.transform_entry(i, j) as f64
        })
    }

    /// `T_W · v` using the integer entries directly.
    pub fn apply_transform(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.size {
            return Err(Error::DimensionMismatch {
                context: "transform application",
                expected: self.size,
                actual: v.len(),
            });
        }
        Ok((0..self.size)
            .map(|i| {
                self.transform_row(i)
                    .iter()
                    .zip(v)
                    .map(|(&s, &x)| if s > 0 { x } else { -x })
                    .sum()
            })
            .collect())
    }

    /// Similarity conjugation `(1/m)·T_W·M·T_W`, the change of basis between
    /// the cell domain and the Walsh domain.
    pub fn conjugate(&self, mat: &Mat) -> Result<Mat> {
        if mat.rows() != self.size || mat.cols() != self.size {
            return Err(Error::DimensionMismatch {
                context: "transform conjugation",
                expected: self.size,
                actual: mat.rows(),
            });
        }
        let t = self.transform_mat();
        Ok(t.matmul(mat).matmul(&t).scaled(1.0 / self.size as f64))
    }
}

/// Cell-midpoint values of a scalar function; doubles as the block-pulse
/// coefficient vector in the cell-average convention.
#[derive(Debug, Clone, PartialEq)]
pub struct CellVector {
    values: Vec<f64>,
}

impl CellVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Midpoint values of a two-argument kernel; entry `(i, j)` is the kernel at
/// (s-cell `i` midpoint, t-cell `j` midpoint).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    values: Mat,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.values.rows()
    }

    pub fn get(&self, s_cell: usize, t_cell: usize) -> f64 {
        self.values.get(s_cell, t_cell)
    }

    pub fn mat(&self) -> &Mat {
        &self.values
    }
}

/// Projects a scalar field onto cell midpoints. The optional path is handed
/// through to the field, for forcing terms and exact solutions that read
/// Brownian values.
pub fn project_scalar<F>(
    f: F,
    basis: &WalshBasis,
    path: Option<&BrownianPath>,
) -> Result<CellVector>
where
    F: Fn(f64, Option<&BrownianPath>) -> Result<f64>,
{
    let mut values = Vec::with_capacity(basis.size());
    for i in 0..basis.size() {
        let v = f(basis.midpoint(i), path).map_err(|e| Error::ScalarProjection {
            cell: i,
            source: Box::new(e),
        })?;
        values.push(v);
    }
    Ok(CellVector::new(values))
}

/// Projects a kernel onto the midpoints of all cell pairs.
pub fn project_kernel<G>(g: G, basis: &WalshBasis) -> Result<KernelMatrix>
where
    G: Fn(f64, f64) -> Result<f64>,
{
    let m = basis.size();
    let mut values = Mat::zeros(m, m);
    for i in 0..m {
        let s = basis.midpoint(i);
        for j in 0..m {
            let v = g(s, basis.midpoint(j)).map_err(|e| Error::KernelProjection {
                s_cell: i,
                t_cell: j,
                source: Box::new(e),
            })?;
            values.set(i, j, v);
        }
    }
    Ok(KernelMatrix { values })
}

/// Walsh coefficients `Y = (1/m)·T_W·v` of a cell vector. The piecewise
/// constant function then equals `Σ Y_i w_i(t)`; [`walsh_to_cell`] inverts the
/// map exactly because `T_W² = m·I`.
pub fn cell_to_walsh(v: &CellVector, basis: &WalshBasis) -> Result<Vec<f64>> {
    let m = basis.size() as f64;
    let tv = basis.apply_transform(v.values())?;
    Ok(tv.into_iter().map(|x| x / m).collect())
}

/// Cell values `T_W · Y` of a Walsh coefficient vector.
pub fn walsh_to_cell(coeffs: &[f64], basis: &WalshBasis) -> Result<CellVector> {
    Ok(CellVector::new(basis.apply_transform(coeffs)?))
}

/// Value of the piecewise-constant function at `t ∈ [0, T)`: the entry of the
/// right-open cell containing `t`.
pub fn reconstruct(v: &CellVector, basis: &WalshBasis, t: f64) -> Result<f64> {
    if v.len() != basis.size() {
        return Err(Error::DimensionMismatch {
            context: "reconstruction",
            expected: basis.size(),
            actual: v.len(),
        });
    }
    if !(t >= 0.0 && t < basis.horizon()) {
        return Err(Error::OutOfDomain {
            quantity: "t",
            value: t,
            min: 0.0,
            max: basis.horizon(),
        });
    }
    let idx = ((t / basis.cell_width()) as usize).min(basis.size() - 1);
    Ok(v.get(idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rademacher_index_zero_is_one() {
        assert_eq!(rademacher(0, 0.7).unwrap(), 1);
        assert_eq!(rademacher(0, 0.0).unwrap(), 1);
    }

    #[test]
    fn rademacher_first_wave() {
        assert_eq!(rademacher(1, 0.25).unwrap(), 1);
        assert_eq!(rademacher(1, 0.75).unwrap(), -1);
    }

    #[test]
    fn rademacher_matches_sine_sign_off_breakpoints() {
        // sin(1.2π) < 0
        assert_eq!(rademacher(2, 0.3).unwrap(), -1);
        for i in 1..6u32 {
            for step in 0..200 {
                let t = (step as f64 + 0.13) / 200.0;
                let sine = (2f64.powi(i as i32) * std::f64::consts::PI * t).sin();
                if sine.abs() > 1e-9 {
                    assert_eq!(
                        rademacher(i, t).unwrap(),
                        sine.signum() as i32,
                        "i={i} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn rademacher_rejects_out_of_domain() {
        assert!(rademacher(1, 1.0).is_err());
        assert!(rademacher(1, -0.1).is_err());
        assert!(rademacher(1, f64::NAN).is_err());
    }

    #[test]
    fn walsh_zero_is_constant_one() {
        for step in 0..17 {
            let t = step as f64 / 17.0;
            assert_eq!(walsh_eval(0, t).unwrap(), 1);
        }
    }

    #[test]
    fn walsh_one_is_first_rademacher() {
        assert_eq!(walsh_eval(1, 0.75).unwrap(), -1);
        assert_eq!(walsh_eval(1, 0.25).unwrap(), 1);
    }

    #[test]
    fn walsh_three_is_product_of_first_two_rademacher() {
        // oracle: direct sign evaluation of sin(4πt)·sin(2πt)
        let t = 0.1;
        let oracle = ((4.0 * std::f64::consts::PI * t).sin().signum()
            * (2.0 * std::f64::consts::PI * t).sin().signum()) as i32;
        assert_eq!(walsh_eval(3, t).unwrap(), oracle);
        assert_eq!(walsh_eval(3, 0.1).unwrap(), 1);
    }

    #[test]
    fn transform_small_levels_match_frozen_values() {
        let b0 = WalshBasis::new(0, 1.0).unwrap();
        assert_eq!(b0.transform_row(0), &[1]);

        let b1 = WalshBasis::new(1, 1.0).unwrap();
        assert_eq!(b1.transform_row(0), &[1, 1]);
        assert_eq!(b1.transform_row(1), &[1, -1]);

        let b2 = WalshBasis::new(2, 1.0).unwrap();
        assert_eq!(b2.transform_row(0), &[1, 1, 1, 1]);
        assert_eq!(b2.transform_row(1), &[1, 1, -1, -1]);
        assert_eq!(b2.transform_row(2), &[1, -1, 1, -1]);
        assert_eq!(b2.transform_row(3), &[1, -1, -1, 1]);
    }

    #[test]
    fn transform_rows_match_rademacher_products() {
        // independent oracle: evaluate the Definition-2 product digit by digit
        let basis = WalshBasis::new(3, 1.0).unwrap();
        let m = basis.size();
        for i in 0..m {
            for j in 0..m {
                let t = (2 * j + 1) as f64 / (2 * m) as f64;
                let mut prod = 1i32;
                for bit in 0..3u32 {
                    if (i >> bit) & 1 == 1 {
                        prod *= rademacher(bit + 1, t).unwrap();
                    }
                }
                assert_eq!(basis.transform_entry(i, j) as i32, prod);
            }
        }
    }

    #[test]
    fn transform_is_symmetric_and_self_inverse_in_integers() {
        for level in 0..=7u32 {
            let basis = WalshBasis::new(level, 1.0).unwrap();
            let m = basis.size();
            for i in 0..m {
                for j in 0..m {
                    assert_eq!(basis.transform_entry(i, j), basis.transform_entry(j, i));
                    let dot: i64 = (0..m)
                        .map(|c| {
                            basis.transform_entry(i, c) as i64 * basis.transform_entry(j, c) as i64
                        })
                        .sum();
                    let expected = if i == j { m as i64 } else { 0 };
                    assert_eq!(dot, expected, "level={level} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn transform_row_sums() {
        for level in 0..=7u32 {
            let basis = WalshBasis::new(level, 1.0).unwrap();
            for i in 0..basis.size() {
                let sum: i64 = basis.transform_row(i).iter().map(|&v| v as i64).sum();
                let expected = if i == 0 { basis.size() as i64 } else { 0 };
                assert_eq!(sum, expected);
            }
        }
    }

    #[test]
    fn level_guard() {
        assert!(WalshBasis::new(MAX_LEVEL + 1, 1.0).is_err());
        assert!(WalshBasis::new(0, 0.0).is_err());
        assert!(WalshBasis::new(0, -1.0).is_err());
    }

    #[test]
    fn basis_stores_exact_cell_width() {
        let basis = WalshBasis::new(3, 0.5).unwrap();
        assert_eq!(basis.cell_width() * basis.size() as f64, 0.5);
        assert_eq!(basis.midpoint(0), 0.5 / 16.0);
    }

    #[test]
    fn project_scalar_constant_and_linear() {
        let basis = WalshBasis::new(1, 1.0).unwrap();
        let ones = project_scalar(|_, _| Ok(1.0), &basis, None).unwrap();
        assert_eq!(ones.values(), &[1.0, 1.0]);
        let linear = project_scalar(|t, _| Ok(t), &basis, None).unwrap();
        assert_eq!(linear.values(), &[0.25, 0.75]);
        let constant = project_scalar(|_, _| Ok(-4.5), &basis, None).unwrap();
        assert_eq!(constant.values(), &[-4.5, -4.5]);
    }

    #[test]
    fn project_scalar_reports_failing_cell() {
        let basis = WalshBasis::new(2, 1.0).unwrap();
        let res = project_scalar(
            |t, _| {
                if t > 0.5 {
                    Err(Error::PathRequired)
                } else {
                    Ok(t)
                }
            },
            &basis,
            None,
        );
        match res {
            Err(Error::ScalarProjection { cell, .. }) => assert_eq!(cell, 2),
            other => panic!("expected projection error, got {other:?}"),
        }
    }

    #[test]
    fn project_kernel_values() {
        let basis = WalshBasis::new(1, 1.0).unwrap();
        let zero = project_kernel(|_, _| Ok(0.0), &basis).unwrap();
        assert_eq!(zero.mat().max_abs(), 0.0);

        let sum = project_kernel(|s, t| Ok(s + t), &basis).unwrap();
        assert_eq!(sum.get(0, 0), 0.5);
        assert_eq!(sum.get(0, 1), 1.0);
        assert_eq!(sum.get(1, 0), 1.0);
        assert_eq!(sum.get(1, 1), 1.5);

        let exp = project_kernel(|s, t| Ok((-3.0 * (s + t)).exp()), &basis).unwrap();
        assert!((exp.get(0, 0) - (-1.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn cell_to_walsh_frozen_values() {
        let basis = WalshBasis::new(1, 1.0).unwrap();
        let y = cell_to_walsh(&CellVector::new(vec![1.0, 1.0]), &basis).unwrap();
        assert_eq!(y, vec![1.0, 0.0]);
        let y = cell_to_walsh(&CellVector::new(vec![1.0, -1.0]), &basis).unwrap();
        assert_eq!(y, vec![0.0, 1.0]);
        let y = cell_to_walsh(&CellVector::new(vec![0.25, 0.75]), &basis).unwrap();
        assert_eq!(y, vec![0.5, -0.25]);
    }

    #[test]
    fn cell_to_walsh_dimension_mismatch() {
        let basis = WalshBasis::new(1, 1.0).unwrap();
        assert!(cell_to_walsh(&CellVector::new(vec![1.0]), &basis).is_err());
    }

    #[test]
    fn reconstruct_picks_right_open_cells() {
        let basis = WalshBasis::new(1, 1.0).unwrap();
        let v = CellVector::new(vec![2.0, 5.0]);
        assert_eq!(reconstruct(&v, &basis, 0.3).unwrap(), 2.0);
        assert_eq!(reconstruct(&v, &basis, 0.5).unwrap(), 5.0);
        assert!(reconstruct(&v, &basis, 1.0).is_err());
        assert!(reconstruct(&v, &basis, -0.1).is_err());

        let b0 = WalshBasis::new(0, 1.0).unwrap();
        let single = CellVector::new(vec![7.0]);
        assert_eq!(reconstruct(&single, &b0, 0.0).unwrap(), 7.0);
        assert_eq!(reconstruct(&single, &b0, 0.999).unwrap(), 7.0);
    }

    #[test]
    fn reconstruct_recovers_cellwise_constant_projection() {
        let basis = WalshBasis::new(3, 1.0).unwrap();
        let staircase = |t: f64| (t * 8.0).floor() * 3.0 - 1.0;
        let v = project_scalar(|t, _| Ok(staircase(t)), &basis, None).unwrap();
        for step in 0..80 {
            let t = step as f64 / 80.0;
            assert_eq!(reconstruct(&v, &basis, t).unwrap(), staircase(t));
        }
    }

    proptest! {
        #[test]
        fn walsh_round_trip_is_identity(values in proptest::collection::vec(-100.0f64..100.0, 8)) {
            let basis = WalshBasis::new(3, 1.0).unwrap();
            let v = CellVector::new(values);
            let coeffs = cell_to_walsh(&v, &basis).unwrap();
            let back = walsh_to_cell(&coeffs, &basis).unwrap();
            for (a, b) in v.values().iter().zip(back.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn walsh_eval_is_plus_minus_one(n in 0u64..4096, t in 0.0f64..1.0) {
            let v = walsh_eval(n, t).unwrap();
            prop_assert!(v == 1 || v == -1);
        }
    }
}
