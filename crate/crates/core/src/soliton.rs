//! Determinant machinery for adding bound states to the free particle.
//!
//! For decay constants `γ_1 < ... < γ_N` the matrix
//!
//! ```text
//! M_kj(x) = γ_j^{k-1}/2 · (exp(γ_j x) + (-1)^{j+k} exp(-γ_j x))
//! ```
//!
//! is the Wronskian matrix of `cosh γ_j x` (odd `j`) and `sinh γ_j x` (even
//! `j`): row `k` holds the `(k-1)`-th derivatives. The potential is
//! `-2 d²/dx² ln det M`, and bordering `M` with one more row and a column of
//! derivatives of `sin κx` gives the scattering state.
//!
//! Entries grow like `exp(γ_j |x|)`, so every builder divides column `j` by
//! that factor and returns the removed amount as `log_scale`. Ratios and log
//! derivatives are unaffected.

use crate::error::{domain, Result};
use crate::numerics::linalg::{Lu, Matrix};
use crate::special_functions::factorial_f64;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Strictly increasing positive decay constants.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSequence {
    gammas: Vec<f64>,
    closed_form: bool,
}

impl GammaSequence {
    pub fn new(gammas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return domain("gamma sequence must be non-empty");
        }
        if gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return domain(format!("gammas must be finite and positive: {gammas:?}"));
        }
        if gammas.windows(2).any(|w| w[1] <= w[0]) {
            return domain(format!("gammas must be strictly increasing: {gammas:?}"));
        }
        let closed_form = gammas.iter().enumerate().all(|(i, &g)| g == (i + 1) as f64);
        Ok(Self { gammas, closed_form })
    }

    /// `[1, 2, ..., n]`.
    pub fn integers(n: u32) -> Result<Self> {
        Self::new((1..=n).map(f64::from).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn is_closed_form(&self) -> bool {
        self.closed_form
    }
}

/// Offset added to the coordinate before evaluating the matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    None,
    /// `x → x + iπ/2`, which carries `cosh → i sinh` and `sech² → -cosech²`.
    HalfPi,
}

impl Shift {
    pub fn imag(self) -> f64 {
        match self {
            Shift::None => 0.0,
            Shift::HalfPi => FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetSystem {
    pub gamma: GammaSequence,
    pub shift: Shift,
}

impl DetSystem {
    pub fn new(gamma: GammaSequence, shift: Shift) -> Self {
        Self { gamma, shift }
    }

    /// `γ = [1..2n]` without shift: the deep potential `-2n(2n+1) sech² r`.
    pub fn deep(n: u32) -> Result<Self> {
        Ok(Self::new(GammaSequence::integers(2 * n)?, Shift::None))
    }

    /// `γ = [1..2n]` shifted by `iπ/2`: the singular `+2n(2n+1) cosech² r`.
    pub fn singular(n: u32) -> Result<Self> {
        Ok(Self::new(GammaSequence::integers(2 * n)?, Shift::HalfPi))
    }

    pub fn size(&self) -> usize {
        self.gamma.len()
    }

    /// Row `k` (1-based) of the bordered matrices, scaled per column.
    pub fn scaled_row(&self, k: usize, r: f64) -> Vec<Complex64> {
        let s = self.shift.imag();
        let a = r.abs();
        self.gamma
            .as_slice()
            .iter()
            .enumerate()
            .map(|(idx, &g)| {
                let j = idx + 1;
                let sign = if (j + k).is_multiple_of(2) { 1.0 } else { -1.0 };
                let plus = Complex64::from_polar((g * (r - a)).exp(), g * s);
                let minus = Complex64::from_polar((-g * (r + a)).exp(), -g * s);
                (plus + minus * sign) * (0.5 * g.powi(k as i32 - 1))
            })
            .collect()
    }

    fn log_scale(&self, r: f64) -> f64 {
        self.gamma.as_slice().iter().sum::<f64>() * r.abs()
    }

    fn scaled_rows(&self, rows: impl Iterator<Item = usize>, r: f64) -> Matrix<Complex64> {
        let rows: Vec<Vec<Complex64>> = rows.map(|k| self.scaled_row(k, r)).collect();
        Matrix::from_rows(rows).expect("square by construction")
    }
}

/// A matrix with column scale factors removed: the true determinant is
/// `exp(log_scale) · det(matrix)`.
#[derive(Debug, Clone)]
pub struct ScaledMatrix {
    pub matrix: Matrix<Complex64>,
    pub log_scale: f64,
}

/// `ln |det| ` together with the unit phase `det / |det|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: Complex64,
}

impl LogDet {
    pub fn value(&self) -> Complex64 {
        self.phase * self.log_abs.exp()
    }
}

pub fn build_m(sys: &DetSystem, r: f64) -> ScaledMatrix {
    ScaledMatrix {
        matrix: sys.scaled_rows(1..=sys.size(), r),
        log_scale: sys.log_scale(r),
    }
}

/// `d^order/dr^order sin κr`.
pub fn sin_derivative(kappa: f64, r: f64, order: usize) -> f64 {
    let amp = kappa.powi(order as i32);
    let (s, c) = (kappa * r).sin_cos();
    amp * match order % 4 {
        0 => s,
        1 => c,
        2 => -s,
        _ => -c,
    }
}

/// The `(N+1)×(N+1)` bordered matrix whose determinant over `det M` is the
/// scattering state at energy `κ²`. The last column holds derivatives of
/// `sin κr` at the real coordinate `r` for either shift.
pub fn build_d_scatter(sys: &DetSystem, r: f64, kappa: f64) -> Result<ScaledMatrix> {
    if !(kappa > 0.0) {
        return domain(format!("scattering needs kappa > 0, got {kappa}"));
    }
    Ok(ScaledMatrix {
        matrix: bordered(sys, r, kappa, None),
        log_scale: sys.log_scale(r),
    })
}

/// Bordered matrix; `last_row_order` optionally replaces row `N+1` by another
/// row of the same family (row `N+2` gives the derivative of the determinant).
pub(crate) fn bordered(sys: &DetSystem, r: f64, kappa: f64, last_row_order: Option<usize>) -> Matrix<Complex64> {
    let n = sys.size();
    let mut m = Matrix::zeros(n + 1);
    for k in 1..=(n + 1) {
        let row_k = if k == n + 1 { last_row_order.unwrap_or(k) } else { k };
        let mut row = sys.scaled_row(row_k, r);
        row.push(Complex64::new(sin_derivative(kappa, r, row_k - 1), 0.0));
        m.set_row(k - 1, &row);
    }
    m
}

fn singular_error(r: f64) -> crate::Error {
    crate::Error::Domain(format!("det M vanishes numerically at r = {r}"))
}

pub fn det_m(sys: &DetSystem, r: f64) -> Result<LogDet> {
    let scaled = build_m(sys, r);
    let (log_abs, phase) = Lu::factorize(&scaled.matrix)
        .log_det()
        .ok_or_else(|| singular_error(r))?;
    Ok(LogDet {
        log_abs: log_abs + scaled.log_scale,
        phase,
    })
}

/// `(d/dr ln det M, d²/dr² ln det M)` from `tr(M⁻¹M')` and
/// `tr(M⁻¹M'') - tr((M⁻¹M')²)` with exact element-wise derivatives.
pub fn log_det_derivatives(sys: &DetSystem, r: f64) -> Result<(Complex64, Complex64)> {
    let n = sys.size();
    let m = sys.scaled_rows(1..=n, r);
    let lu = Lu::factorize(&m);
    if lu.is_singular() {
        return Err(singular_error(r));
    }
    let x = lu.solve_matrix(&sys.scaled_rows(2..=n + 1, r))?;
    let y = lu.solve_matrix(&sys.scaled_rows(3..=n + 2, r))?;
    let first = x.trace();
    let second = y.trace() - x.matmul(&x).trace();
    Ok((first, second))
}

/// `d²/dr² ln det M`; the potential is `-2` times this.
pub fn log_det_second_derivative(sys: &DetSystem, r: f64) -> Result<f64> {
    Ok(log_det_derivatives(sys, r)?.1.re)
}

/// `∏_{j<k} (γ_k - γ_j)`.
pub fn vandermonde_det(gammas: &[f64]) -> f64 {
    let mut d = 1.0;
    for j in 0..gammas.len() {
        for k in (j + 1)..gammas.len() {
            d *= gammas[k] - gammas[j];
        }
    }
    d
}

pub const MAX_CLOSED_FORM_N: u32 = 10;

fn closed_form_constant_log(n: u32) -> Result<f64> {
    if n == 0 || n > MAX_CLOSED_FORM_N {
        return domain(format!("closed-form det M needs 1 <= N <= {MAX_CLOSED_FORM_N}, got {n}"));
    }
    let mut log_c = (n * (n - 1) / 2) as f64 * std::f64::consts::LN_2;
    for j in 1..n {
        log_c += factorial_f64(j).ln();
    }
    Ok(log_c)
}

/// `det M` for `γ = [1..N]`: `2^{N(N-1)/2} cosh^{N(N+1)/2} x ∏_{j<N} j!`.
pub fn closed_form_det_m(n: u32, x: f64) -> Result<f64> {
    let log_c = closed_form_constant_log(n)?;
    Ok(log_c.exp() * x.cosh().powi((n * (n + 1) / 2) as i32))
}

/// Natural log of [`closed_form_det_m`], usable where the value overflows.
pub fn closed_form_log_det_m(n: u32, x: f64) -> Result<f64> {
    let log_c = closed_form_constant_log(n)?;
    let log_cosh = x.abs() + (0.5 * (1.0 + (-2.0 * x.abs()).exp())).ln();
    Ok(log_c + (n * (n + 1) / 2) as f64 * log_cosh)
}

/// `ln |det M̃|` for `γ = [1..N]` under `cosh x → i sinh x`.
pub fn closed_form_log_abs_det_shifted(n: u32, x: f64) -> Result<f64> {
    let log_c = closed_form_constant_log(n)?;
    let xa = x.abs();
    let log_sinh = xa + (0.5 * (1.0 - (-2.0 * xa).exp())).ln();
    Ok(log_c + (n * (n + 1) / 2) as f64 * log_sinh)
}
