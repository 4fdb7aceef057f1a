//! Associated Legendre functions of integer degree and order, and the
//! factorial-family helpers used by the normalisation constants.
//!
//! The functions follow the Rodrigues-type definition
//!
//! ```text
//! |z| < 1:  P_n^m(z) = (-1)^m (1-z²)^{m/2} / (2^n n!) · d^{n+m}/dz^{n+m} (1-z²)^n
//!  y > 1:   P_n^m(y) = (y²-1)^{m/2} / (2^n n!) · d^{n+m}/dy^{n+m} (y²-1)^n
//! ```
//!
//! Note the `(1-z²)^n` inside the derivative: for odd `n` this differs from the
//! Condon–Shortley convention by a factor `(-1)^n`. Every identity in this
//! crate is stated in this convention.
//!
//! Evaluation expands `(1-z²)^n` by the binomial theorem and differentiates
//! term by term, giving an explicit polynomial times the `(1-z²)^{m/2}`
//! prefactor. This is exact up to rounding of the coefficients and is
//! intended for `n ≲ 30`.

use crate::error::{domain, Error, Result};
use crate::polynomial::Polynomial;
use num_complex::Complex64;

/// Largest `k` for which `k!` fits in a `u128`.
pub const MAX_EXACT_FACTORIAL: u32 = 33;

/// Degree `n` and order `m` of `P_n^m`, with `m <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LegendreOrder {
    n: u32,
    m: u32,
}

impl LegendreOrder {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if m > n {
            return domain(format!("Legendre order m = {m} exceeds degree n = {n}"));
        }
        Ok(Self { n, m })
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.m
    }
}

/// `P_n^m` with its derivative polynomial precomputed, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct LegendreFunction {
    order: LegendreOrder,
    /// `d^{n+m}/dz^{n+m} (1-z²)^n / (2^n n!)`.
    rodrigues: Polynomial,
}

impl LegendreFunction {
    pub fn new(order: LegendreOrder) -> Self {
        let n = order.n as usize;
        let p = (order.n + order.m) as usize;
        let norm = 2f64.powi(order.n as i32) * factorial_f64(order.n);
        let mut coeffs = vec![0.0; (2 * n).saturating_sub(p) + 1];
        let mut binom = 1.0;
        for k in 0..=n {
            if 2 * k >= p {
                let falling: f64 = ((2 * k - p + 1)..=(2 * k)).map(|v| v as f64).product();
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                coeffs[2 * k - p] = sign * binom * falling / norm;
            }
            binom = binom * (n - k) as f64 / (k + 1) as f64;
        }
        Self {
            order,
            rodrigues: Polynomial::new(coeffs),
        }
    }

    pub fn order(&self) -> LegendreOrder {
        self.order
    }

    /// The polynomial `d^{n+m}/dz^{n+m} (1-z²)^n / (2^n n!)`.
    pub fn rodrigues_polynomial(&self) -> &Polynomial {
        &self.rodrigues
    }

    fn inside_sign(&self) -> f64 {
        if self.order.m.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    fn outside_sign(&self) -> f64 {
        // (y²-1)^n = (-1)^n (1-y²)^n
        if self.order.n.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn inside(&self, z: f64) -> Result<f64> {
        if !(z.abs() < 1.0) {
            return domain(format!("P_n^m inside branch needs |z| < 1, got {z}"));
        }
        let root = ((1.0 - z) * (1.0 + z)).sqrt();
        Ok(self.inside_with_root(z, root))
    }

    /// Inside branch with `sqrt(1 - z²)` supplied by the caller, e.g. as
    /// `sech r` when `z = tanh r`, which keeps full relative precision as
    /// `z → 1`.
    pub fn inside_with_root(&self, z: f64, root: f64) -> f64 {
        self.inside_sign() * root.powi(self.order.m as i32) * self.rodrigues.eval(z)
    }

    pub fn outside(&self, y: f64) -> Result<f64> {
        if !(y > 1.0) {
            return domain(format!("P_n^m outside branch needs y > 1, got {y}"));
        }
        let root = ((y - 1.0) * (y + 1.0)).sqrt();
        Ok(self.outside_with_root(y, root))
    }

    /// Outside branch with `sqrt(y² - 1)` supplied by the caller (`cosech r`
    /// when `y = coth r`).
    pub fn outside_with_root(&self, y: f64, root: f64) -> f64 {
        self.outside_sign() * root.powi(self.order.m as i32) * self.rodrigues.eval(y)
    }

    /// Analytic continuation using the principal branch of `sqrt(1 - w²)`.
    /// The cut runs along the real axis for `|Re w| >= 1`.
    pub fn complex(&self, w: Complex64) -> Result<Complex64> {
        if w.im == 0.0 && w.re.abs() >= 1.0 {
            return domain(format!("w = {w} lies on the branch cut |Re w| >= 1"));
        }
        let one = Complex64::new(1.0, 0.0);
        let root = ((one - w) * (one + w)).sqrt();
        Ok(self.complex_with_root(w, root))
    }

    /// Complex evaluation with an explicit choice of `sqrt(1 - w²)`; used to
    /// continue along a path rather than by the principal branch.
    pub fn complex_with_root(&self, w: Complex64, root: Complex64) -> Complex64 {
        root.powi(self.order.m as i32) * self.rodrigues.eval_complex(w) * self.inside_sign()
    }
}

pub fn legendre_inside(order: LegendreOrder, z: f64) -> Result<f64> {
    LegendreFunction::new(order).inside(z)
}

pub fn legendre_outside(order: LegendreOrder, y: f64) -> Result<f64> {
    LegendreFunction::new(order).outside(y)
}

pub fn legendre_complex(order: LegendreOrder, w: Complex64) -> Result<Complex64> {
    LegendreFunction::new(order).complex(w)
}

pub fn factorial(k: u32) -> Result<u128> {
    (1..=k as u128).try_fold(1u128, |acc, v| {
        acc.checked_mul(v)
            .ok_or_else(|| Error::Overflow(format!("{k}! exceeds u128")))
    })
}

/// `k!` as a float: exact integer arithmetic through `33!`, log-gamma beyond.
pub fn factorial_f64(k: u32) -> f64 {
    if k <= MAX_EXACT_FACTORIAL {
        factorial(k).map(|v| v as f64).unwrap_or(f64::INFINITY)
    } else {
        statrs::function::gamma::ln_gamma(k as f64 + 1.0).exp()
    }
}

/// `a! / b!` as a running product, so large factorials never materialise.
pub fn factorial_ratio(a: u32, b: u32) -> f64 {
    if a >= b {
        ((b + 1)..=a).map(f64::from).product()
    } else {
        1.0 / ((a + 1)..=b).map(f64::from).product::<f64>()
    }
}

/// `k!! = k (k-2) (k-4) ...`, with `0!! = (-1)!! = 1`.
pub fn double_factorial(k: i64) -> Result<u128> {
    if k < -1 {
        return domain(format!("double factorial undefined for {k}"));
    }
    let mut acc: u128 = 1;
    let mut v = k;
    while v > 1 {
        acc = acc
            .checked_mul(v as u128)
            .ok_or_else(|| Error::Overflow(format!("{k}!! exceeds u128")))?;
        v -= 2;
    }
    Ok(acc)
}

/// Half-line normaliser `α_j` of the `j`-th bound state of
/// `-2n(2n+1) sech² r`, so that `α_j P_{2n}^{2j-1}(tanh r)` has unit norm on
/// `[0, ∞)`.
pub fn bound_state_normalizer(n: u32, j: u32) -> Result<f64> {
    if n == 0 || j == 0 || j > n {
        return domain(format!("bound state index j = {j} outside 1..={n}"));
    }
    let m = 2 * j - 1;
    Ok((2.0 * m as f64 * factorial_ratio(2 * n - m, 2 * n + m)).sqrt())
}

/// Full-line normaliser of `P_N^m(tanh x)`, i.e. `sqrt(m (N-m)! / (N+m)!)`.
pub fn full_line_normalizer(big_n: u32, m: u32) -> Result<f64> {
    if m == 0 || m > big_n {
        return domain(format!("full-line order m = {m} outside 1..={big_n}"));
    }
    Ok((m as f64 * factorial_ratio(big_n - m, big_n + m)).sqrt())
}

/// Normaliser of the ground state `cosh^{-N} x` on the full line:
/// `sqrt((2N-1)!! / (2^N (N-1)!))`.
pub fn ground_state_normalizer(big_n: u32) -> Result<f64> {
    if big_n == 0 {
        return domain("ground state needs N >= 1");
    }
    // (2N-1)!! / (2^N (N-1)!) = prod_{k=1}^{N-1} (2k+1)/(2k) / 2
    let ratio: f64 = (1..big_n)
        .map(|k| (2 * k + 1) as f64 / (2 * k) as f64)
        .product::<f64>()
        / 2.0;
    Ok(ratio.sqrt())
}
