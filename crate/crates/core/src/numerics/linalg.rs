//! Dense square matrices and LU factorisation with partial pivoting, for real
//! and complex entries.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

/// Pivots smaller than this are treated as exact zeros.
pub const PIVOT_FLOOR: f64 = 1e-300;

pub trait Field:
    Copy
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
    fn from_real(x: f64) -> Self;
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn from_real(x: f64) -> Self {
        x
    }
}

impl Field for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Field> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Domain("matrix rows must form a square".into()));
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn set_row(&mut self, i: usize, values: &[T]) {
        self.data[i * self.dim..(i + 1) * self.dim].copy_from_slice(values);
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(self.dim, |i, j| {
            (0..self.dim).fold(T::zero(), |acc, k| acc + self[(i, k)] * other[(k, j)])
        })
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Matrix<f64> {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| {
            (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol * self[(i, j)].abs().max(1e-300))
        })
    }

    /// Pivots of symmetric Gaussian elimination without row exchanges
    /// (the squared diagonal of a Cholesky factor). All positive iff the
    /// matrix is positive definite.
    pub fn symmetric_pivots(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let p = a[k * n + k];
            pivots.push(p);
            if p == 0.0 {
                break;
            }
            for i in (k + 1)..n {
                let f = a[i * n + k] / p;
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        pivots
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.dim + j]
    }
}

/// `P A = L U` with unit lower `L`, stored compactly.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    dim: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    odd_swaps: bool,
    /// First pivot that fell below [`PIVOT_FLOOR`], with its magnitude.
    singular: Option<(usize, f64)>,
}

impl<T: Field> Lu<T> {
    pub fn factorize(matrix: &Matrix<T>) -> Self {
        let n = matrix.dim;
        let mut lu = matrix.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd_swaps = false;
        let mut singular = None;

        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[i * n + k].modulus()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag < PIVOT_FLOOR {
                singular.get_or_insert((k, pmag));
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd_swaps = !odd_swaps;
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in (k + 1)..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] = lu[i * n + j] - f * u;
                }
            }
        }
        Self {
            dim: n,
            lu,
            perm,
            odd_swaps,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular.is_some()
    }

    pub fn pivots(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.lu[i * self.dim + i]).collect()
    }

    pub fn det(&self) -> T {
        if self.singular.is_some() {
            return T::zero();
        }
        let d = self.pivots().into_iter().fold(T::one(), |acc, p| acc * p);
        if self.odd_swaps {
            -d
        } else {
            d
        }
    }

    /// `(ln |det|, det / |det|)`, or `None` when singular.
    pub fn log_det(&self) -> Option<(f64, T)> {
        if self.singular.is_some() {
            return None;
        }
        let mut log_abs = 0.0;
        let mut phase = if self.odd_swaps { -T::one() } else { T::one() };
        for p in self.pivots() {
            let m = p.modulus();
            log_abs += m.ln();
            phase = phase * (p / T::from_real(m));
        }
        Some((log_abs, phase))
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        if let Some((pivot, magnitude)) = self.singular {
            return Err(Error::Singular { pivot, magnitude });
        }
        let n = self.dim;
        let mut x: Vec<T> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] = x[i] - self.lu[i * n + j] * x[j];
            }
            x[i] = x[i] / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Solves `A X = B` column by column.
    pub fn solve_matrix(&self, rhs: &Matrix<T>) -> Result<Matrix<T>> {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for j in 0..n {
            let col: Vec<T> = (0..n).map(|i| rhs[(i, j)]).collect();
            let x = self.solve(&col)?;
            for i in 0..n {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<Matrix<T>> {
        self.solve_matrix(&Matrix::identity(self.dim))
    }
}

pub fn lu_det<T: Field>(matrix: &Matrix<T>) -> T {
    Lu::factorize(matrix).det()
}

pub fn lin_solve(matrix: &Matrix<f64>, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != matrix.dim() {
        return Err(Error::Domain(format!(
            "right-hand side has length {} for a {}x{} system",
            rhs.len(),
            matrix.dim(),
            matrix.dim()
        )));
    }
    Lu::factorize(matrix).solve(rhs)
}

/// One-norm condition number `‖A‖₁ ‖A⁻¹‖₁`.
pub fn condition_number(matrix: &Matrix<f64>) -> Result<f64> {
    let inv = Lu::factorize(matrix).inverse()?;
    Ok(matrix.norm_one() * inv.norm_one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn power_matrix(gammas: &[f64]) -> Matrix<f64> {
        Matrix::from_fn(gammas.len(), |k, j| gammas[j].powi(k as i32))
    }

    fn product_formula(g: &[f64]) -> f64 {
        let mut d = 1.0;
        for j in 0..g.len() {
            for k in (j + 1)..g.len() {
                d *= g[k] - g[j];
            }
        }
        d
    }

    #[test]
    fn determinants() {
        assert_eq!(lu_det(&Matrix::<f64>::identity(5)), 1.0);
        let d = Matrix::from_fn(3, |i, j| if i == j { (i + 2) as f64 } else { 0.0 });
        assert_eq!(lu_det(&d), 24.0);
        assert!((lu_det(&power_matrix(&[1.0, 2.0, 3.0])) - 2.0).abs() < 1e-14);
        let zero = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(lu_det(&zero), 0.0);
        let c = Matrix::from_rows(vec![
            vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, -1.0)],
        ])
        .unwrap();
        // i(-i) - 2 = -1
        assert!((lu_det(&c) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn vandermonde_integer_nodes() {
        for n in 1..=8 {
            let g: Vec<f64> = (1..=n).map(f64::from).collect();
            let want = product_formula(&g);
            let got = lu_det(&power_matrix(&g));
            assert!((got - want).abs() <= 1e-9 * want.abs(), "n={n}");
        }
    }

    #[test]
    fn solve_identity_and_singular() {
        let b = vec![1.0, -2.0, 3.5];
        assert_eq!(lin_solve(&Matrix::identity(3), &b).unwrap(), b);
        let s = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        match lin_solve(&s, &[1.0, 1.0]) {
            Err(Error::Singular { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("expected singular error, got {other:?}"),
        }
        assert!(lin_solve(&s, &[1.0]).is_err());
    }

    #[test]
    fn positive_definite_pivots() {
        let a = Matrix::from_rows(vec![vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert!(a.symmetric_pivots().iter().all(|&p| p > 0.0));
        let b = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(b.symmetric_pivots().iter().any(|&p| p <= 0.0));
    }

    proptest! {
        #[test]
        fn random_vandermonde(g in proptest::collection::vec(0.5f64..5.0, 2..7)) {
            let want = product_formula(&g);
            // clustered nodes make the power matrix ill-conditioned
            let gap = g.iter().enumerate()
                .flat_map(|(i, a)| g[i + 1..].iter().map(move |b| (a - b).abs()))
                .fold(f64::INFINITY, f64::min);
            prop_assume!(gap > 0.05);
            let got = lu_det(&power_matrix(&g));
            prop_assert!((got - want).abs() <= 1e-9 * want.abs());
        }

        #[test]
        fn solve_residual(entries in proptest::collection::vec(-1.0f64..1.0, 36),
                          rhs in proptest::collection::vec(-1.0f64..1.0, 6)) {
            // diagonally dominant, hence well conditioned
            let a = Matrix::from_fn(6, |i, j| entries[i * 6 + j] + if i == j { 8.0 } else { 0.0 });
            let x = lin_solve(&a, &rhs).unwrap();
            let ax = a.mul_vec(&x);
            let bmax = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let res = ax.iter().zip(&rhs).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            prop_assert!(res <= 1e-10 * bmax.max(1e-300));
        }
    }
}
