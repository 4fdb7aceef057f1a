//! Removal of every bound state of `-2n(2n+1) sech² r` through the overlap
//! matrix `F_jk(r) = ∫₀^r Ψ_j Ψ_k`, which yields the phase-equivalent
//! `+2n(2n+1) cosech² r`.
//!
//! With `z = tanh r` and `dr = dz / (1 - z²)`, each product `Ψ_j Ψ_k` becomes
//! `α_j α_k (1 - z²)^{j+k-2} D_j(z) D_k(z)` where `D_j` is the Rodrigues
//! polynomial of `P_{2n}^{2j-1}`, so `F` is integrated exactly.

use crate::error::{domain, Result};
use crate::numerics::linalg::{condition_number, lin_solve, Lu, Matrix};
use crate::numerics::{integrate, QuadratureSpec};
use crate::polynomial::Polynomial;
use crate::potentials::{pair_strength, BoundStateSet, PotentialModel};
use crate::scattering::{asymptotic_amplitude, scatter_state_det, scatter_state_derivative};
use crate::soliton::DetSystem;
use crate::special_functions::{factorial_ratio, LegendreFunction, LegendreOrder};

/// Smallest radius accepted by [`partner_states_solve`].
pub const MIN_SOLVE_RADIUS: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapMatrix {
    pub n: u32,
    pub r: f64,
    pub entries: Matrix<f64>,
}

impl OverlapMatrix {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.entries.is_symmetric(tol)
    }

    /// Positive definite iff every symmetric elimination pivot is positive.
    pub fn is_positive_definite(&self) -> bool {
        self.entries.symmetric_pivots().iter().all(|&p| p > 0.0)
    }

    pub fn log_det(&self) -> Result<f64> {
        match Lu::factorize(&self.entries).log_det() {
            Some((l, sign)) if sign > 0.0 => Ok(l),
            _ => domain(format!("det F is not positive at r = {}", self.r)),
        }
    }
}

/// Exact overlap data for one `n`.
///
/// Each bound state is `Ψ_j = sech r · Σ_a B_ja z^{2a-1}`, so
/// `F = z (B U) H (B U)ᵀ` with `U = diag(z^{2a-1})` and
/// `H_ab = 1/(2a+2b-1)`. The factored form gives `ln det F` and the partner
/// solve without forming the ill-conditioned `F` near the origin.
#[derive(Debug, Clone)]
pub struct OverlapPolynomials {
    n: u32,
    antiderivatives: Vec<Polynomial>,
    odd_coeffs: Matrix<f64>,
    odd_coeffs_t: Lu<f64>,
    hilbert: Matrix<f64>,
    hilbert_weights: Vec<f64>,
    log_det_constant: f64,
}

impl OverlapPolynomials {
    pub fn new(n: u32) -> Result<Self> {
        let set = BoundStateSet::new(n)?;
        let size = n as usize;
        let d: Vec<Polynomial> = (1..=n)
            .map(|j| {
                LegendreOrder::new(2 * n, 2 * j - 1)
                    .map(|o| LegendreFunction::new(o).rodrigues_polynomial().clone())
            })
            .collect::<Result<_>>()?;
        let mut antiderivatives = Vec::with_capacity(size * size);
        for j in 1..=n {
            for k in 1..=n {
                let w = Polynomial::one_minus_square_pow(j + k - 2);
                let p = &(&w * &d[j as usize - 1]) * &d[k as usize - 1];
                antiderivatives.push(p.antiderivative().scale(set.alpha(j) * set.alpha(k)));
            }
        }

        let mut odd_coeffs = Matrix::zeros(size);
        for j in 0..size {
            // Ψ_j / sech = -α_j (1 - z²)^{j} D_j(z), odd of degree 2n - 1
            let q = (&Polynomial::one_minus_square_pow(j as u32) * &d[j]).scale(-set.alpha(j as u32 + 1));
            for (a, &c) in q.coeffs().iter().enumerate().filter(|(a, _)| a % 2 == 1) {
                odd_coeffs[(j, a / 2)] = c;
            }
        }
        let transpose = Matrix::from_fn(size, |i, j| odd_coeffs[(j, i)]);
        let odd_coeffs_t = Lu::factorize(&transpose);
        let hilbert = Matrix::from_fn(size, |a, b| 1.0 / (2 * a + 2 * b + 3) as f64);
        let hilbert_lu = Lu::factorize(&hilbert);
        let hilbert_weights = hilbert_lu.solve(&vec![1.0; size])?;
        let (Some((lb, _)), Some((lh, sh))) = (odd_coeffs_t.log_det(), hilbert_lu.log_det()) else {
            return domain(format!("overlap factors are singular for n = {n}"));
        };
        if sh <= 0.0 {
            return domain(format!("overlap kernel is not positive for n = {n}"));
        }
        Ok(Self {
            n,
            antiderivatives,
            odd_coeffs,
            odd_coeffs_t,
            hilbert,
            hilbert_weights,
            log_det_constant: 2.0 * lb + lh,
        })
    }

    pub fn matrix(&self, r: f64) -> Result<OverlapMatrix> {
        if !(r >= 0.0) {
            return domain(format!("overlap matrix needs r >= 0, got {r}"));
        }
        let z = r.tanh();
        let n = self.n as usize;
        Ok(OverlapMatrix {
            n: self.n,
            r,
            entries: Matrix::from_fn(n, |j, k| self.antiderivatives[j * n + k].eval(z)),
        })
    }

    /// `Ψ_j(r) / sech r` from the odd coefficients.
    pub fn reduced_bound_states(&self, r: f64) -> Vec<f64> {
        let z = r.tanh();
        let n = self.n as usize;
        let u: Vec<f64> = (0..n).map(|a| z.powi(2 * a as i32 + 1)).collect();
        self.odd_coeffs.mul_vec(&u)
    }

    /// `ln det F(r)` from the factored form.
    pub fn log_det(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return domain(format!("det F vanishes at r = {r}"));
        }
        let n = self.n as f64;
        let ln_z = r.tanh().ln();
        // z^n from the prefactor, z^{n²} twice from U
        Ok(self.log_det_constant + (n + 2.0 * n * n) * ln_z)
    }

    /// Positive definite iff `z > 0`, `B` is invertible and `H` has positive
    /// symmetric pivots.
    pub fn is_positive_definite(&self, r: f64) -> bool {
        r > 0.0
            && !self.odd_coeffs_t.is_singular()
            && self.hilbert.symmetric_pivots().iter().all(|&p| p > 0.0)
    }

    /// `Φ = (sech r / z) B^{-T} U^{-1} H^{-1} 1`.
    pub fn partner_states(&self, r: f64) -> Result<Vec<f64>> {
        if !(r > 0.0 && r.is_finite()) {
            return domain(format!("partner solve needs finite r > 0, got {r}"));
        }
        let z = r.tanh();
        let w: Vec<f64> = self
            .hilbert_weights
            .iter()
            .enumerate()
            .map(|(a, v)| v / z.powi(2 * a as i32 + 1))
            .collect();
        let scale = 1.0 / (r.cosh() * z);
        Ok(self.odd_coeffs_t.solve(&w)?.into_iter().map(|p| p * scale).collect())
    }
}

/// `F(r)` by exact polynomial integration.
pub fn overlap_matrix(n: u32, r: f64) -> Result<OverlapMatrix> {
    OverlapPolynomials::new(n)?.matrix(r)
}

/// `F(r)` by adaptive quadrature of the closed-form bound states.
pub fn overlap_matrix_quadrature(n: u32, r: f64, spec: &QuadratureSpec) -> Result<OverlapMatrix> {
    if !(r >= 0.0) {
        return domain(format!("overlap matrix needs r >= 0, got {r}"));
    }
    let set = BoundStateSet::new(n)?;
    let size = n as usize;
    let mut entries = Matrix::zeros(size);
    for j in 1..=n {
        for k in j..=n {
            let v = integrate(|y| set.psi(j, y).unwrap_or(f64::NAN) * set.psi(k, y).unwrap_or(f64::NAN), 0.0, r, spec)?;
            if !v.is_finite() {
                return domain("bound state evaluation failed inside the overlap integral");
            }
            entries[(j as usize - 1, k as usize - 1)] = v;
            entries[(k as usize - 1, j as usize - 1)] = v;
        }
    }
    Ok(OverlapMatrix { n, r, entries })
}

/// Finite-difference step for derivatives of `ln det F` at `r`.
pub fn log_det_step(r: f64) -> f64 {
    (2e-3 * r).min(1e-3)
}

fn log_det_stencil(n: u32, r: f64) -> Result<([f64; 5], f64)> {
    let poly = OverlapPolynomials::new(n)?;
    let h = log_det_step(r);
    if !(r - 2.0 * h > 0.0) {
        return domain(format!("finite-difference stencil at r = {r} reaches r <= 0"));
    }
    let mut s = [0.0; 5];
    for (i, slot) in s.iter_mut().enumerate() {
        *slot = poly.log_det(r + (i as f64 - 2.0) * h)?;
    }
    Ok((s, h))
}

/// `V_d(r) - 2 (ln det F)''` by the five-point rule; equals
/// `+2n(2n+1) cosech² r`.
pub fn singular_from_deep(n: u32, r: f64) -> Result<f64> {
    let (s, h) = log_det_stencil(n, r)?;
    let d2 = (-s[0] + 16.0 * s[1] - 30.0 * s[2] + 16.0 * s[3] - s[4]) / (12.0 * h * h);
    Ok(PotentialModel::DeepSech2 { n }.eval(r)? - 2.0 * d2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartnerSolve {
    pub phi: Vec<f64>,
    /// One-norm condition number of `F(r)`.
    pub condition: f64,
}

/// Solves `F(r) Φ(r) = Ψ(r)` for the partner solutions through the
/// factored overlap.
pub fn partner_states_solve(n: u32, r: f64) -> Result<PartnerSolve> {
    if !(r >= MIN_SOLVE_RADIUS) {
        return domain(format!("partner solve needs r >= {MIN_SOLVE_RADIUS}, got {r}"));
    }
    let poly = OverlapPolynomials::new(n)?;
    let f = poly.matrix(r)?;
    Ok(PartnerSolve {
        phi: poly.partner_states(r)?,
        condition: condition_number(&f.entries).unwrap_or(f64::INFINITY),
    })
}

/// Plain LU solve of `F Φ = Ψ` on the assembled matrix.
pub fn partner_states_solve_lu(n: u32, r: f64) -> Result<Vec<f64>> {
    let f = overlap_matrix(n, r)?;
    let set = BoundStateSet::new(n)?;
    let psi = (1..=n).map(|j| set.psi(j, r)).collect::<Result<Vec<_>>>()?;
    lin_solve(&f.entries, &psi)
}

/// `|(ln det F)' - Σ Ψ_j Φ_j|` with the derivative by finite differences.
pub fn logdet_derivative_identity(n: u32, r: f64) -> Result<f64> {
    let (s, h) = log_det_stencil(n, r)?;
    let fd = (s[0] - 8.0 * s[1] + 8.0 * s[3] - s[4]) / (12.0 * h);
    let (_, sum) = product_sum_identity(n, r)?;
    Ok((fd - sum).abs())
}

/// `(n(2n+1) / (sinh r cosh r), Σ_j Ψ_j(r) Φ_j(r))`.
pub fn product_sum_identity(n: u32, r: f64) -> Result<(f64, f64)> {
    let set = BoundStateSet::new(n)?;
    let mut sum = 0.0;
    for j in 1..=n {
        sum += set.psi(j, r)? * set.phi(j, r)?;
    }
    let lhs = 0.5 * pair_strength(n) / (r.sinh() * r.cosh());
    Ok((lhs, sum))
}

/// `(-Σ_{m odd} P_{2n}^m(z) P_{2n}^m(1/z) 2m (2n-m)!/(2n+m)!, n(2n+1)(1-z²)/z)`
/// for `0 < z < 1`.
pub fn legendre_product_identity(n: u32, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return domain("product identity needs n >= 1");
    }
    if !(z > 0.0 && z < 1.0) {
        return domain(format!("product identity needs 0 < z < 1, got {z}"));
    }
    let mut sum = 0.0;
    for m in (1..2 * n).step_by(2) {
        let p = LegendreFunction::new(LegendreOrder::new(2 * n, m)?);
        let w = 2.0 * m as f64 * factorial_ratio(2 * n - m, 2 * n + m);
        sum += p.inside(z)? * p.outside(1.0 / z)? * w;
    }
    let rhs = 0.5 * pair_strength(n) * (1.0 - z * z) / z;
    Ok((-sum, rhs))
}

/// The singular-potential scattering state `Φ(κ, r)` three ways, each divided
/// by the common asymptotic amplitude `∏_j |iκ - j|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavefunctionTransform {
    /// `Ψ - Σ_j Φ_j ∫₀^r Ψ_j Ψ(κ, ·)`.
    pub integral_form: f64,
    /// `Ψ + Σ_j Φ_j (Ψ_j Ψ' - Ψ Ψ_j') / (γ_j² + κ²)`.
    pub wronskian_form: f64,
    /// `det D̃ / det M̃` for the shifted system.
    pub determinant_form: f64,
}

pub fn general_wavefunction_transform(
    n: u32,
    kappa: f64,
    r: f64,
    spec: &QuadratureSpec,
) -> Result<WavefunctionTransform> {
    if !(r > 0.0) {
        return domain(format!("wavefunction transform needs r > 0, got {r}"));
    }
    let deep = DetSystem::deep(n)?;
    let singular = DetSystem::singular(n)?;
    let set = BoundStateSet::new(n)?;
    let amp = asymptotic_amplitude(deep.gamma.as_slice(), kappa);

    let psi = scatter_state_det(&deep, kappa, r)?.re / amp;
    let dpsi = scatter_state_derivative(&deep, kappa, r)?.re / amp;

    let mut integral_form = psi;
    let mut wronskian_form = psi;
    for j in 1..=n {
        let phi_j = set.phi(j, r)?;
        let mut failure = None;
        let overlap = integrate(
            |y| match (set.psi(j, y), scatter_state_det(&deep, kappa, y)) {
                (Ok(a), Ok(b)) => a * b.re / amp,
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            r,
            spec,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        integral_form -= phi_j * overlap;

        let w = set.psi(j, r)? * dpsi - psi * set.psi_derivative(j, r)?;
        wronskian_form += phi_j * w / (set.gamma(j).powi(2) + kappa * kappa);
    }
    let determinant_form = scatter_state_det(&singular, kappa, r)?.re / amp;
    Ok(WavefunctionTransform {
        integral_form,
        wronskian_form,
        determinant_form,
    })
}

/// `|Φ_det - Φ_wronskian| / max(|Φ_det|, 1)`, both at unit asymptotic
/// amplitude.
pub fn wavefunction_relation_check(n: u32, kappa: f64, r: f64) -> Result<f64> {
    let t = general_wavefunction_transform(n, kappa, r, &QuadratureSpec::default())?;
    Ok((t.determinant_form - t.wronskian_form).abs() / t.determinant_form.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::first_pair_singular_state;
    use proptest::prelude::*;

    #[test]
    fn first_overlap_is_tanh_cubed() {
        for &r in &[0.0, 0.1, 1.0, 4.0] {
            let f = overlap_matrix(1, r).unwrap();
            assert!((f.entries[(0, 0)] - r.tanh().powi(3)).abs() < 1e-15);
        }
    }

    #[test]
    fn overlap_limits_and_structure() {
        let spec = QuadratureSpec::default();
        for n in 1..=4 {
            let zero = overlap_matrix(n, 0.0).unwrap();
            assert!((0..n as usize).all(|i| zero.entries.row(i).iter().all(|&v| v == 0.0)));
            let far = overlap_matrix(n, 20.0).unwrap();
            for i in 0..n as usize {
                for j in 0..n as usize {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((far.entries[(i, j)] - want).abs() < 1e-8);
                }
            }
            for &r in &[0.3, 1.2, 3.0] {
                let exact = overlap_matrix(n, r).unwrap();
                let quad = overlap_matrix_quadrature(n, r, &spec).unwrap();
                assert!(exact.is_symmetric(1e-12));
                for i in 0..n as usize {
                    for j in 0..n as usize {
                        assert!((exact.entries[(i, j)] - quad.entries[(i, j)]).abs() < 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_positive_definite() {
        for n in 1..=4 {
            let poly = OverlapPolynomials::new(n).unwrap();
            for i in 0..=40 {
                let r = 1e-2 * (2000f64).powf(i as f64 / 40.0);
                assert!(poly.is_positive_definite(r), "n={n} r={r}");
                if r >= 0.2 {
                    assert!(poly.matrix(r).unwrap().is_positive_definite(), "n={n} r={r}");
                }
            }
        }
    }

    #[test]
    fn det_f_closed_form() {
        for n in 1..=4 {
            let p = (n * (2 * n + 1)) as i32;
            let poly = OverlapPolynomials::new(n).unwrap();
            for &r in &[0.01, 0.3, 1.0, 2.5] {
                let l = poly.log_det(r).unwrap();
                assert!((l - p as f64 * r.tanh().ln()).abs() < 1e-12, "n={n} r={r}");
            }
            for &r in &[1.0, 2.5] {
                let l = poly.matrix(r).unwrap().log_det().unwrap();
                assert!((l - p as f64 * r.tanh().ln()).abs() < 1e-10, "n={n} r={r}");
            }
        }
    }

    #[test]
    fn factored_bound_states() {
        for n in 1..=5 {
            let poly = OverlapPolynomials::new(n).unwrap();
            let set = BoundStateSet::new(n).unwrap();
            for &r in &[0.05, 0.7, 3.0] {
                let q = poly.reduced_bound_states(r);
                for j in 1..=n {
                    let psi = set.psi(j, r).unwrap();
                    assert!((q[j as usize - 1] / r.cosh() - psi).abs() < 1e-13, "n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn lu_solve_where_conditioned() {
        let set = BoundStateSet::new(3).unwrap();
        let phi = partner_states_solve_lu(3, 1.0).unwrap();
        for j in 1..=3 {
            let want = set.phi(j, 1.0).unwrap();
            assert!((phi[j as usize - 1] - want).abs() < 1e-10 * want.abs().max(1.0));
        }
    }

    #[test]
    fn singular_reconstruction() {
        let want = |n: u32, r: f64| pair_strength(n) / r.sinh().powi(2);
        for n in 1..=3 {
            for i in 0..=78 {
                let r = 0.2 + 0.1 * i as f64;
                let v = singular_from_deep(n, r).unwrap();
                assert!((v - want(n, r)).abs() < 1e-5, "n={n} r={r}");
            }
        }
        let v = singular_from_deep(2, 1.5).unwrap();
        assert!((v - want(2, 1.5)).abs() < 1e-5);
        let v = singular_from_deep(1, 0.7).unwrap();
        assert!((v - want(1, 0.7)).abs() < 1e-6);
        assert!(singular_from_deep(1, 0.0).is_err());
        assert!(singular_from_deep(1, -1.0).is_err());
    }

    #[test]
    fn partner_solve_matches_closed_form() {
        for n in 1..=3 {
            let set = BoundStateSet::new(n).unwrap();
            for &r in &[0.05, 0.3, 1.0, 2.0, 6.0, 10.0] {
                let sol = partner_states_solve(n, r).unwrap();
                for j in 1..=n {
                    let want = set.phi(j, r).unwrap();
                    let got = sol.phi[j as usize - 1];
                    assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "n={n} j={j} r={r}: {got} vs {want}");
                }
            }
        }
        assert!(partner_states_solve(2, 1e-3).is_err());
    }

    #[test]
    fn logdet_and_product_identities() {
        for n in 1..=3 {
            for &r in &[0.4, 1.0, 3.0] {
                assert!(logdet_derivative_identity(n, r).unwrap() < 1e-6, "n={n} r={r}");
            }
        }
        let (l, s) = product_sum_identity(1, 0.8).unwrap();
        assert!((l - 3.0 / (0.8f64.sinh() * 0.8f64.cosh())).abs() < 1e-14);
        assert!((l - s).abs() < 1e-12 * l);
        let (l, s) = product_sum_identity(3, 1.2).unwrap();
        assert!((l - s).abs() < 1e-9 * l);
        // the integration constant vanishes
        let (l, s) = product_sum_identity(3, 30.0).unwrap();
        assert!(l.abs() < 1e-20 && s.abs() < 1e-20);
    }

    #[test]
    fn legendre_identity() {
        for n in 1..=5 {
            for i in 1..=200 {
                let z = 0.25 + 0.745 * (i - 1) as f64 / 199.0;
                let (l, r) = legendre_product_identity(n, z).unwrap();
                assert!((l - r).abs() <= 1e-9 * r.abs(), "n={n} z={z}");
            }
        }
        assert!(legendre_product_identity(1, 1.0).is_err());
    }

    #[test]
    fn transform_paths_agree() {
        let spec = QuadratureSpec::default();
        for &(n, k, r) in &[(1, 1.0, 2.0), (2, 0.5, 3.0), (2, 0.8, 1.5), (3, 1.3, 0.9)] {
            let t = general_wavefunction_transform(n, k, r, &spec).unwrap();
            assert!((t.integral_form - t.wronskian_form).abs() < 1e-8, "{t:?}");
            assert!((t.determinant_form - t.wronskian_form).abs() < 1e-8, "{t:?}");
            assert!(wavefunction_relation_check(n, k, r).unwrap() < 1e-7);
        }
    }

    #[test]
    fn first_pair_transform_closed_form() {
        let spec = QuadratureSpec::default();
        let k = 1.0;
        let amp = ((1.0f64 + k * k) * (4.0 + k * k)).sqrt();
        for &r in &[0.5, 1.0, 2.0, 5.0] {
            let t = general_wavefunction_transform(1, k, r, &spec).unwrap();
            let want = -first_pair_singular_state(k, r) / amp;
            assert!((t.integral_form - want).abs() < 1e-7);
        }
    }

    proptest! {
        #[test]
        fn overlap_symmetric(n in 1u32..5, r in 0.0f64..10.0) {
            prop_assert!(overlap_matrix(n, r).unwrap().is_symmetric(1e-12));
        }
    }
}
