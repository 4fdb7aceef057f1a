//! The deep/singular potential pair on the half line, their bound states and
//! partner solutions, and the eigenstate-sum form of the `N`-soliton
//! potential on the full line.
//!
//! With `λ = 2n(2n+1)`:
//!
//! ```text
//! V_d(r) = -λ sech² r        Ψ_j(r) =  α_j P_{2n}^{2j-1}(tanh r)
//! V_s(r) = +λ cosech² r      Φ_j(r) = -α_j P_{2n}^{2j-1}(coth r)
//! ```
//!
//! `Ψ_j` and `Φ_j` share the energy `-(2j-1)²`. `Φ_j` solves the singular
//! problem but is not normalisable at the origin; it tends to `Ψ_j` as
//! `r → ∞`.

use crate::error::{domain, Result};
use crate::soliton::{log_det_second_derivative, DetSystem, Shift};
use crate::special_functions::{
    bound_state_normalizer, full_line_normalizer, LegendreFunction, LegendreOrder,
};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Below this radius partner solutions grow like `r^{-2n}` and reports flag
/// the values as unreliable.
pub const PARTNER_WARN_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialModel {
    Free,
    DeepSech2 { n: u32 },
    SingularCosech2 { n: u32 },
    DeterminantBuilt(DetSystem),
}

/// `2n(2n+1)`.
pub fn pair_strength(n: u32) -> f64 {
    let n = n as f64;
    2.0 * n * (2.0 * n + 1.0)
}

impl PotentialModel {
    /// Number of bound states with `y(0) = 0`.
    pub fn bound_state_count(&self) -> u32 {
        match self {
            PotentialModel::Free | PotentialModel::SingularCosech2 { .. } => 0,
            PotentialModel::DeepSech2 { n } => *n,
            PotentialModel::DeterminantBuilt(sys) => match sys.shift {
                Shift::None => (sys.size() / 2) as u32,
                Shift::HalfPi => 0,
            },
        }
    }

    /// Whether the potential has an `l(l+1)/r²` core at the origin.
    pub fn is_singular(&self) -> bool {
        matches!(
            self,
            PotentialModel::SingularCosech2 { .. }
                | PotentialModel::DeterminantBuilt(DetSystem { shift: Shift::HalfPi, .. })
        )
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        eval_potential(self, r)
    }
}

pub fn eval_potential(model: &PotentialModel, r: f64) -> Result<f64> {
    if !r.is_finite() {
        return domain(format!("potential needs a finite radius, got {r}"));
    }
    match model {
        PotentialModel::Free => Ok(0.0),
        PotentialModel::DeepSech2 { n } => Ok(-pair_strength(*n) / r.cosh().powi(2)),
        PotentialModel::SingularCosech2 { n } => {
            if r <= 0.0 {
                return domain(format!("singular potential needs r > 0, got {r}"));
            }
            Ok(pair_strength(*n) / r.sinh().powi(2))
        }
        PotentialModel::DeterminantBuilt(sys) => Ok(-2.0 * log_det_second_derivative(sys, r)?),
    }
}

fn check_index(n: u32, j: u32) -> Result<()> {
    if n == 0 || j == 0 || j > n {
        return domain(format!("state index j = {j} outside 1..={n}"));
    }
    Ok(())
}

/// Bound states `Ψ_j` and partners `Φ_j` of the pair with parameter `n`,
/// with the Legendre polynomials built once.
#[derive(Debug, Clone)]
pub struct BoundStateSet {
    n: u32,
    legendre: Vec<LegendreFunction>,
    alpha: Vec<f64>,
}

impl BoundStateSet {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return domain("bound state set needs n >= 1");
        }
        let mut legendre = Vec::new();
        let mut alpha = Vec::new();
        for j in 1..=n {
            legendre.push(LegendreFunction::new(LegendreOrder::new(2 * n, 2 * j - 1)?));
            alpha.push(bound_state_normalizer(n, j)?);
        }
        Ok(Self { n, legendre, alpha })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `γ_j = 2j - 1`.
    pub fn gamma(&self, j: u32) -> f64 {
        (2 * j - 1) as f64
    }

    /// `E_j = -γ_j²`.
    pub fn energy(&self, j: u32) -> f64 {
        -self.gamma(j).powi(2)
    }

    pub fn alpha(&self, j: u32) -> f64 {
        self.alpha[j as usize - 1]
    }

    fn parts(&self, j: u32) -> Result<(&LegendreFunction, f64, i32)> {
        check_index(self.n, j)?;
        let idx = j as usize - 1;
        Ok((&self.legendre[idx], self.alpha[idx], (2 * j - 1) as i32))
    }

    pub fn psi(&self, j: u32, r: f64) -> Result<f64> {
        let (p, a, _) = self.parts(j)?;
        if !(r >= 0.0 && r.is_finite()) {
            return domain(format!("bound state needs finite r >= 0, got {r}"));
        }
        Ok(a * p.inside_with_root(r.tanh(), 1.0 / r.cosh()))
    }

    pub fn psi_derivative(&self, j: u32, r: f64) -> Result<f64> {
        let (p, a, m) = self.parts(j)?;
        if !(r >= 0.0 && r.is_finite()) {
            return domain(format!("bound state needs finite r >= 0, got {r}"));
        }
        let (t, s) = (r.tanh(), 1.0 / r.cosh());
        let d = p.rodrigues_polynomial();
        // P = -s^m D(t) for odd m
        let body = -(m as f64) * t * d.eval(t) + s * s * d.derivative().eval(t);
        Ok(-a * s.powi(m) * body)
    }

    pub fn phi(&self, j: u32, r: f64) -> Result<f64> {
        let (p, a, _) = self.parts(j)?;
        if !(r > 0.0 && r.is_finite()) {
            return domain(format!("partner state needs finite r > 0, got {r}"));
        }
        Ok(-a * p.outside_with_root(1.0 / r.tanh(), 1.0 / r.sinh()))
    }

    pub fn phi_derivative(&self, j: u32, r: f64) -> Result<f64> {
        let (p, a, m) = self.parts(j)?;
        if !(r > 0.0 && r.is_finite()) {
            return domain(format!("partner state needs finite r > 0, got {r}"));
        }
        let (y, c) = (1.0 / r.tanh(), 1.0 / r.sinh());
        let d = p.rodrigues_polynomial();
        // even degree: P_out = c^m D(y), with y' = -c², c' = -c y
        let body = -(m as f64) * y * d.eval(y) - c * c * d.derivative().eval(y);
        Ok(-a * c.powi(m) * body)
    }

    /// `Ψ_j` at a complex coordinate, continued analytically from the real
    /// axis through `tanh` and `sech`.
    pub fn psi_complex(&self, j: u32, x: Complex64) -> Result<Complex64> {
        let (p, a, _) = self.parts(j)?;
        let cosh = x.cosh();
        if cosh.norm() == 0.0 {
            return domain(format!("cosh vanishes at {x}"));
        }
        Ok(p.complex_with_root(x.tanh(), cosh.inv()) * a)
    }
}

pub fn bound_state(n: u32, j: u32, r: f64) -> Result<f64> {
    check_index(n, j)?;
    BoundStateSet::new(n)?.psi(j, r)
}

pub fn partner_state(n: u32, j: u32, r: f64) -> Result<f64> {
    check_index(n, j)?;
    BoundStateSet::new(n)?.phi(j, r)
}

/// `4 Σ_{m=1}^{N} m² (N-m)!/(N+m)! (P_N^m(z))²`, equal to `N(N+1)(1-z²)`.
pub fn legendre_square_sum(big_n: u32, z: f64) -> Result<f64> {
    if big_n == 0 {
        return domain("square sum needs N >= 1");
    }
    let mut sum = 0.0;
    for m in 1..=big_n {
        let p = LegendreFunction::new(LegendreOrder::new(big_n, m)?).inside(z)?;
        let w = full_line_normalizer(big_n, m)?;
        sum += m as f64 * (w * p).powi(2);
    }
    Ok(4.0 * sum)
}

/// `-4 Σ_j γ_j Ψ_j²(x)` over the full-line normalised bound states of
/// `-N(N+1) sech² x`, with `γ_j = j` and `Ψ_j ∝ P_N^j(tanh x)`.
pub fn eigenstate_sum_potential(big_n: u32, x: f64) -> Result<f64> {
    if big_n == 0 {
        return domain("eigenstate sum needs N >= 1");
    }
    if !x.is_finite() {
        return domain(format!("eigenstate sum needs finite x, got {x}"));
    }
    let (t, s) = (x.tanh(), 1.0 / x.cosh());
    let mut sum = 0.0;
    for m in 1..=big_n {
        let p = LegendreFunction::new(LegendreOrder::new(big_n, m)?).inside_with_root(t, s);
        let psi = full_line_normalizer(big_n, m)? * p;
        sum += m as f64 * psi * psi;
    }
    Ok(-4.0 * sum)
}

/// Comparison of `Φ_j(r)` with `Ψ_j(r + iπ/2)` over a set of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexShiftFit {
    pub radii: Vec<f64>,
    /// `|Φ_j(r)| / |Ψ_j(r + iπ/2)|` at each radius.
    pub modulus_ratios: Vec<f64>,
    /// Unit phase `u` minimising the spread of `Φ_j / Ψ_j(r + iπ/2) - u`.
    pub fitted_phase: Complex64,
    pub max_modulus_error: f64,
    /// Largest distance of a pointwise unit phase from `fitted_phase`.
    pub max_phase_deviation: f64,
}

pub fn complex_shift_check(n: u32, j: u32, radii: &[f64]) -> Result<ComplexShiftFit> {
    let set = BoundStateSet::new(n)?;
    check_index(n, j)?;
    if radii.is_empty() {
        return domain("complex shift check needs at least one radius");
    }
    let mut ratios = Vec::with_capacity(radii.len());
    let mut phases = Vec::with_capacity(radii.len());
    for &r in radii {
        let phi = set.phi(j, r)?;
        let shifted = set.psi_complex(j, Complex64::new(r, FRAC_PI_2))?;
        let q = Complex64::new(phi, 0.0) / shifted;
        ratios.push(q.norm());
        phases.push(q / q.norm());
    }
    let mean: Complex64 = phases.iter().sum::<Complex64>() / phases.len() as f64;
    let fitted_phase = mean / mean.norm();
    let max_phase_deviation = phases
        .iter()
        .map(|u| (u - fitted_phase).norm())
        .fold(0.0, f64::max);
    let max_modulus_error = ratios.iter().map(|q| (q - 1.0).abs()).fold(0.0, f64::max);
    Ok(ComplexShiftFit {
        radii: radii.to_vec(),
        modulus_ratios: ratios,
        fitted_phase,
        max_modulus_error,
        max_phase_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, numerov_integrate, second_derivative, GridSpec, QuadratureSpec};
    use proptest::prelude::*;

    fn sech(r: f64) -> f64 {
        1.0 / r.cosh()
    }

    #[test]
    fn potential_values() {
        let deep = PotentialModel::DeepSech2 { n: 1 };
        assert_eq!(deep.eval(0.0).unwrap(), -6.0);
        let sing = PotentialModel::SingularCosech2 { n: 1 };
        assert!(sing.eval(0.0).is_err());
        let r = 1e-3;
        assert!((sing.eval(r).unwrap() * r * r / 6.0 - 1.0).abs() < 1e-6);
        let det = PotentialModel::DeterminantBuilt(DetSystem::deep(1).unwrap());
        assert!((det.eval(1.0).unwrap() + 6.0 * sech(1.0).powi(2)).abs() < 1e-10);
        assert_eq!(PotentialModel::Free.eval(3.0).unwrap(), 0.0);
        assert_eq!(deep.bound_state_count(), 1);
        assert_eq!(det.bound_state_count(), 1);
        assert!(sing.is_singular());
        assert!(PotentialModel::DeterminantBuilt(DetSystem::singular(2).unwrap()).is_singular());
    }

    #[test]
    fn first_pair_closed_forms() {
        for &r in &[0.1, 0.7, 2.0, 6.0] {
            let psi = bound_state(1, 1, r).unwrap();
            assert!((psi + 3f64.sqrt() * r.tanh() * sech(r)).abs() < 1e-14);
            let phi = partner_state(1, 1, r).unwrap();
            let want = -3f64.sqrt() / r.tanh() / r.sinh();
            assert!((phi - want).abs() < 1e-13 * want.abs());
        }
        assert!(bound_state(2, 3, 1.0).is_err());
        assert!(partner_state(2, 1, 0.0).is_err());
    }

    #[test]
    fn orthonormal_on_half_line() {
        let spec = QuadratureSpec::default();
        for n in 1..=5 {
            let set = BoundStateSet::new(n).unwrap();
            for j in 1..=n {
                for k in j..=n {
                    let v = integrate(
                        |r| set.psi(j, r).unwrap() * set.psi(k, r).unwrap(),
                        0.0,
                        f64::INFINITY,
                        &spec,
                    )
                    .unwrap();
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-8, "n={n} j={j} k={k}: {v}");
                }
            }
        }
    }

    #[test]
    fn numerov_reproduces_bound_states() {
        let grid = GridSpec::new(0.0, 4.0, 1e-3).unwrap();
        for n in 1..=3 {
            let set = BoundStateSet::new(n).unwrap();
            let v = PotentialModel::DeepSech2 { n };
            for j in 1..=n {
                let e = set.energy(j);
                let y1 = set.psi(j, grid.step).unwrap();
                let y = numerov_integrate(|r| v.eval(r).unwrap() - e, &grid, 0.0, y1).unwrap();
                for (r, yv) in grid.nodes().zip(&y) {
                    assert!((yv - set.psi(j, r).unwrap()).abs() < 1e-6, "n={n} j={j} r={r}");
                }
            }
        }
    }

    #[test]
    fn partners_solve_singular_equation() {
        let h = 1e-3;
        for n in 1..=3 {
            let set = BoundStateSet::new(n).unwrap();
            let v = PotentialModel::SingularCosech2 { n };
            for j in 1..=n {
                for i in 0..=38 {
                    let r = 0.5 + 0.25 * i as f64;
                    let phi = set.phi(j, r).unwrap();
                    let d2 = second_derivative(|x| set.phi(j, x).unwrap(), r, h);
                    let res = d2 - (v.eval(r).unwrap() - set.energy(j)) * phi;
                    assert!(res.abs() <= 1e-6 * phi.abs(), "n={n} j={j} r={r}: {res}");
                }
            }
        }
    }

    #[test]
    fn analytic_derivatives() {
        let set = BoundStateSet::new(3).unwrap();
        for j in 1..=3 {
            for &r in &[0.3, 1.1, 3.5] {
                let fd = crate::numerics::derivative(|x| set.psi(j, x).unwrap(), r, 1e-3);
                assert!((set.psi_derivative(j, r).unwrap() - fd).abs() < 1e-9);
                let fd = crate::numerics::derivative(|x| set.phi(j, x).unwrap(), r, 1e-4);
                let an = set.phi_derivative(j, r).unwrap();
                assert!((an - fd).abs() < 1e-7 * an.abs().max(1.0), "j={j} r={r}");
            }
        }
    }

    #[test]
    fn partner_tends_to_bound_state() {
        for n in 1..=4 {
            let set = BoundStateSet::new(n).unwrap();
            for j in 1..=n {
                let r = 18.0;
                let q = set.phi(j, r).unwrap() / set.psi(j, r).unwrap();
                assert!((q - 1.0).abs() < 1e-10, "n={n} j={j}: {q}");
            }
        }
    }

    #[test]
    fn square_sum_identity() {
        for big_n in 1..=10 {
            for i in 0..200 {
                let z = -0.995 + 1.99 * i as f64 / 199.0;
                let lhs = (big_n * (big_n + 1)) as f64 * (1.0 - z * z);
                let rhs = legendre_square_sum(big_n, z).unwrap();
                assert!((lhs - rhs).abs() < 1e-9, "N={big_n} z={z}");
            }
        }
        // N = 2 term by term
        let z = 0.37f64;
        let p21 = -3.0 * z * (1.0 - z * z).sqrt();
        let p22 = 3.0 * (1.0 - z * z);
        let rhs = 4.0 * (1.0 * 1.0 / 6.0 * p21 * p21 + 4.0 * 1.0 / 24.0 * p22 * p22);
        assert!((6.0 * (1.0 - z * z) - rhs).abs() < 1e-14);
        assert!((legendre_square_sum(2, z).unwrap() - rhs).abs() < 1e-13);
    }

    #[test]
    fn eigenstate_sum_is_the_potential() {
        for big_n in 1..=8 {
            for &x in &[-3.0, -0.4, 0.0, 0.9, 5.0] {
                let v = eigenstate_sum_potential(big_n, x).unwrap();
                let want = -((big_n * (big_n + 1)) as f64) * sech(x).powi(2);
                assert!((v - want).abs() < 1e-10, "N={big_n} x={x}");
            }
        }
        let z = 0.3f64;
        let x = z.atanh();
        let v = eigenstate_sum_potential(5, x).unwrap();
        assert!((v + 30.0 * 0.91).abs() < 1e-10);
    }

    #[test]
    fn complex_shift_first_pair_phase_is_i() {
        let radii: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
        let fit = complex_shift_check(1, 1, &radii).unwrap();
        assert!(fit.max_modulus_error < 1e-8);
        assert!((fit.fitted_phase - Complex64::new(0.0, 1.0)).norm() < 1e-10);
        for n in 1..=3 {
            for j in 1..=n {
                let fit = complex_shift_check(n, j, &radii).unwrap();
                assert!(fit.max_modulus_error < 1e-8, "n={n} j={j}");
                assert!(fit.max_phase_deviation < 1e-8, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn shifted_state_against_principal_branch() {
        // just inside the strip the continued tanh stays off the cut
        let set = BoundStateSet::new(2).unwrap();
        let x = Complex64::new(0.8, 1.2);
        let p = LegendreFunction::new(LegendreOrder::new(4, 3).unwrap());
        let principal = p.complex(x.tanh()).unwrap() * set.alpha(2);
        let along_path = set.psi_complex(2, x).unwrap();
        assert!((principal - along_path).norm() < 1e-12 * along_path.norm());
    }

    proptest! {
        #[test]
        fn bound_states_vanish_at_origin(n in 1u32..7, j in 1u32..7) {
            prop_assume!(j <= n);
            prop_assert_eq!(bound_state(n, j, 0.0).unwrap(), 0.0);
        }

        #[test]
        fn pair_potentials_have_fixed_sign(n in 1u32..6, r in 0.01f64..20.0) {
            let deep = PotentialModel::DeepSech2 { n }.eval(r).unwrap();
            let singular = PotentialModel::SingularCosech2 { n }.eval(r).unwrap();
            prop_assert!(deep < 0.0);
            prop_assert!(singular > 0.0);
        }
    }
}
