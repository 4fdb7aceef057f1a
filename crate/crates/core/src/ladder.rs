//! Supersymmetric ladder of `V_N(x) = -N(N+1) sech² x` on the full line.
//!
//! Removing the ground state `ξ_N ∝ cosh^{-N} x` maps `V_N` to `V_{N-1}`;
//! after `N` steps the free particle remains and the accumulated ground states
//! multiply to `cosh^{-N(N+1)/2} x`. Iterating the intertwining operators
//! gives every eigenstate as
//!
//! ```text
//! Ψ_{N-j} ∝ cosh^N x (d/dx sech x ·)^j sech^{2N-2j} x
//! ```
//!
//! which is evaluated here symbolically and compared with `P_N^{N-j}(tanh x)`.

use crate::error::{domain, Error, Result};
use crate::numerics::second_log_derivative;
use crate::special_functions::{double_factorial, factorial_f64, LegendreFunction, LegendreOrder};
use std::collections::BTreeMap;

/// One step `V_k → V_{k-1}` of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rung {
    pub level: u32,
    /// `k(k+1)` in `V_k = -k(k+1) sech² x`.
    pub strength: u32,
    /// Strength left after removing `ξ_k = cosh^{-k} x`.
    pub partner_strength: u32,
    /// `ξ_k ∝ cosh^{-power} x`.
    pub ground_state_power: u32,
}

impl Rung {
    pub fn ground_energy(&self) -> f64 {
        -(self.level as f64).powi(2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderChain {
    pub big_n: u32,
    /// Rungs for `k = N, N-1, ..., 1`.
    pub rungs: Vec<Rung>,
    /// `∏ ξ_k = cosh^{-xi_power} x`.
    pub xi_power: u32,
}

pub fn ladder_descend(big_n: u32) -> Result<LadderChain> {
    if big_n == 0 {
        return domain("ladder needs N >= 1");
    }
    let mut rungs = Vec::with_capacity(big_n as usize);
    let mut strength = big_n * (big_n + 1);
    let mut xi_power = 0;
    for k in (1..=big_n).rev() {
        if strength != k * (k + 1) {
            return Err(Error::Mismatch(format!(
                "rung {k} carries strength {strength}, expected {}",
                k * (k + 1)
            )));
        }
        // -2 d²/dx² ln cosh^{-k} x = +2k sech² x
        let partner_strength = strength - 2 * k;
        rungs.push(Rung {
            level: k,
            strength,
            partner_strength,
            ground_state_power: k,
        });
        xi_power += k;
        strength = partner_strength;
    }
    if strength != 0 {
        return Err(Error::Mismatch(format!("ladder ends at strength {strength}, not 0")));
    }
    Ok(LadderChain {
        big_n,
        rungs,
        xi_power,
    })
}

impl LadderChain {
    /// `∏_k ξ_k(x)` with unit-normalised `ξ_k = cosh^{-k} x`.
    pub fn xi(&self, x: f64) -> f64 {
        let s = 1.0 / x.cosh();
        self.rungs.iter().map(|r| s.powi(r.ground_state_power as i32)).product()
    }

    /// Largest deviation, over `xs`, of each rung's partner potential
    /// `V_k - 2 (ln ξ_k)''` (by finite differences) from `V_{k-1}`, and of
    /// the ξ product from `cosh^{-N(N+1)/2} x`.
    pub fn max_numeric_error(&self, xs: &[f64], h: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        for &x in xs {
            let s2 = 1.0 / x.cosh().powi(2);
            for rung in &self.rungs {
                let p = rung.ground_state_power as i32;
                let d2 = second_log_derivative(|y| y.cosh().powi(-p), x, h)?;
                let partner = -(rung.strength as f64) * s2 - 2.0 * d2;
                let want = -(rung.partner_strength as f64) * s2;
                worst = worst.max((partner - want).abs());
            }
            let closed = x.cosh().powi(-(self.xi_power as i32));
            worst = worst.max((self.xi(x) - closed).abs());
        }
        Ok(worst)
    }
}

/// `Σ c · tanh^a x · sech^b x`, keyed by `(a, b)`, with exact integer
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperbolicForm {
    terms: BTreeMap<(u32, u32), i128>,
}

impl HyperbolicForm {
    pub fn sech_power(b: u32) -> Self {
        Self {
            terms: BTreeMap::from([((0, b), 1)]),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, i128)> + '_ {
        self.terms.iter().map(|(&(a, b), &c)| (a, b, c))
    }

    fn add(&mut self, key: (u32, u32), c: i128) -> Result<()> {
        let slot = self.terms.entry(key).or_insert(0);
        *slot = slot
            .checked_add(c)
            .ok_or_else(|| Error::Overflow("hyperbolic form coefficient".into()))?;
        if *slot == 0 {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn times_sech(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(&(a, b), &c)| ((a, b + 1), c)).collect(),
        }
    }

    /// `d/dx`, using `(tanh)' = sech²` and `(sech)' = -tanh sech`.
    pub fn derivative(&self) -> Result<Self> {
        let mut out = Self {
            terms: BTreeMap::new(),
        };
        for (&(a, b), &c) in &self.terms {
            if a > 0 {
                out.add((a - 1, b + 2), c * a as i128)?;
            }
            if b > 0 {
                out.add((a + 1, b), -c * b as i128)?;
            }
        }
        Ok(out)
    }

    /// Divides by `sech^k`, failing if a term would get a negative power.
    pub fn divide_sech(&self, k: u32) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (&(a, b), &c) in &self.terms {
            if b < k {
                return domain(format!("cannot divide sech^{b} by sech^{k}"));
            }
            terms.insert((a, b - k), c);
        }
        Ok(Self { terms })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (t, s) = (x.tanh(), 1.0 / x.cosh());
        self.terms
            .iter()
            .map(|(&(a, b), &c)| c as f64 * t.powi(a as i32) * s.powi(b as i32))
            .sum()
    }
}

fn check_ladder_index(big_n: u32, j: u32) -> Result<()> {
    if big_n == 0 || j >= big_n {
        return domain(format!("ladder eigenstate needs 0 <= j < N, got N = {big_n}, j = {j}"));
    }
    Ok(())
}

/// `cosh^N x (d/dx sech x ·)^j sech^{2N-2j} x` as a hyperbolic form.
pub fn ladder_form(big_n: u32, j: u32) -> Result<HyperbolicForm> {
    check_ladder_index(big_n, j)?;
    let mut form = HyperbolicForm::sech_power(2 * (big_n - j));
    for _ in 0..j {
        form = form.times_sech().derivative()?;
    }
    form.divide_sech(big_n)
}

/// Normalised `Ψ_{N-j}` from the iterated intertwining operators:
/// `(2N-2j-1)!! sqrt((N-j) / ((2N-j)! j!))` times [`ladder_form`].
pub fn derivative_representation(big_n: u32, j: u32, x: f64) -> Result<f64> {
    let form = ladder_form(big_n, j)?;
    let df = double_factorial(2 * (big_n - j) as i64 - 1)? as f64;
    let norm = ((big_n - j) as f64 / (factorial_f64(2 * big_n - j) * factorial_f64(j))).sqrt();
    Ok(df * norm * form.eval(x))
}

/// Normalised `Ψ_{N-j} = sqrt(j! (N-j) / (2N-j)!) P_N^{N-j}(tanh x)`.
pub fn legendre_representation(big_n: u32, j: u32, x: f64) -> Result<f64> {
    check_ladder_index(big_n, j)?;
    let p = LegendreFunction::new(LegendreOrder::new(big_n, big_n - j)?);
    let norm = (factorial_f64(j) * (big_n - j) as f64 / factorial_f64(2 * big_n - j)).sqrt();
    Ok(norm * p.inside_with_root(x.tanh(), 1.0 / x.cosh()))
}

/// Agreement threshold between the two representations.
pub const REPRESENTATION_TOL: f64 = 1e-8;

/// Evaluates `Ψ_{N-j}(x)` both ways and returns the Legendre value, or a
/// mismatch error if they differ by more than [`REPRESENTATION_TOL`].
pub fn appendix_eigenstate(big_n: u32, j: u32, x: f64) -> Result<f64> {
    let legendre = legendre_representation(big_n, j, x)?;
    let derivative = derivative_representation(big_n, j, x)?;
    if (legendre - derivative).abs() > REPRESENTATION_TOL * legendre.abs().max(1.0) {
        return Err(Error::Mismatch(format!(
            "N = {big_n}, j = {j}, x = {x}: Legendre {legendre} vs derivative {derivative}"
        )));
    }
    Ok(legendre)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadratureSpec};
    use crate::special_functions::ground_state_normalizer;
    use proptest::prelude::*;

    #[test]
    fn strengths_and_xi() {
        let one = ladder_descend(1).unwrap();
        assert_eq!(one.rungs.len(), 1);
        assert_eq!(one.rungs[0].partner_strength, 0);
        let three = ladder_descend(3).unwrap();
        let s: Vec<u32> = three.rungs.iter().map(|r| r.strength).collect();
        assert_eq!(s, vec![12, 6, 2]);
        assert_eq!(three.rungs.last().unwrap().partner_strength, 0);
        assert_eq!(ladder_descend(2).unwrap().xi_power, 3);
        assert_eq!(three.rungs[0].ground_energy(), -9.0);
        assert!(ladder_descend(0).is_err());
    }

    #[test]
    fn numeric_rungs() {
        let xs: Vec<f64> = (0..21).map(|i| -4.0 + 0.4 * i as f64).collect();
        for big_n in 1..=8 {
            let chain = ladder_descend(big_n).unwrap();
            assert!(chain.max_numeric_error(&xs, 1e-3).unwrap() < 1e-7, "N={big_n}");
        }
    }

    #[test]
    fn first_form_by_hand() {
        let form = ladder_form(3, 1).unwrap();
        let terms: Vec<_> = form.terms().collect();
        assert_eq!(terms, vec![(1, 2, -5)]);
        assert_eq!(ladder_form(4, 0).unwrap().terms().collect::<Vec<_>>(), vec![(0, 4, 1)]);
        assert!(ladder_form(3, 3).is_err());
    }

    #[test]
    fn representations_agree() {
        for big_n in 1..=8 {
            for j in 0..big_n {
                for i in 0..50 {
                    let x = -5.0 + 10.0 * i as f64 / 49.0;
                    appendix_eigenstate(big_n, j, x).unwrap();
                }
            }
        }
    }

    #[test]
    fn ground_state_matches_normaliser() {
        for big_n in 1..=8 {
            let a = ground_state_normalizer(big_n).unwrap();
            for &x in &[-1.0, 0.0, 0.6, 3.0] {
                let v = appendix_eigenstate(big_n, 0, x).unwrap();
                assert!((v - a * x.cosh().powi(-(big_n as i32))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_line_normalisation() {
        let spec = QuadratureSpec::default();
        for big_n in 1..=5 {
            for j in 0..big_n {
                let half =
                    integrate(|x| legendre_representation(big_n, j, x).unwrap().powi(2), 0.0, f64::INFINITY, &spec)
                        .unwrap();
                assert!((2.0 * half - 1.0).abs() < 1e-9, "N={big_n} j={j}");
            }
        }
    }

    proptest! {
        #[test]
        fn parity(big_n in 1u32..8, j in 0u32..8, x in 0.0f64..4.0) {
            prop_assume!(j < big_n);
            let a = derivative_representation(big_n, j, x).unwrap();
            let b = derivative_representation(big_n, j, -x).unwrap();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((a - sign * b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
