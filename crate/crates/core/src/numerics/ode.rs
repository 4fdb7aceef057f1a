//! Numerov integration of `y'' = q(r) y` on a uniform grid.

use crate::error::{Error, Result};

const OVERFLOW: f64 = 1e300;

/// Uniform radial grid `r_min, r_min + step, ..., r_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn new(r_min: f64, r_max: f64, step: f64) -> Result<Self> {
        let grid = Self { r_min, r_max, step };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_min >= 0.0 && self.r_min < self.r_max && self.step > 0.0) {
            return Err(Error::Config(format!(
                "grid needs 0 <= r_min < r_max and step > 0, got {self:?}"
            )));
        }
        let steps = (self.r_max - self.r_min) / self.step;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Config(format!(
                "(r_max - r_min) / step = {steps} is not an integer"
            )));
        }
        if steps.round() < 2.0 {
            return Err(Error::Config("grid needs at least three nodes".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.r_max - self.r_min) / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        self.r_min + i as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.node(i))
    }
}

/// Solves `y'' = q(r) y` from the two starting values `y(r_min) = y0`,
/// `y(r_min + h) = y1`, returning samples at every grid node.
pub fn numerov_integrate(
    q: impl Fn(f64) -> f64,
    grid: &GridSpec,
    y0: f64,
    y1: f64,
) -> Result<Vec<f64>> {
    grid.validate()?;
    let n = grid.len();
    let h2 = grid.step * grid.step / 12.0;
    let mut y = Vec::with_capacity(n);
    y.push(y0);
    y.push(y1);
    let mut q_prev = q(grid.node(0));
    let mut q_cur = q(grid.node(1));
    for i in 1..(n - 1) {
        let q_next = q(grid.node(i + 1));
        let next = (2.0 * (1.0 + 5.0 * h2 * q_cur) * y[i] - (1.0 - h2 * q_prev) * y[i - 1])
            / (1.0 - h2 * q_next);
        if !(next.abs() <= OVERFLOW) {
            return Err(Error::SolutionOverflow { index: i + 1 });
        }
        y.push(next);
        q_prev = q_cur;
        q_cur = q_next;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_particle() {
        for &k in &[0.5, 1.0, 2.0, 5.0] {
            let grid = GridSpec::new(0.0, 20.0, 1e-3).unwrap();
            let y = numerov_integrate(|_| -k * k, &grid, 0.0, (k * grid.step).sin()).unwrap();
            let err = grid
                .nodes()
                .zip(&y)
                .map(|(r, v)| (v - (k * r).sin()).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-7, "kappa={k}: {err}");
        }
    }

    #[test]
    fn growing_solution() {
        let grid = GridSpec::new(0.0, 10.0, 1e-3).unwrap();
        let y = numerov_integrate(|_| 1.0, &grid, 0.0, grid.step.sinh()).unwrap();
        let last = *y.last().unwrap();
        assert!((last - 10f64.sinh()).abs() <= 1e-8 * 10f64.sinh());
    }

    #[test]
    fn sech_bound_state_shape() {
        // y = sech r solves y'' = (1 - 2 sech² r) y
        let grid = GridSpec::new(0.0, 10.0, 1e-3).unwrap();
        let sech = |r: f64| 1.0 / r.cosh();
        let y = numerov_integrate(|r| 1.0 - 2.0 * sech(r).powi(2), &grid, 1.0, sech(grid.step)).unwrap();
        for (r, v) in grid.nodes().zip(&y).step_by(500).take(12) {
            assert!((v - sech(r)).abs() < 1e-8, "r={r}");
        }
    }

    #[test]
    fn overflow_and_grid_errors() {
        let grid = GridSpec::new(0.0, 1000.0, 0.01).unwrap();
        assert!(matches!(
            numerov_integrate(|_| 1.0, &grid, 0.0, 0.01),
            Err(Error::SolutionOverflow { .. })
        ));
        assert!(GridSpec::new(1.0, 1.0, 0.1).is_err());
        assert!(GridSpec::new(0.0, 1.0, 0.3).is_err());
        assert!(GridSpec::new(0.0, 1.0, -0.1).is_err());
        assert_eq!(GridSpec::new(0.01, 25.0, 1e-3).unwrap().len(), 24991);
    }
}
