//! Five-point central finite differences.

use crate::error::{domain, Result};

pub fn derivative(f: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
    (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h)
}

pub fn second_derivative(f: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
    (-f(r - 2.0 * h) + 16.0 * f(r - h) - 30.0 * f(r) + 16.0 * f(r + h) - f(r + 2.0 * h))
        / (12.0 * h * h)
}

fn log_stencil(f: &impl Fn(f64) -> f64, r: f64, h: f64) -> Result<[f64; 5]> {
    let mut out = [0.0; 5];
    for (i, slot) in out.iter_mut().enumerate() {
        let x = r + (i as f64 - 2.0) * h;
        let v = f(x);
        if !(v > 0.0) {
            return domain(format!("log stencil needs f > 0, got f({x}) = {v}"));
        }
        *slot = v.ln();
    }
    Ok(out)
}

/// `d/dr ln f` by the five-point rule.
pub fn log_derivative(f: impl Fn(f64) -> f64, r: f64, h: f64) -> Result<f64> {
    let l = log_stencil(&f, r, h)?;
    Ok((l[0] - 8.0 * l[1] + 8.0 * l[3] - l[4]) / (12.0 * h))
}

/// `d²/dr² ln f` by the five-point rule, error `O(h⁴)`.
pub fn second_log_derivative(f: impl Fn(f64) -> f64, r: f64, h: f64) -> Result<f64> {
    let l = log_stencil(&f, r, h)?;
    Ok((-l[0] + 16.0 * l[1] - 30.0 * l[2] + 16.0 * l[3] - l[4]) / (12.0 * h * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_families() {
        let x = 0.7f64;
        let v = second_log_derivative(|x| x.cosh().powi(3), x, 1e-3).unwrap();
        assert!((v - 3.0 / x.cosh().powi(2)).abs() < 1e-8);
        for &x in &[-2.0, 0.0, 1.3] {
            let v = second_log_derivative(|x: f64| (x * x).exp(), x, 1e-3).unwrap();
            assert!((v - 2.0).abs() < 1e-7);
        }
        let v = second_log_derivative(|x| 2.0 * x.cosh().powi(3), 1.1, 1e-3).unwrap();
        assert!((v - 3.0 / 1.1f64.cosh().powi(2)).abs() < 1e-7);
        let d = log_derivative(|x| x.cosh().powi(3), x, 1e-3).unwrap();
        assert!((d - 3.0 * x.tanh()).abs() < 1e-9);
        assert!((derivative(f64::sin, 0.4, 1e-3) - 0.4f64.cos()).abs() < 1e-12);
        assert!((second_derivative(f64::sin, 0.4, 1e-3) + 0.4f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(second_log_derivative(|x| x, 0.001, 1e-3).is_err());
        assert!(log_derivative(|x: f64| x.sin(), 0.0, 1e-3).is_err());
    }
}
