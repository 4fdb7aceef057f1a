//! Browser bindings for the `susyqm` demo page.
//!
//! Every export returns a flat `Float64Array` of rows; the page knows the
//! row width from the arguments it passed.

use susyqm::potentials::{BoundStateSet, PotentialModel};
use susyqm::scattering::{log_grid, PhaseShiftCurve};
use susyqm::soliton::{log_det_second_derivative, DetSystem};
use susyqm::{Error, Result};
use wasm_bindgen::prelude::*;

const MAX_N: u32 = 4;
const MAX_POINTS: usize = 4000;

fn check_args(n: u32, points: usize) -> Result<()> {
    if n == 0 || n > MAX_N {
        return Err(Error::Config(format!("n must be in 1..={MAX_N}, got {n}")));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(Error::Config(format!("points must be in 2..={MAX_POINTS}, got {points}")));
    }
    Ok(())
}

fn radii(r_min: f64, r_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(r_max > r_min && r_max.is_finite()) {
        return Err(Error::Config(format!("r_max must exceed {r_min}, got {r_max}")));
    }
    Ok((0..points)
        .map(|i| r_min + (r_max - r_min) * i as f64 / (points - 1) as f64)
        .collect())
}

/// Rows `r, V_d, V_s, V_det` with `V_s` clipped at `clip` for plotting.
pub fn potential_rows(n: u32, r_max: f64, points: usize, clip: f64) -> Result<Vec<f64>> {
    check_args(n, points)?;
    let deep = PotentialModel::DeepSech2 { n };
    let sing = PotentialModel::SingularCosech2 { n };
    let sys = DetSystem::deep(n)?;
    let mut out = Vec::with_capacity(4 * points);
    for r in radii(0.02, r_max, points)? {
        out.push(r);
        out.push(deep.eval(r)?);
        out.push(sing.eval(r)?.min(clip));
        out.push(-2.0 * log_det_second_derivative(&sys, r)?);
    }
    Ok(out)
}

/// Rows `r, Ψ_1..Ψ_n, Φ_1..Φ_n`, with partners clipped to `±clip`.
pub fn bound_state_rows(n: u32, r_max: f64, points: usize, clip: f64) -> Result<Vec<f64>> {
    check_args(n, points)?;
    let set = BoundStateSet::new(n)?;
    let mut out = Vec::with_capacity((2 * n as usize + 1) * points);
    for r in radii(0.02, r_max, points)? {
        out.push(r);
        for j in 1..=n {
            out.push(set.psi(j, r)?);
        }
        for j in 1..=n {
            out.push(set.phi(j, r)?.clamp(-clip, clip));
        }
    }
    Ok(out)
}

/// Rows `κ, δ_deep, δ_singular` from the determinant states on a log grid,
/// each lifted to a continuous branch.
pub fn phase_shift_rows(n: u32, kappa_max: f64, points: usize) -> Result<Vec<f64>> {
    check_args(n, points)?;
    let kappas = log_grid(1e-3, kappa_max, points)?;
    let deep = PhaseShiftCurve::from_determinant(&DetSystem::deep(n)?, &kappas, n)?;
    let sing = PhaseShiftCurve::from_determinant(&DetSystem::singular(n)?, &kappas, 0)?;
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        out.extend([kappas[i], deep.deltas[i], sing.deltas[i]]);
    }
    Ok(out)
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn potential_curves(n: u32, r_max: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    potential_rows(n, r_max, points, 40.0).map_err(js)
}

#[wasm_bindgen]
pub fn bound_states(n: u32, r_max: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    bound_state_rows(n, r_max, points, 4.0).map_err(js)
}

#[wasm_bindgen]
pub fn phase_shifts(n: u32, kappa_max: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    phase_shift_rows(n, kappa_max, points).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn potential_rows_agree() {
        let rows = potential_rows(2, 6.0, 50, 40.0).unwrap();
        assert_eq!(rows.len(), 200);
        for row in rows.chunks(4) {
            assert!((row[1] - row[3]).abs() < 1e-6);
            assert!(row[2] <= 40.0);
        }
    }

    #[test]
    fn bound_state_row_width() {
        let rows = bound_state_rows(3, 5.0, 10, 4.0).unwrap();
        assert_eq!(rows.len(), 7 * 10);
        assert!(rows.chunks(7).all(|r| r[4..].iter().all(|v| v.abs() <= 4.0)));
    }

    #[test]
    fn phase_rows_differ_by_n_pi() {
        let rows = phase_shift_rows(2, 5.0, 120).unwrap();
        for row in rows.chunks(3) {
            assert!((row[1] - row[2] - 2.0 * PI).abs() < 1e-6);
        }
        assert!((rows[1] / PI - 2.0).abs() < 1e-2);
    }

    #[test]
    fn bad_arguments() {
        assert!(potential_rows(0, 5.0, 10, 1.0).is_err());
        assert!(bound_state_rows(2, 5.0, 1, 1.0).is_err());
        assert!(phase_shift_rows(2, 1e-4, 10).is_err());
    }
}
