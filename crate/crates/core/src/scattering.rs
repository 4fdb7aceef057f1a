//! Scattering states at energy `κ² > 0` and their phase shifts.
//!
//! Three independent routes are provided:
//!
//! - the closed form `δ = nπ - Σ_{j=1}^{2n} arctan(κ/j)` (and `-Σ arctan(κ/j)`
//!   for the singular partner);
//! - the bordered determinant `det D / det M`, matched to `sin(κr + δ)` far
//!   outside the potential;
//! - Numerov integration from the origin, with the phase read off a
//!   continuously tracked Prüfer angle so that the branch of `δ` is fixed by
//!   the integration itself.
//!
//! Determinant phases are only defined modulo `π`; [`lift_by_continuity`]
//! fixes the branch along a grid of momenta.

use crate::error::{domain, Error, Result};
use crate::numerics::linalg::lu_det;
use crate::numerics::{integrate, numerov_integrate, GridSpec, QuadratureSpec};
use crate::potentials::{pair_strength, PotentialModel};
use crate::soliton::{bordered, build_m, DetSystem, Shift};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Default matching radius for asymptotic phase extraction.
pub const R_MATCH: f64 = 25.0;
/// Offset of the secondary matching radius.
pub const SECONDARY_OFFSET: f64 = 5.0;
/// Largest allowed `|V|` at a matching radius.
pub const DECAY_THRESHOLD: f64 = 1e-12;
/// Largest allowed disagreement between the primary and secondary matches.
pub const WINDOW_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    DeterminantRatio,
    Numerov,
    ClosedForm,
}

/// Samples of a regular solution and the phase shift read from them.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSolution {
    pub kappa: f64,
    pub samples: Vec<(f64, f64)>,
    pub delta: f64,
    pub method: Method,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return domain(format!("momentum must be finite and positive, got {kappa}"));
    }
    Ok(())
}

/// Reduces an angle to `(-π/2, π/2]`.
pub fn reduce_mod_pi(x: f64) -> f64 {
    let mut y = x - PI * (x / PI).round();
    if y <= -PI / 2.0 {
        y += PI;
    }
    if y > PI / 2.0 {
        y -= PI;
    }
    y
}

/// The representative of `x + kπ` closest to `target`.
pub fn nearest_branch(x: f64, target: f64) -> f64 {
    x + PI * ((target - x) / PI).round()
}

/// `det D / det M`. Real for the unshifted system; for the shifted system
/// the common phase of the columns cancels and the imaginary part is
/// rounding noise.
pub fn scatter_state_det(sys: &DetSystem, kappa: f64, r: f64) -> Result<Complex64> {
    check_kappa(kappa)?;
    let m = build_m(sys, r).matrix;
    let d = bordered(sys, r, kappa, None);
    let dm = lu_det(&m);
    if dm.norm() == 0.0 {
        return domain(format!("det M vanishes at r = {r}"));
    }
    Ok(lu_det(&d) / dm)
}

/// `d/dr (det D / det M)` from the row-shifted determinants.
pub fn scatter_state_derivative(sys: &DetSystem, kappa: f64, r: f64) -> Result<Complex64> {
    check_kappa(kappa)?;
    let n = sys.size();
    let m = build_m(sys, r).matrix;
    let dm = lu_det(&m);
    if dm.norm() == 0.0 {
        return domain(format!("det M vanishes at r = {r}"));
    }
    let mut m_plus = m.clone();
    m_plus.set_row(n - 1, &sys.scaled_row(n + 1, r));
    let d = lu_det(&bordered(sys, r, kappa, None));
    let d_plus = lu_det(&bordered(sys, r, kappa, Some(n + 2)));
    let psi = d / dm;
    Ok(d_plus / dm - psi * (lu_det(&m_plus) / dm))
}

/// `∏_j (iκ - γ_j)`: the large-`r` limit of the determinant state is
/// `Im(e^{iκr} ∏_j (iκ - γ_j))`.
pub fn asymptotic_coefficient(gammas: &[f64], kappa: f64) -> Complex64 {
    gammas
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, &g| acc * Complex64::new(-g, kappa))
}

pub fn asymptotic_form(gammas: &[f64], kappa: f64, r: f64) -> f64 {
    (Complex64::from_polar(1.0, kappa * r) * asymptotic_coefficient(gammas, kappa)).im
}

/// Amplitude of the determinant state far outside the potential.
pub fn asymptotic_amplitude(gammas: &[f64], kappa: f64) -> f64 {
    asymptotic_coefficient(gammas, kappa).norm()
}

/// `nπ - Σ_{j=1}^{2n} arctan(κ/j)`.
pub fn phase_shift_analytic(n: u32, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if n == 0 {
        return domain("phase shift needs n >= 1");
    }
    Ok(n as f64 * PI + phase_shift_singular_analytic(n, kappa)?)
}

/// `-Σ_{j=1}^{2n} arctan(κ/j)`.
pub fn phase_shift_singular_analytic(n: u32, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if n == 0 {
        return domain("phase shift needs n >= 1");
    }
    Ok(-(1..=2 * n).map(|j| (kappa / j as f64).atan()).sum::<f64>())
}

/// `atan2(κy, y') - κr` reduced to `(-π/2, π/2]`.
pub fn phase_from_value_derivative(kappa: f64, r: f64, y: f64, dy: f64) -> f64 {
    reduce_mod_pi((kappa * y).atan2(dy) - kappa * r)
}

/// Phase shift modulo `π` from uniformly spaced samples, using a five-point
/// derivative at the sample nearest `r_match`.
pub fn extract_phase(samples: &[(f64, f64)], kappa: f64, r_match: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if samples.len() < 5 {
        return Err(Error::MatchingWindow("need at least five samples".into()));
    }
    let h = samples[1].0 - samples[0].0;
    if !(h > 0.0) {
        return Err(Error::MatchingWindow("sample radii must increase".into()));
    }
    let idx = ((r_match - samples[0].0) / h).round();
    if idx < 2.0 || idx as usize + 2 >= samples.len() {
        return Err(Error::MatchingWindow(format!(
            "r_match = {r_match} is not inside the sampled range"
        )));
    }
    let i = idx as usize;
    for w in samples[i - 2..=i + 2].windows(2) {
        if ((w[1].0 - w[0].0) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(Error::MatchingWindow("samples are not uniformly spaced".into()));
        }
    }
    let y = |k: usize| samples[k].1;
    let dy = (y(i - 2) - 8.0 * y(i - 1) + 8.0 * y(i + 1) - y(i + 2)) / (12.0 * h);
    Ok(phase_from_value_derivative(kappa, samples[i].0, y(i), dy))
}

fn check_decay(model: &PotentialModel, r: f64) -> Result<()> {
    let v = match model {
        // exact potential; the trace formula is noisier than the threshold
        PotentialModel::DeterminantBuilt(sys) if sys.gamma.is_closed_form() => {
            let big_n = sys.size() as f64;
            let lam = big_n * (big_n + 1.0);
            match sys.shift {
                Shift::None => lam / r.cosh().powi(2),
                Shift::HalfPi => lam / r.sinh().powi(2),
            }
        }
        _ => model.eval(r)?,
    };
    if v.abs() > DECAY_THRESHOLD {
        return Err(Error::MatchingWindow(format!(
            "|V({r})| = {:e} has not decayed below {DECAY_THRESHOLD:e}",
            v.abs()
        )));
    }
    Ok(())
}

fn check_window(first: f64, second: f64, r: f64) -> Result<()> {
    let diff = reduce_mod_pi(first - second).abs();
    if diff > WINDOW_TOL {
        return Err(Error::MatchingWindow(format!(
            "phase at r = {r} and r = {} differ by {diff:e}",
            r + SECONDARY_OFFSET
        )));
    }
    Ok(())
}

/// Phase shift modulo `π` of the determinant state, matched at `r_match`
/// and confirmed at `r_match + 5`.
pub fn det_phase_shift(sys: &DetSystem, kappa: f64, r_match: f64) -> Result<f64> {
    check_decay(&PotentialModel::DeterminantBuilt(sys.clone()), r_match)?;
    let at = |r: f64| -> Result<f64> {
        let y = scatter_state_det(sys, kappa, r)?.re;
        let dy = scatter_state_derivative(sys, kappa, r)?.re;
        Ok(phase_from_value_derivative(kappa, r, y, dy))
    };
    let first = at(r_match)?;
    check_window(first, at(r_match + SECONDARY_OFFSET)?, r_match)?;
    Ok(first)
}

/// Samples of the determinant state on a grid, with the phase shift modulo
/// `π` matched at `grid.r_max - 5`.
pub fn det_solution(sys: &DetSystem, kappa: f64, grid: &GridSpec) -> Result<ScatteringSolution> {
    grid.validate()?;
    let samples = grid
        .nodes()
        .map(|r| Ok((r, scatter_state_det(sys, kappa, r)?.re)))
        .collect::<Result<Vec<_>>>()?;
    let delta = det_phase_shift(sys, kappa, grid.r_max - SECONDARY_OFFSET)?;
    Ok(ScatteringSolution {
        kappa,
        samples,
        delta,
        method: Method::DeterminantRatio,
    })
}

/// `l` with `λ = l(l+1)` for potentials with a centrifugal-type core.
fn singular_order(model: &PotentialModel) -> Result<Option<u32>> {
    match model {
        PotentialModel::SingularCosech2 { n } => Ok(Some(2 * n)),
        PotentialModel::DeterminantBuilt(sys) if sys.shift == Shift::HalfPi => {
            if !sys.gamma.is_closed_form() {
                return domain("Numerov start for shifted systems needs gamma = [1..N]");
            }
            Ok(Some(sys.size() as u32))
        }
        _ => Ok(None),
    }
}

/// Starting values at the first two grid nodes.
fn start_values(model: &PotentialModel, kappa: f64, grid: &GridSpec) -> Result<(f64, f64)> {
    let h = grid.step;
    match singular_order(model)? {
        None => {
            if grid.r_min != 0.0 {
                return domain("regular potentials integrate from r_min = 0");
            }
            let q0 = model.eval(0.0)? - kappa * kappa;
            Ok((0.0, h + q0 * h.powi(3) / 6.0))
        }
        Some(l) => {
            if !(grid.r_min > 0.0) {
                return domain("singular potentials need r_min > 0");
            }
            let lam = pair_strength_from_order(l);
            let c = -(lam / 3.0 + kappa * kappa) / (4.0 * l as f64 + 6.0);
            let series = |r: f64| r.powi(l as i32 + 1) * (1.0 + c * r * r);
            Ok((series(grid.r_min), series(grid.r_min + h)))
        }
    }
}

fn pair_strength_from_order(l: u32) -> f64 {
    if l.is_multiple_of(2) {
        pair_strength(l / 2)
    } else {
        (l * (l + 1)) as f64
    }
}

/// Integrates the regular solution of `y'' = (V - κ²) y` and reads `δ` from
/// the Prüfer angle at `grid.r_max - 5`, confirmed at `grid.r_max`.
pub fn numerov_solution(model: &PotentialModel, kappa: f64, grid: &GridSpec) -> Result<ScatteringSolution> {
    check_kappa(kappa)?;
    grid.validate()?;
    let r_match = grid.r_max - SECONDARY_OFFSET;
    if r_match <= grid.r_min + 3.0 * grid.step {
        return Err(Error::MatchingWindow(format!(
            "grid ending at {} leaves no room for matching",
            grid.r_max
        )));
    }
    check_decay(model, r_match)?;
    let (y0, y1) = start_values(model, kappa, grid)?;
    let k2 = kappa * kappa;
    let y = numerov_integrate(|r| model.eval(r).map(|v| v - k2).unwrap_or(f64::NAN), grid, y0, y1)?;
    if y.iter().any(|v| !v.is_finite()) {
        return domain("potential could not be evaluated on the whole grid");
    }
    let h = grid.step;
    let last = y.len() - 3;
    let i_match = (((r_match - grid.r_min) / h).round() as usize).min(last);

    // running Prüfer angle with central-difference slopes, used only to pick
    // the branch of the accurate angle
    let mut theta = Vec::with_capacity(y.len());
    let mut prev = 0.0f64;
    for i in 1..=last {
        let slope = (y[i + 1] - y[i - 1]) / (2.0 * h);
        let raw = (kappa * y[i]).atan2(slope);
        let t = raw + 2.0 * PI * ((prev - raw) / (2.0 * PI)).round();
        theta.push(t);
        prev = t;
    }
    let accurate = |i: usize| -> f64 {
        let dy = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
        let raw = (kappa * y[i]).atan2(dy);
        let rough = theta[i - 1];
        raw + 2.0 * PI * ((rough - raw) / (2.0 * PI)).round() - kappa * grid.node(i)
    };
    let delta = accurate(i_match);
    let second = accurate(last);
    if (delta - second).abs() > WINDOW_TOL {
        return Err(Error::MatchingWindow(format!(
            "Numerov phase drifts by {:e} between r = {} and r = {}",
            (delta - second).abs(),
            grid.node(i_match),
            grid.node(last)
        )));
    }
    Ok(ScatteringSolution {
        kappa,
        samples: grid.nodes().zip(y).collect(),
        delta,
        method: Method::Numerov,
    })
}

pub fn numerov_phase_shift(model: &PotentialModel, kappa: f64, grid: &GridSpec) -> Result<f64> {
    Ok(numerov_solution(model, kappa, grid)?.delta)
}

/// Lifts phases known modulo `π` on an increasing momentum grid: the value at
/// the largest momentum is placed on the branch nearest `anchor`, and every
/// smaller momentum takes the branch nearest its right neighbour.
pub fn lift_by_continuity(kappas: &[f64], raw: &[f64], anchor: f64) -> Result<Vec<f64>> {
    if kappas.len() != raw.len() || kappas.is_empty() {
        return domain("lifting needs equally long, non-empty grids");
    }
    if kappas.windows(2).any(|w| w[1] <= w[0]) {
        return domain("momentum grid must be strictly increasing");
    }
    let mut out = vec![0.0; raw.len()];
    let last = raw.len() - 1;
    out[last] = nearest_branch(raw[last], anchor);
    for i in (0..last).rev() {
        out[i] = nearest_branch(raw[i], out[i + 1]);
    }
    Ok(out)
}

/// Phase shifts on a momentum grid with a continuous branch.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftCurve {
    pub kappas: Vec<f64>,
    pub deltas: Vec<f64>,
    pub boundstate_count: u32,
}

impl PhaseShiftCurve {
    /// Determinant phases for `sys` on `kappas`, lifted from the closed form at
    /// the largest momentum.
    pub fn from_determinant(sys: &DetSystem, kappas: &[f64], boundstate_count: u32) -> Result<Self> {
        let raw = kappas
            .iter()
            .map(|&k| det_phase_shift(sys, k, R_MATCH))
            .collect::<Result<Vec<_>>>()?;
        let k_max = *kappas.last().ok_or_else(|| Error::Domain("empty momentum grid".into()))?;
        let anchor = analytic_for_gammas(sys.gamma.as_slice(), boundstate_count, k_max);
        Ok(Self {
            kappas: kappas.to_vec(),
            deltas: lift_by_continuity(kappas, &raw, anchor)?,
            boundstate_count,
        })
    }

    /// `δ(κ_min) / π`, which Levinson's theorem puts at the bound-state count.
    pub fn levinson_ratio(&self) -> f64 {
        self.deltas[0] / PI
    }
}

/// `bπ - Σ arctan(κ/γ_j)`.
pub fn analytic_for_gammas(gammas: &[f64], boundstate_count: u32, kappa: f64) -> f64 {
    boundstate_count as f64 * PI - gammas.iter().map(|g| (kappa / g).atan()).sum::<f64>()
}

/// Momenta from `k_min` to `k_max`, logarithmically spaced.
pub fn log_grid(k_min: f64, k_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(k_min > 0.0 && k_max > k_min) || count < 2 {
        return Err(Error::Config(format!(
            "log grid needs 0 < k_min < k_max and count >= 2, got {k_min}, {k_max}, {count}"
        )));
    }
    let (a, b) = (k_min.ln(), k_max.ln());
    Ok((0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect())
}

/// Both sides of `sin δ = -(1/κ) ∫₀^∞ V sin κr Ψ dr` for the deep potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralPhase {
    pub sin_delta: f64,
    pub integral: f64,
    /// `integral / sin_delta`.
    pub ratio: f64,
    /// For `n = 1`, the ratio written with the explicit three-term state.
    pub first_pair_ratio: Option<f64>,
}

/// Explicit regular scattering state of `-6 sech² r`.
pub fn first_pair_deep_state(kappa: f64, r: f64) -> f64 {
    let (s, c) = (kappa * r).sin_cos();
    (kappa * kappa - 2.0 + 3.0 / r.cosh().powi(2)) * s + 3.0 * kappa * r.tanh() * c
}

/// Explicit regular scattering state of `+6 cosech² r`.
pub fn first_pair_singular_state(kappa: f64, r: f64) -> f64 {
    let (s, c) = (kappa * r).sin_cos();
    (kappa * kappa - 2.0 - 3.0 / r.sinh().powi(2)) * s + 3.0 * kappa / r.tanh() * c
}

pub fn integral_phase_check(n: u32, kappa: f64, spec: &QuadratureSpec) -> Result<IntegralPhase> {
    check_kappa(kappa)?;
    let sys = DetSystem::deep(n)?;
    let y = scatter_state_det(&sys, kappa, R_MATCH)?.re;
    let dy = scatter_state_derivative(&sys, kappa, R_MATCH)?.re;
    let amp = y.hypot(dy / kappa);
    // full 2π branch so that Ψ / amp → sin(κr + δ) exactly
    let delta = (kappa * y).atan2(dy) - kappa * R_MATCH;
    let model = PotentialModel::DeepSech2 { n };
    let mut failure = None;
    let raw = integrate(
        |r| {
            let v = model.eval(r).unwrap_or(0.0);
            if v == 0.0 {
                return 0.0;
            }
            match scatter_state_det(&sys, kappa, r) {
                Ok(psi) => v * (kappa * r).sin() * psi.re / amp,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        f64::INFINITY,
        spec,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let integral = -raw / kappa;
    let sin_delta = delta.sin();
    let first_pair_ratio = if n == 1 {
        let v = integrate(
            |r| (kappa * r).sin() / r.cosh().powi(2) * first_pair_deep_state(kappa, r),
            0.0,
            f64::INFINITY,
            spec,
        )?;
        Some(2.0 / (kappa * kappa) * v)
    } else {
        None
    };
    Ok(IntegralPhase {
        sin_delta,
        integral,
        ratio: integral / sin_delta,
        first_pair_ratio,
    })
}

/// First Born approximation to `sin δ` for `-6 sech² r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BornPhase {
    pub quadrature: f64,
    pub closed_form: f64,
}

/// Agreement required between Born quadrature and closed form.
pub const BORN_TOL: f64 = 1e-8;

/// `(6/κ) ∫₀^∞ sin² κr sech² r dr` by quadrature.
pub fn born_quadrature(kappa: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_kappa(kappa)?;
    Ok(6.0 / kappa
        * integrate(
            |r| (kappa * r).sin().powi(2) / r.cosh().powi(2),
            0.0,
            f64::INFINITY,
            spec,
        )?)
}

pub fn born_phase(kappa: f64, spec: &QuadratureSpec) -> Result<BornPhase> {
    let q = born_quadrature(kappa, spec)?;
    let closed_form = born_closed_form(kappa);
    if (q - closed_form).abs() > BORN_TOL {
        return Err(Error::Mismatch(format!(
            "Born quadrature {q} vs closed form {closed_form} at kappa = {kappa}"
        )));
    }
    Ok(BornPhase {
        quadrature: q,
        closed_form,
    })
}

/// `(3/κ)(1 - κπ / sinh κπ)`.
pub fn born_closed_form(kappa: f64) -> f64 {
    let x = kappa * PI;
    3.0 / kappa * (1.0 - x / x.sinh())
}
