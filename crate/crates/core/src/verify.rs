//! The check registry behind `susyqm verify-all`.
//!
//! Every check reduces to a single error figure compared against one
//! tolerance. Checks that combine a secondary criterion with its own scale
//! report `err · (default tolerance / secondary tolerance)` for that part, so
//! `passed ⇔ max_abs_error ≤ tolerance` holds and overriding the tolerance
//! tightens or loosens every part in proportion.

use crate::error::{Error, Result};
use crate::ladder::{derivative_representation, ladder_descend, legendre_representation};
use crate::numerics::{GridSpec, QuadratureSpec};
use crate::phase_equiv::{
    general_wavefunction_transform, legendre_product_identity, logdet_derivative_identity,
    partner_states_solve, product_sum_identity, singular_from_deep,
};
use crate::potentials::{complex_shift_check, legendre_square_sum, pair_strength, BoundStateSet, PotentialModel};
use crate::scattering::{
    born_closed_form, born_quadrature, det_phase_shift, first_pair_singular_state, integral_phase_check,
    log_grid, nearest_branch, numerov_phase_shift, phase_shift_analytic, PhaseShiftCurve, R_MATCH,
};
use crate::soliton::{closed_form_log_det_m, det_m, log_det_second_derivative, DetSystem, GammaSequence, Shift};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

/// Pair index ceiling for `verify-all` unless larger values are allowed.
pub const DEFAULT_N_CEILING: u32 = 3;

/// Soliton number ceiling for the full-line checks.
pub const FULL_LINE_N: u32 = 8;

/// Soliton number ceiling for the Legendre square-sum identity.
pub const SQUARE_SUM_N: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CheckName {
    ComplexShift,
    Potential,
    SquareSum,
    Asymptotics,
    Levinson,
    PhaseEquivalence,
    SingularReconstruction,
    PartnerSolve,
    LogDet,
    ProductIdentity,
    Transform,
    IntegralPhase,
    Born,
    Representation,
    DetM,
}

impl CheckName {
    /// Every check, in registry-key order.
    pub const ALL: [CheckName; 15] = [
        CheckName::ComplexShift,
        CheckName::Potential,
        CheckName::SquareSum,
        CheckName::Asymptotics,
        CheckName::Levinson,
        CheckName::PhaseEquivalence,
        CheckName::SingularReconstruction,
        CheckName::PartnerSolve,
        CheckName::LogDet,
        CheckName::ProductIdentity,
        CheckName::Transform,
        CheckName::IntegralPhase,
        CheckName::Born,
        CheckName::Representation,
        CheckName::DetM,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::ComplexShift => "eq10_complex_shift",
            CheckName::Potential => "eq13_potential",
            CheckName::SquareSum => "eq14_identity",
            CheckName::Asymptotics => "eq18_asymptotics",
            CheckName::Levinson => "eq19_levinson",
            CheckName::PhaseEquivalence => "eq22_phase_equivalence",
            CheckName::SingularReconstruction => "eq23_singular_reconstruction",
            CheckName::PartnerSolve => "eq24_partner_solve",
            CheckName::LogDet => "eq25_logdet",
            CheckName::ProductIdentity => "eq26_27_identity",
            CheckName::Transform => "eq36_37_transform",
            CheckName::IntegralPhase => "eq39_integral",
            CheckName::Born => "eq40_born",
            CheckName::Representation => "eq53_55_representation",
            CheckName::DetM => "eq60_detm",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckName::ComplexShift => 1e-8,
            CheckName::Potential => 1e-6,
            CheckName::SquareSum => 1e-9,
            CheckName::Asymptotics => 1e-4,
            CheckName::Levinson => 1e-2,
            CheckName::PhaseEquivalence => 1e-6,
            CheckName::SingularReconstruction => 1e-5,
            CheckName::PartnerSolve => 1e-8,
            CheckName::LogDet => 1e-6,
            CheckName::ProductIdentity => 1e-9,
            CheckName::Transform => 1e-8,
            CheckName::IntegralPhase => 1e-6,
            CheckName::Born => 1e-8,
            CheckName::Representation => 1e-8,
            CheckName::DetM => 1e-8,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CheckName::ComplexShift => "partner states against bound states shifted by i pi/2",
            CheckName::Potential => "determinant-built potential against -N(N+1) sech^2",
            CheckName::SquareSum => "Legendre square sum equals N(N+1)(1-z^2)",
            CheckName::Asymptotics => "analytic, determinant and Numerov phase shifts agree",
            CheckName::Levinson => "low-energy phase shift equals n pi",
            CheckName::PhaseEquivalence => "deep minus singular phase shift equals n pi",
            CheckName::SingularReconstruction => "V_d - 2 (ln det F)'' equals the cosech^2 potential",
            CheckName::PartnerSolve => "F Phi = Psi reproduces the closed-form partners",
            CheckName::LogDet => "(ln det F)' equals sum of Psi_j Phi_j",
            CheckName::ProductIdentity => "product sum and Legendre product identities",
            CheckName::Transform => "integral and Wronskian forms of the singular scattering state",
            CheckName::IntegralPhase => "exact integral formula for sin delta",
            CheckName::Born => "Born quadrature against closed form and high-energy limit",
            CheckName::Representation => "ladder derivative representation against Legendre form",
            CheckName::DetM => "det M against its closed form",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown check name '{s}'")))
    }
}

impl TryFrom<String> for CheckName {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CheckName> for String {
    fn from(c: CheckName) -> String {
        c.as_str().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Default for KappaGrid {
    fn default() -> Self {
        Self {
            min: 0.3,
            max: 5.0,
            count: 12,
            spacing: Spacing::Linear,
        }
    }
}

impl KappaGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::Config(format!("kappa_min must be positive, got {}", self.min)));
        }
        if self.count == 0 {
            return Err(Error::Config("kappa_count must be at least 1".into()));
        }
        if self.count == 1 && self.max != self.min {
            return Err(Error::Config("kappa_count = 1 needs kappa_min = kappa_max".into()));
        }
        if self.count > 1 && !(self.max > self.min) {
            return Err(Error::Config(format!(
                "kappa_max must exceed kappa_min, got {} and {}",
                self.max, self.min
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        self.validate()?;
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        match self.spacing {
            Spacing::Log => log_grid(self.min, self.max, self.count),
            Spacing::Linear => Ok((0..self.count)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
                .collect()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Largest pair index `n` for the half-line checks.
    pub n: u32,
    pub kappa_grid: KappaGrid,
    pub r_max: f64,
    /// Numerov step.
    pub step: f64,
    pub tolerances: BTreeMap<CheckName, f64>,
    pub output_format: OutputFormat,
    /// Permits `n` above [`DEFAULT_N_CEILING`].
    pub allow_large_n: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: DEFAULT_N_CEILING,
            kappa_grid: KappaGrid::default(),
            r_max: 30.0,
            step: 1e-3,
            tolerances: BTreeMap::new(),
            output_format: OutputFormat::Json,
            allow_large_n: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if self.n > DEFAULT_N_CEILING && !self.allow_large_n {
            return Err(Error::Config(format!(
                "n = {} exceeds the default ceiling {DEFAULT_N_CEILING}; pass --allow-large-n",
                self.n
            )));
        }
        self.kappa_grid.validate()?;
        if !(self.r_max > R_MATCH - 5.0) || !self.r_max.is_finite() {
            return Err(Error::Config(format!("r_max must exceed {}, got {}", R_MATCH - 5.0, self.r_max)));
        }
        GridSpec::new(0.0, self.r_max, self.step)?;
        for (name, tol) in &self.tolerances {
            if !(*tol > 0.0 && tol.is_finite()) {
                return Err(Error::Config(format!("tolerance for {name} must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    pub fn tolerance(&self, check: CheckName) -> f64 {
        self.tolerances.get(&check).copied().unwrap_or(check.default_tolerance())
    }

    fn numerov_grid(&self, singular: bool) -> Result<GridSpec> {
        let r_min = if singular { 0.01 } else { 0.0 };
        GridSpec::new(r_min, self.r_max, self.step)
    }
}

/// A parameter value recorded in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(#[serde(with = "json_float")] f64),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => f.write_str(&format_csv_float(*v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_name: CheckName,
    pub params: BTreeMap<String, ParamValue>,
    pub grid: String,
    #[serde(with = "json_float")]
    pub max_abs_error: f64,
    #[serde(with = "json_float")]
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_ms: u64,
}

/// Floats as JSON numbers with 17 significant digits; non-finite values as
/// `null`, read back as `+∞`.
mod json_float {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if !v.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(format!("{v:.16e}")).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Nine significant digits.
pub fn format_csv_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else {
        format!("{v}")
    }
}

/// Column order of the CSV report table.
pub const CSV_COLUMNS: [&str; 7] = [
    "check_name",
    "passed",
    "max_abs_error",
    "tolerance",
    "runtime_ms",
    "grid",
    "params",
];

pub fn reports_to_json(reports: &[VerificationReport]) -> Result<String> {
    serde_json::to_string_pretty(reports).map_err(|e| Error::Config(format!("JSON encoding failed: {e}")))
}

pub fn reports_from_json(text: &str) -> Result<Vec<VerificationReport>> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("JSON decoding failed: {e}")))
}

pub fn reports_to_csv(reports: &[VerificationReport]) -> Result<String> {
    let mut w = csv_writer();
    let io = |e: csv::Error| Error::Config(format!("CSV encoding failed: {e}"));
    w.write_record(CSV_COLUMNS).map_err(io)?;
    for r in reports {
        let params = r
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            r.check_name.as_str().to_string(),
            r.passed.to_string(),
            format_csv_float(r.max_abs_error),
            format_csv_float(r.tolerance),
            r.runtime_ms.to_string(),
            r.grid.clone(),
            params,
        ])
        .map_err(io)?;
    }
    finish_csv(w)
}

pub(crate) fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("CSV encoding failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(format!("CSV encoding failed: {e}")))
}

/// Raw result of one check before timing and tolerance are attached.
#[derive(Debug, Clone, Default)]
struct Outcome {
    error: f64,
    params: BTreeMap<String, ParamValue>,
    grid: String,
}

impl Outcome {
    fn new(grid: impl Into<String>) -> Self {
        Self {
            error: 0.0,
            params: BTreeMap::new(),
            grid: grid.into(),
        }
    }

    fn int(mut self, key: &str, v: i64) -> Self {
        self.params.insert(key.into(), ParamValue::Int(v));
        self
    }

    fn real(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.into(), ParamValue::Real(v));
        self
    }

    fn record(&mut self, err: f64) {
        // NaN counts as a failure
        self.error = if err.is_nan() { f64::INFINITY } else { self.error.max(err) };
    }

    /// Records a secondary criterion with its own default tolerance.
    fn record_scaled(&mut self, err: f64, check: CheckName, sub_tol: f64) {
        self.record(err * check.default_tolerance() / sub_tol);
    }
}

fn uniform(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

fn full_line_system(big_n: u32) -> Result<DetSystem> {
    Ok(DetSystem::new(GammaSequence::integers(big_n)?, Shift::None))
}

fn check_complex_shift(cfg: &RunConfig) -> Result<Outcome> {
    let radii = uniform(0.25, 5.0, 20);
    let mut out = Outcome::new("r = 0.25..5 (20 points)");
    for n in 1..=cfg.n {
        for j in 1..=n {
            let fit = complex_shift_check(n, j, &radii)?;
            out.record(fit.max_modulus_error);
            out.record(fit.max_phase_deviation);
            if n == 1 {
                out.record((fit.fitted_phase - Complex64::new(0.0, 1.0)).norm());
            }
        }
    }
    Ok(out)
}

fn check_potential(_cfg: &RunConfig) -> Result<Outcome> {
    let rs = uniform(0.0, 10.0, 1001);
    let mut out = Outcome::new("r = 0..10 step 0.01").int("big_n_max", FULL_LINE_N as i64);
    for big_n in 1..=FULL_LINE_N {
        let sys = full_line_system(big_n)?;
        let lam = (big_n * (big_n + 1)) as f64;
        for &r in &rs {
            let v = -2.0 * log_det_second_derivative(&sys, r)?;
            out.record((v + lam / r.cosh().powi(2)).abs());
        }
    }
    Ok(out)
}

fn check_square_sum(_cfg: &RunConfig) -> Result<Outcome> {
    let zs = uniform(-0.995, 0.995, 200);
    let mut out = Outcome::new("z = -0.995..0.995 (200 points)").int("big_n_max", SQUARE_SUM_N as i64);
    for big_n in 1..=SQUARE_SUM_N {
        for &z in &zs {
            let lhs = (big_n * (big_n + 1)) as f64 * (1.0 - z * z);
            out.record((lhs - legendre_square_sum(big_n, z)?).abs());
        }
    }
    // N = 2 term by term
    for &z in &zs {
        let p21 = -3.0 * z * (1.0 - z * z).sqrt();
        let p22 = 3.0 * (1.0 - z * z);
        let written = 4.0 * (p21 * p21 / 6.0 + 4.0 * p22 * p22 / 24.0);
        out.record((6.0 * (1.0 - z * z) - written).abs());
    }
    Ok(out)
}

fn check_asymptotics(cfg: &RunConfig) -> Result<Outcome> {
    let kappas = cfg.kappa_grid.points()?;
    let grid = cfg.numerov_grid(false)?;
    let mut out = Outcome::new(format!(
        "kappa = {}..{} ({} points); Numerov r = 0..{} step {}",
        cfg.kappa_grid.min, cfg.kappa_grid.max, cfg.kappa_grid.count, cfg.r_max, cfg.step
    ))
    
    .real("r_match", R_MATCH);
    for n in 1..=cfg.n {
        let sys = DetSystem::deep(n)?;
        let model = PotentialModel::DeepSech2 { n };
        let errs = kappas
            .par_iter()
            .map(|&k| {
                let analytic = phase_shift_analytic(n, k)?;
                let det = nearest_branch(det_phase_shift(&sys, k, R_MATCH)?, analytic);
                let numerov = numerov_phase_shift(&model, k, &grid)?;
                Ok((analytic - det).abs().max((analytic - numerov).abs()).max((det - numerov).abs()))
            })
            .collect::<Result<Vec<f64>>>()?;
        errs.into_iter().for_each(|e| out.record(e));
    }
    Ok(out)
}

fn check_levinson(cfg: &RunConfig) -> Result<Outcome> {
    let kappas = log_grid(1e-4, cfg.kappa_grid.max, 200)?;
    let mut out = Outcome::new(format!("kappa = 1e-4..{} (200 log points)", cfg.kappa_grid.max))
        
        .real("kappa_low", 1e-4);
    let grid = cfg.numerov_grid(false)?;
    for n in 1..=cfg.n {
        let curve = PhaseShiftCurve::from_determinant(&DetSystem::deep(n)?, &kappas, n)?;
        let target = n as f64 * PI;
        out.record((curve.deltas[0] - target).abs());
        let numerov = numerov_phase_shift(&PotentialModel::DeepSech2 { n }, 1e-4, &grid)?;
        out.record((numerov - target).abs());
    }
    Ok(out)
}

fn check_phase_equivalence(cfg: &RunConfig) -> Result<Outcome> {
    let check = CheckName::PhaseEquivalence;
    let kappas = log_grid(1e-4, cfg.kappa_grid.max, 200)?;
    let mut out = Outcome::new(format!("kappa = 1e-4..{} (200 log points)", cfg.kappa_grid.max))
        
        .real("zero_energy_tol", 1e-2);
    let grid = cfg.numerov_grid(true)?;
    for n in 1..=cfg.n {
        let deep = PhaseShiftCurve::from_determinant(&DetSystem::deep(n)?, &kappas, n)?;
        let sing = PhaseShiftCurve::from_determinant(&DetSystem::singular(n)?, &kappas, 0)?;
        for (d, s) in deep.deltas.iter().zip(&sing.deltas) {
            out.record((d - s - n as f64 * PI).abs());
        }
        out.record_scaled(sing.deltas[0].abs(), check, 1e-2);
        let numerov = numerov_phase_shift(&PotentialModel::SingularCosech2 { n }, 1e-4, &grid)?;
        out.record_scaled(numerov.abs(), check, 1e-2);
    }
    Ok(out)
}

fn check_singular_reconstruction(cfg: &RunConfig) -> Result<Outcome> {
    let rs = uniform(0.2, 8.0, 157);
    let mut out = Outcome::new("r = 0.2..8 step 0.05");
    for n in 1..=cfg.n {
        for &r in &rs {
            let want = pair_strength(n) / r.sinh().powi(2);
            out.record((singular_from_deep(n, r)? - want).abs());
        }
    }
    Ok(out)
}

fn check_partner_solve(cfg: &RunConfig) -> Result<Outcome> {
    let rs = log_grid(0.05, 10.0, 60)?;
    let mut out = Outcome::new("r = 0.05..10 (60 log points); error |dPhi| / max(|Phi|, 1)")
        ;
    let mut worst_condition = 0.0f64;
    for n in 1..=cfg.n {
        let set = BoundStateSet::new(n)?;
        for &r in &rs {
            let sol = partner_states_solve(n, r)?;
            worst_condition = worst_condition.max(sol.condition);
            for j in 1..=n {
                let want = set.phi(j, r)?;
                out.record((sol.phi[j as usize - 1] - want).abs() / want.abs().max(1.0));
            }
        }
    }
    Ok(out.real("max_condition", worst_condition))
}

fn check_logdet(cfg: &RunConfig) -> Result<Outcome> {
    let rs = uniform(0.2, 8.0, 79);
    let mut out = Outcome::new("r = 0.2..8 step 0.1, plus r = 30");
    for n in 1..=cfg.n {
        for &r in &rs {
            out.record(logdet_derivative_identity(n, r)?);
        }
        // the integration constant vanishes
        let (lhs, sum) = product_sum_identity(n, 30.0)?;
        out.record((lhs - sum).abs());
    }
    Ok(out)
}

fn check_product_identity(cfg: &RunConfig) -> Result<Outcome> {
    let zs = uniform(0.25, 0.995, 200);
    let mut out = Outcome::new("z = 0.25..0.995 (200 points), r = atanh z; relative error")
        ;
    for n in 1..=cfg.n {
        for &z in &zs {
            let (l, r) = legendre_product_identity(n, z)?;
            out.record((l - r).abs() / r.abs());
            let (lhs, sum) = product_sum_identity(n, z.atanh())?;
            out.record((lhs - sum).abs() / lhs.abs());
        }
    }
    for &z in &zs {
        let r = z.atanh();
        let (lhs, sum) = product_sum_identity(1, r)?;
        let written = 3.0 / (r.sinh() * r.cosh());
        out.record((lhs - written).abs() / written);
        out.record((sum - written).abs() / written);
    }
    Ok(out)
}

fn check_transform(cfg: &RunConfig) -> Result<Outcome> {
    let check = CheckName::Transform;
    let spec = loose_spec()?;
    let points = [(0.5, 0.6), (0.5, 2.0), (1.3, 1.0), (1.3, 3.5), (2.2, 1.7)];
    let mut out = Outcome::new("(kappa, r) in {(0.5,0.6), (0.5,2), (1.3,1), (1.3,3.5), (2.2,1.7)}")
        
        .real("closed_form_tol", 1e-7);
    for n in 1..=cfg.n {
        let errs = points
            .par_iter()
            .map(|&(k, r)| {
                let t = general_wavefunction_transform(n, k, r, &spec)?;
                let mut e = (t.integral_form - t.wronskian_form).abs();
                e = e.max((t.determinant_form - t.wronskian_form).abs());
                let closed = if n == 1 {
                    let amp = ((1.0 + k * k) * (4.0 + k * k)).sqrt();
                    // the determinant state carries an overall sign of -1
                    (t.integral_form + first_pair_singular_state(k, r) / amp).abs()
                } else {
                    0.0
                };
                Ok((e, closed))
            })
            .collect::<Result<Vec<_>>>()?;
        for (e, closed) in errs {
            out.record(e);
            out.record_scaled(closed, check, 1e-7);
        }
    }
    Ok(out)
}

/// Looser relative target for integrands built from large determinants.
fn loose_spec() -> Result<QuadratureSpec> {
    QuadratureSpec::new(1e-10, 1e-10, 4000)
}

fn check_integral_phase(cfg: &RunConfig) -> Result<Outcome> {
    let spec = loose_spec()?;
    let kappas = [0.5, 1.0, 2.0, 3.0];
    let mut out = Outcome::new("kappa in {0.5, 1, 2, 3}");
    for n in 1..=cfg.n {
        let errs = kappas
            .par_iter()
            .map(|&k| {
                let c = integral_phase_check(n, k, &spec)?;
                let first = c.first_pair_ratio.map_or(0.0, |q| (q - 1.0).abs());
                Ok((c.ratio - 1.0).abs().max(first))
            })
            .collect::<Result<Vec<f64>>>()?;
        errs.into_iter().for_each(|e| out.record(e));
    }
    Ok(out)
}

fn check_born(_cfg: &RunConfig) -> Result<Outcome> {
    let check = CheckName::Born;
    let spec = QuadratureSpec::default();
    let mut out = Outcome::new("kappa in {0.5, 1, 3, 10, 50}").real("high_energy_tol", 1e-3);
    for &k in &[0.5, 1.0, 3.0, 10.0, 50.0] {
        out.record((born_quadrature(k, &spec)? - born_closed_form(k)).abs());
    }
    let k = 50.0;
    let delta = nearest_branch(det_phase_shift(&DetSystem::deep(1)?, k, R_MATCH)?, 0.0);
    out.record_scaled((k * delta / 3.0 - 1.0).abs(), check, 1e-3);
    Ok(out)
}

fn check_representation(_cfg: &RunConfig) -> Result<Outcome> {
    let xs = uniform(-5.0, 5.0, 41);
    let mut out = Outcome::new("x = -5..5 step 0.25").int("big_n_max", FULL_LINE_N as i64);
    for big_n in 1..=FULL_LINE_N {
        for j in 0..big_n {
            for &x in &xs {
                let d = derivative_representation(big_n, j, x)?;
                let l = legendre_representation(big_n, j, x)?;
                out.record((d - l).abs());
            }
        }
        let chain = ladder_descend(big_n)?;
        for (rung, k) in chain.rungs.iter().zip((1..=big_n).rev()) {
            if rung.strength != k * (k + 1) {
                return Err(Error::Mismatch(format!("rung {k} has strength {}", rung.strength)));
            }
        }
        if chain.xi_power != big_n * (big_n + 1) / 2 {
            return Err(Error::Mismatch(format!("xi power {} for N = {big_n}", chain.xi_power)));
        }
        for &x in &xs {
            let closed = x.cosh().powf(-((big_n * (big_n + 1)) as f64) / 2.0);
            out.record((chain.xi(x) - closed).abs());
        }
    }
    Ok(out)
}

fn check_det_m(_cfg: &RunConfig) -> Result<Outcome> {
    let rs = uniform(0.0, 10.0, 201);
    let mut out = Outcome::new("r = 0..10 step 0.05; relative error").int("big_n_max", FULL_LINE_N as i64);
    for big_n in 1..=FULL_LINE_N {
        let sys = full_line_system(big_n)?;
        for &r in &rs {
            let d = det_m(&sys, r)?;
            let ratio = d.phase * (d.log_abs - closed_form_log_det_m(big_n, r)?).exp();
            out.record((ratio - 1.0).norm());
        }
    }
    Ok(out)
}

fn dispatch(check: CheckName, cfg: &RunConfig) -> Result<Outcome> {
    match check {
        CheckName::ComplexShift => check_complex_shift(cfg),
        CheckName::Potential => check_potential(cfg),
        CheckName::SquareSum => check_square_sum(cfg),
        CheckName::Asymptotics => check_asymptotics(cfg),
        CheckName::Levinson => check_levinson(cfg),
        CheckName::PhaseEquivalence => check_phase_equivalence(cfg),
        CheckName::SingularReconstruction => check_singular_reconstruction(cfg),
        CheckName::PartnerSolve => check_partner_solve(cfg),
        CheckName::LogDet => check_logdet(cfg),
        CheckName::ProductIdentity => check_product_identity(cfg),
        CheckName::Transform => check_transform(cfg),
        CheckName::IntegralPhase => check_integral_phase(cfg),
        CheckName::Born => check_born(cfg),
        CheckName::Representation => check_representation(cfg),
        CheckName::DetM => check_det_m(cfg),
    }
}

/// A report together with the message of a check that could not complete.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRun {
    pub report: VerificationReport,
    pub failure: Option<String>,
}

/// A plot-ready table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Real>>,
    pub summary: BTreeMap<String, Real>,
}

/// A float written with 17 significant digits in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Real(#[serde(with = "json_float")] pub f64);

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
        }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row.into_iter().map(Real).collect());
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i].0).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(format!("JSON encoding failed: {e}")))
    }

    /// Header plus one row per sample; the summary is not part of the CSV.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv_writer();
        let io = |e: csv::Error| Error::Config(format!("CSV encoding failed: {e}"));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_csv_float(v.0))).map_err(io)?;
        }
        finish_csv(w)
    }
}

/// Largest soliton or pair index accepted by the table commands.
pub const TABLE_N_MAX: u32 = 10;

impl RunConfig {
    /// Validation for the table commands, which ignore the `verify-all`
    /// ceiling and tolerances.
    pub fn validate_table(&self) -> Result<GridSpec> {
        if self.n == 0 || self.n > TABLE_N_MAX {
            return Err(Error::Config(format!("n must be in 1..={TABLE_N_MAX}, got {}", self.n)));
        }
        self.kappa_grid.validate()?;
        GridSpec::new(0.0, self.r_max, self.step)
    }
}

fn positive_nodes(grid: &GridSpec, r_min: f64) -> Vec<f64> {
    grid.nodes().filter(|&r| r > 0.0 && r >= r_min).collect()
}

/// `r, V_d, V_s, V_det, |V_det - V_d|` for the pair `n`.
pub fn cmd_potential(cfg: &RunConfig) -> Result<Table> {
    let grid = cfg.validate_table()?;
    let n = cfg.n;
    let sys = DetSystem::deep(n)?;
    let deep = PotentialModel::DeepSech2 { n };
    let sing = PotentialModel::SingularCosech2 { n };
    let mut t = Table::new(&["r", "v_deep", "v_singular", "v_det", "abs_diff"]);
    for r in positive_nodes(&grid, 0.0) {
        let vd = deep.eval(r)?;
        let vdet = -2.0 * log_det_second_derivative(&sys, r)?;
        t.push(vec![r, vd, sing.eval(r)?, vdet, (vdet - vd).abs()]);
    }
    t.summary.insert("n".into(), Real(n as f64));
    Ok(t)
}

/// `r`, every `Ψ_j`, every `Φ_j`, and whether `r` is above the radius where
/// the partners become unreliable.
pub fn cmd_boundstates(cfg: &RunConfig) -> Result<Table> {
    let grid = cfg.validate_table()?;
    let n = cfg.n;
    let set = BoundStateSet::new(n)?;
    let mut cols = vec!["r".to_string()];
    cols.extend((1..=n).map(|j| format!("psi_{j}")));
    cols.extend((1..=n).map(|j| format!("phi_{j}")));
    cols.push("partner_reliable".into());
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs);
    for r in positive_nodes(&grid, 0.0) {
        let mut row = vec![r];
        for j in 1..=n {
            row.push(set.psi(j, r)?);
        }
        for j in 1..=n {
            row.push(set.phi(j, r)?);
        }
        row.push(if r >= crate::potentials::PARTNER_WARN_RADIUS { 1.0 } else { 0.0 });
        t.push(row);
    }
    for j in 1..=n {
        t.summary.insert(format!("energy_{j}"), Real(set.energy(j)));
    }
    Ok(t)
}

/// Per momentum: analytic, determinant and Numerov phases for both members
/// of the pair, with the Levinson value in the summary.
pub fn cmd_scatter(cfg: &RunConfig) -> Result<Table> {
    cfg.validate_table()?;
    let n = cfg.n;
    let kappas = cfg.kappa_grid.points()?;
    let deep_sys = DetSystem::deep(n)?;
    let deep = PotentialModel::DeepSech2 { n };
    let sing = PotentialModel::SingularCosech2 { n };
    let (g_deep, g_sing) = (cfg.numerov_grid(false)?, cfg.numerov_grid(true)?);
    let rows = kappas
        .par_iter()
        .map(|&k| {
            let analytic = phase_shift_analytic(n, k)?;
            let det = nearest_branch(det_phase_shift(&deep_sys, k, R_MATCH)?, analytic);
            let numerov = numerov_phase_shift(&deep, k, &g_deep)?;
            let s_analytic = crate::scattering::phase_shift_singular_analytic(n, k)?;
            let s_numerov = numerov_phase_shift(&sing, k, &g_sing)?;
            Ok(vec![k, analytic, det, numerov, s_analytic, s_numerov, numerov - s_numerov - n as f64 * PI])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&[
        "kappa",
        "delta_analytic",
        "delta_det",
        "delta_numerov",
        "delta_singular_analytic",
        "delta_singular_numerov",
        "difference_minus_n_pi",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    let low = log_grid(1e-4, kappas.last().copied().unwrap_or(5.0).max(1.0), 200)?;
    let curve = PhaseShiftCurve::from_determinant(&deep_sys, &low, n)?;
    t.summary.insert("levinson_kappa".into(), Real(low[0]));
    t.summary.insert("levinson_delta_over_pi".into(), Real(curve.levinson_ratio()));
    t.summary.insert("boundstate_count".into(), Real(n as f64));
    Ok(t)
}

/// Per radius: the reconstructed singular potential, the log-det identity
/// residual, and the solved and closed-form partner states.
pub fn cmd_phase_equiv(cfg: &RunConfig) -> Result<Table> {
    let grid = cfg.validate_table()?;
    let n = cfg.n;
    let set = BoundStateSet::new(n)?;
    let mut cols = vec![
        "r".to_string(),
        "v_singular".into(),
        "v_reconstructed".into(),
        "reconstruction_error".into(),
        "logdet_identity_error".into(),
    ];
    for j in 1..=n {
        cols.push(format!("phi_{j}_closed"));
        cols.push(format!("phi_{j}_solve"));
    }
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&refs);
    for r in positive_nodes(&grid, crate::phase_equiv::MIN_SOLVE_RADIUS) {
        let want = pair_strength(n) / r.sinh().powi(2);
        let got = singular_from_deep(n, r)?;
        let mut row = vec![r, want, got, (got - want).abs(), logdet_derivative_identity(n, r)?];
        let sol = partner_states_solve(n, r)?;
        for j in 1..=n {
            row.push(set.phi(j, r)?);
            row.push(sol.phi[j as usize - 1]);
        }
        t.push(row);
    }
    Ok(t)
}

/// Per `z`: the square-sum identity for `N = n` and the product identity for
/// the pair `n`.
pub fn cmd_identity(cfg: &RunConfig) -> Result<Table> {
    cfg.validate_table()?;
    let n = cfg.n;
    let mut t = Table::new(&[
        "z",
        "square_sum",
        "square_sum_expected",
        "product_lhs",
        "product_rhs",
    ]);
    for z in uniform(0.005, 0.995, 199) {
        let (l, r) = legendre_product_identity(n, z)?;
        t.push(vec![
            z,
            legendre_square_sum(n, z)?,
            (n * (n + 1)) as f64 * (1.0 - z * z),
            l,
            r,
        ]);
    }
    Ok(t)
}

/// Runs one check. Numerical failures inside the check become a failed
/// report with an infinite error.
pub fn run_check(check: CheckName, cfg: &RunConfig) -> CheckRun {
    let tolerance = cfg.tolerance(check);
    let start = Instant::now();
    let result = dispatch(check, cfg);
    let runtime_ms = start.elapsed().as_millis() as u64;
    let (outcome, failure) = match result {
        Ok(o) => (o, None),
        Err(e) => (
            Outcome {
                error: f64::INFINITY,
                ..Outcome::default()
            },
            Some(e.to_string()),
        ),
    };
    let mut params = outcome.params;
    params.insert("n".into(), ParamValue::Int(cfg.n as i64));
    CheckRun {
        report: VerificationReport {
            check_name: check,
            params,
            grid: outcome.grid,
            max_abs_error: outcome.error,
            tolerance,
            passed: outcome.error <= tolerance,
            runtime_ms,
        },
        failure,
    }
}

/// Runs the selected checks (all when `filter` is empty) concurrently and
/// returns them sorted by registry key.
pub fn run_checks(cfg: &RunConfig, filter: &[CheckName]) -> Result<Vec<CheckRun>> {
    cfg.validate()?;
    let selected: Vec<CheckName> = if filter.is_empty() {
        CheckName::ALL.to_vec()
    } else {
        let mut f = filter.to_vec();
        f.sort_by_key(|c| c.as_str());
        f.dedup();
        f
    };
    let mut runs: Vec<CheckRun> = selected.par_iter().map(|&c| run_check(c, cfg)).collect();
    runs.sort_by_key(|r| r.report.check_name.as_str());
    Ok(runs)
}

/// `run_checks` over the whole registry, reports only.
pub fn verify_all(cfg: &RunConfig) -> Result<Vec<VerificationReport>> {
    Ok(run_checks(cfg, &[])?.into_iter().map(|r| r.report).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> VerificationReport {
        let mut params = BTreeMap::new();
        params.insert("n".into(), ParamValue::Int(3));
        params.insert("r_match".into(), ParamValue::Real(25.0));
        params.insert("tiny".into(), ParamValue::Real(1.0 / 3.0 * 1e-7));
        VerificationReport {
            check_name: CheckName::LogDet,
            params,
            grid: "r = 0.2..8, \"quoted\"".into(),
            max_abs_error: 0.1 + 0.2,
            tolerance: 1e-6,
            passed: true,
            runtime_ms: 12,
        }
    }

    #[test]
    fn registry_is_sorted_and_named() {
        let names: Vec<&str> = CheckName::ALL.iter().map(|c| c.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        assert_eq!(names.len(), 15);
        for c in CheckName::ALL {
            assert_eq!(c.as_str().parse::<CheckName>().unwrap(), c);
        }
        assert!("eq99_missing".parse::<CheckName>().is_err());
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let mut failed = sample_report();
        failed.check_name = CheckName::Born;
        failed.max_abs_error = f64::INFINITY;
        failed.passed = false;
        let reports = vec![sample_report(), failed];
        let text = reports_to_json(&reports).unwrap();
        assert!(text.contains("3.0000000000000004e-1"));
        assert!(text.contains("\"max_abs_error\": null"));
        let back = reports_from_json(&text).unwrap();
        assert_eq!(reports_to_json(&back).unwrap(), text);
        assert_eq!(back[0], reports[0]);
    }

    #[test]
    fn unknown_check_rejected_in_json() {
        let text = reports_to_json(&[sample_report()]).unwrap().replace("eq25_logdet", "eq25_nope");
        assert!(reports_from_json(&text).is_err());
    }

    #[test]
    fn csv_layout() {
        let text = reports_to_csv(&[sample_report()]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let row = lines.next().unwrap();
        assert!(row.starts_with("eq25_logdet,true,3.00000000e-1,1.00000000e-6,12,"));
        assert!(row.contains("\"r = 0.2..8, \"\"quoted\"\"\""));
        assert!(!text.contains('\r'));
        let empty = reports_to_csv(&[]).unwrap();
        assert_eq!(empty, format!("{}\n", CSV_COLUMNS.join(",")));
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        let large = RunConfig { n: 4, ..RunConfig::default() };
        assert!(large.validate().is_err());
        assert!(RunConfig { allow_large_n: true, ..large }.validate().is_ok());
        let mut bad = RunConfig::default();
        bad.kappa_grid.count = 0;
        assert!(bad.validate().is_err());
        let mut bad = RunConfig::default();
        bad.tolerances.insert(CheckName::Born, -1.0);
        assert!(bad.validate().is_err());
        assert!(RunConfig { step: 7e-3, ..RunConfig::default() }.validate().is_err());
    }

    #[test]
    fn kappa_grids() {
        let g = KappaGrid { min: 1.0, max: 3.0, count: 3, spacing: Spacing::Linear };
        assert_eq!(g.points().unwrap(), vec![1.0, 2.0, 3.0]);
        let g = KappaGrid { min: 0.1, max: 10.0, count: 3, spacing: Spacing::Log };
        let p = g.points().unwrap();
        assert!((p[1] - 1.0).abs() < 1e-12);
        let g = KappaGrid { min: 2.0, max: 2.0, count: 1, spacing: Spacing::Linear };
        assert_eq!(g.points().unwrap(), vec![2.0]);
    }

    #[test]
    fn cheap_checks_pass_and_sabotage_fails() {
        let cfg = RunConfig::default();
        let runs = run_checks(&cfg, &[CheckName::SquareSum, CheckName::ComplexShift]).unwrap();
        assert_eq!(runs[0].report.check_name, CheckName::ComplexShift);
        assert!(runs.iter().all(|r| r.report.passed && r.failure.is_none()), "{runs:?}");
        let mut cfg = RunConfig::default();
        cfg.tolerances.insert(CheckName::SquareSum, 1e-30);
        let run = run_check(CheckName::SquareSum, &cfg);
        assert!(!run.report.passed);
        assert_eq!(run.report.tolerance, 1e-30);
    }
}
