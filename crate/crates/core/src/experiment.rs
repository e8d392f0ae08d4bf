//! Config-driven experiment runner: builds the objective, integrates the
//! dynamics or runs the scheme (optionally over a list of beta values), checks
//! the requested claims and writes CSV/JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    averaged_point, check_liminf_scaling, cumulative_weighted_integral, fit_last_decades, fit_rate, windowed_inf,
    AveragedPoint, FitMode, TAIL_TOLERANCE,
};
use crate::dynamics::{integrate, DynamicsSpec, Sampling, Trajectory, Variant, DEFAULT_ATOL, DEFAULT_RTOL};
use crate::error::{Error, Result};
use crate::lyapunov::{
    bound_sharp_critical, bound_sharp_from_energy, bound_sharp_general, energy_h_sharp, explicit_k,
    explicit_k_squared_factor, flat_certificates, max_increase, mechanical_energy_at_start, mechanical_energy_series,
    sharp_certificates, FlatConstants, SharpConstants,
};
use crate::objectives::{make_least_squares, make_power_norm, make_quadratic, random_least_squares, Objective};
use crate::schemes::{
    gradient_descent_run, igahd_run, oscillation_metric, weighted_grad_tail_fraction, IterateLog, SchemeConfig,
};

/// Absolute slack when comparing a bound with the sampled gap.
pub const BOUND_SLACK: f64 = 1e-9;
/// Tolerance added to theoretical exponents in slope claims.
pub const SLOPE_TOL: f64 = 0.3;
/// Tolerance for the discrete `O(k^-2)` claim.
pub const SCHEME_SLOPE_TOL: f64 = 0.2;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeBlock>,
    pub x0: X0Spec,
    #[serde(default)]
    pub analysis: AnalysisBlock,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Write the coordinates of `x` next to each trajectory sample.
    #[serde(default)]
    pub include_x: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    Quadratic {
        dim: usize,
        mu: f64,
        #[serde(default)]
        x_star: Option<Vec<f64>>,
    },
    PowerNorm {
        dim: usize,
        gamma: f64,
        mu: f64,
        #[serde(default)]
        x_star: Option<Vec<f64>>,
    },
    /// Square instance with `N(0, 1/n)` entries and `N(0, 1)` right-hand side.
    LeastSquaresRandom { n: usize, seed: u64 },
    /// Matrix and right-hand side from header-less CSV files, relative to the config.
    LeastSquaresCsv { matrix: PathBuf, rhs: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum X0Spec {
    Literal(Vec<f64>),
    /// `x0 ~ scale * N(0, I)` from a seeded ChaCha8 stream.
    Normal {
        seed: u64,
        #[serde(default = "one")]
        scale: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Unit in which beta values (or the step size) are given.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    #[default]
    Absolute,
    /// multiples of `1/L`
    InvL,
    /// multiples of `1/sqrt(L)`
    InvSqrtL,
}

impl Unit {
    fn scale(self, lipschitz: Option<f64>, field: &str) -> Result<f64> {
        match (self, lipschitz) {
            (Unit::Absolute, _) => Ok(1.0),
            (Unit::InvL, Some(l)) => Ok(1.0 / l),
            (Unit::InvSqrtL, Some(l)) => Ok(1.0 / l.sqrt()),
            (_, None) => Err(Error::Config(format!(
                "{field}: unit needs the gradient Lipschitz constant, which this objective lacks"
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsBlock {
    #[serde(default = "default_variant")]
    pub variant: Variant,
    pub alpha: f64,
    pub betas: Vec<f64>,
    #[serde(default)]
    pub beta_unit: Unit,
    pub t0: f64,
    pub t_end: f64,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_variant() -> Variant {
    Variant::DinAvd
}
fn default_rtol() -> f64 {
    DEFAULT_RTOL
}
fn default_atol() -> f64 {
    DEFAULT_ATOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Igahd,
    GradientDescent,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeBlock {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_scheme_alpha")]
    pub alpha: f64,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    #[serde(default)]
    pub beta_unit: Unit,
    pub step: f64,
    #[serde(default)]
    pub step_unit: Unit,
    pub max_iter: usize,
}

fn default_method() -> Method {
    Method::Igahd
}
fn default_scheme_alpha() -> f64 {
    3.0
}
fn default_betas() -> Vec<f64> {
    vec![0.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    /// `F - F* = O(t^-(2 alpha gamma/(gamma+2)))` under sharp geometry
    SharpRate,
    /// closed-form bound dominates the gap past `t1`
    SharpExplicitBound,
    /// bound for `alpha = 1 + 2/gamma` dominates the gap past `t0 + beta`
    SharpCriticalBound,
    /// `int u^(2 alpha gamma/(gamma+2)) ||grad F||^2 < inf`
    GradientIntegrability,
    /// `E_m` non-increasing
    EnergyMonotone,
    /// sharp `H` and `G` non-increasing
    SharpCertificates,
    /// envelope slope at most `-(alpha - eps) + 0.3`
    ImprovedRate,
    /// `int u^(alpha - eps) (F - F*) < inf`
    ImprovedIntegrability,
    /// `F(z(t)) - F*` slope at most `-(alpha + 1 - eps) + 0.3`
    AveragedRate,
    /// windowed infimum slope at most `-(alpha + 1 - eps) + 0.3`
    WindowedInfRate,
    /// `t^(alpha+1-eps) log t (F - F*)` minimum shrinks with the horizon
    LiminfScaling,
    /// `F(z) <=` weighted mean of `F` over the window
    Jensen,
    FlatRate,
    FlatIntegrability,
    FlatVBounded,
    FlatInfRate,
    /// slope of the scheme gap at most `-2 + 0.2`
    IgahdRate,
    /// `sum k^2 ||grad F(x_k)||^2` plateaus
    IgahdSummability,
    /// local-max count non-increasing along the beta sweep
    OscillationDamping,
}

impl Claim {
    fn is_scheme(self) -> bool {
        matches!(self, Claim::IgahdRate | Claim::IgahdSummability | Claim::OscillationDamping)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBlock {
    #[serde(default)]
    pub claims: Vec<Claim>,
    /// slack in the improved sharp rates
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// iteration window for scheme fits and oscillation counts
    #[serde(default = "default_iter_window")]
    pub iter_window: (usize, usize),
    /// trailing decades of the horizon used by slope fits
    #[serde(default = "default_fit_decades")]
    pub fit_decades: f64,
}

impl Default for AnalysisBlock {
    fn default() -> Self {
        Self {
            claims: Vec::new(),
            epsilon: default_epsilon(),
            iter_window: default_iter_window(),
            fit_decades: default_fit_decades(),
        }
    }
}

fn default_epsilon() -> f64 {
    0.1
}
fn default_iter_window() -> (usize, usize) {
    (100, 5000)
}
fn default_fit_decades() -> f64 {
    1.0
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let ObjectiveSpec::LeastSquaresCsv { matrix, rhs } = &mut self.objective {
            for p in [matrix, rhs] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }

    /// Field-level checks that serde cannot express.
    pub fn validate(&self) -> Result<()> {
        match (&self.dynamics, &self.scheme) {
            (Some(_), Some(_)) | (None, None) => {
                return cfg_err("exactly one of `dynamics` and `scheme` must be present")
            }
            _ => {}
        }
        let positive = |name: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                cfg_err(format!("{name} must be positive, got {v}"))
            }
        };
        let betas_ok = |name: &str, b: &[f64]| -> Result<()> {
            if b.is_empty() {
                return cfg_err(format!("{name} must not be empty"));
            }
            match b.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
                Some(v) => cfg_err(format!("{name} entries must be non-negative, got {v}")),
                None => Ok(()),
            }
        };
        match &self.objective {
            ObjectiveSpec::Quadratic { mu, .. } => positive("objective.mu", *mu)?,
            ObjectiveSpec::PowerNorm { mu, gamma, .. } => {
                positive("objective.mu", *mu)?;
                if !(*gamma >= 2.0) {
                    return cfg_err(format!("objective.gamma must be >= 2, got {gamma}"));
                }
            }
            ObjectiveSpec::LeastSquaresRandom { n, .. } if *n == 0 => {
                return cfg_err("objective.n must be positive")
            }
            _ => {}
        }
        if let Some(d) = &self.dynamics {
            positive("dynamics.alpha", d.alpha)?;
            betas_ok("dynamics.betas", &d.betas)?;
            positive("dynamics.t0", d.t0)?;
            if !(d.t_end > d.t0) {
                return cfg_err(format!("dynamics.t_end must exceed t0, got {}", d.t_end));
            }
            positive("dynamics.rtol", d.rtol)?;
            positive("dynamics.atol", d.atol)?;
            if let Some(c) = self.analysis.claims.iter().find(|c| c.is_scheme()) {
                return cfg_err(format!("analysis.claims: {c:?} needs a scheme block"));
            }
        }
        if let Some(s) = &self.scheme {
            positive("scheme.alpha", s.alpha)?;
            betas_ok("scheme.betas", &s.betas)?;
            positive("scheme.step", s.step)?;
            if s.max_iter == 0 {
                return cfg_err("scheme.max_iter must be positive");
            }
            if let Some(c) = self.analysis.claims.iter().find(|c| !c.is_scheme()) {
                return cfg_err(format!("analysis.claims: {c:?} needs a dynamics block"));
            }
        }
        if !(self.analysis.epsilon > 0.0 && self.analysis.epsilon < 1.0) {
            return cfg_err(format!(
                "analysis.epsilon must lie in (0, 1), got {}",
                self.analysis.epsilon
            ));
        }
        if !(self.analysis.fit_decades > 0.0 && self.analysis.fit_decades.is_finite()) {
            return cfg_err(format!(
                "analysis.fit_decades must be positive, got {}",
                self.analysis.fit_decades
            ));
        }
        let (lo, hi) = self.analysis.iter_window;
        if !(lo >= 1 && lo < hi) {
            return cfg_err(format!("analysis.iter_window must satisfy 1 <= lo < hi, got {lo}..{hi}"));
        }
        if let X0Spec::Literal(v) = &self.x0 {
            if v.iter().any(|x| !x.is_finite()) {
                return cfg_err("x0 has non-finite entries");
            }
        }
        Ok(())
    }
}

fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("{}: bad number {s:?}: {e}", path.display())))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn build_objective(spec: &ObjectiveSpec) -> Result<Objective> {
    match spec {
        ObjectiveSpec::Quadratic { dim, mu, x_star } => {
            make_quadratic(*dim, *mu, x_star.as_deref().unwrap_or(&vec![0.0; *dim]))
        }
        ObjectiveSpec::PowerNorm { dim, gamma, mu, x_star } => {
            make_power_norm(*dim, *gamma, *mu, x_star.as_deref().unwrap_or(&vec![0.0; *dim]))
        }
        ObjectiveSpec::LeastSquaresRandom { n, seed } => random_least_squares(*n, *seed),
        ObjectiveSpec::LeastSquaresCsv { matrix, rhs } => {
            let rows = read_matrix_csv(matrix)?;
            let m = rows.len();
            let n = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != n) {
                return cfg_err(format!("{}: ragged matrix", matrix.display()));
            }
            let a = DMatrix::from_row_iterator(m, n, rows.into_iter().flatten());
            let b: Vec<f64> = read_matrix_csv(rhs)?.into_iter().flatten().collect();
            make_least_squares(a, DVector::from_vec(b))
        }
    }
}

pub fn build_x0(spec: &X0Spec, dim: usize) -> Result<Vec<f64>> {
    match spec {
        X0Spec::Literal(v) if v.len() == dim => Ok(v.clone()),
        X0Spec::Literal(v) => cfg_err(format!("x0 has length {}, objective dimension is {dim}", v.len())),
        X0Spec::Normal { seed, scale } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Ok((0..dim).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect())
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimResult {
    pub claim: Claim,
    /// index of the run in the beta sweep, absent for sweep-level claims
    pub run: Option<usize>,
    pub passed: bool,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl ClaimResult {
    fn check(claim: Claim, run: usize, measured: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self {
            claim,
            run: Some(run),
            passed: measured <= threshold,
            measured: Some(measured),
            threshold: Some(threshold),
            detail: detail.into(),
        }
    }

    fn failed(claim: Claim, run: Option<usize>, detail: impl Into<String>) -> Self {
        Self {
            claim,
            run,
            passed: false,
            measured: None,
            threshold: None,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunEntry {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    pub file: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverged_at: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guarantee: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub all_passed: bool,
    pub claims: Vec<ClaimResult>,
    pub runs: Vec<RunEntry>,
}

/// Sharp constants when the objective carries quadratic-growth metadata.
fn sharp_constants(obj: &Objective, alpha: f64, beta: f64) -> Option<SharpConstants> {
    match (obj.gamma_flat(), obj.gamma_growth(), obj.mu()) {
        (Some(g), Some(g2), Some(mu)) if g2 == 2.0 && g <= 2.0 => SharpConstants::new(g, alpha, beta, mu).ok(),
        _ => None,
    }
}

fn flat_constants(obj: &Objective, alpha: f64, beta: f64, t0: f64) -> Option<FlatConstants> {
    match (obj.gamma_flat(), obj.gamma_growth(), obj.mu()) {
        (Some(g1), Some(g2), Some(mu)) if g2 > 2.0 && g1 >= g2 => FlatConstants::new(g1, g2, alpha, beta, mu, t0).ok(),
        _ => None,
    }
}

fn fit_mode_for(beta: f64) -> FitMode {
    if beta > 0.0 {
        FitMode::Pointwise
    } else {
        FitMode::WindowedMax
    }
}

/// Averaged points `z(t)` at every record with `t >= from`.
pub fn averaged_series(traj: &Trajectory, obj: &Objective, delta: f64, from: f64) -> Result<Vec<AveragedPoint>> {
    traj.records
        .iter()
        .filter(|r| r.t >= from && r.t / 2.0 >= traj.spec.t0)
        .map(|r| averaged_point(traj, r.t, delta, obj))
        .collect()
}

/// `(t, inf_{[t/2, t]} f)` at every sample with `t >= from`.
pub fn windowed_inf_series(series: &[(f64, f64)], t0: f64, from: f64) -> Result<Vec<(f64, f64)>> {
    series
        .iter()
        .filter(|&&(t, _)| t >= from && t / 2.0 >= t0)
        .map(|&(t, _)| windowed_inf(series, t).map(|v| (t, v)))
        .collect()
}

fn spec_fit_start(spec: &DynamicsSpec, decades: f64) -> f64 {
    spec.t_end / 10f64.powf(decades)
}

struct DynamicsRun {
    traj: Trajectory,
    constants: Value,
    claims: Vec<ClaimResult>,
}

fn evaluate_dynamics_claim(
    claim: Claim,
    idx: usize,
    traj: &Trajectory,
    obj: &Objective,
    analysis: &AnalysisBlock,
    cache: &mut Option<Vec<AveragedPoint>>,
) -> Result<ClaimResult> {
    let eps = analysis.epsilon;
    let decades = analysis.fit_decades;
    let fit_from = spec_fit_start(&traj.spec, decades);
    let fit_tail = |series: &[(f64, f64)], mode| fit_last_decades(series, mode, decades);
    let spec = &traj.spec;
    let beta = spec.beta_eff();
    let alpha = spec.alpha;
    let f_series = traj.f_gap_series();
    let sharp = sharp_constants(obj, alpha, beta);
    let flat = flat_constants(obj, alpha, beta, spec.t0);
    let need_sharp = || {
        sharp
            .clone()
            .ok_or_else(|| Error::BoundNotApplicable("objective has no sharp-geometry metadata".into()))
    };
    let need_flat = || {
        flat.clone()
            .ok_or_else(|| Error::BoundNotApplicable("objective has no flat-geometry metadata".into()))
    };
    let e_m0 = mechanical_energy_at_start(obj, &spec.x0, spec.t0, alpha, beta);

    let slope_claim = |fit: crate::analysis::RateFit, threshold: f64| {
        let detail = if fit.vanished {
            format!(
                "gap below floating-point resolution across the last decade ({} resolvable samples)",
                fit.samples
            )
        } else {
            format!("{:?} fit over [{:.4e}, {:.4e}], {} samples", fit.mode, fit.window.0, fit.window.1, fit.samples)
        };
        (fit.exponent, threshold, detail)
    };

    let r = match claim {
        Claim::SharpRate => {
            let c = need_sharp()?;
            let (m, t, d) = slope_claim(fit_tail(&f_series, fit_mode_for(beta))?, -c.rate_exponent() + SLOPE_TOL);
            ClaimResult::check(claim, idx, m, t, d)
        }
        Claim::SharpExplicitBound => {
            let c = need_sharp()?;
            let t1 = c.t1.ok_or_else(|| Error::BoundNotApplicable("requires alpha > 1 + 2/gamma".into()))?;
            let mut worst = f64::NEG_INFINITY;
            let mut count = 0;
            for r in traj.records.iter().filter(|r| r.t >= t1) {
                let b = bound_sharp_general(r.t, &c, e_m0, spec.t0)?;
                worst = worst.max(r.f_gap - b);
                count += 1;
            }
            if count == 0 {
                return Ok(ClaimResult::failed(claim, Some(idx), format!("no samples past t1 = {t1}")));
            }
            ClaimResult::check(
                claim,
                idx,
                worst,
                BOUND_SLACK,
                format!("max(gap - bound) over {count} samples with t >= t1 = {t1:.6}"),
            )
        }
        Claim::SharpCriticalBound => {
            let c = need_sharp()?;
            let mut worst = f64::NEG_INFINITY;
            let mut count = 0;
            for r in traj.records.iter().filter(|r| r.t >= spec.t0 + beta) {
                let b = bound_sharp_critical(r.t, &c, e_m0, spec.t0)?;
                worst = worst.max(r.f_gap - b);
                count += 1;
            }
            if count == 0 {
                return Ok(ClaimResult::failed(claim, Some(idx), "no samples past t0 + beta"));
            }
            ClaimResult::check(claim, idx, worst, BOUND_SLACK, format!("max(gap - bound) over {count} samples"))
        }
        Claim::GradientIntegrability => {
            let c = need_sharp()?;
            let d = cumulative_weighted_integral(&traj.grad_sq_series(), c.rate_exponent())?;
            ClaimResult::check(
                claim,
                idx,
                d.tail_fraction,
                TAIL_TOLERANCE,
                format!("delta = {}, total = {:.6e}", d.delta, d.total()),
            )
        }
        Claim::EnergyMonotone => {
            let em = mechanical_energy_series(traj);
            let inc = max_increase(em.iter().map(|e| e.1));
            ClaimResult::check(claim, idx, inc, 1e-8 * e_m0, format!("E_m(t0) = {e_m0:.6e}"))
        }
        Claim::SharpCertificates => {
            let c = need_sharp()?;
            let cert = sharp_certificates(traj, obj, &c)?;
            let Some(first) = cert.first() else {
                return Ok(ClaimResult::failed(claim, Some(idx), "no samples past t0 + beta (alpha - lambda)"));
            };
            let inc_h = max_increase(cert.iter().map(|s| s.h)) / first.h;
            let inc_g = max_increase(cert.iter().map(|s| s.g)) / first.g;
            ClaimResult::check(
                claim,
                idx,
                inc_h.max(inc_g),
                1e-6,
                format!("relative max increase: H {inc_h:.3e}, G {inc_g:.3e}"),
            )
        }
        Claim::ImprovedRate => {
            let (m, t, d) = slope_claim(fit_tail(&f_series, FitMode::WindowedMax)?, -(alpha - eps) + SLOPE_TOL);
            ClaimResult::check(claim, idx, m, t, d)
        }
        Claim::ImprovedIntegrability => {
            let d = cumulative_weighted_integral(&f_series, alpha - eps)?;
            ClaimResult::check(
                claim,
                idx,
                d.tail_fraction,
                TAIL_TOLERANCE,
                format!("delta = {}, total = {:.6e}", d.delta, d.total()),
            )
        }
        Claim::AveragedRate => {
            let pts = averaged_cache(cache, traj, obj, alpha - eps, fit_from)?;
            let series: Vec<(f64, f64)> = pts.iter().map(|p| (p.t, p.f_gap_z)).collect();
            let (m, t, d) = slope_claim(fit_tail(&series, FitMode::Pointwise)?, -(alpha + 1.0 - eps) + SLOPE_TOL);
            ClaimResult::check(claim, idx, m, t, d)
        }
        Claim::WindowedInfRate | Claim::FlatInfRate => {
            let threshold = if claim == Claim::FlatInfRate {
                -need_flat()?.inf_rate_exponent() + SLOPE_TOL
            } else {
                -(alpha + 1.0 - eps) + SLOPE_TOL
            };
            let series = windowed_inf_series(&f_series, spec.t0, fit_from)?;
            let (m, t, d) = slope_claim(fit_tail(&series, FitMode::Pointwise)?, threshold);
            ClaimResult::check(claim, idx, m, t, d)
        }
        Claim::LiminfScaling => {
            let delta = alpha - eps;
            let hi = check_liminf_scaling(&f_series, delta)?;
            let cut: Vec<(f64, f64)> = f_series.iter().copied().filter(|p| p.0 <= spec.t_end / 10.0).collect();
            let lo = check_liminf_scaling(&cut, delta)?;
            ClaimResult {
                claim,
                run: Some(idx),
                passed: hi < lo,
                measured: Some(hi),
                threshold: Some(lo),
                detail: format!(
                    "min of t^(delta+1) log(t) gap over the last decade: {hi:.6e} at horizon {:.3e}, {lo:.6e} at {:.3e}",
                    spec.t_end,
                    spec.t_end / 10.0
                ),
            }
        }
        Claim::Jensen => {
            let pts = averaged_cache(cache, traj, obj, alpha - eps, fit_from)?;
            let worst = pts
                .iter()
                .map(|p| p.f_gap_z - p.mean_f_gap * (1.0 + 1e-12))
                .fold(f64::NEG_INFINITY, f64::max);
            ClaimResult::check(claim, idx, worst, 0.0, format!("{} averaged points", pts.len()))
        }
        Claim::FlatRate => {
            let fc = need_flat()?;
            let (m, t, d) = slope_claim(fit_tail(&f_series, FitMode::WindowedMax)?, -fc.rate_exponent() + SLOPE_TOL);
            ClaimResult::check(claim, idx, m, t, d)
        }
        Claim::FlatIntegrability => {
            let fc = need_flat()?;
            let d = cumulative_weighted_integral(&traj.grad_sq_series(), fc.rate_exponent())?;
            ClaimResult::check(
                claim,
                idx,
                d.tail_fraction,
                TAIL_TOLERANCE,
                format!("delta = {}, total = {:.6e}", d.delta, d.total()),
            )
        }
        Claim::FlatVBounded => {
            let fc = need_flat()?;
            let cert = flat_certificates(traj, obj, &fc);
            let half = spec.t_end / 2.0;
            let before = cert.iter().filter(|c| c.t < half).map(|c| c.v).fold(0.0, f64::max);
            let after = cert.iter().filter(|c| c.t >= half).map(|c| c.v).fold(0.0, f64::max);
            if before <= 0.0 {
                return Ok(ClaimResult::failed(claim, Some(idx), "no samples between t1 and t_end/2"));
            }
            ClaimResult::check(
                claim,
                idx,
                after / before,
                1.01,
                format!("max v before t_end/2 = {before:.6e}, after = {after:.6e}"),
            )
        }
        Claim::IgahdRate | Claim::IgahdSummability | Claim::OscillationDamping => {
            return cfg_err(format!("{claim:?} needs a scheme block"));
        }
    };
    Ok(r)
}

fn averaged_cache<'a>(
    cache: &'a mut Option<Vec<AveragedPoint>>,
    traj: &Trajectory,
    obj: &Objective,
    delta: f64,
    from: f64,
) -> Result<&'a Vec<AveragedPoint>> {
    if cache.is_none() {
        *cache = Some(averaged_series(traj, obj, delta, from)?);
    }
    Ok(cache.as_ref().expect("filled above"))
}

fn dynamics_constants(traj: &Trajectory, obj: &Objective) -> Value {
    let spec = &traj.spec;
    let beta = spec.beta_eff();
    let e_m0 = mechanical_energy_at_start(obj, &spec.x0, spec.t0, spec.alpha, beta);
    let mut out = json!({
        "alpha": spec.alpha,
        "beta": beta,
        "t0": spec.t0,
        "e_m_t0": e_m0,
    });
    if let Some(c) = sharp_constants(obj, spec.alpha, beta) {
        let mut sharp = serde_json::to_value(&c).unwrap_or(Value::Null);
        if c.is_supercritical() {
            sharp["explicit_k"] = explicit_k(&c, e_m0).map_or(Value::Null, Value::from);
            sharp["explicit_k_squared_factor"] = explicit_k_squared_factor(&c, e_m0).map_or(Value::Null, Value::from);
            // bound from the monotone energy at the first sample past t1
            if let Some(r) = c.t1.and_then(|t1| traj.records.iter().find(|r| r.t >= t1)) {
                if let Ok(h) = energy_h_sharp(&r.state(), obj, &c) {
                    sharp["energy_k"] = json!({ "t": r.t, "value": h });
                    sharp["energy_bound_at_t_end"] =
                        bound_sharp_from_energy(spec.t_end, &c, h, r.t).map_or(Value::Null, Value::from);
                }
            }
            sharp["explicit_bound_at_t_end"] =
                bound_sharp_general(spec.t_end, &c, e_m0, spec.t0).map_or(Value::Null, Value::from);
        }
        out["sharp"] = sharp;
    }
    if let Some(fc) = flat_constants(obj, spec.alpha, beta, spec.t0) {
        out["flat"] = serde_json::to_value(&fc).unwrap_or(Value::Null);
    }
    out
}

fn run_dynamics_one(
    idx: usize,
    block: &DynamicsBlock,
    beta: f64,
    obj: &Objective,
    x0: &[f64],
    analysis: &AnalysisBlock,
) -> Result<DynamicsRun> {
    let spec = DynamicsSpec::new(block.variant, block.alpha, beta, block.t0, x0.to_vec(), block.t_end)?
        .with_sampling(block.sampling)
        .with_tolerances(block.rtol, block.atol);
    let traj = integrate(&spec, obj)?;
    let mut cache = None;
    let claims = analysis
        .claims
        .iter()
        .map(|&c| {
            evaluate_dynamics_claim(c, idx, &traj, obj, analysis, &mut cache).unwrap_or_else(|e| {
                ClaimResult::failed(c, Some(idx), format!("{}: {e}", e.kind()))
            })
        })
        .collect();
    let constants = dynamics_constants(&traj, obj);
    Ok(DynamicsRun { traj, constants, claims })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn run_dynamics(cfg: &ExperimentConfig, block: &DynamicsBlock, obj: &Objective, x0: &[f64], out: &Path) -> Result<ExperimentReport> {
    let unit = block.beta_unit.scale(obj.lipschitz_grad(), "dynamics.beta_unit")?;
    let betas: Vec<f64> = block.betas.iter().map(|b| b * unit).collect();
    let runs: Vec<DynamicsRun> = betas
        .par_iter()
        .enumerate()
        .map(|(i, &b)| run_dynamics_one(i, block, b, obj, x0, &cfg.analysis))
        .collect::<Result<_>>()?;

    let mut entries = Vec::new();
    let mut claims = Vec::new();
    let mut constants = Vec::new();
    for (i, run) in runs.into_iter().enumerate() {
        let file = format!("trajectory-{i:02}.csv");
        run.traj.write_csv(fs::File::create(out.join(&file))?, cfg.include_x)?;
        entries.push(RunEntry {
            index: i,
            alpha: block.alpha,
            beta: run.traj.spec.beta_eff(),
            s: None,
            file,
            status: "ok".into(),
            diverged_at: None,
            guarantee: None,
        });
        claims.extend(run.claims);
        constants.push(run.constants);
    }
    write_json(&out.join("constants.json"), &json!({ "objective": obj.name(), "runs": constants }))?;
    Ok(report(cfg, claims, entries))
}

fn report(cfg: &ExperimentConfig, claims: Vec<ClaimResult>, runs: Vec<RunEntry>) -> ExperimentReport {
    ExperimentReport {
        name: cfg.name.clone(),
        all_passed: claims.iter().all(|c| c.passed),
        claims,
        runs,
    }
}

fn scheme_claims(claim: Claim, idx: usize, log: &IterateLog, window: (usize, usize)) -> Result<ClaimResult> {
    let r = match claim {
        Claim::IgahdRate => {
            let hi = window.1.min(log.len());
            let fit = fit_rate(&log.f_gap_series(), (window.0 as f64, hi as f64), FitMode::Pointwise)?;
            ClaimResult::check(
                claim,
                idx,
                fit.exponent,
                -2.0 + SCHEME_SLOPE_TOL,
                format!("pointwise fit over k in [{}, {hi}], residual rms {:.3e}", window.0, fit.residual_rms),
            )
        }
        Claim::IgahdSummability => {
            let frac = weighted_grad_tail_fraction(log, 2.0);
            let decade = weighted_grad_tail_fraction(log, 10.0);
            ClaimResult::check(
                claim,
                idx,
                frac,
                TAIL_TOLERANCE,
                format!("share of sum k^2 |grad F|^2 from the last factor-2 span (last decade: {decade:.4})"),
            )
        }
        _ => return cfg_err(format!("{claim:?} needs a dynamics block")),
    };
    Ok(r)
}

fn run_scheme(cfg: &ExperimentConfig, block: &SchemeBlock, obj: &Objective, x0: &[f64], out: &Path) -> Result<ExperimentReport> {
    let beta_unit = block.beta_unit.scale(obj.lipschitz_grad(), "scheme.beta_unit")?;
    let s = block.step * block.step_unit.scale(obj.lipschitz_grad(), "scheme.step_unit")?;
    let betas: Vec<f64> = block.betas.iter().map(|b| b * beta_unit).collect();
    let sweep = betas.len() > 1;

    let results: Vec<Result<IterateLog>> = betas
        .par_iter()
        .map(|&beta| match block.method {
            Method::Igahd => SchemeConfig::new(block.alpha, beta, s, block.max_iter, x0.to_vec())
                .and_then(|c| igahd_run(&c.with_store_iterates(cfg.include_x), obj)),
            Method::GradientDescent => gradient_descent_run(s, block.max_iter, x0, obj),
        })
        .collect();

    let mut entries = Vec::new();
    let mut logs: Vec<Option<IterateLog>> = Vec::new();
    for (i, (res, &beta)) in results.into_iter().zip(&betas).enumerate() {
        let file = format!("iterates-{i:02}.csv");
        let (log, status, diverged_at) = match res {
            Ok(log) => (log, "ok", None),
            Err(Error::Diverged { iteration, log }) if sweep => (*log, "diverged", Some(iteration)),
            Err(e) => return Err(e),
        };
        log.write_csv(fs::File::create(out.join(&file))?)?;
        entries.push(RunEntry {
            index: i,
            alpha: block.alpha,
            beta,
            s: Some(s),
            file,
            status: status.into(),
            diverged_at,
            guarantee: Some(log.guarantee),
        });
        logs.push(diverged_at.is_none().then_some(log));
    }

    let mut claims = Vec::new();
    for &claim in &cfg.analysis.claims {
        if claim == Claim::OscillationDamping {
            claims.push(oscillation_claim(&logs, &betas, cfg.analysis.iter_window));
            continue;
        }
        for (i, log) in logs.iter().enumerate() {
            claims.push(match log {
                Some(log) => scheme_claims(claim, i, log, cfg.analysis.iter_window)
                    .unwrap_or_else(|e| ClaimResult::failed(claim, Some(i), format!("{}: {e}", e.kind()))),
                None => ClaimResult::failed(claim, Some(i), "run diverged"),
            });
        }
    }
    let divergence_threshold = entries
        .iter()
        .find(|e| e.status == "diverged")
        .map(|e| e.beta);
    write_json(
        &out.join("constants.json"),
        &json!({
            "objective": obj.name(),
            "lipschitz_grad": obj.lipschitz_grad(),
            "mu": obj.mu(),
            "f_star": obj.f_star(),
            "s": s,
            "alpha": block.alpha,
            "betas": betas,
            "smallest_diverging_beta": divergence_threshold,
        }),
    )?;
    Ok(report(cfg, claims, entries))
}

fn oscillation_claim(logs: &[Option<IterateLog>], betas: &[f64], window: (usize, usize)) -> ClaimResult {
    let claim = Claim::OscillationDamping;
    if logs.len() < 2 {
        return ClaimResult::failed(claim, None, "needs at least two runs");
    }
    let mut order: Vec<usize> = (0..betas.len()).collect();
    order.sort_by(|&a, &b| betas[a].total_cmp(&betas[b]));
    let mut counts = Vec::new();
    for &i in &order {
        let Some(log) = &logs[i] else {
            return ClaimResult::failed(claim, None, format!("run {i} diverged"));
        };
        let truncated = IterateLog {
            records: log.records.iter().filter(|r| r.k <= window.1).cloned().collect(),
            ..log.clone()
        };
        match oscillation_metric(&truncated, window.0) {
            Ok(o) => counts.push(o.local_max_count),
            Err(e) => return ClaimResult::failed(claim, None, e.to_string()),
        }
    }
    let worst_increase = counts.windows(2).map(|w| w[1] as f64 - w[0] as f64).fold(f64::NEG_INFINITY, f64::max);
    ClaimResult {
        claim,
        run: None,
        passed: worst_increase <= 0.0,
        measured: Some(worst_increase),
        threshold: Some(0.0),
        detail: format!(
            "local-max counts over k in [{}, {}] by increasing beta: {counts:?}",
            window.0, window.1
        ),
    }
}

/// Runs one experiment and writes its artifacts below `cfg.output_dir`:
/// per-run CSVs, `manifest.json`, `constants.json` and `analysis.json`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out)?;
    let obj = build_objective(&cfg.objective)?;
    let x0 = build_x0(&cfg.x0, obj.dim())?;
    let report = match (&cfg.dynamics, &cfg.scheme) {
        (Some(d), None) => run_dynamics(cfg, d, &obj, &x0, out)?,
        (None, Some(s)) => run_scheme(cfg, s, &obj, &x0, out)?,
        _ => unreachable!("validated"),
    };
    write_json(
        &out.join("manifest.json"),
        &json!({
            "name": cfg.name,
            "objective": obj.name(),
            "kind": if cfg.dynamics.is_some() { "dynamics" } else { "scheme" },
            "runs": report.runs,
        }),
    )?;
    write_json(&out.join("analysis.json"), &report)?;
    Ok(report)
}

/// Machine-readable error report.
pub fn error_json(err: &Error) -> Value {
    let mut v = json!({ "error": err.kind(), "message": err.to_string() });
    match err {
        Error::Diverged { iteration, log } => {
            v["iteration"] = json!(iteration);
            v["last_finite_iterate"] = json!(log.records.last().map(|r| r.k));
        }
        Error::IntegrationFailure { t, .. } | Error::OracleFailure { t } => v["t"] = json!(t),
        _ => {}
    }
    v
}

/// Writes `error.json` into the output directory when it can be created.
pub fn write_error(out: &Path, err: &Error) {
    if fs::create_dir_all(out).is_ok() {
        let _ = write_json(&out.join("error.json"), &error_json(err));
    }
}

pub struct Preset {
    pub name: &'static str,
    pub reproduces: &'static str,
    build: fn() -> ExperimentConfig,
}

impl Preset {
    pub fn config(&self) -> ExperimentConfig {
        (self.build)()
    }
}

fn quadratic(mu: f64) -> ObjectiveSpec {
    ObjectiveSpec::Quadratic { dim: 2, mu, x_star: None }
}

fn dynamics(alpha: f64, beta: f64, t_end: f64, samples: usize) -> DynamicsBlock {
    DynamicsBlock {
        variant: Variant::DinAvd,
        alpha,
        betas: vec![beta],
        beta_unit: Unit::Absolute,
        t0: 1.0,
        t_end,
        sampling: Sampling::LogSpaced(samples),
        rtol: 1e-10,
        // relative error control only: the gap decays far below any fixed absolute tolerance
        atol: 1e-300,
    }
}

fn base(name: &str, objective: ObjectiveSpec, x0: X0Spec, claims: Vec<Claim>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        objective,
        dynamics: None,
        scheme: None,
        x0,
        analysis: AnalysisBlock {
            claims,
            ..AnalysisBlock::default()
        },
        output_dir: PathBuf::from("out").join(name),
        include_x: true,
    }
}

fn thm1_sharp() -> ExperimentConfig {
    use Claim::*;
    ExperimentConfig {
        dynamics: Some(dynamics(4.0, 0.5, 1e4, 1000)),
        ..base(
            "thm1-sharp-quadratic",
            quadratic(1.0),
            X0Spec::Literal(vec![1.0, -0.5]),
            vec![SharpRate, SharpExplicitBound, GradientIntegrability, EnergyMonotone, SharpCertificates, Jensen],
        )
    }
}

fn thm1_critical() -> ExperimentConfig {
    use Claim::*;
    ExperimentConfig {
        dynamics: Some(dynamics(2.0, 1.0, 500.0, 1000)),
        ..base(
            "thm1-critical-quadratic",
            quadratic(1.0),
            X0Spec::Literal(vec![1.0, -0.5]),
            vec![SharpCriticalBound, EnergyMonotone, Jensen],
        )
    }
}

fn thm2_improved(name: &str, eps: f64) -> ExperimentConfig {
    use Claim::*;
    let mut cfg = ExperimentConfig {
        dynamics: Some(dynamics(3.0, 1.0, 1e4, 4000)),
        ..base(
            name,
            // small mu keeps the exponentially damped tail above underflow up to t = 1e4
            quadratic(0.01),
            X0Spec::Literal(vec![1.0, -0.5]),
            vec![
                ImprovedRate,
                ImprovedIntegrability,
                AveragedRate,
                WindowedInfRate,
                LiminfScaling,
                EnergyMonotone,
                Jensen,
            ],
        )
    };
    cfg.analysis.epsilon = eps;
    cfg
}

fn thm3_flat() -> ExperimentConfig {
    use Claim::*;
    let mut cfg = ExperimentConfig {
        // t^4 F oscillates with a period of several decades in log time, so the
        // slope fits need a long horizon
        dynamics: Some(dynamics(3.0, 1.0, 1e8, 8001)),
        ..base(
            "thm3-flat-power4",
            ObjectiveSpec::PowerNorm { dim: 2, gamma: 4.0, mu: 0.5, x_star: None },
            X0Spec::Literal(vec![1.0, -0.5]),
            vec![FlatRate, FlatIntegrability, FlatVBounded, FlatInfRate, EnergyMonotone, Jensen],
        )
    };
    cfg.analysis.fit_decades = 6.0;
    cfg
}

fn scheme(betas: Vec<f64>, step: f64, max_iter: usize) -> SchemeBlock {
    SchemeBlock {
        method: Method::Igahd,
        alpha: 3.0,
        betas,
        beta_unit: Unit::InvSqrtL,
        step,
        step_unit: Unit::InvL,
        max_iter,
    }
}

fn igahd_ls() -> ExperimentConfig {
    use Claim::*;
    ExperimentConfig {
        scheme: Some(scheme(vec![1.0], 1.0, 5000)),
        include_x: false,
        ..base(
            "igahd-least-squares",
            ObjectiveSpec::LeastSquaresRandom { n: 50, seed: 2021 },
            X0Spec::Normal { seed: 7, scale: 1.0 },
            vec![IgahdRate, IgahdSummability],
        )
    }
}

fn igahd_damping() -> ExperimentConfig {
    ExperimentConfig {
        // s = 1/L diverges for beta = 10/sqrt(L); 0.04/L keeps all three runs stable
        scheme: Some(scheme(vec![0.0, 1.0, 10.0], 0.04, 5000)),
        include_x: false,
        ..base(
            "igahd-beta-damping",
            ObjectiveSpec::LeastSquaresRandom { n: 50, seed: 2021 },
            X0Spec::Normal { seed: 7, scale: 1.0 },
            vec![Claim::OscillationDamping],
        )
    }
}

/// Step in units of `1/L` for the figure sweep: beta up to 100/sqrt(L) stays stable, 200/sqrt(L) diverges.
const FIGURE_STEP: f64 = 1e-4;
const FIGURE_ITERS: usize = 10_000;

fn figure1() -> ExperimentConfig {
    ExperimentConfig {
        scheme: Some(scheme(vec![0.0, 1.0, 10.0, 100.0, 200.0], FIGURE_STEP, FIGURE_ITERS)),
        include_x: false,
        ..base(
            "figure1-beta-sweep",
            ObjectiveSpec::LeastSquaresRandom { n: 500, seed: 2021 },
            X0Spec::Normal { seed: 7, scale: 1.0 },
            vec![],
        )
    }
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "thm1-sharp-quadratic",
        reproduces: "sharp geometry: rate t^(-2 alpha gamma/(gamma+2)), explicit bound, gradient integrability, energy certificates",
        build: thm1_sharp,
    },
    Preset {
        name: "thm1-critical-quadratic",
        reproduces: "sharp geometry at alpha = 1 + 2/gamma: O(1/t^2) bound",
        build: thm1_critical,
    },
    Preset {
        name: "thm2-improved-quadratic",
        reproduces: "quadratic growth: improved rate t^-(alpha-eps), averaged point, windowed infimum, liminf (eps = 0.1)",
        build: || thm2_improved("thm2-improved-quadratic", 0.1),
    },
    Preset {
        name: "thm2-improved-quadratic-eps05",
        reproduces: "same as thm2-improved-quadratic with eps = 0.5",
        build: || thm2_improved("thm2-improved-quadratic-eps05", 0.5),
    },
    Preset {
        name: "thm3-flat-power4",
        reproduces: "flat geometry (gamma1 = gamma2 = 4): rate t^(-2 gamma1/(gamma1-2)), gradient integrability, windowed infimum",
        build: thm3_flat,
    },
    Preset {
        name: "igahd-least-squares",
        reproduces: "IGAHD on least squares (N = 50): O(k^-2) gap and summable k^2 |grad F|^2",
        build: igahd_ls,
    },
    Preset {
        name: "igahd-beta-damping",
        reproduces: "IGAHD oscillation damping for beta in {0, 1, 10}/sqrt(L)",
        build: igahd_damping,
    },
    Preset {
        name: "figure1-beta-sweep",
        reproduces: "least-squares experiment (N = 500), beta in {0, 1, 10, 100, 200}/sqrt(L), reconstructed values",
        build: figure1,
    },
];

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// One line per preset: name and what it reproduces.
pub fn list_presets() -> String {
    PRESETS
        .iter()
        .map(|p| format!("{:<32} {}\n", p.name, p.reproduces))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_negative_alpha_naming_field() {
        let mut cfg = thm1_sharp();
        cfg.dynamics.as_mut().unwrap().alpha = -1.0;
        let text = serde_json::to_string(&cfg).unwrap();
        match ExperimentConfig::from_json(&text) {
            Err(Error::Config(msg)) => assert!(msg.contains("dynamics.alpha"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_unknown_claim_and_both_blocks() {
        let mut v = serde_json::to_value(thm1_sharp()).unwrap();
        v["analysis"]["claims"] = json!(["sharp-rate", "no-such-claim"]);
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("no-such-claim"));

        let mut both = thm1_sharp();
        both.scheme = Some(scheme(vec![1.0], 1.0, 10));
        assert!(matches!(both.validate(), Err(Error::Config(_))));

        let mut mixed = igahd_ls();
        mixed.analysis.claims.push(Claim::SharpRate);
        assert!(mixed.validate().is_err());
    }

    #[test]
    fn presets_roundtrip_through_json() {
        for p in PRESETS {
            let cfg = p.config();
            assert_eq!(cfg.name, p.name);
            cfg.validate().unwrap();
            let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
            assert_eq!(serde_json::to_value(&back).unwrap(), serde_json::to_value(&cfg).unwrap());
        }
    }

    #[test]
    fn listing_names_presets() {
        let text = list_presets();
        for name in ["thm1-sharp-quadratic", "thm3-flat-power4", "figure1-beta-sweep"] {
            assert!(text.contains(name));
        }
    }

    #[test]
    fn seeded_x0_is_deterministic() {
        let a = build_x0(&X0Spec::Normal { seed: 3, scale: 2.0 }, 5).unwrap();
        assert_eq!(a, build_x0(&X0Spec::Normal { seed: 3, scale: 2.0 }, 5).unwrap());
        assert!(build_x0(&X0Spec::Literal(vec![1.0]), 2).is_err());
    }

    #[test]
    fn least_squares_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.csv"), "2,0\n0,1\n1,1\n").unwrap();
        fs::write(dir.path().join("b.csv"), "1\n2\n3\n").unwrap();
        let cfg_text = json!({
            "name": "ls-csv",
            "objective": {"kind": "least_squares_csv", "matrix": "a.csv", "rhs": "b.csv"},
            "scheme": {"step": 1.0, "step_unit": "inv_l", "max_iter": 50},
            "x0": {"literal": [0.0, 0.0]},
            "output_dir": dir.path().join("out"),
        });
        let path = dir.path().join("cfg.json");
        fs::write(&path, cfg_text.to_string()).unwrap();
        let cfg = ExperimentConfig::load(&path).unwrap();
        let obj = build_objective(&cfg.objective).unwrap();
        assert_eq!(obj.dim(), 2);
        let report = run_experiment(&cfg).unwrap();
        assert!(report.all_passed);
        assert!(dir.path().join("out/iterates-00.csv").exists());
    }
}
