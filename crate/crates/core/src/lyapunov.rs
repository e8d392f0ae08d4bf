//! Closed-form rate constants and Lyapunov energies for the damped inertial
//! dynamics, for both the sharp (quadratic growth) and the flat geometries.
//!
//! Energies read the velocity combination `x' + beta grad F(x)` straight from
//! the integrator state `y`, so no trajectory differentiation is involved.

use serde::Serialize;

use crate::dynamics::{Record, State, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::objectives::Objective;
use crate::vecops::{dot, norm_sq, sub};

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Relative tolerance used to decide `alpha == 1 + 2/gamma`.
pub const CRITICAL_TOL: f64 = 1e-12;

/// `r^3 - (1 + c0) r^2 - 2 (1 + sqrt 2) r - 4`
pub fn r_star_poly(r: f64, c0: f64) -> f64 {
    ((r - (1.0 + c0)) * r - 2.0 * (1.0 + SQRT2)) * r - 4.0
}

fn r_star_poly_deriv(r: f64, c0: f64) -> f64 {
    (3.0 * r - 2.0 * (1.0 + c0)) * r - 2.0 * (1.0 + SQRT2)
}

/// Unique positive root of [`r_star_poly`].
///
/// The cubic is `-4` at zero and increasing past its largest critical point,
/// so bisection on `[0, max(10, 2(1 + c0) + 10)]` always brackets the root.
/// The bracket is shrunk to `1e-14` and polished with one Newton step.
pub fn solve_r_star(c0: f64) -> Result<f64> {
    if !(c0 >= 0.0 && c0.is_finite()) {
        return invalid(format!("c0 must be non-negative, got {c0}"));
    }
    let mut lo = 0.0;
    let mut hi = f64::max(10.0, 2.0 * (1.0 + c0) + 10.0);
    debug_assert!(r_star_poly(hi, c0) > 0.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if r_star_poly(mid, c0) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let d = r_star_poly_deriv(r, c0);
    let polished = r - r_star_poly(r, c0) / d;
    Ok(if r_star_poly(polished, c0).abs() <= r_star_poly(r, c0).abs() {
        polished
    } else {
        r
    })
}

/// Constants of the sharp-geometry analysis for parameters `(gamma, alpha, beta, mu)`.
///
/// The chain `c0 -> r* -> (c1, c2, t1)` only exists when `alpha > 1 + 2/gamma`;
/// it is `None` otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct SharpConstants {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub lambda: f64,
    pub k_alpha: f64,
    pub c0: Option<f64>,
    pub r_star: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub t1: Option<f64>,
    /// `|poly(r*)|`
    pub poly_residual: Option<f64>,
}

impl SharpConstants {
    pub fn new(gamma: f64, alpha: f64, beta: f64, mu: f64) -> Result<Self> {
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return invalid(format!("gamma must be >= 1, got {gamma}"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return invalid(format!("alpha must be positive, got {alpha}"));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return invalid(format!("beta must be non-negative, got {beta}"));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return invalid(format!("mu must be positive, got {mu}"));
        }
        let lambda = 2.0 * alpha / (gamma + 2.0);
        let k_alpha = 2.0 * alpha * gamma / (gamma + 2.0).powi(2) * (alpha - 1.0 - 2.0 / gamma);
        let mut c = Self {
            gamma,
            alpha,
            beta,
            mu,
            lambda,
            k_alpha,
            c0: None,
            r_star: None,
            c1: None,
            c2: None,
            t1: None,
            poly_residual: None,
        };
        if c.is_supercritical() {
            let gl = gamma * lambda;
            let c0 = beta * mu.sqrt() * gamma * (gl - 1.0) / (gl - 2.0);
            let r = solve_r_star(c0)?;
            c.c0 = Some(c0);
            c.r_star = Some(r);
            c.c1 = Some((1.0 + 2.0 / r).powi(2));
            c.c2 = Some((1.0 + c0) / r + (1.0 + SQRT2) / (r * r) + 4.0 / (3.0 * r.powi(3)));
            c.t1 = Some(c.optimal_shifted_time(r) + beta * (alpha - lambda));
            c.poly_residual = Some(r_star_poly(r, c0).abs());
        }
        Ok(c)
    }

    /// `alpha r / ((gamma + 2) sqrt mu)`: the shifted time `t1 + beta (lambda - alpha)`.
    fn optimal_shifted_time(&self, r: f64) -> f64 {
        self.alpha * r / ((self.gamma + 2.0) * self.mu.sqrt())
    }

    pub fn critical_alpha(&self) -> f64 {
        1.0 + 2.0 / self.gamma
    }

    pub fn is_critical(&self) -> bool {
        (self.alpha - self.critical_alpha()).abs() <= CRITICAL_TOL * self.alpha
    }

    pub fn is_supercritical(&self) -> bool {
        self.alpha > self.critical_alpha() && !self.is_critical()
    }

    /// `beta (lambda - alpha)`, the (non-positive) time shift in every bound.
    pub fn shift(&self) -> f64 {
        self.beta * (self.lambda - self.alpha)
    }

    /// Rate exponent `2 alpha gamma / (gamma + 2)` (equal to `gamma lambda`).
    pub fn rate_exponent(&self) -> f64 {
        2.0 * self.alpha * self.gamma / (self.gamma + 2.0)
    }

    fn chain(&self) -> Result<(f64, f64, f64, f64, f64)> {
        match (self.c0, self.r_star, self.c1, self.c2, self.t1) {
            (Some(c0), Some(r), Some(c1), Some(c2), Some(t1)) => Ok((c0, r, c1, c2, t1)),
            _ => Err(Error::BoundNotApplicable(format!(
                "requires alpha > 1 + 2/gamma = {}, got alpha = {}",
                self.critical_alpha(),
                self.alpha
            ))),
        }
    }
}

/// `E_m(t) = (1 + beta alpha / t)(F - F*) + 0.5 ||x' + beta grad F||^2`
pub fn mechanical_energy(t: f64, f_gap: f64, y: &[f64], alpha: f64, beta: f64) -> f64 {
    (1.0 + beta * alpha / t) * f_gap + 0.5 * norm_sq(y)
}

/// `E_m(t0)` in closed form for the rest initial condition `x'(t0) = 0`.
pub fn mechanical_energy_at_start(obj: &Objective, x0: &[f64], t0: f64, alpha: f64, beta: f64) -> f64 {
    let g = obj.grad(x0);
    (1.0 + beta * alpha / t0) * obj.gap(x0) + 0.5 * beta * beta * norm_sq(&g)
}

fn anchored_norm_sq(lambda: f64, state: &State, obj: &Objective) -> f64 {
    let h = sub(&state.x, obj.x_star());
    h.iter()
        .zip(&state.y)
        .map(|(hi, yi)| {
            let v = lambda * hi + state.t * yi;
            v * v
        })
        .sum()
}

/// `(t^2 + t beta (lambda - alpha)) (F - F*) + 0.5 ||lambda (x - x*) + t (x' + beta grad F)||^2`
pub fn energy_sharp(state: &State, obj: &Objective, c: &SharpConstants) -> f64 {
    let t = state.t;
    (t * t + t * c.shift()) * obj.gap(&state.x) + 0.5 * anchored_norm_sq(c.lambda, state, obj)
}

/// Derivative `phi(t)` of [`phi_primitive`].
pub fn phi_density(t: f64, c: &SharpConstants) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("phi needs t > 0, got {t}")));
    }
    if c.is_critical() {
        return Ok(0.0);
    }
    let (c0, ..) = c.chain().map_err(|e| Error::Domain(e.to_string()))?;
    let (a, g, mu) = (c.alpha, c.gamma, c.mu);
    Ok(c.k_alpha / (mu * t * t)
        * (mu.sqrt() * (1.0 + c0)
            + 2.0 * a / ((g + 2.0) * t) * (1.0 + SQRT2)
            + 4.0 * a * a / ((g + 2.0).powi(2) * mu.sqrt() * t * t)))
}

/// `Phi(t) = -int_t^inf phi`, non-positive and vanishing as `t -> inf`.
pub fn phi_primitive(t: f64, c: &SharpConstants) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("Phi needs t > 0, got {t}")));
    }
    if c.is_critical() {
        return Ok(0.0);
    }
    let (c0, ..) = c.chain().map_err(|e| Error::Domain(e.to_string()))?;
    let (a, g, mu) = (c.alpha, c.gamma, c.mu);
    Ok(-c.k_alpha / mu
        * (mu.sqrt() * (1.0 + c0) / t
            + a * (1.0 + SQRT2) / ((g + 2.0) * t * t)
            + 4.0 * a * a / (3.0 * (g + 2.0).powi(2) * mu.sqrt() * t.powi(3))))
}

/// Weight `(t + shift)^(gamma lambda - 2) exp(-Phi(t + shift))` turning the
/// sharp energy into a non-increasing function.
fn sharp_weight(t: f64, c: &SharpConstants) -> Result<f64> {
    let s = t + c.shift();
    if !(s > 0.0) {
        return Err(Error::Domain(format!(
            "needs t > beta (alpha - lambda) = {}, got {t}",
            -c.shift()
        )));
    }
    Ok(s.powf(c.gamma * c.lambda - 2.0) * (-phi_primitive(s, c)?).exp())
}

/// `E(t) (t + shift)^(gamma lambda - 2) exp(-Phi(t + shift))`
pub fn energy_h_sharp(state: &State, obj: &Objective, c: &SharpConstants) -> Result<f64> {
    if !c.is_supercritical() {
        return Err(Error::Domain(format!(
            "requires alpha > 1 + 2/gamma = {}",
            c.critical_alpha()
        )));
    }
    Ok(energy_sharp(state, obj, c) * sharp_weight(state.t, c)?)
}

/// Constant of the explicit bound with the `(1 + beta gamma sqrt(mu) / r*)` factor.
///
/// The same factor is also assembled as `1 + beta (alpha - lambda)(gamma + 2) sqrt(mu) / (alpha r*)`
/// and the two are required to agree to `1e-12` relative.
pub fn explicit_k(c: &SharpConstants, e_m_t0: f64) -> Result<f64> {
    let (_, r, c1, c2, _) = c.chain()?;
    let factor = 1.0 + c.beta * c.gamma * c.mu.sqrt() / r;
    let factor_alt =
        1.0 + c.beta * (c.alpha - c.lambda) * (c.gamma + 2.0) * c.mu.sqrt() / (c.alpha * r);
    if (factor - factor_alt).abs() > 1e-12 * factor {
        return Err(Error::InvalidState(format!(
            "bound factor forms disagree: {factor} vs {factor_alt}"
        )));
    }
    Ok(explicit_k_with_factor(c, e_m_t0, r, c1, c2, factor))
}

/// Same constant with the factor squared, `(t1 / (t1 + shift))^2`, which is what
/// bounding `E(t1) <= c1 t1^2 E_m(t0)` produces when carried through.
pub fn explicit_k_squared_factor(c: &SharpConstants, e_m_t0: f64) -> Result<f64> {
    let (_, r, c1, c2, _) = c.chain()?;
    let factor = 1.0 + c.beta * c.gamma * c.mu.sqrt() / r;
    Ok(explicit_k_with_factor(c, e_m_t0, r, c1, c2, factor * factor))
}

fn explicit_k_with_factor(c: &SharpConstants, e_m_t0: f64, r: f64, c1: f64, c2: f64, factor: f64) -> f64 {
    let g = c.gamma;
    c1 * (2.0 * g / (g + 2.0) * c2 * (c.alpha - 1.0 - 2.0 / g)).exp()
        * factor
        * e_m_t0
        * c.optimal_shifted_time(r).powf(c.rate_exponent())
}

/// Closed-form bound `K / (t + shift)^(2 alpha gamma / (gamma + 2))` on `F(x(t)) - F*`.
///
/// Valid for `alpha > 1 + 2/gamma`, `t0 <= alpha r* / ((gamma + 2) sqrt mu)` and `t >= t1`.
pub fn bound_sharp_general(t: f64, c: &SharpConstants, e_m_t0: f64, t0: f64) -> Result<f64> {
    let (_, r, _, _, t1) = c.chain()?;
    let u1 = c.optimal_shifted_time(r);
    if t0 > u1 {
        return Err(Error::BoundNotApplicable(format!(
            "closed form needs t0 <= {u1}, got t0 = {t0}"
        )));
    }
    if t < t1 {
        return Err(Error::BoundNotApplicable(format!("needs t >= t1 = {t1}, got {t}")));
    }
    Ok(explicit_k(c, e_m_t0)? / (t + c.shift()).powf(c.rate_exponent()))
}

/// Bound from the monotone energy directly: for `t >= t_a > beta (alpha - lambda)`,
/// `F(x(t)) - F* <= H(t_a) / (t + shift)^(2 alpha gamma / (gamma + 2))`.
pub fn bound_sharp_from_energy(t: f64, c: &SharpConstants, h_at: f64, t_at: f64) -> Result<f64> {
    if !c.is_supercritical() {
        return Err(Error::BoundNotApplicable("requires alpha > 1 + 2/gamma".into()));
    }
    if !(t_at + c.shift() > 0.0) || t < t_at {
        return Err(Error::BoundNotApplicable(format!(
            "needs t >= t_a > {}, got t = {t}, t_a = {t_at}",
            -c.shift()
        )));
    }
    Ok(h_at / (t + c.shift()).powf(c.rate_exponent()))
}

/// Bound for the critical damping `alpha = 1 + 2/gamma`, valid for `t >= t0 + beta`:
/// `((t0 + beta)^2 + (lambda^2 + sqrt mu)/mu) e^(beta/t0) E_m(t0) / (t (t - beta))`.
pub fn bound_sharp_critical(t: f64, c: &SharpConstants, e_m_t0: f64, t0: f64) -> Result<f64> {
    if !c.is_critical() {
        return Err(Error::BoundNotApplicable(format!(
            "requires alpha = 1 + 2/gamma = {}, got {}",
            c.critical_alpha(),
            c.alpha
        )));
    }
    if t < t0 + c.beta {
        return Err(Error::BoundNotApplicable(format!(
            "needs t >= t0 + beta = {}, got {t}",
            t0 + c.beta
        )));
    }
    let b = c.beta;
    let lead = (t0 + b).powi(2) + (c.lambda * c.lambda + c.mu.sqrt()) / c.mu;
    Ok(lead * (b / t0).exp() * e_m_t0 / (t * (t - b)))
}

/// Sampled values of the monotone sharp certificates.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SharpCertificate {
    pub t: f64,
    pub energy: f64,
    pub h: f64,
    pub g: f64,
}

/// `H(t)` and `G(t) = H(t) + beta int_T^t u (u + shift)^(gamma lambda - 1) e^(-Phi(u + shift)) ||grad F||^2 du`
/// on every record with `t >= T = t0 + beta (alpha - lambda)`. The integral uses
/// the trapezoid rule on the record grid.
pub fn sharp_certificates(traj: &Trajectory, obj: &Objective, c: &SharpConstants) -> Result<Vec<SharpCertificate>> {
    let start = traj.spec.t0 - c.shift();
    let mut out: Vec<SharpCertificate> = Vec::new();
    let mut integral = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for r in traj.records.iter().filter(|r| r.t >= start && r.t + c.shift() > 0.0) {
        let state = r.state();
        let energy = energy_sharp(&state, obj, c);
        let h = energy * sharp_weight(r.t, c)?;
        if !c.is_supercritical() {
            return Err(Error::Domain("requires alpha > 1 + 2/gamma".into()));
        }
        let s = r.t + c.shift();
        let integrand = r.t
            * s.powf(c.gamma * c.lambda - 1.0)
            * (-phi_primitive(s, c)?).exp()
            * r.grad_norm
            * r.grad_norm;
        if let Some((tp, ip)) = prev {
            integral += 0.5 * (r.t - tp) * (integrand + ip);
        }
        prev = Some((r.t, integrand));
        out.push(SharpCertificate {
            t: r.t,
            energy,
            h,
            g: h + c.beta * integral,
        });
    }
    Ok(out)
}

/// Constants of the flat-geometry analysis (`gamma1 >= gamma2 > 2`).
#[derive(Debug, Clone, Serialize)]
pub struct FlatConstants {
    pub gamma1: f64,
    pub gamma2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub t0: f64,
    pub p: f64,
    pub lambda: f64,
    pub xi: f64,
    pub c1_flat: f64,
    pub k_growth: f64,
    pub t_m: f64,
    pub t1: f64,
    pub c2_flat: f64,
}

impl FlatConstants {
    pub fn new(gamma1: f64, gamma2: f64, alpha: f64, beta: f64, mu: f64, t0: f64) -> Result<Self> {
        if !(gamma1 > 2.0 && gamma2 > 2.0 && gamma1 >= gamma2) {
            return invalid(format!(
                "flat geometry needs gamma1 >= gamma2 > 2, got ({gamma1}, {gamma2})"
            ));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return invalid(format!("beta must be non-negative, got {beta}"));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return invalid(format!("mu must be positive, got {mu}"));
        }
        if !(t0 > 0.0 && t0.is_finite()) {
            return invalid(format!("t0 must be positive, got {t0}"));
        }
        let p = 4.0 / (gamma1 - 2.0);
        let lambda = 2.0 / (gamma1 - 2.0);
        if !(alpha > lambda && alpha.is_finite()) {
            return invalid(format!("alpha must exceed lambda = {lambda}, got {alpha}"));
        }
        let xi = lambda * (lambda + 1.0 - alpha);
        let c1_flat = (p + 1.0) * (lambda - alpha) - lambda * gamma1 * (2.0 * (lambda - alpha) + 1.0);
        let k_growth = mu / 2.0;
        let shift = beta * (lambda - alpha);
        let t_m = solve_t_m(p, shift, beta * c1_flat);
        let t1 = t0.max(beta * (2.0 * (alpha - lambda) - 1.0)).max(t_m);
        let c2_flat = -t1.powf(p - 2.0 / gamma2) / (t1 + shift).powf(2.0 * (p + 1.0) / gamma2) * xi
            / (2.0 * k_growth.powf(2.0 / gamma2));
        Ok(Self {
            gamma1,
            gamma2,
            alpha,
            beta,
            mu,
            t0,
            p,
            lambda,
            xi,
            c1_flat,
            k_growth,
            t_m,
            t1,
            c2_flat,
        })
    }

    pub fn shift(&self) -> f64 {
        self.beta * (self.lambda - self.alpha)
    }

    /// Threshold `(gamma1 + 2)/(gamma1 - 2)` on alpha.
    pub fn alpha_threshold(&self) -> f64 {
        (self.gamma1 + 2.0) / (self.gamma1 - 2.0)
    }

    /// Rate exponent `2 gamma1 / (gamma1 - 2)` (equal to `p + 2`).
    pub fn rate_exponent(&self) -> f64 {
        2.0 * self.gamma1 / (self.gamma1 - 2.0)
    }

    /// Exponent `(3 gamma1 - 2) gamma2 / (2 (gamma1 - 2)(gamma2 - 1))` of the windowed-infimum rate.
    pub fn inf_rate_exponent(&self) -> f64 {
        (3.0 * self.gamma1 - 2.0) * self.gamma2 / (2.0 * (self.gamma1 - 2.0) * (self.gamma2 - 1.0))
    }
}

/// Smallest `t > -shift` with `k t^p / (t + shift)^(p+1) <= 1/2`, by bisection on
/// the decreasing map. Degenerates to `max(-shift, 0)` when `k <= 0`.
fn solve_t_m(p: f64, shift: f64, k: f64) -> f64 {
    let lo0 = (-shift).max(0.0);
    if k <= 0.0 {
        return lo0;
    }
    let f = |t: f64| k * t.powf(p) / (t + shift).powf(p + 1.0) - 0.5;
    let mut lo = lo0;
    let mut hi = lo0.max(1.0);
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Flat energy with its decomposition `E = (t + shift) a + t (b + xi c)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlatEnergy {
    pub energy: f64,
    /// `t^p E(t)`
    pub h: f64,
    /// `t (F - F*)`
    pub a: f64,
    /// `||lambda (x - x*) + t (x' + beta grad F)||^2 / (2t)`
    pub b: f64,
    /// `||x - x*||^2 / (2t)`
    pub c: f64,
}

pub fn energy_flat(state: &State, obj: &Objective, fc: &FlatConstants) -> FlatEnergy {
    let t = state.t;
    let gap = obj.gap(&state.x);
    let h = sub(&state.x, obj.x_star());
    let a = t * gap;
    let b = anchored_norm_sq(fc.lambda, state, obj) / (2.0 * t);
    let c = dot(&h, &h) / (2.0 * t);
    let energy = (t * t + t * fc.shift()) * gap
        + 0.5 * fc.xi * dot(&h, &h)
        + 0.5 * anchored_norm_sq(fc.lambda, state, obj);
    FlatEnergy {
        energy,
        h: t.powf(fc.p) * energy,
        a,
        b,
        c,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlatCertificate {
    pub t: f64,
    pub h: f64,
    /// `H(t) - beta c1 int_{t1}^t u^(p-1) a(u) du`
    pub g: f64,
    /// `G(t) + beta int_{t1}^t u^(p+1) (u + shift) ||grad F||^2 du`
    pub f: f64,
    /// `(t + shift)^(p+1) a(t)`
    pub v: f64,
}

/// Flat certificates on every record with `t >= t1`, integrals by trapezoid.
pub fn flat_certificates(traj: &Trajectory, obj: &Objective, fc: &FlatConstants) -> Vec<FlatCertificate> {
    let mut out = Vec::new();
    let (mut int_a, mut int_g) = (0.0, 0.0);
    let mut prev: Option<(f64, f64, f64)> = None;
    for r in traj.records.iter().filter(|r| r.t >= fc.t1) {
        let e = energy_flat(&r.state(), obj, fc);
        let ia = r.t.powf(fc.p - 1.0) * e.a;
        let ig = r.t.powf(fc.p + 1.0) * (r.t + fc.shift()) * r.grad_norm * r.grad_norm;
        if let Some((tp, ap, gp)) = prev {
            int_a += 0.5 * (r.t - tp) * (ia + ap);
            int_g += 0.5 * (r.t - tp) * (ig + gp);
        }
        prev = Some((r.t, ia, ig));
        let g = e.h - fc.beta * fc.c1_flat * int_a;
        out.push(FlatCertificate {
            t: r.t,
            h: e.h,
            g,
            f: g + fc.beta * int_g,
            v: (r.t + fc.shift()).powf(fc.p + 1.0) * e.a,
        });
    }
    out
}

/// `E_m` on every record of a trajectory.
pub fn mechanical_energy_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    let (alpha, beta) = (traj.spec.alpha, traj.spec.beta_eff());
    traj.records
        .iter()
        .map(|r: &Record| (r.t, mechanical_energy(r.t, r.f_gap, &r.y, alpha, beta)))
        .collect()
}

/// Largest increase `max_i (v[i+1] - v[i])` over consecutive samples, or 0.
pub fn max_increase(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut worst: f64 = 0.0;
    let mut prev: Option<f64> = None;
    for v in values {
        if let Some(p) = prev {
            worst = worst.max(v - p);
        }
        prev = Some(v);
    }
    worst
}
