//! Inertial dynamics with asymptotic vanishing damping and Hessian-driven damping.
//!
//! The second-order system
//!
//! ```text
//! x'' + (alpha/t) x' + beta H_F(x) x' + c(t) grad F(x) = 0,   x(t0) = x0, x'(t0) = 0
//! ```
//!
//! with `c(t) = 1` (or `1 + beta/t` for the modified variant) is integrated in
//! the first-order form `(x, y)` with `y = x' + beta grad F(x)`. Since
//! `y' = x'' + beta H_F(x) x'`, the Hessian term cancels and only gradient
//! evaluations are needed:
//!
//! ```text
//! x' = y - beta grad F(x)
//! y' = -(alpha/t) (y - beta grad F(x)) - c(t) grad F(x)
//! ```

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::objectives::Objective;
use crate::ode::{dopri5, rk4, OdeOptions};
use crate::vecops::{all_finite, norm, norm_sq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Vanishing damping plus Hessian-driven damping.
    DinAvd,
    /// Vanishing damping only (`beta = 0`).
    Avd,
    /// Hessian-driven damping with the gradient scaled by `1 + beta/t`.
    DinAvdModified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// `count` points geometrically spaced over `[t0, t_end]`, both ends included.
    LogSpaced(usize),
    /// `t0 + k * step` for every `k` with the time not exceeding `t_end`.
    Uniform(f64),
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::LogSpaced(400)
    }
}

pub const DEFAULT_RTOL: f64 = 1e-9;
pub const DEFAULT_ATOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsSpec {
    pub variant: Variant,
    pub alpha: f64,
    pub beta: f64,
    pub t0: f64,
    pub x0: Vec<f64>,
    pub t_end: f64,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_rtol() -> f64 {
    DEFAULT_RTOL
}
fn default_atol() -> f64 {
    DEFAULT_ATOL
}

impl DynamicsSpec {
    pub fn new(variant: Variant, alpha: f64, beta: f64, t0: f64, x0: Vec<f64>, t_end: f64) -> Result<Self> {
        let spec = Self {
            variant,
            alpha,
            beta,
            t0,
            x0,
            t_end,
            sampling: Sampling::default(),
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return invalid(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return invalid(format!("beta must be non-negative, got {}", self.beta));
        }
        if self.variant == Variant::Avd && self.beta != 0.0 {
            return invalid("variant avd requires beta = 0");
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return invalid(format!("t0 must be positive, got {}", self.t0));
        }
        if !(self.t_end > self.t0 && self.t_end.is_finite()) {
            return invalid(format!("t_end ({}) must exceed t0 ({})", self.t_end, self.t0));
        }
        if self.x0.is_empty() || !all_finite(&self.x0) {
            return invalid("x0 must be a non-empty finite point");
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return invalid("rtol and atol must be positive");
        }
        match self.sampling {
            Sampling::LogSpaced(c) if c < 2 => invalid("log_spaced sampling needs at least 2 points"),
            Sampling::Uniform(s) if !(s > 0.0 && s.is_finite()) => {
                invalid(format!("uniform sampling step must be positive, got {s}"))
            }
            _ => Ok(()),
        }
    }

    /// Effective Hessian-damping coefficient (always 0 for AVD).
    pub fn beta_eff(&self) -> f64 {
        if self.variant == Variant::Avd {
            0.0
        } else {
            self.beta
        }
    }

    pub fn sample_times(&self) -> Vec<f64> {
        match self.sampling {
            Sampling::LogSpaced(count) => {
                let ratio = (self.t_end / self.t0).ln();
                let mut ts: Vec<f64> = (0..count)
                    .map(|i| self.t0 * (ratio * i as f64 / (count - 1) as f64).exp())
                    .collect();
                ts[0] = self.t0;
                ts[count - 1] = self.t_end;
                ts
            }
            Sampling::Uniform(step) => {
                let n = ((self.t_end - self.t0) / step * (1.0 + 1e-12)).floor() as usize;
                (0..=n)
                    .map(|k| (self.t0 + k as f64 * step).min(self.t_end))
                    .collect()
            }
        }
    }
}

/// Reformulated state: `y = x' + beta grad F(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl State {
    /// State at `t0` with zero initial velocity, i.e. `y = beta grad F(x0)`.
    pub fn initial(spec: &DynamicsSpec, obj: &Objective) -> Self {
        let beta = spec.beta_eff();
        let y = obj.grad(&spec.x0).into_iter().map(|g| beta * g).collect();
        Self {
            t: spec.t0,
            x: spec.x0.clone(),
            y,
        }
    }
}

fn field_into(
    variant: Variant,
    alpha: f64,
    beta: f64,
    obj: &Objective,
    t: f64,
    x: &[f64],
    y: &[f64],
    dx: &mut [f64],
    dy: &mut [f64],
) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::InvalidState(format!("time must be positive, got {t}")));
    }
    // dy is used as gradient scratch before being overwritten
    obj.grad_into(x, dy);
    if !all_finite(dy) {
        return Err(Error::OracleFailure { t });
    }
    let grad_scale = match variant {
        Variant::DinAvdModified => 1.0 + beta / t,
        _ => 1.0,
    };
    let damp = alpha / t;
    for i in 0..x.len() {
        let g = dy[i];
        let v = y[i] - beta * g;
        dx[i] = v;
        dy[i] = -damp * v - grad_scale * g;
    }
    Ok(())
}

/// Right-hand side `(x', y')` of the first-order system at `state`.
pub fn vector_field(spec: &DynamicsSpec, obj: &Objective, state: &State) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(state.t > 0.0) {
        return Err(Error::InvalidState(format!("time must be positive, got {}", state.t)));
    }
    let n = state.x.len();
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    field_into(
        spec.variant,
        spec.alpha,
        spec.beta_eff(),
        obj,
        state.t,
        &state.x,
        &state.y,
        &mut dx,
        &mut dy,
    )?;
    Ok((dx, dy))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub f_gap: f64,
    pub grad_norm: f64,
}

impl Record {
    fn new(obj: &Objective, t: f64, x: Vec<f64>, y: Vec<f64>) -> Self {
        let f_gap = obj.gap(&x);
        let grad_norm = norm(&obj.grad(&x));
        Self { t, x, y, f_gap, grad_norm }
    }

    pub fn state(&self) -> State {
        State {
            t: self.t,
            x: self.x.clone(),
            y: self.y.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: DynamicsSpec,
    pub objective: String,
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// `(t, F(x(t)) - F*)`
    pub fn f_gap_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, r.f_gap)).collect()
    }

    /// `(t, ||grad F(x(t))||^2)`
    pub fn grad_sq_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, r.grad_norm * r.grad_norm)).collect()
    }

    /// Trajectory CSV: `t,f_gap,grad_norm[,x_0..x_{n-1}]`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W, include_x: bool) -> Result<()> {
        let dim = self.spec.x0.len();
        let mut header = String::from("t,f_gap,grad_norm");
        if include_x {
            for i in 0..dim {
                header.push_str(&format!(",x_{i}"));
            }
        }
        writeln!(w, "{header}")?;
        for r in &self.records {
            write!(w, "{:.16e},{:.16e},{:.16e}", r.t, r.f_gap, r.grad_norm)?;
            if include_x {
                for v in &r.x {
                    write!(w, ",{v:.16e}")?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn check_compat(spec: &DynamicsSpec, obj: &Objective) -> Result<()> {
    spec.validate()?;
    if spec.x0.len() != obj.dim() {
        return invalid(format!(
            "x0 has dimension {}, objective {} has {}",
            spec.x0.len(),
            obj.name(),
            obj.dim()
        ));
    }
    Ok(())
}

/// Integrates the dynamics with the adaptive Dormand–Prince pair and records
/// the state at the spec's sampling times.
pub fn integrate(spec: &DynamicsSpec, obj: &Objective) -> Result<Trajectory> {
    check_compat(spec, obj)?;
    let n = obj.dim();
    let init = State::initial(spec, obj);
    let z0: Vec<f64> = init.x.iter().chain(&init.y).copied().collect();
    let (variant, alpha, beta) = (spec.variant, spec.alpha, spec.beta_eff());
    let rhs = |t: f64, z: &[f64], dz: &mut [f64]| {
        let (x, y) = z.split_at(n);
        let (dx, dy) = dz.split_at_mut(n);
        field_into(variant, alpha, beta, obj, t, x, y, dx, dy)
    };
    let ts = spec.sample_times();
    let opts = OdeOptions {
        rtol: spec.rtol,
        atol: spec.atol,
        ..Default::default()
    };
    let (zs, _stats) = dopri5(rhs, spec.t0, &z0, spec.t_end, &ts, &opts).map_err(|e| match e {
        Error::IntegrationFailure { t, state, reason } => Error::IntegrationFailure {
            t,
            state: state[..n].to_vec(),
            reason,
        },
        other => other,
    })?;
    let records = ts
        .into_iter()
        .zip(zs)
        .map(|(t, mut z)| {
            let y = z.split_off(n);
            Record::new(obj, t, z, y)
        })
        .collect();
    Ok(Trajectory {
        spec: spec.clone(),
        objective: obj.name().to_string(),
        records,
    })
}

/// Fixed-step RK4 fallback on the uniform grid `t0 + k h`.
pub fn integrate_rk4(spec: &DynamicsSpec, obj: &Objective, h: f64) -> Result<Trajectory> {
    check_compat(spec, obj)?;
    let n = obj.dim();
    let init = State::initial(spec, obj);
    let z0: Vec<f64> = init.x.iter().chain(&init.y).copied().collect();
    let (variant, alpha, beta) = (spec.variant, spec.alpha, spec.beta_eff());
    let steps = ((spec.t_end - spec.t0) / h * (1.0 + 1e-12)).floor() as usize;
    let out = rk4(
        |t, z, dz| {
            let (x, y) = z.split_at(n);
            let (dx, dy) = dz.split_at_mut(n);
            field_into(variant, alpha, beta, obj, t, x, y, dx, dy)
        },
        spec.t0,
        &z0,
        h,
        steps,
    )?;
    let records = out
        .into_iter()
        .map(|(t, mut z)| {
            let y = z.split_off(n);
            Record::new(obj, t, z, y)
        })
        .collect();
    Ok(Trajectory {
        spec: spec.clone().with_sampling(Sampling::Uniform(h)),
        objective: obj.name().to_string(),
        records,
    })
}

/// Residual of the second-order equation reconstructed from a uniformly
/// sampled trajectory by central differences.
///
/// `x'` and `x''` come from first and second differences of the recorded
/// positions; the Hessian term `H_F(x) x'` is the central difference of
/// `t -> grad F(x(t))`, so no Hessian is ever formed. Returns the largest
/// residual norm over `points` interior samples spread evenly along the record.
pub fn residual_check(traj: &Trajectory, obj: &Objective, points: usize) -> Result<f64> {
    let recs = &traj.records;
    if recs.len() < 5 {
        return invalid(format!("residual check needs at least 5 records, got {}", recs.len()));
    }
    if points == 0 {
        return invalid("points must be positive");
    }
    let h = recs[1].t - recs[0].t;
    if recs
        .windows(2)
        .any(|w| ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.max(1e-300) * (1.0 + w[1].t / h))
    {
        return invalid("residual check needs a uniformly sampled trajectory");
    }
    let spec = &traj.spec;
    let beta = spec.beta_eff();
    let interior = recs.len() - 2;
    let count = points.min(interior);
    let mut worst: f64 = 0.0;
    let n = obj.dim();
    let mut res = vec![0.0; n];
    for j in 0..count {
        let i = 1 + if count == 1 { interior / 2 } else { j * (interior - 1) / (count - 1) };
        let (prev, cur, next) = (&recs[i - 1], &recs[i], &recs[i + 1]);
        let t = cur.t;
        let g_prev = obj.grad(&prev.x);
        let g_cur = obj.grad(&cur.x);
        let g_next = obj.grad(&next.x);
        let grad_scale = match spec.variant {
            Variant::DinAvdModified => 1.0 + beta / t,
            _ => 1.0,
        };
        for k in 0..n {
            let xd = (next.x[k] - prev.x[k]) / (2.0 * h);
            let xdd = (next.x[k] - 2.0 * cur.x[k] + prev.x[k]) / (h * h);
            let hess_xd = (g_next[k] - g_prev[k]) / (2.0 * h);
            res[k] = xdd + spec.alpha / t * xd + beta * hess_xd + grad_scale * g_cur[k];
        }
        worst = worst.max(norm_sq(&res).sqrt());
    }
    Ok(worst)
}

/// Acceptance threshold for [`residual_check`]: `1e-4 (1 + max ||grad F||)`.
pub fn residual_threshold(traj: &Trajectory) -> f64 {
    let gmax = traj.records.iter().map(|r| r.grad_norm).fold(0.0, f64::max);
    1e-4 * (1.0 + gmax)
}
