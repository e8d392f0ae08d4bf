//! Discrete schemes: IGAHD (inertial gradient with Hessian-driven damping),
//! which is Nesterov's method at `beta = 0`, and plain gradient descent.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::objectives::Objective;
use crate::vecops::{all_finite, norm};

/// Iterates with `F - F*` above this are treated as divergent.
pub const DIVERGENCE_GAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub alpha: f64,
    pub beta: f64,
    /// step size
    pub s: f64,
    pub max_iter: usize,
    pub x0: Vec<f64>,
    /// Keep `x_k` in the log. Large sweeps turn this off to save memory.
    #[serde(default = "keep")]
    pub store_iterates: bool,
}

fn keep() -> bool {
    true
}

impl SchemeConfig {
    pub fn new(alpha: f64, beta: f64, s: f64, max_iter: usize, x0: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            alpha,
            beta,
            s,
            max_iter,
            x0,
            store_iterates: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_store_iterates(mut self, store: bool) -> Self {
        self.store_iterates = store;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return invalid(format!("alpha must be positive, got {}", self.alpha));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return invalid(format!("beta must be non-negative, got {}", self.beta));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return invalid(format!("step size must be positive, got {}", self.s));
        }
        if self.max_iter == 0 {
            return invalid("max_iter must be positive");
        }
        if self.x0.is_empty() || !all_finite(&self.x0) {
            return invalid("x0 must be a non-empty finite vector");
        }
        Ok(())
    }

    /// `alpha >= 3`, `s <= 1/L` and `0 <= beta < 2 sqrt(s)`. False when `L` is unknown.
    pub fn guarantee(&self, lipschitz: Option<f64>) -> bool {
        let Some(l) = lipschitz else { return false };
        self.alpha >= 3.0 && self.s * l <= 1.0 && self.beta >= 0.0 && self.beta < 2.0 * self.s.sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub f_gap: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateLog {
    pub scheme: String,
    pub guarantee: bool,
    /// `x_k` is left empty in every record when false
    pub stores_iterates: bool,
    pub records: Vec<IterateRecord>,
}

impl IterateLog {
    fn new(scheme: &str, guarantee: bool, stores_iterates: bool, capacity: usize) -> Self {
        Self {
            scheme: scheme.to_string(),
            guarantee,
            stores_iterates,
            records: Vec::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn f_gap_series(&self) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.k as f64, r.f_gap)).collect()
    }

    /// CSV with header `k,f_gap,grad_norm`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["k", "f_gap", "grad_norm"])?;
        for r in &self.records {
            wr.write_record([
                r.k.to_string(),
                format!("{:.16e}", r.f_gap),
                format!("{:.16e}", r.grad_norm),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Appends iterate `k`, or reports divergence with everything logged so far.
    fn push(mut self, k: usize, x: &[f64], g: &[f64], obj: &Objective) -> Result<Self> {
        let f_gap = obj.gap(x);
        let grad_norm = norm(g);
        if !all_finite(x) || !f_gap.is_finite() || !grad_norm.is_finite() || f_gap > DIVERGENCE_GAP {
            return Err(Error::Diverged {
                iteration: k,
                log: Box::new(self),
            });
        }
        self.records.push(IterateRecord {
            k,
            x: if self.stores_iterates { x.to_vec() } else { Vec::new() },
            f_gap,
            grad_norm,
        });
        Ok(self)
    }
}

fn check_dim(x0: &[f64], obj: &Objective) -> Result<()> {
    if x0.len() != obj.dim() {
        return invalid(format!("x0 has dimension {}, objective has {}", x0.len(), obj.dim()));
    }
    Ok(())
}

/// Runs
/// `x_k = y_{k-1} - s grad F(y_{k-1})`,
/// `y_k = x_k + a_k (x_k - x_{k-1}) - beta sqrt(s) (grad F(x_k) - grad F(x_{k-1})) - (beta sqrt(s) / k) grad F(x_{k-1})`
/// with `a_k = (k - 1)/(k + alpha - 1)`, starting from `x_{-1} = x_0 = y_0 = x0`.
/// Records `x_1, ..., x_max_iter`.
pub fn igahd_run(cfg: &SchemeConfig, obj: &Objective) -> Result<IterateLog> {
    cfg.validate()?;
    check_dim(&cfg.x0, obj)?;
    let n = obj.dim();
    let mut log = IterateLog::new(
        "igahd",
        cfg.guarantee(obj.lipschitz_grad()),
        cfg.store_iterates,
        cfg.max_iter,
    );
    let bs = cfg.beta * cfg.s.sqrt();

    let mut x_prev = cfg.x0.clone();
    let mut g_prev = obj.grad(&x_prev);
    let mut y = cfg.x0.clone();
    let mut gy = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut g = vec![0.0; n];
    for k in 1..=cfg.max_iter {
        obj.grad_into(&y, &mut gy);
        for i in 0..n {
            x[i] = y[i] - cfg.s * gy[i];
        }
        obj.grad_into(&x, &mut g);
        log = log.push(k, &x, &g, obj)?;
        let kf = k as f64;
        let a_k = (kf - 1.0) / (kf + cfg.alpha - 1.0);
        for i in 0..n {
            y[i] = x[i] + a_k * (x[i] - x_prev[i]) - bs * (g[i] - g_prev[i]) - bs / kf * g_prev[i];
        }
        std::mem::swap(&mut x_prev, &mut x);
        std::mem::swap(&mut g_prev, &mut g);
    }
    Ok(log)
}

/// `x_{k+1} = x_k - s grad F(x_k)`, recording `x_1, ..., x_max_iter`.
pub fn gradient_descent_run(s: f64, max_iter: usize, x0: &[f64], obj: &Objective) -> Result<IterateLog> {
    if !(s > 0.0 && s.is_finite()) {
        return invalid(format!("step size must be positive, got {s}"));
    }
    if max_iter == 0 {
        return invalid("max_iter must be positive");
    }
    check_dim(x0, obj)?;
    let guarantee = obj.lipschitz_grad().is_some_and(|l| s * l <= 1.0);
    let mut log = IterateLog::new("gradient_descent", guarantee, true, max_iter);
    let mut x = x0.to_vec();
    let mut g = obj.grad(&x);
    for k in 1..=max_iter {
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= s * gi;
        }
        obj.grad_into(&x, &mut g);
        log = log.push(k, &x, &g, obj)?;
    }
    Ok(log)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Oscillation {
    pub local_max_count: usize,
    pub total_variation: f64,
}

/// Strict local maxima of `k -> f_gap_k` and total variation, over `k >= from_iter`.
pub fn oscillation_metric(log: &IterateLog, from_iter: usize) -> Result<Oscillation> {
    if from_iter == 0 || log.len() <= from_iter + 10 {
        return invalid(format!(
            "log of length {} too short for from_iter = {from_iter}",
            log.len()
        ));
    }
    let f: Vec<f64> = log
        .records
        .iter()
        .filter(|r| r.k >= from_iter)
        .map(|r| r.f_gap)
        .collect();
    let local_max_count = f.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count();
    let total_variation = f.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    Ok(Oscillation {
        local_max_count,
        total_variation,
    })
}

/// Share of `sum k^2 ||grad F(x_k)||^2` contributed by `k > k_max / span`.
pub fn weighted_grad_tail_fraction(log: &IterateLog, span: f64) -> f64 {
    let sums = weighted_grad_partial_sums(log);
    let Some(&(k_max, total)) = sums.last() else {
        return 0.0;
    };
    let before = sums.iter().rev().find(|s| s.0 <= k_max / span).map_or(0.0, |s| s.1);
    if total > 0.0 {
        (total - before) / total
    } else {
        0.0
    }
}

/// Partial sums of `k^2 ||grad F(x_k)||^2`.
pub fn weighted_grad_partial_sums(log: &IterateLog) -> Vec<(f64, f64)> {
    let mut acc = 0.0;
    log.records
        .iter()
        .map(|r| {
            acc += (r.k as f64).powi(2) * r.grad_norm * r.grad_norm;
            (r.k as f64, acc)
        })
        .collect()
}
