//! Explicit Runge–Kutta integrators for first-order systems `y' = f(t, y)`.
//!
//! [`dopri5`] is the Dormand–Prince 5(4) embedded pair with step-size control
//! and the fourth-order continuous extension used for dense output. [`rk4`] is
//! the classical fixed-step scheme, kept for residual studies where a uniform
//! grid is wanted.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen automatically when `None`.
    pub first_step: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            first_step: None,
            max_step: None,
            max_steps: 20_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// RMS of `v_i / sc_i`, scaled by the largest term so huge ratios do not overflow.
fn scaled_rms(ratios: impl Iterator<Item = f64> + Clone, n: usize) -> f64 {
    let m = ratios.clone().fold(0.0, |acc: f64, r| acc.max(r.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * (ratios.map(|r| (r / m).powi(2)).sum::<f64>() / n as f64).sqrt()
}

fn err_norm(err: &[f64], y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    let ratios = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| e / (atol + rtol * a.abs().max(b.abs())));
    scaled_rms(ratios, err.len())
}

/// Integrates from `t0` to `t_end` and returns the state at every entry of
/// `sample_times` (ascending, within `[t0, t_end]`).
///
/// Samples that fall inside a step are filled from the continuous extension.
/// The step controller fails with [`Error::IntegrationFailure`] once the step
/// size drops below the floating-point resolution of `t`.
pub fn dopri5<F>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    sample_times: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Vec<f64>>, OdeStats)>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!("t_end ({t_end}) must exceed t0 ({t0})")));
    }
    if sample_times.windows(2).any(|w| w[1] < w[0])
        || sample_times.first().is_some_and(|&s| s < t0)
        || sample_times.last().is_some_and(|&s| s > t_end)
    {
        return Err(Error::InvalidArgument("sample times must be sorted within [t0, t_end]".into()));
    }
    let n = y0.len();
    let (rtol, atol) = (opts.rtol, opts.atol);
    let max_step = opts.max_step.unwrap_or(t_end - t0);
    let mut stats = OdeStats::default();

    let mut out = Vec::with_capacity(sample_times.len());
    let mut next = 0;
    while next < sample_times.len() && sample_times[next] == t0 {
        out.push(y0.to_vec());
        next += 1;
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut err = vec![0.0; n];
    let mut dense = vec![vec![0.0; n]; 5];

    rhs(t, &y, &mut k1)?;
    stats.rhs_evals += 1;

    let mut h = match opts.first_step {
        Some(h) => h,
        None => {
            stats.rhs_evals += 1;
            initial_step(&mut rhs, t, &y, &k1, rtol, atol, &mut ytmp, &mut k2)?
        }
    }
    .min(max_step);

    let mut last_rejected = false;
    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::IntegrationFailure {
                t,
                state: y,
                reason: format!("step budget of {} exhausted", opts.max_steps),
            });
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::IntegrationFailure {
                t,
                state: y,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        if t + h > t_end {
            h = t_end - t;
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C2 * h, &ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C3 * h, &ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C4 * h, &ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C5 * h, &ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = t + h;
        rhs(t_new, &ytmp, &mut k6)?;
        for i in 0..n {
            ynew[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        rhs(t_new, &ynew, &mut k7)?;
        stats.rhs_evals += 6;

        for i in 0..n {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let e = err_norm(&err, &y, &ynew, rtol, atol);

        if !e.is_finite() || e > 1.0 {
            stats.rejected += 1;
            let fac = if e.is_finite() {
                (0.9 * e.powf(-0.2)).max(0.2)
            } else {
                0.2
            };
            h *= if last_rejected { fac.min(1.0) } else { fac };
            last_rejected = true;
            continue;
        }

        stats.accepted += 1;
        if next < sample_times.len() && sample_times[next] <= t_new {
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = h * k1[i] - ydiff;
                dense[0][i] = y[i];
                dense[1][i] = ydiff;
                dense[2][i] = bspl;
                dense[3][i] = ydiff - h * k7[i] - bspl;
                dense[4][i] = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                        + D7 * k7[i]);
            }
            while next < sample_times.len() && sample_times[next] <= t_new {
                let ts = sample_times[next];
                if ts == t_new {
                    out.push(ynew.clone());
                } else {
                    let th = (ts - t) / h;
                    let th1 = 1.0 - th;
                    out.push(
                        (0..n)
                            .map(|i| {
                                dense[0][i]
                                    + th * (dense[1][i]
                                        + th1
                                            * (dense[2][i]
                                                + th * (dense[3][i] + th1 * dense[4][i])))
                            })
                            .collect(),
                    );
                }
                next += 1;
            }
        }

        t = if t_new >= t_end { t_end } else { t_new };
        std::mem::swap(&mut y, &mut ynew);
        std::mem::swap(&mut k1, &mut k7);

        let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * if last_rejected { fac.min(1.0) } else { fac }).min(max_step);
        last_rejected = false;
    }
    Ok((out, stats))
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    rtol: f64,
    atol: f64,
    ytmp: &mut [f64],
    f1: &mut [f64],
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let scaled = |v: &[f64]| scaled_rms(v.iter().zip(y).map(|(a, b)| a / (atol + rtol * b.abs())), y.len());
    let d0 = scaled(y);
    let d1 = scaled(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 || !d1.is_finite() { 1e-6 } else { (0.01 * d0 / d1).max(1e-10 * t.abs().max(1.0)) };
    for i in 0..y.len() {
        ytmp[i] = y[i] + h0 * f0[i];
    }
    rhs(t + h0, ytmp, f1)?;
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = scaled(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    // components starting at exactly zero under pure relative control make the
    // estimate collapse; start small and let the controller grow the step
    let floor = 1e-10 * t.abs().max(1.0);
    let h = (100.0 * h0).min(h1);
    Ok(if h.is_finite() && h >= floor { h } else { floor })
}

/// Classical fixed-step RK4. Returns `steps + 1` states including `y0`.
pub fn rk4<F>(mut rhs: F, t0: f64, y0: &[f64], h: f64, steps: usize) -> Result<Vec<(f64, Vec<f64>)>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let n = y0.len();
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    out.push((t0, y.clone()));
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        rhs(t, &y, &mut k1)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(t + 0.5 * h, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(t + 0.5 * h, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(t + h, &tmp, &mut k4)?;
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push((t0 + (s + 1) as f64 * h, y.clone()));
    }
    Ok(out)
}
