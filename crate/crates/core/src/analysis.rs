//! Rate fits, integrability diagnostics, averaged and windowed-infimum
//! trajectories, and randomized checks of the scalar inequalities used by the
//! energy arguments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{invalid, Result};
use crate::objectives::Objective;
use crate::vecops::{dot, norm_sq};

/// Minimum samples for a rate fit.
pub const MIN_FIT_SAMPLES: usize = 20;

/// Half-width, in decades, of the sliding window used for the envelope.
const ENVELOPE_HALF_WIDTH: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    Pointwise,
    WindowedMax,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub residual_rms: f64,
    pub mode: FitMode,
    pub samples: usize,
    /// True when the series fell below floating-point resolution before enough
    /// samples were collected; the exponent is then `-inf`.
    pub vanished: bool,
}

/// Running maximum of `f` over the centered half-decade window around each sample.
pub fn envelope(series: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let factor = 10f64.powf(ENVELOPE_HALF_WIDTH);
    let mut out = Vec::with_capacity(series.len());
    let (mut lo, mut hi) = (0usize, 0usize);
    // monotone deque over indices for the sliding max
    let mut dq: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for &(t, _) in series {
        while hi < series.len() && series[hi].0 <= t * factor {
            while dq.back().is_some_and(|&j| series[j].1 <= series[hi].1) {
                dq.pop_back();
            }
            dq.push_back(hi);
            hi += 1;
        }
        while series[lo].0 < t / factor {
            lo += 1;
        }
        while dq.front().is_some_and(|&j| j < lo) {
            dq.pop_front();
        }
        out.push((t, series[*dq.front().expect("window contains the sample itself")].1));
    }
    out
}

fn check_sorted(series: &[(f64, f64)]) -> Result<()> {
    if series.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return invalid("series must be strictly increasing in t");
    }
    Ok(())
}

/// Least squares fit of `log f` against `log t` over samples with `t` in `window`.
pub fn fit_rate(series: &[(f64, f64)], window: (f64, f64), mode: FitMode) -> Result<RateFit> {
    check_sorted(series)?;
    if !(window.0 > 0.0 && window.0 < window.1) {
        return invalid(format!("invalid window {window:?}"));
    }
    let source = match mode {
        FitMode::Pointwise => series.to_vec(),
        FitMode::WindowedMax => envelope(series),
    };
    let pts: Vec<(f64, f64)> = source
        .into_iter()
        .filter(|&(t, _)| t >= window.0 && t <= window.1)
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return invalid(format!(
            "window {window:?} holds {} samples, need {MIN_FIT_SAMPLES}",
            pts.len()
        ));
    }
    if let Some(&(t, f)) = pts.iter().find(|p| !(p.1 > 0.0 && p.1.is_finite())) {
        return invalid(format!("non-positive value {f} at t = {t}"));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(t, f)| (t.ln(), f.ln())).unzip();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let residual_rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(RateFit {
        exponent,
        intercept,
        window: (pts[0].0, pts[pts.len() - 1].0),
        residual_rms,
        mode,
        samples: pts.len(),
        vanished: false,
    })
}

/// Fit over the last decade `[t_max/10, t_max]`. See [`fit_last_decades`].
pub fn fit_last_decade(series: &[(f64, f64)], mode: FitMode) -> Result<RateFit> {
    fit_last_decades(series, mode, 1.0)
}

/// Fit over `[t_max / 10^decades, t_max]`, restricted to the leading run of
/// samples whose value is a positive normal float.
///
/// Exponentially fast runs underflow inside the window; if fewer than
/// [`MIN_FIT_SAMPLES`] resolvable samples remain the fit is reported as
/// vanished with exponent `-inf`.
pub fn fit_last_decades(series: &[(f64, f64)], mode: FitMode, decades: f64) -> Result<RateFit> {
    check_sorted(series)?;
    if !(decades > 0.0) {
        return invalid(format!("decades must be positive, got {decades}"));
    }
    let Some(&(t_max, _)) = series.last() else {
        return invalid("empty series");
    };
    let t_lo = t_max / 10f64.powf(decades);
    let source = match mode {
        FitMode::Pointwise => series.to_vec(),
        FitMode::WindowedMax => envelope(series),
    };
    let resolved: Vec<(f64, f64)> = source
        .iter()
        .copied()
        .filter(|&(t, _)| t >= t_lo)
        .take_while(|&(_, f)| f.is_normal() && f > 0.0)
        .collect();
    if resolved.len() < MIN_FIT_SAMPLES {
        return Ok(RateFit {
            exponent: f64::NEG_INFINITY,
            intercept: f64::NAN,
            window: (t_lo, t_max),
            residual_rms: 0.0,
            mode,
            samples: resolved.len(),
            vanished: true,
        });
    }
    // the envelope is already applied
    fit_rate(&resolved, (t_lo, resolved[resolved.len() - 1].0), FitMode::Pointwise).map(|f| RateFit { mode, ..f })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralDiagnostic {
    pub delta: f64,
    pub cumulative: Vec<(f64, f64)>,
    pub converged: bool,
    pub tail_fraction: f64,
}

impl IntegralDiagnostic {
    pub fn total(&self) -> f64 {
        self.cumulative.last().map_or(0.0, |c| c.1)
    }
}

/// Tail fraction at or below this counts as converged.
pub const TAIL_TOLERANCE: f64 = 0.05;

fn interpolate(points: &[(f64, f64)], t: f64) -> f64 {
    let i = points.partition_point(|p| p.0 < t);
    if i == 0 {
        return points[0].1;
    }
    if i == points.len() {
        return points[i - 1].1;
    }
    let (t0, v0) = points[i - 1];
    let (t1, v1) = points[i];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Trapezoid partial integrals of `t^delta g(t)`. The tail is the increment over
/// `[t_max/2, t_max]` relative to the total.
pub fn cumulative_weighted_integral(series: &[(f64, f64)], delta: f64) -> Result<IntegralDiagnostic> {
    check_sorted(series)?;
    if series.len() < 2 {
        return invalid("need at least two samples");
    }
    let mut cumulative = Vec::with_capacity(series.len());
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for &(t, g) in series {
        let w = t.powf(delta) * g;
        if let Some((tp, wp)) = prev {
            acc += 0.5 * (t - tp) * (w + wp);
        }
        prev = Some((t, w));
        cumulative.push((t, acc));
    }
    let t_max = series[series.len() - 1].0;
    let tail = acc - interpolate(&cumulative, t_max / 2.0);
    let tail_fraction = if acc > 0.0 { tail / acc } else { 0.0 };
    Ok(IntegralDiagnostic {
        delta,
        cumulative,
        converged: tail_fraction <= TAIL_TOLERANCE,
        tail_fraction,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AveragedPoint {
    pub t: f64,
    pub z: Vec<f64>,
    pub f_gap_z: f64,
    /// Weighted average of `F(x(u)) - F*` with the same quadrature weights.
    pub mean_f_gap: f64,
}

/// `z(t) = int_{t/2}^t u^delta x(u) du / int_{t/2}^t u^delta du`, with window
/// endpoints interpolated linearly between samples.
pub fn averaged_point(traj: &Trajectory, t: f64, delta: f64, obj: &Objective) -> Result<AveragedPoint> {
    let recs = &traj.records;
    let lo = t / 2.0;
    if recs.is_empty() || recs[0].t > lo || recs[recs.len() - 1].t < t {
        return invalid(format!("trajectory does not cover [{lo}, {t}]"));
    }
    let inner: Vec<usize> = (0..recs.len()).filter(|&i| recs[i].t > lo && recs[i].t < t).collect();
    if inner.len() + 2 < MIN_FIT_SAMPLES {
        return invalid(format!("only {} samples in [{lo}, {t}]", inner.len() + 2));
    }
    let interp_x = |s: f64| -> Vec<f64> {
        let i = recs.partition_point(|r| r.t < s);
        if recs[i].t == s || i == 0 {
            return recs[i].x.clone();
        }
        let (a, b) = (&recs[i - 1], &recs[i]);
        let w = (s - a.t) / (b.t - a.t);
        a.x.iter().zip(&b.x).map(|(p, q)| p + w * (q - p)).collect()
    };
    let mut nodes: Vec<(f64, Vec<f64>, f64)> = Vec::with_capacity(inner.len() + 2);
    let x_lo = interp_x(lo);
    let g_lo = obj.gap(&x_lo);
    nodes.push((lo, x_lo, g_lo));
    nodes.extend(inner.iter().map(|&i| (recs[i].t, recs[i].x.clone(), recs[i].f_gap)));
    let x_hi = interp_x(t);
    let g_hi = obj.gap(&x_hi);
    nodes.push((t, x_hi, g_hi));

    let m = nodes.len();
    let mut weights = vec![0.0; m];
    for k in 0..m - 1 {
        let h = nodes[k + 1].0 - nodes[k].0;
        weights[k] += 0.5 * h * nodes[k].0.powf(delta);
        weights[k + 1] += 0.5 * h * nodes[k + 1].0.powf(delta);
    }
    let total: f64 = weights.iter().sum();
    let dim = obj.dim();
    let mut z = vec![0.0; dim];
    let mut mean_f_gap = 0.0;
    for ((_, x, g), w) in nodes.iter().zip(&weights) {
        let w = w / total;
        for (zi, xi) in z.iter_mut().zip(x) {
            *zi += w * xi;
        }
        mean_f_gap += w * g;
    }
    let f_gap_z = obj.gap(&z);
    Ok(AveragedPoint { t, z, f_gap_z, mean_f_gap })
}

/// Minimum of `f` over samples with `t/2 <= u <= t`.
pub fn windowed_inf(series: &[(f64, f64)], t: f64) -> Result<f64> {
    series
        .iter()
        .filter(|&&(u, _)| u >= t / 2.0 && u <= t)
        .map(|&(_, f)| f)
        .reduce(f64::min)
        .map_or_else(|| invalid(format!("no samples in [{}, {t}]", t / 2.0)), Ok)
}

/// `min` over the last decade of `t^(delta+1) log(t) f(t)`.
pub fn check_liminf_scaling(series: &[(f64, f64)], delta: f64) -> Result<f64> {
    check_sorted(series)?;
    let (Some(first), Some(last)) = (series.first(), series.last()) else {
        return invalid("empty series");
    };
    if !(first.0 > 0.0 && last.0 >= 100.0 * first.0) {
        return invalid("series must span at least two decades of positive t");
    }
    Ok(series
        .iter()
        .filter(|&&(t, _)| t >= last.0 / 10.0)
        .map(|&(t, f)| t.powf(delta + 1.0) * t.ln() * f)
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub seed: u64,
    pub trials: usize,
    /// premise of the implication held in this many trials
    pub control_premise_hits: usize,
    pub violations: usize,
    pub counterexample: Option<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

const LEMMA_SLACK: f64 = 1e-12;

fn log_uniform(rng: &mut ChaCha8Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

/// Randomized check of
/// `|<u,v>| <= (a/2)|u|^2 + |v|^2/(2a)`,
/// `|u|^2 <= (1+a)|u+v|^2 + (1+1/a)|v|^2`,
/// `x - K1 x^d <= K2  =>  x <= (K2^(1-d) + K1)^(1/(1-d))` and
/// `x - K x^d >= K (d-1)(d K)^(d/(1-d))`.
pub fn check_inequality_lemmas(seed: u64, trials: usize) -> Result<LemmaReport> {
    if trials < 1000 {
        return invalid(format!("need at least 1000 trials, got {trials}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LemmaReport {
        seed,
        trials,
        control_premise_hits: 0,
        violations: 0,
        counterexample: None,
    };
    let fail = |report: &mut LemmaReport, what: String| {
        report.violations += 1;
        report.counterexample.get_or_insert(what);
    };
    for trial in 0..trials {
        let n = rng.random_range(1..=8);
        let su = log_uniform(&mut rng, -3.0, 3.0);
        let sv = log_uniform(&mut rng, -3.0, 3.0);
        let u: Vec<f64> = (0..n).map(|_| su * rng.sample::<f64, _>(StandardNormal)).collect();
        let v: Vec<f64> = (0..n).map(|_| sv * rng.sample::<f64, _>(StandardNormal)).collect();
        let a = log_uniform(&mut rng, -3.0, 3.0);
        let (uu, vv) = (norm_sq(&u), norm_sq(&v));

        let lhs = dot(&u, &v).abs();
        let rhs = 0.5 * a * uu + vv / (2.0 * a);
        if lhs > rhs * (1.0 + LEMMA_SLACK) {
            fail(&mut report, format!("trial {trial}: young |<u,v>| = {lhs} > {rhs}"));
        }
        let upv: Vec<f64> = u.iter().zip(&v).map(|(p, q)| p + q).collect();
        let rhs = (1.0 + a) * norm_sq(&upv) + (1.0 + 1.0 / a) * vv;
        if uu > rhs * (1.0 + LEMMA_SLACK) + LEMMA_SLACK * (uu + vv) {
            fail(&mut report, format!("trial {trial}: split |u|^2 = {uu} > {rhs}"));
        }

        let d: f64 = rng.random_range(0.01..0.99);
        let k1 = log_uniform(&mut rng, -2.0, 2.0);
        let k2 = log_uniform(&mut rng, -2.0, 2.0);
        let bound = (k2.powf(1.0 - d) + k1).powf(1.0 / (1.0 - d));
        let x = rng.random_range(0.0..1.5) * bound;
        if x - k1 * x.powf(d) <= k2 {
            report.control_premise_hits += 1;
            if x > bound * (1.0 + LEMMA_SLACK) {
                fail(&mut report, format!("trial {trial}: control x = {x} > {bound} (d={d}, k1={k1}, k2={k2})"));
            }
        }

        let k = log_uniform(&mut rng, -2.0, 2.0);
        let x_min = (d * k).powf(1.0 / (1.0 - d));
        let x = rng.random_range(0.0..3.0) * x_min;
        let g = x - k * x.powf(d);
        let g_min = k * (d - 1.0) * (d * k).powf(d / (1.0 - d));
        if g < g_min - LEMMA_SLACK * (x + k * x.powf(d) + g_min.abs()) {
            fail(&mut report, format!("trial {trial}: min g({x}) = {g} < {g_min}"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{DynamicsSpec, Record, Variant};
    use crate::objectives::make_quadratic;
    use proptest::prelude::*;

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    #[test]
    fn exact_power_law() {
        let s: Vec<(f64, f64)> = log_grid(1.0, 1e4, 200).into_iter().map(|t| (t, t.powi(-3))).collect();
        let f = fit_rate(&s, (1.0, 1e4), FitMode::Pointwise).unwrap();
        assert!((f.exponent + 3.0).abs() < 1e-12);
        assert!(f.residual_rms <= 1e-12);
        let c: Vec<(f64, f64)> = s.iter().map(|&(t, _)| (t, 2.5)).collect();
        assert!(fit_rate(&c, (1.0, 1e4), FitMode::Pointwise).unwrap().exponent.abs() < 1e-14);
    }

    #[test]
    fn envelope_fit_of_oscillating_series() {
        let s: Vec<(f64, f64)> = log_grid(1.0, 1e5, 2000)
            .into_iter()
            .map(|t| (t, t.powi(-2) * (2.0 + (5.0 * t.ln()).sin())))
            .collect();
        let f = fit_rate(&s, (10.0, 1e5), FitMode::WindowedMax).unwrap();
        assert!((f.exponent + 2.0).abs() <= 0.1, "{}", f.exponent);
    }

    #[test]
    fn envelope_matches_brute_force() {
        let s: Vec<(f64, f64)> = log_grid(1.0, 100.0, 150)
            .into_iter()
            .map(|t| (t, (t * 1.7).sin().abs() / t))
            .collect();
        let fac = 10f64.powf(0.25);
        for (&(t, e), _) in envelope(&s).iter().zip(&s) {
            let brute = s
                .iter()
                .filter(|p| p.0 >= t / fac && p.0 <= t * fac)
                .map(|p| p.1)
                .fold(f64::MIN, f64::max);
            assert_eq!(e, brute);
        }
    }

    #[test]
    fn fit_errors() {
        let s: Vec<(f64, f64)> = log_grid(1.0, 10.0, 30).into_iter().map(|t| (t, 1.0 - t / 5.0)).collect();
        assert!(fit_rate(&s, (1.0, 10.0), FitMode::Pointwise).is_err());
        assert!(fit_rate(&s[..10], (1.0, 10.0), FitMode::Pointwise).is_err());
        let unsorted = vec![(2.0, 1.0), (1.0, 1.0)];
        assert!(fit_rate(&unsorted, (1.0, 2.0), FitMode::Pointwise).is_err());
    }

    #[test]
    fn last_decade_vanishing() {
        let s: Vec<(f64, f64)> = log_grid(1.0, 1e4, 400).into_iter().map(|t| (t, (-t).exp())).collect();
        let f = fit_last_decade(&s, FitMode::Pointwise).unwrap();
        assert!(f.vanished && f.exponent == f64::NEG_INFINITY);
        let p: Vec<(f64, f64)> = log_grid(1.0, 1e4, 400).into_iter().map(|t| (t, t.powi(-4))).collect();
        let f = fit_last_decade(&p, FitMode::Pointwise).unwrap();
        assert!(!f.vanished && (f.exponent + 4.0).abs() < 1e-10);
        assert!((f.window.0 - 1e3).abs() < 30.0);
    }

    #[test]
    fn integral_examples() {
        let d = 2.0;
        let s: Vec<(f64, f64)> = log_grid(1.0, 100.0, 2000).into_iter().map(|t| (t, t.powf(-d - 2.0))).collect();
        let i = cumulative_weighted_integral(&s, d).unwrap();
        assert!((i.total() - 0.99).abs() < 1e-4);
        assert!(i.converged);
        let s: Vec<(f64, f64)> = log_grid(1.0, 100.0, 2000).into_iter().map(|t| (t, t.powf(-d - 1.0))).collect();
        assert!(!cumulative_weighted_integral(&s, d).unwrap().converged);
        assert!(cumulative_weighted_integral(&[(2.0, 1.0), (1.0, 1.0)], 0.0).is_err());
    }

    #[test]
    fn integral_matches_closed_forms() {
        for k in [1.5, 2.0, 3.0] {
            let s: Vec<(f64, f64)> = log_grid(1.0, 100.0, 200).into_iter().map(|t| (t, t.powf(-k))).collect();
            let exact = (1.0 - 100f64.powf(1.0 - k)) / (k - 1.0);
            let got = cumulative_weighted_integral(&s, 0.0).unwrap().total();
            assert!(((got - exact) / exact).abs() < 0.01, "k={k}: {got} vs {exact}");
        }
    }

    fn synthetic_traj(obj: &Objective, xs: impl Fn(f64) -> Vec<f64>, ts: &[f64]) -> Trajectory {
        let spec = DynamicsSpec::new(Variant::Avd, 3.0, 0.0, ts[0], xs(ts[0]), ts[ts.len() - 1]).unwrap();
        Trajectory {
            spec,
            objective: obj.name().to_string(),
            records: ts
                .iter()
                .map(|&t| {
                    let x = xs(t);
                    Record {
                        t,
                        f_gap: obj.gap(&x),
                        grad_norm: crate::vecops::norm(&obj.grad(&x)),
                        y: vec![0.0; x.len()],
                        x,
                    }
                })
                .collect(),
        }
    }

    #[test]
    fn averaged_point_examples() {
        let q = make_quadratic(2, 1.0, &[0.0, 0.0]).unwrap();
        let ts = log_grid(1.0, 50.0, 300);
        let c = synthetic_traj(&q, |_| vec![0.3, -1.2], &ts);
        let a = averaged_point(&c, 40.0, 2.5, &q).unwrap();
        assert!((a.z[0] - 0.3).abs() < 1e-14 && (a.z[1] + 1.2).abs() < 1e-14);

        let lin = synthetic_traj(&q, |u| vec![u, 0.0], &ts);
        let a = averaged_point(&lin, 40.0, 0.0, &q).unwrap();
        assert!((a.z[0] - 30.0).abs() < 1e-12);
        assert!(a.f_gap_z <= a.mean_f_gap);

        assert!(averaged_point(&lin, 60.0, 0.0, &q).is_err());
        let sparse = synthetic_traj(&q, |u| vec![u, 0.0], &log_grid(1.0, 50.0, 10));
        assert!(averaged_point(&sparse, 40.0, 0.0, &q).is_err());
    }

    #[test]
    fn windowed_inf_examples() {
        let s: Vec<(f64, f64)> = (1..=100).map(|i| (i as f64, 1.0 / i as f64)).collect();
        assert_eq!(windowed_inf(&s, 50.5).unwrap(), 1.0 / 50.0);
        let mut d = s.clone();
        d[69].1 = 1e-9;
        assert_eq!(windowed_inf(&d, 100.0).unwrap(), 1e-9);
        assert!(windowed_inf(&s, 0.5).is_err());
    }

    #[test]
    fn liminf_examples() {
        let d = 2.0;
        let zero: Vec<(f64, f64)> = log_grid(2.0, 1e4, 300).into_iter().map(|t| (t, 0.0)).collect();
        assert_eq!(check_liminf_scaling(&zero, d).unwrap(), 0.0);
        let f = |hi: f64| -> f64 {
            let s: Vec<(f64, f64)> = log_grid(2.0, hi, 300)
                .into_iter()
                .map(|t| (t, t.powf(-d - 1.0) / t.ln().powi(2)))
                .collect();
            check_liminf_scaling(&s, d).unwrap()
        };
        assert!((f(1e4) - 1.0 / 1e4f64.ln()).abs() < 1e-12);
        assert!(f(1e4) < f(1e3));
        assert!(check_liminf_scaling(&zero[..20], d).is_err());
    }

    #[test]
    fn lemma_suite_and_equality_cases() {
        let r = check_inequality_lemmas(7, 10_000).unwrap();
        assert!(r.passed(), "{:?}", r.counterexample);
        assert!(r.control_premise_hits > 1000);
        assert!(check_inequality_lemmas(7, 10).is_err());

        let u = [1.5, -2.0, 0.25];
        assert_eq!(dot(&u, &u).abs(), 0.5 * norm_sq(&u) + 0.5 * norm_sq(&u));
        let (d, k): (f64, f64) = (0.4, 3.0);
        let x = (d * k).powf(1.0 / (1.0 - d));
        let g = x - k * x.powf(d);
        assert!((g - k * (d - 1.0) * (d * k).powf(d / (1.0 - d))).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn fit_recovers_any_power(p in -6.0f64..2.0, c in 0.01f64..100.0) {
            let s: Vec<(f64, f64)> = log_grid(1.0, 1e3, 100).into_iter().map(|t| (t, c * t.powf(p))).collect();
            let f = fit_rate(&s, (1.0, 1e3), FitMode::Pointwise).unwrap();
            prop_assert!((f.exponent - p).abs() < 1e-10);
            prop_assert!(f.residual_rms <= 1e-12);
        }

        #[test]
        fn cumulative_is_non_decreasing(vals in proptest::collection::vec(0.0f64..10.0, 3..60), delta in -2.0f64..4.0) {
            let s: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| (1.0 + i as f64, v)).collect();
            let d = cumulative_weighted_integral(&s, delta).unwrap();
            prop_assert!(d.cumulative.windows(2).all(|w| w[1].1 >= w[0].1));
        }
    }
}
