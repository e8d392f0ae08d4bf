//! Analytic test problems with a unique minimizer and certified geometry, plus
//! sampling verifiers for the growth, flatness and Łojasiewicz inequalities.
//!
//! Every objective carries its minimizer `x_star`, the optimal value `f_star`
//! and, when known in closed form, the exponents it is certified for:
//!
//! * `gamma_growth` / `mu`: `(mu/2) ||x - x*||^gamma <= F(x) - F*`
//! * `gamma_flat`: `F(x) - F* <= (1/gamma) <grad F(x), x - x*>`
//!
//! Objectives are immutable once built and can be shared freely between threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::vecops::{dot, norm, norm_sq, sub};

/// Absolute slack used by every sampled inequality check.
pub const INEQUALITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Kind {
    Quadratic { mu: f64 },
    PowerNorm { gamma: f64, mu: f64 },
    LeastSquares { a: DMatrix<f64>, b: DVector<f64> },
    Constant { value: f64 },
}

#[derive(Debug, Clone)]
pub struct Objective {
    name: &'static str,
    kind: Kind,
    dim: usize,
    f_star: f64,
    x_star: Vec<f64>,
    gamma_flat: Option<f64>,
    gamma_growth: Option<f64>,
    mu: Option<f64>,
    lipschitz_grad: Option<f64>,
}

/// `(mu/2) ||x - x_star||^2`
pub fn make_quadratic(dim: usize, mu: f64, x_star: &[f64]) -> Result<Objective> {
    check_dim(dim, x_star)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return invalid(format!("quadratic: mu must be positive, got {mu}"));
    }
    Ok(Objective {
        name: "quadratic",
        kind: Kind::Quadratic { mu },
        dim,
        f_star: 0.0,
        x_star: x_star.to_vec(),
        gamma_flat: Some(2.0),
        gamma_growth: Some(2.0),
        mu: Some(mu),
        lipschitz_grad: Some(mu),
    })
}

/// `(mu/2) ||x - x_star||^gamma` for `gamma >= 2`.
///
/// Satisfies the flatness inequality with equality for exponent `gamma`. The
/// gradient is only globally Lipschitz for `gamma = 2`, so `lipschitz_grad` is
/// left unset otherwise.
pub fn make_power_norm(dim: usize, gamma: f64, mu: f64, x_star: &[f64]) -> Result<Objective> {
    check_dim(dim, x_star)?;
    if !(gamma >= 2.0 && gamma.is_finite()) {
        return invalid(format!("power_norm: gamma must be >= 2, got {gamma}"));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return invalid(format!("power_norm: mu must be positive, got {mu}"));
    }
    Ok(Objective {
        name: "power_norm",
        kind: Kind::PowerNorm { gamma, mu },
        dim,
        f_star: 0.0,
        x_star: x_star.to_vec(),
        gamma_flat: Some(gamma),
        gamma_growth: Some(gamma),
        mu: Some(mu),
        lipschitz_grad: (gamma == 2.0).then_some(mu),
    })
}

/// `||A x - b||^2` with `A` of full column rank.
///
/// The minimizer is obtained from a Householder QR of `A` followed by one step
/// of iterative refinement on the normal equations. `mu` and `lipschitz_grad`
/// are `2 sigma_min^2` and `2 sigma_max^2`.
pub fn make_least_squares(a: DMatrix<f64>, b: DVector<f64>) -> Result<Objective> {
    let (m, n) = a.shape();
    if n == 0 || m < n {
        return Err(Error::NotSupported(format!(
            "least_squares: need rows >= cols > 0, got {m}x{n}"
        )));
    }
    if b.len() != m {
        return invalid(format!("least_squares: b has length {}, expected {m}", b.len()));
    }
    if !a.iter().chain(b.iter()).all(|v| v.is_finite()) {
        return invalid("least_squares: non-finite entries");
    }
    let sv = a.clone().singular_values();
    let s_max = sv.max();
    let s_min = sv.min();
    if !(s_min > (m.max(n) as f64) * f64::EPSILON * s_max) {
        return Err(Error::NotSupported(format!(
            "least_squares: matrix is rank deficient (sigma_min = {s_min:e}, sigma_max = {s_max:e})"
        )));
    }

    let qr = a.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    let solve_r = |rhs: &DVector<f64>| -> Result<DVector<f64>> {
        r.solve_upper_triangular(&(q.transpose() * rhs))
            .ok_or_else(|| Error::NotSupported("least_squares: singular R factor".into()))
    };
    let mut x = solve_r(&b)?;
    // one refinement step: correct with the QR solve of the current residual
    let resid = &b - &a * &x;
    x += solve_r(&resid)?;

    let res = &a * &x - &b;
    let f_star = res.norm_squared();
    Ok(Objective {
        name: "least_squares",
        kind: Kind::LeastSquares { a, b },
        dim: n,
        f_star,
        x_star: x.as_slice().to_vec(),
        gamma_flat: Some(1.0),
        gamma_growth: Some(2.0),
        mu: Some(2.0 * s_min * s_min),
        lipschitz_grad: Some(2.0 * s_max * s_max),
    })
}

/// Square least-squares instance with i.i.d. `N(0, 1/n)` matrix entries and
/// `N(0, 1)` right-hand side, drawn from a seeded ChaCha8 stream.
pub fn random_least_squares(n: usize, seed: u64) -> Result<Objective> {
    if n == 0 {
        return invalid("least_squares: n must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (n as f64).sqrt();
    // row-major fill so the stream order matches the CSV layout
    let a = DMatrix::from_row_iterator(
        n,
        n,
        (0..n * n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)),
    );
    let b = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    make_least_squares(a, b)
}

/// Degenerate constant objective. Every point is a minimizer; used as a
/// zero-gradient fixture, not as a certified problem.
pub fn make_constant(dim: usize, value: f64) -> Result<Objective> {
    if dim == 0 {
        return invalid("constant: dim must be positive");
    }
    Ok(Objective {
        name: "constant",
        kind: Kind::Constant { value },
        dim,
        f_star: value,
        x_star: vec![0.0; dim],
        gamma_flat: None,
        gamma_growth: None,
        mu: None,
        lipschitz_grad: Some(f64::MIN_POSITIVE),
    })
}

fn check_dim(dim: usize, x_star: &[f64]) -> Result<()> {
    if dim == 0 {
        return invalid("dim must be positive");
    }
    if x_star.len() != dim {
        return invalid(format!("x_star has length {}, expected {dim}", x_star.len()));
    }
    if !x_star.iter().all(|v| v.is_finite()) {
        return invalid("x_star has non-finite entries");
    }
    Ok(())
}

impl Objective {
    pub fn name(&self) -> &'static str {
        self.name
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn f_star(&self) -> f64 {
        self.f_star
    }
    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }
    pub fn gamma_flat(&self) -> Option<f64> {
        self.gamma_flat
    }
    pub fn gamma_growth(&self) -> Option<f64> {
        self.gamma_growth
    }
    pub fn mu(&self) -> Option<f64> {
        self.mu
    }
    pub fn lipschitz_grad(&self) -> Option<f64> {
        self.lipschitz_grad
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Constant { value } => *value,
            _ => self.f_star + self.gap(x),
        }
    }

    /// `F(x) - F*`, evaluated without cancellation against `F*`.
    ///
    /// For least squares this is `||A (x - x*)||^2`, which equals the gap
    /// exactly when `x*` satisfies the normal equations.
    pub fn gap(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Quadratic { mu } => 0.5 * mu * dist_sq(x, &self.x_star),
            Kind::PowerNorm { gamma, mu } => {
                0.5 * mu * dist_sq(x, &self.x_star).powf(0.5 * gamma)
            }
            Kind::LeastSquares { a, .. } => {
                let h = DVector::from_vec(sub(x, &self.x_star));
                (a * h).norm_squared()
            }
            Kind::Constant { .. } => 0.0,
        }
    }

    pub fn grad_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            Kind::Quadratic { mu } => {
                for ((o, xi), si) in out.iter_mut().zip(x).zip(&self.x_star) {
                    *o = mu * (xi - si);
                }
            }
            Kind::PowerNorm { gamma, mu } => {
                let r2 = dist_sq(x, &self.x_star);
                let scale = if r2 == 0.0 {
                    if *gamma == 2.0 {
                        *mu
                    } else {
                        0.0
                    }
                } else {
                    0.5 * mu * gamma * r2.powf(0.5 * gamma - 1.0)
                };
                for ((o, xi), si) in out.iter_mut().zip(x).zip(&self.x_star) {
                    *o = scale * (xi - si);
                }
            }
            Kind::LeastSquares { a, b } => {
                let xv = DVector::from_column_slice(x);
                let r = a * xv - b;
                let g = a.tr_mul(&r);
                for (o, gi) in out.iter_mut().zip(g.iter()) {
                    *o = 2.0 * gi;
                }
            }
            Kind::Constant { .. } => out.iter_mut().for_each(|o| *o = 0.0),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        self.grad_into(x, &mut g);
        g
    }

    pub fn dist_to_min(&self, x: &[f64]) -> f64 {
        dist_sq(x, &self.x_star).sqrt()
    }
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Outcome of a sampled inequality check.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub holds: bool,
    /// Minimum over samples of `rhs - lhs` of the checked inequality. For the
    /// general Łojasiewicz check this is the empirical constant instead.
    pub worst_margin: f64,
    pub samples: usize,
    /// Empirical Łojasiewicz constant (minimal sampled ratio), when estimated.
    pub constant: Option<f64>,
}

/// Uniform samples in the open ball `B(center, radius)`.
pub fn sample_ball(center: &[f64], radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = center.len();
    (0..count)
        .map(|_| {
            let mut dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let len = norm(&dir);
            let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
            let scale = if len > 0.0 { r / len } else { 0.0 };
            dir.iter_mut()
                .zip(center)
                .for_each(|(d, c)| *d = c + scale * *d);
            dir
        })
        .collect()
}

fn check_sampling(samples: usize, radius: f64) -> Result<()> {
    if samples == 0 {
        return invalid("samples must be positive");
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return invalid(format!("radius must be positive, got {radius}"));
    }
    Ok(())
}

/// Checks `(mu/2) ||x - x*||^gamma <= F(x) - F*` on uniform ball samples.
pub fn verify_growth(obj: &Objective, samples: usize, radius: f64, seed: u64) -> Result<VerifyReport> {
    check_sampling(samples, radius)?;
    let (Some(gamma), Some(mu)) = (obj.gamma_growth, obj.mu) else {
        return invalid(format!("{}: growth metadata missing", obj.name));
    };
    let worst = sample_ball(&obj.x_star, radius, samples, seed)
        .iter()
        .map(|x| obj.gap(x) - 0.5 * mu * obj.dist_to_min(x).powf(gamma))
        .fold(f64::INFINITY, f64::min);
    Ok(VerifyReport {
        holds: worst >= -INEQUALITY_SLACK,
        worst_margin: worst,
        samples,
        constant: None,
    })
}

/// Checks `F(x) - F* <= (1/gamma) <grad F(x), x - x*>` on uniform ball samples.
///
/// With a small radius this is a numerical check of the local variant of the
/// inequality around the minimizer.
pub fn verify_flatness(
    obj: &Objective,
    gamma: f64,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<VerifyReport> {
    check_sampling(samples, radius)?;
    if !(gamma > 0.0) {
        return invalid(format!("gamma must be positive, got {gamma}"));
    }
    let mut g = vec![0.0; obj.dim];
    let mut worst = f64::INFINITY;
    for x in sample_ball(&obj.x_star, radius, samples, seed) {
        obj.grad_into(&x, &mut g);
        let h = sub(&x, &obj.x_star);
        worst = worst.min(dot(&g, &h) / gamma - obj.gap(&x));
    }
    Ok(VerifyReport {
        holds: worst >= -INEQUALITY_SLACK,
        worst_margin: worst,
        samples,
        constant: None,
    })
}

/// Łojasiewicz check implied by the growth condition.
///
/// For growth exponent 2 it checks `2 mu (F - F*) <= ||grad F||^2`. For larger
/// exponents only the existence of a constant is known, so the minimal sampled
/// ratio `||grad F||^(gamma/(gamma-1)) / (F - F*)` is reported and the check
/// passes iff it is finite and positive.
pub fn verify_lojasiewicz(
    obj: &Objective,
    samples: usize,
    radius: f64,
    seed: u64,
) -> Result<VerifyReport> {
    check_sampling(samples, radius)?;
    let (Some(gamma), Some(mu)) = (obj.gamma_growth, obj.mu) else {
        return invalid(format!("{}: growth metadata missing", obj.name));
    };
    if gamma < 2.0 {
        return invalid(format!("lojasiewicz check needs growth exponent >= 2, got {gamma}"));
    }
    let pts = sample_ball(&obj.x_star, radius, samples, seed);
    let mut g = vec![0.0; obj.dim];
    if gamma == 2.0 {
        let mut worst = f64::INFINITY;
        for x in &pts {
            obj.grad_into(x, &mut g);
            worst = worst.min(norm_sq(&g) - 2.0 * mu * obj.gap(x));
        }
        return Ok(VerifyReport {
            holds: worst >= -INEQUALITY_SLACK,
            worst_margin: worst,
            samples,
            constant: Some(2.0 * mu),
        });
    }
    let expo = gamma / (gamma - 1.0);
    let mut k = f64::INFINITY;
    for x in &pts {
        let gap = obj.gap(x);
        if gap <= 0.0 {
            continue;
        }
        obj.grad_into(x, &mut g);
        k = k.min(norm(&g).powf(expo) / gap);
    }
    Ok(VerifyReport {
        holds: k.is_finite() && k > 0.0,
        worst_margin: k,
        samples,
        constant: k.is_finite().then_some(k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn quadratic_examples() {
        let q = make_quadratic(1, 1.0, &[0.0]).unwrap();
        assert_eq!(q.eval(&[2.0]), 2.0);
        let q2 = make_quadratic(2, 1.0, &[0.0, 0.0]).unwrap();
        assert_eq!(q2.grad(&[3.0, 4.0]), vec![3.0, 4.0]);
        assert_eq!(q2.eval(&[3.0, 4.0]), 12.5);
        let q3 = make_quadratic(3, 2.5, &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(q3.eval(q3.x_star()), q3.f_star());
        assert!(q3.grad(q3.x_star()).iter().all(|g| *g == 0.0));
        assert_eq!(q3.lipschitz_grad(), Some(2.5));
    }

    #[test]
    fn quadratic_rejects_bad_args() {
        assert!(matches!(make_quadratic(1, 0.0, &[0.0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_quadratic(1, -1.0, &[0.0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(make_quadratic(0, 1.0, &[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn power_norm_examples() {
        let p = make_power_norm(1, 4.0, 0.5, &[0.0]).unwrap();
        assert_eq!(p.eval(&[2.0]), 4.0);
        assert_eq!(p.grad(&[2.0]), vec![8.0]);
        let x = [1.3];
        let h = p.gap(&x) - 0.25 * dot(&p.grad(&x), &x);
        assert!(h.abs() <= 1e-12);

        let p3 = make_power_norm(2, 3.0, 2.0, &[0.0, 0.0]).unwrap();
        assert!((p3.eval(&[0.6, 0.8]) - 1.0).abs() < 1e-15);
        assert!(matches!(
            make_power_norm(1, 1.5, 1.0, &[0.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn least_squares_examples() {
        let ls = make_least_squares(DMatrix::identity(2, 2), DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert!((ls.x_star()[0] - 1.0).abs() < 1e-15 && (ls.x_star()[1] - 1.0).abs() < 1e-15);
        assert!(ls.f_star().abs() < 1e-30);
        assert!((ls.mu().unwrap() - 2.0).abs() < 1e-14);
        assert!((ls.lipschitz_grad().unwrap() - 2.0).abs() < 1e-14);

        let d = make_least_squares(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])),
            DVector::zeros(2),
        )
        .unwrap();
        assert!((d.mu().unwrap() - 2.0).abs() < 1e-14);
        assert!((d.lipschitz_grad().unwrap() - 8.0).abs() < 1e-13);
    }

    #[test]
    fn least_squares_rank_deficient_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let r = make_least_squares(a, DVector::from_vec(vec![1.0, 0.0]));
        assert!(matches!(r, Err(Error::NotSupported(_))));
    }

    #[test]
    fn least_squares_random_minimizer_matches_dense_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // well-conditioned: identity plus a small perturbation
        let a = DMatrix::from_fn(5, 5, |i, j| {
            (if i == j { 2.0 } else { 0.0 }) + 0.3 * rng.sample::<f64, _>(StandardNormal)
        });
        let b = DVector::from_fn(5, |_, _| rng.sample::<f64, _>(StandardNormal));
        let ls = make_least_squares(a.clone(), b.clone()).unwrap();
        assert!(norm(&ls.grad(ls.x_star())) <= 1e-8);
        // oracle: LU solve of the normal equations
        let oracle = (a.transpose() * &a).lu().solve(&(a.transpose() * &b)).unwrap();
        for (x, o) in ls.x_star().iter().zip(oracle.iter()) {
            assert!((x - o).abs() < 1e-9);
        }
    }

    #[test]
    fn least_squares_minimum_over_random_points() {
        let ls = random_least_squares(6, 3).unwrap();
        let fmin = ls.eval(ls.x_star());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let x: Vec<f64> = (0..6).map(|_| 3.0 * rng.sample::<f64, _>(StandardNormal)).collect();
            assert!(ls.eval(&x) >= fmin);
        }
    }

    fn fd_check(obj: &Objective, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let x: Vec<f64> = obj
                .x_star()
                .iter()
                .map(|c| c + rng.sample::<f64, _>(StandardNormal))
                .collect();
            let h = 1e-5 * (1.0 + norm(&x));
            let g = obj.grad(&x);
            let fd: Vec<f64> = (0..obj.dim())
                .map(|i| {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    (obj.eval(&xp) - obj.eval(&xm)) / (2.0 * h)
                })
                .collect();
            let diff = norm(&sub(&g, &fd));
            assert!(diff <= 1e-6 * (1.0 + norm(&g)), "{}: fd mismatch {diff}", obj.name());
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        fd_check(&make_quadratic(3, 1.7, &[0.5, -1.0, 2.0]).unwrap(), 1);
        fd_check(&make_power_norm(2, 4.0, 0.5, &[0.0, 1.0]).unwrap(), 2);
        fd_check(&make_power_norm(3, 3.0, 2.0, &[1.0, 1.0, 1.0]).unwrap(), 3);
        fd_check(&random_least_squares(5, 9).unwrap(), 4);
    }

    #[test]
    fn growth_verifier() {
        let q = make_quadratic(2, 1.0, &[0.0, 0.0]).unwrap();
        let r = verify_growth(&q, 500, 3.0, 1).unwrap();
        assert!(r.holds && r.worst_margin.abs() < 1e-12);
        let p = make_power_norm(2, 4.0, 0.5, &[0.0, 0.0]).unwrap();
        let r = verify_growth(&p, 500, 3.0, 1).unwrap();
        assert!(r.holds && r.worst_margin.abs() < 1e-12);
        let ls = random_least_squares(5, 2).unwrap();
        let r = verify_growth(&ls, 10_000, 2.0, 7).unwrap();
        assert!(r.holds, "{r:?}");
        let c = make_constant(2, 1.0).unwrap();
        assert!(matches!(verify_growth(&c, 10, 1.0, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn flatness_verifier() {
        let q = make_quadratic(2, 1.0, &[1.0, 0.0]).unwrap();
        let r = verify_flatness(&q, 2.0, 500, 2.0, 3).unwrap();
        assert!(r.holds && r.worst_margin.abs() < 1e-12);
        let p = make_power_norm(2, 4.0, 0.5, &[0.0, 0.0]).unwrap();
        assert!(verify_flatness(&p, 2.0, 2000, 2.0, 3).unwrap().holds);
        // a quadratic is not flat of order 3
        assert!(!verify_flatness(&q, 3.0, 500, 2.0, 3).unwrap().holds);
        let ls = random_least_squares(5, 2).unwrap();
        assert!(verify_flatness(&ls, 1.9, 5000, 1e-3, 4).unwrap().holds);
    }

    #[test]
    fn lojasiewicz_verifier() {
        let q = make_quadratic(2, 1.0, &[0.0, 0.0]).unwrap();
        let r = verify_lojasiewicz(&q, 500, 2.0, 1).unwrap();
        assert!(r.holds && r.worst_margin.abs() < 1e-12);
        let p = make_power_norm(2, 4.0, 0.5, &[0.0, 0.0]).unwrap();
        let r = verify_lojasiewicz(&p, 500, 2.0, 1).unwrap();
        let k = r.constant.unwrap();
        // ||grad||^(4/3) = r^4 = 4 (F - F*) for F = r^4/4
        assert!(r.holds && rel_err(k, 4.0) < 1e-9);
        let ls = random_least_squares(5, 2).unwrap();
        assert!(verify_lojasiewicz(&ls, 10_000, 2.0, 9).unwrap().holds);
    }

    #[test]
    fn sampling_is_deterministic_and_inside_ball() {
        let a = sample_ball(&[1.0, 2.0, 3.0], 0.5, 200, 42);
        let b = sample_ball(&[1.0, 2.0, 3.0], 0.5, 200, 42);
        assert_eq!(a, b);
        assert!(a.iter().all(|x| norm(&sub(x, &[1.0, 2.0, 3.0])) < 0.5));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn power_norm_flatness_identity(
                gamma in 2.0f64..6.0,
                mu in 0.1f64..5.0,
                xs in proptest::collection::vec(-3.0f64..3.0, 3),
            ) {
                let p = make_power_norm(3, gamma, mu, &[0.2, -0.1, 0.0]).unwrap();
                let h = sub(&xs, p.x_star());
                let fx = p.eval(&xs);
                let resid = p.gap(&xs) - dot(&p.grad(&xs), &h) / gamma;
                prop_assert!(resid.abs() <= 1e-12 * (1.0 + fx.abs()));
                prop_assert!(fx >= p.f_star());
            }
        }
    }
}
