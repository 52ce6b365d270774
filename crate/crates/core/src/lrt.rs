//! Likelihood-ratio test of equal revenue per visit.
//!
//! Each arm contributes a binomial term for the no-purchase count and a
//! log-normal term for the purchase values. Under the alternative the arms
//! are fitted independently in closed form. Under the null the same
//! likelihood is maximized subject to one scalar constraint tying the arms
//! together, so `-2 ln LR` is compared to chi-square(1).
//!
//! The constrained fit works in `(logit r, mu, ln sigma2)` per arm, which
//! keeps every iterate inside the parameter space. An augmented-Lagrangian
//! outer loop updates the multiplier and penalty; the inner loop is a damped
//! Newton method with a diagonal shift that keeps the step a descent
//! direction.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{fit_mle, ExperimentData, GroupSummary, ZiLogNormalParams};
use crate::special::{chi2_1_sf, LN_2PI};

/// Scalar constraint defining the null hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    /// `r_c exp(mu_c + sigma2_c/2) = r_t exp(mu_t + sigma2_t/2)`, imposed on
    /// the log scale.
    #[default]
    Rpv,
    /// `p_c mu_c = p_t mu_t` with `p = 1 - r` the no-purchase probability.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub constraint: ConstraintKind,
    /// Bound on the infinity norm of the Lagrangian gradient.
    pub tolerance: f64,
    /// Bound on the relative constraint violation.
    pub constraint_tolerance: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Which of `(logit r_c, mu_c, ln sigma2_c, logit r_t, mu_t, ln sigma2_t)`
    /// are optimized; the rest stay at their starting values.
    pub free: [bool; 6],
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            constraint: ConstraintKind::Rpv,
            tolerance: 1e-7,
            constraint_tolerance: 1e-10,
            max_outer: 60,
            max_inner: 200,
            free: [true; 6],
        }
    }
}

/// Output of [`fit_constrained`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedFit {
    pub control: ZiLogNormalParams,
    pub treatment: ZiLogNormalParams,
    /// Multiplier of the constraint in `ln L - λ c(θ)`.
    pub lambda: f64,
    pub kkt_residual: f64,
    pub constraint_violation: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrtResult {
    pub unconstrained: (ZiLogNormalParams, ZiLogNormalParams),
    pub constrained: (ZiLogNormalParams, ZiLogNormalParams),
    pub lambda: f64,
    /// `ln L(H0) - ln L(H1)`.
    pub log_lr: f64,
    /// `-2 log_lr`.
    pub stat: f64,
    pub df: u32,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub converged: bool,
    pub kkt_residual: f64,
    pub constraint_violation: f64,
    pub iterations: usize,
    pub constraint: ConstraintKind,
}

/// Sufficient statistics of one arm used by the likelihood.
#[derive(Debug, Clone, Copy)]
struct Arm {
    n: f64,
    k: f64,
    m: f64,
    mean: f64,
    var: f64,
}

impl Arm {
    fn from_summary(s: &GroupSummary) -> Result<Self> {
        match (s.log_mean, s.log_var) {
            (Some(mean), Some(var)) => Ok(Self {
                n: s.n as f64,
                k: s.k as f64,
                m: s.purchases() as f64,
                mean,
                var,
            }),
            _ => Err(Error::DegenerateGroup(format!(
                "need at least 2 purchases, found {}",
                s.purchases()
            ))),
        }
    }

    fn ln_binom(&self) -> f64 {
        libm::lgamma(self.n + 1.0) - libm::lgamma(self.k + 1.0) - libm::lgamma(self.m + 1.0)
    }

    fn log_likelihood(&self, p: &ZiLogNormalParams) -> Result<f64> {
        if !(p.sigma2 > 0.0) {
            return Err(Error::BoundaryParam(format!("sigma2 {} must be positive", p.sigma2)));
        }
        let binom = xlogy(self.k, 1.0 - p.r) + xlogy(self.m, p.r);
        let q = self.m * (self.var + (self.mean - p.mu).powi(2));
        let lognormal = -self.m * self.mean
            - 0.5 * self.m * (LN_2PI + p.sigma2.ln())
            - 0.5 * q / p.sigma2;
        let total = self.ln_binom() + binom + lognormal;
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::Numerical(format!(
                "log-likelihood is {total} (data impossible under r = {})",
                p.r
            )))
        }
    }
}

/// `x ln y` with `0 ln 0 = 0`.
fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// Joint log-likelihood of both arms: binomial mass of the no-purchase count
/// (with no-purchase probability `1 - r`) plus the log-normal density of
/// every purchase value.
pub fn log_likelihood(
    control: &ZiLogNormalParams,
    treatment: &ZiLogNormalParams,
    summaries: (&GroupSummary, &GroupSummary),
) -> Result<f64> {
    let (sc, st) = summaries;
    Ok(Arm::from_summary(sc)?.log_likelihood(control)? + Arm::from_summary(st)?.log_likelihood(treatment)?)
}

/// Gradient of [`log_likelihood`] with respect to
/// `(r_c, mu_c, sigma2_c, r_t, mu_t, sigma2_t)`.
pub fn log_likelihood_gradient(
    control: &ZiLogNormalParams,
    treatment: &ZiLogNormalParams,
    summaries: (&GroupSummary, &GroupSummary),
) -> Result<[f64; 6]> {
    let mut out = [0.0; 6];
    for (j, (p, s)) in [(control, summaries.0), (treatment, summaries.1)].into_iter().enumerate() {
        let arm = Arm::from_summary(s)?;
        let d = arm.mean - p.mu;
        let q = arm.m * (arm.var + d * d);
        out[3 * j] = arm.m / p.r - arm.k / (1.0 - p.r);
        out[3 * j + 1] = arm.m * d / p.sigma2;
        out[3 * j + 2] = -0.5 * arm.m / p.sigma2 + 0.5 * q / (p.sigma2 * p.sigma2);
    }
    Ok(out)
}

#[inline]
fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn to_params(theta: &[f64; 6], arm: usize) -> ZiLogNormalParams {
    let o = 3 * arm;
    ZiLogNormalParams {
        r: sigmoid(theta[o]),
        mu: theta[o + 1],
        sigma2: theta[o + 2].exp(),
    }
}

fn to_theta(c: &ZiLogNormalParams, t: &ZiLogNormalParams) -> [f64; 6] {
    let logit = |r: f64| (r / (1.0 - r)).ln();
    [
        logit(c.r),
        c.mu,
        c.sigma2.ln(),
        logit(t.r),
        t.mu,
        t.sigma2.ln(),
    ]
}

type Mat6 = [[f64; 6]; 6];

/// Derivatives of the objective (negative log-likelihood without constants)
/// and of the constraint in the unconstrained coordinates.
struct Eval {
    grad: [f64; 6],
    hess: Mat6,
    c: f64,
    dc: [f64; 6],
    d2c: Mat6,
}

struct Problem {
    arms: [Arm; 2],
    constraint: ConstraintKind,
}

impl Problem {
    fn objective(&self, theta: &[f64; 6]) -> f64 {
        let mut f = 0.0;
        for (j, arm) in self.arms.iter().enumerate() {
            let (a, mu, s) = (theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]);
            // ln r = -softplus(-a), ln(1 - r) = -softplus(a)
            let binom = -arm.m * softplus(-a) - arm.k * softplus(a);
            let d = arm.mean - mu;
            let q = arm.m * (arm.var + d * d);
            f -= binom - 0.5 * arm.m * s - 0.5 * q * (-s).exp();
        }
        f
    }

    fn constraint(&self, theta: &[f64; 6]) -> f64 {
        let side = |j: usize| {
            let (a, mu, s) = (theta[3 * j], theta[3 * j + 1], theta[3 * j + 2]);
            match self.constraint {
                ConstraintKind::Rpv => -softplus(-a) + mu + 0.5 * s.exp(),
                ConstraintKind::PaperLiteral => (1.0 - sigmoid(a)) * mu,
            }
        };
        side(0) - side(1)
    }

    fn eval(&self, theta: &[f64; 6]) -> Eval {
        let mut grad = [0.0; 6];
        let mut hess = [[0.0; 6]; 6];
        let mut dc = [0.0; 6];
        let mut d2c = [[0.0; 6]; 6];
        for (j, arm) in self.arms.iter().enumerate() {
            let o = 3 * j;
            let (a, mu, s) = (theta[o], theta[o + 1], theta[o + 2]);
            let r = sigmoid(a);
            let e = (-s).exp();
            let d = arm.mean - mu;
            let q = arm.m * (arm.var + d * d);

            grad[o] = -(arm.m - arm.n * r);
            grad[o + 1] = -arm.m * d * e;
            grad[o + 2] = 0.5 * arm.m - 0.5 * q * e;

            hess[o][o] = arm.n * r * (1.0 - r);
            hess[o + 1][o + 1] = arm.m * e;
            hess[o + 1][o + 2] = arm.m * d * e;
            hess[o + 2][o + 1] = arm.m * d * e;
            hess[o + 2][o + 2] = 0.5 * q * e;

            let sign = if j == 0 { 1.0 } else { -1.0 };
            match self.constraint {
                ConstraintKind::Rpv => {
                    let half_var = 0.5 * s.exp();
                    dc[o] = sign * (1.0 - r);
                    dc[o + 1] = sign;
                    dc[o + 2] = sign * half_var;
                    d2c[o][o] = -sign * r * (1.0 - r);
                    d2c[o + 2][o + 2] = sign * half_var;
                }
                ConstraintKind::PaperLiteral => {
                    let w = r * (1.0 - r);
                    dc[o] = -sign * w * mu;
                    dc[o + 1] = sign * (1.0 - r);
                    d2c[o][o] = -sign * mu * w * (1.0 - 2.0 * r);
                    d2c[o][o + 1] = -sign * w;
                    d2c[o + 1][o] = -sign * w;
                }
            }
        }
        Eval {
            grad,
            hess,
            c: self.constraint(theta),
            dc,
            d2c,
        }
    }

    /// Scale for turning the constraint value into a relative violation.
    fn constraint_scale(&self, theta: &[f64; 6]) -> f64 {
        match self.constraint {
            // c is a difference of log RPVs, already relative.
            ConstraintKind::Rpv => 1.0,
            ConstraintKind::PaperLiteral => {
                let side = (1.0 - sigmoid(theta[0])) * theta[1];
                side.abs().max(f64::MIN_POSITIVE)
            }
        }
    }

    fn relative_violation(&self, theta: &[f64; 6]) -> f64 {
        let c = self.constraint(theta);
        match self.constraint {
            ConstraintKind::Rpv => c.exp_m1().abs(),
            ConstraintKind::PaperLiteral => c.abs() / self.constraint_scale(theta),
        }
    }
}

fn inf_norm_free(v: &[f64; 6], free: &[bool; 6]) -> f64 {
    v.iter()
        .zip(free)
        .filter(|(_, f)| **f)
        .fold(0.0, |acc, (x, _)| acc.max(x.abs()))
}

/// Minimizes `f + w c + ρ/2 c²` over the free coordinates, where `w = λ`.
/// Returns the number of Newton iterations taken.
#[allow(clippy::too_many_arguments)]
fn minimize_augmented(
    problem: &Problem,
    theta: &mut [f64; 6],
    lambda: f64,
    rho: f64,
    free_idx: &[usize],
    free: &[bool; 6],
    tol: f64,
    max_iter: usize,
) -> usize {
    let merit = |th: &[f64; 6]| {
        let c = problem.constraint(th);
        let v = problem.objective(th) + lambda * c + 0.5 * rho * c * c;
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let k = free_idx.len();
    for it in 0..max_iter {
        let ev = problem.eval(theta);
        let w = lambda + rho * ev.c;
        let g: [f64; 6] = std::array::from_fn(|i| ev.grad[i] + w * ev.dc[i]);
        if inf_norm_free(&g, free) <= tol {
            return it;
        }

        let mut h = DMatrix::<f64>::zeros(k, k);
        let mut rhs = DVector::<f64>::zeros(k);
        for (a, &i) in free_idx.iter().enumerate() {
            rhs[a] = -g[i];
            for (b, &j) in free_idx.iter().enumerate() {
                h[(a, b)] = ev.hess[i][j] + w * ev.d2c[i][j] + rho * ev.dc[i] * ev.dc[j];
            }
        }
        let diag_scale = (0..k).fold(0.0f64, |acc, a| acc.max(h[(a, a)].abs())).max(1.0);
        let mut shift = 0.0;
        let step = loop {
            let mut shifted = h.clone();
            for a in 0..k {
                shifted[(a, a)] += shift;
            }
            if let Some(chol) = shifted.cholesky() {
                break chol.solve(&rhs);
            }
            shift = if shift == 0.0 { 1e-10 * diag_scale } else { shift * 10.0 };
        };

        // Cap the step so exp() in the objective cannot overflow.
        let largest = step.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let cap = if largest > 5.0 { 5.0 / largest } else { 1.0 };
        let slope: f64 = free_idx
            .iter()
            .enumerate()
            .map(|(a, &i)| g[i] * step[a] * cap)
            .sum();

        let current = merit(theta);
        let mut t = 1.0;
        let mut moved = false;
        while t > 1e-14 {
            let mut trial = *theta;
            for (a, &i) in free_idx.iter().enumerate() {
                trial[i] += t * cap * step[a];
            }
            let value = merit(&trial);
            if value <= current + 1e-4 * t * slope || (value < current && t < 1e-6) {
                *theta = trial;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            // No decrease possible at working precision.
            return it + 1;
        }
    }
    max_iter
}

/// Maximizes the joint likelihood under the null constraint.
///
/// Starts from `start` (the unconstrained MLE when `None`) with `λ = 0`.
pub fn fit_constrained(
    summaries: (&GroupSummary, &GroupSummary),
    options: &SolverOptions,
    start: Option<(ZiLogNormalParams, ZiLogNormalParams)>,
) -> Result<ConstrainedFit> {
    if !(options.tolerance > 0.0) {
        return Err(Error::Input(format!("tolerance must be positive, got {}", options.tolerance)));
    }
    let arms = [Arm::from_summary(summaries.0)?, Arm::from_summary(summaries.1)?];
    let (start_c, start_t) = match start {
        Some(s) => s,
        None => (fit_mle(summaries.0)?, fit_mle(summaries.1)?),
    };
    for (name, p) in [("control", &start_c), ("treatment", &start_t)] {
        if p.is_boundary() {
            return Err(Error::BoundaryParam(format!(
                "{name} parameters r = {}, sigma2 = {} lie on the boundary",
                p.r, p.sigma2
            )));
        }
    }

    let problem = Problem {
        arms,
        constraint: options.constraint,
    };
    let free = options.free;
    let free_idx: Vec<usize> = (0..6).filter(|&i| free[i]).collect();
    if free_idx.is_empty() {
        return Err(Error::Input("no free parameters".into()));
    }

    let mut theta = to_theta(&start_c, &start_t);
    let mut lambda = 0.0;
    let curvature = arms.iter().map(|a| a.m.max(1.0)).sum::<f64>();
    let mut rho = 1.0 + 0.1 * curvature / problem.constraint_scale(&theta).powi(2).max(1e-12);
    let mut iterations = 0;
    let mut last_violation = f64::INFINITY;

    let kkt = |theta: &[f64; 6], lambda: f64| {
        let ev = problem.eval(theta);
        let g: [f64; 6] = std::array::from_fn(|i| ev.grad[i] + lambda * ev.dc[i]);
        inf_norm_free(&g, &free)
    };

    for _ in 0..options.max_outer {
        let mut violation = problem.relative_violation(&theta);
        if violation <= 1e-4 && iterations > 0 {
            iterations += polish_kkt(&problem, &mut theta, &mut lambda, &free_idx, options);
            violation = problem.relative_violation(&theta);
        }
        let residual = kkt(&theta, lambda);
        if violation <= options.constraint_tolerance && residual <= options.tolerance {
            if iterations == 0 {
                // Start already optimal; keep it bit-exact.
                return Ok(ConstrainedFit {
                    control: start_c,
                    treatment: start_t,
                    lambda,
                    kkt_residual: residual,
                    constraint_violation: violation,
                    iterations,
                });
            }
            return Ok(finish(&theta, (&start_c, &start_t), &free, lambda, residual, violation, iterations));
        }

        iterations += minimize_augmented(
            &problem,
            &mut theta,
            lambda,
            rho,
            &free_idx,
            &free,
            0.1 * options.tolerance,
            options.max_inner,
        );
        let c = problem.constraint(&theta);
        lambda += rho * c;
        let violation = problem.relative_violation(&theta);
        if violation > options.constraint_tolerance && violation > 0.25 * last_violation {
            rho *= 10.0;
        }
        last_violation = violation;
    }

    let violation = problem.relative_violation(&theta);
    let residual = kkt(&theta, lambda);
    if violation <= options.constraint_tolerance && residual <= options.tolerance {
        return Ok(finish(&theta, (&start_c, &start_t), &free, lambda, residual, violation, iterations));
    }
    Err(Error::Convergence {
        iterations,
        constraint_violation: violation,
        kkt_residual: residual,
    })
}

/// Newton iterations on the KKT system in `(theta_free, λ)`, started near a
/// feasible point. Steps are halved until the residual decreases; gives up
/// (leaving the last accepted iterate) when it cannot.
fn polish_kkt(
    problem: &Problem,
    theta: &mut [f64; 6],
    lambda: &mut f64,
    free_idx: &[usize],
    options: &SolverOptions,
) -> usize {
    let k = free_idx.len();
    let residual = |th: &[f64; 6], l: f64| -> (f64, f64) {
        let ev = problem.eval(th);
        let g = free_idx
            .iter()
            .fold(0.0f64, |acc, &i| acc.max((ev.grad[i] + l * ev.dc[i]).abs()));
        (g, problem.relative_violation(th))
    };
    let merit = |(g, v): (f64, f64)| g.max(v * 1e3);
    let mut current = residual(theta, *lambda);
    for it in 0..20 {
        if current.0 <= options.tolerance && current.1 <= options.constraint_tolerance {
            return it;
        }
        let ev = problem.eval(theta);
        let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
        let mut rhs = DVector::<f64>::zeros(k + 1);
        for (a, &i) in free_idx.iter().enumerate() {
            rhs[a] = -(ev.grad[i] + *lambda * ev.dc[i]);
            for (b, &j) in free_idx.iter().enumerate() {
                m[(a, b)] = ev.hess[i][j] + *lambda * ev.d2c[i][j];
            }
            m[(a, k)] = ev.dc[i];
            m[(k, a)] = ev.dc[i];
        }
        rhs[k] = -ev.c;
        let Some(step) = m.lu().solve(&rhs) else {
            return it;
        };
        let mut t = 1.0;
        loop {
            let mut trial = *theta;
            for (a, &i) in free_idx.iter().enumerate() {
                trial[i] += t * step[a];
            }
            let trial_lambda = *lambda + t * step[k];
            let r = residual(&trial, trial_lambda);
            if r.0.is_finite() && r.1.is_finite() && merit(r) < merit(current) {
                *theta = trial;
                *lambda = trial_lambda;
                current = r;
                break;
            }
            t *= 0.5;
            if t < 1e-6 {
                return it + 1;
            }
        }
    }
    20
}

/// Fixed coordinates are copied from the start so they survive unrounded.
fn finish(
    theta: &[f64; 6],
    start: (&ZiLogNormalParams, &ZiLogNormalParams),
    free: &[bool; 6],
    lambda: f64,
    residual: f64,
    violation: f64,
    iterations: usize,
) -> ConstrainedFit {
    let arm = |j: usize, s: &ZiLogNormalParams| {
        let p = to_params(theta, j);
        let o = 3 * j;
        ZiLogNormalParams {
            r: if free[o] { p.r } else { s.r },
            mu: if free[o + 1] { p.mu } else { s.mu },
            sigma2: if free[o + 2] { p.sigma2 } else { s.sigma2 },
        }
    };
    ConstrainedFit {
        control: arm(0, start.0),
        treatment: arm(1, start.1),
        lambda,
        kkt_residual: residual,
        constraint_violation: violation,
        iterations,
    }
}

/// Likelihood-ratio test of equal RPV between the arms.
pub fn lrt(data: &ExperimentData, alpha: f64, options: &SolverOptions) -> Result<LrtResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Input(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let sc = data.control_summary();
    let st = data.treatment_summary();
    let unc_c = fit_mle(&sc)?;
    let unc_t = fit_mle(&st)?;
    let fit = fit_constrained((&sc, &st), options, Some((unc_c, unc_t)))?;

    let ll1 = log_likelihood(&unc_c, &unc_t, (&sc, &st))?;
    let ll0 = log_likelihood(&fit.control, &fit.treatment, (&sc, &st))?;
    let log_lr = ll0 - ll1;
    let stat = -2.0 * log_lr;
    let p_value = chi2_1_sf(stat.max(0.0));
    Ok(LrtResult {
        unconstrained: (unc_c, unc_t),
        constrained: (fit.control, fit.treatment),
        lambda: fit.lambda,
        log_lr,
        stat,
        df: 1,
        p_value,
        alpha,
        reject: p_value < alpha,
        converged: true,
        kkt_residual: fit.kkt_residual,
        constraint_violation: fit.constraint_violation,
        iterations: fit.iterations,
        constraint: options.constraint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{simulate, summarize};
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn params(r: f64, mu: f64, sigma2: f64) -> ZiLogNormalParams {
        ZiLogNormalParams::new(r, mu, sigma2).unwrap()
    }

    fn arms(pc: ZiLogNormalParams, pt: ZiLogNormalParams, n: usize, seed: u64) -> ExperimentData {
        ExperimentData::new(
            simulate(&pc, n, seed).unwrap(),
            simulate(&pt, n, seed + 1000).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_value_lognormal_term() {
        // one purchase at exp(mu), no zeros: binomial term is ln 1 = 0 with r = 1 - tiny
        let x = 2.5f64;
        let arm = Arm {
            n: 1.0,
            k: 0.0,
            m: 1.0,
            mean: x.ln(),
            var: 0.0,
        };
        let p = params(1.0, x.ln(), 1.0);
        let ll = arm.log_likelihood(&p).unwrap();
        assert_relative_eq!(ll, -x.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln(), max_relative = 1e-14);
    }

    #[test]
    fn impossible_data_is_numerical_error() {
        let s = summarize(&[0.0, 0.0, E, E * E]).unwrap();
        let err = log_likelihood(&params(1.0, 1.5, 1.0), &params(0.5, 1.5, 1.0), (&s, &s));
        assert!(matches!(err, Err(Error::Numerical(_))));
    }

    #[test]
    fn mle_beats_perturbations() {
        let data = arms(params(0.1, 3.0, 1.0), params(0.12, 2.9, 1.2), 3000, 3);
        let (sc, st) = (data.control_summary(), data.treatment_summary());
        let (mc, mt) = (fit_mle(&sc).unwrap(), fit_mle(&st).unwrap());
        let best = log_likelihood(&mc, &mt, (&sc, &st)).unwrap();
        let mut rng = crate::rng::stream(5, 0);
        for _ in 0..100 {
            let mut u = || crate::rng::open_unit(&mut rng) - 0.5;
            let pc = params(mc.r + 0.02 * u(), mc.mu + 0.2 * u(), mc.sigma2 * (1.0 + 0.4 * u()));
            let pt = params(mt.r + 0.02 * u(), mt.mu + 0.2 * u(), mt.sigma2 * (1.0 + 0.4 * u()));
            assert!(log_likelihood(&pc, &pt, (&sc, &st)).unwrap() <= best);
        }
    }

    #[test]
    fn transformed_derivatives_match_finite_differences() {
        let data = arms(params(0.2, 1.0, 0.7), params(0.25, 1.3, 0.5), 500, 8);
        let (sc, st) = (data.control_summary(), data.treatment_summary());
        for constraint in [ConstraintKind::Rpv, ConstraintKind::PaperLiteral] {
            let problem = Problem {
                arms: [Arm::from_summary(&sc).unwrap(), Arm::from_summary(&st).unwrap()],
                constraint,
            };
            let theta = [-1.1, 0.9, -0.2, -0.8, 1.4, -0.6];
            let ev = problem.eval(&theta);
            let h = 1e-5;
            for i in 0..6 {
                let mut up = theta;
                let mut dn = theta;
                up[i] += h;
                dn[i] -= h;
                let fd = (problem.objective(&up) - problem.objective(&dn)) / (2.0 * h);
                assert_relative_eq!(ev.grad[i], fd, max_relative = 1e-6, epsilon = 1e-6);
                let fd_c = (problem.constraint(&up) - problem.constraint(&dn)) / (2.0 * h);
                assert_relative_eq!(ev.dc[i], fd_c, max_relative = 1e-6, epsilon = 1e-9);
                let (eu, ed) = (problem.eval(&up), problem.eval(&dn));
                for j in 0..6 {
                    let fd_h = (eu.grad[j] - ed.grad[j]) / (2.0 * h);
                    assert_relative_eq!(ev.hess[i][j], fd_h, max_relative = 1e-5, epsilon = 1e-5);
                    let fd_c2 = (eu.dc[j] - ed.dc[j]) / (2.0 * h);
                    assert_relative_eq!(ev.d2c[i][j], fd_c2, max_relative = 1e-5, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn identical_arms_need_no_constraint() {
        let x = simulate(&params(0.1, 3.0, 1.0), 2000, 4).unwrap();
        let data = ExperimentData::new(x.clone(), x).unwrap();
        let res = lrt(&data, 0.05, &SolverOptions::default()).unwrap();
        assert_eq!(res.lambda, 0.0);
        assert_eq!(res.stat, 0.0);
        assert_eq!(res.p_value, 1.0);
        assert_eq!(res.constrained, res.unconstrained);
    }

    #[test]
    fn constraint_holds_at_solution() {
        for constraint in [ConstraintKind::Rpv, ConstraintKind::PaperLiteral] {
            let data = arms(params(0.05, 4.0, 1.0), params(0.06, 4.1, 0.8), 10_000, 6);
            let opts = SolverOptions {
                constraint,
                ..Default::default()
            };
            let res = lrt(&data, 0.05, &opts).unwrap();
            let (c, t) = res.constrained;
            match constraint {
                ConstraintKind::Rpv => assert!((c.rpv() - t.rpv()).abs() / c.rpv() <= 1e-8),
                ConstraintKind::PaperLiteral => {
                    let (lc, lt) = ((1.0 - c.r) * c.mu, (1.0 - t.r) * t.mu);
                    assert!((lc - lt).abs() / lc.abs() <= 1e-8);
                }
            }
            assert!(res.stat >= -1e-6);
            assert!(res.kkt_residual <= opts.tolerance);
        }
    }

    #[test]
    fn stat_is_symmetric_in_labels() {
        let data = arms(params(0.05, 4.0, 1.0), params(0.065, 3.9, 1.1), 8000, 9);
        let swapped = ExperimentData::new(data.treatment.clone(), data.control.clone()).unwrap();
        let a = lrt(&data, 0.05, &SolverOptions::default()).unwrap();
        let b = lrt(&swapped, 0.05, &SolverOptions::default()).unwrap();
        assert_relative_eq!(a.stat, b.stat, max_relative = 1e-7, epsilon = 1e-9);
        assert_relative_eq!(a.lambda, -b.lambda, max_relative = 1e-6, epsilon = 1e-9);
    }

    #[test]
    fn clear_lift_is_rejected() {
        let data = arms(params(0.05, 4.0, 1.0), params(0.08, 4.0, 1.0), 10_000, 12);
        let res = lrt(&data, 0.05, &SolverOptions::default()).unwrap();
        assert!(res.reject, "p = {}", res.p_value);
        assert!(res.lambda != 0.0);
    }

    #[test]
    fn boundary_start_is_rejected() {
        let c = vec![3.0, 4.0, 5.0, 6.0];
        let t = vec![0.0, 3.0, 4.0, 8.0];
        let data = ExperimentData::new(c, t).unwrap();
        assert!(matches!(
            lrt(&data, 0.05, &SolverOptions::default()),
            Err(Error::BoundaryParam(_))
        ));
    }
}
