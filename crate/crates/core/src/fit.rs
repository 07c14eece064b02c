//! Weighted nonlinear least squares for the decay models, Gaussian
//! log-likelihood and AIC-based comparison.
//!
//! Optimization is Levenberg-Marquardt in transformed coordinates: rates
//! (`p`, `q`) go through a logit so they stay in `(0, 1)`, amplitudes and
//! offsets are unconstrained.

use std::cmp::Ordering;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decay::{DecayModel, DecaySeries, ModelKind, SeriesPoint};
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 500;
const REL_TOL: f64 = 1e-10;
const STEP_TOL: f64 = 1e-12;
const INITIAL_DAMPING: f64 = 1e-3;
/// Damping beyond this means no downhill step exists at machine precision.
const MAX_DAMPING: f64 = 1e16;
const LOG_FLOOR: f64 = 1e-6;
const RATE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: DecayModel,
    pub param_names: Vec<String>,
    pub std_errors: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    /// Weighted residual sum of squares `Σ (y − f)²/σ²`.
    pub rss: f64,
    pub log_likelihood: f64,
    pub aic: f64,
    pub k: usize,
    pub n_points: usize,
    pub converged: bool,
    pub iterations: usize,
    pub series_id: String,
}

impl FitResult {
    pub fn kind(&self) -> ModelKind {
        self.model.kind()
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        let i = self.param_names.iter().position(|n| n == name)?;
        Some(self.std_errors[i])
    }
}

/// `Σ [−½ ln(2πσ²) − (y − f)²/(2σ²)]`.
pub fn log_likelihood(model: &DecayModel, series: &DecaySeries) -> f64 {
    series
        .points
        .iter()
        .map(|pt| {
            let r = pt.value - model.evaluate(pt.m as f64);
            -0.5 * (2.0 * PI * pt.variance).ln() - r * r / (2.0 * pt.variance)
        })
        .sum()
}

pub fn aic(k: usize, log_likelihood: f64) -> f64 {
    2.0 * k as f64 - 2.0 * log_likelihood
}

/// How many times more probable model `b` is than `a` to minimize
/// information loss.
pub fn relative_likelihood(aic_a: f64, aic_b: f64) -> f64 {
    ((aic_a - aic_b) / 2.0).exp()
}

pub fn compare(a: &FitResult, b: &FitResult) -> Result<f64> {
    if a.series_id != b.series_id {
        return Err(Error::SeriesMismatch(a.series_id.clone(), b.series_id.clone()));
    }
    Ok(relative_likelihood(a.aic, b.aic))
}

fn logit(x: f64) -> f64 {
    let x = x.clamp(RATE_EPS, 1.0 - RATE_EPS);
    (x / (1.0 - x)).ln()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

struct Problem<'a> {
    kind: ModelKind,
    points: &'a [SeriesPoint],
}

impl Problem<'_> {
    fn to_natural(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .enumerate()
            .map(|(i, &t)| if self.kind.is_rate(i) { sigmoid(t) } else { t })
            .collect()
    }

    fn to_transformed(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| if self.kind.is_rate(i) { logit(v) } else { v })
            .collect()
    }

    fn model(&self, theta: &[f64]) -> DecayModel {
        DecayModel::from_params(self.kind, &self.to_natural(theta))
    }

    fn objective(&self, theta: &[f64]) -> f64 {
        let model = self.model(theta);
        self.points
            .iter()
            .map(|pt| (pt.value - model.evaluate(pt.m as f64)).powi(2) / pt.variance)
            .sum()
    }

    /// Weighted residuals and the Jacobian of the model values
    /// (both scaled by 1/σ), in transformed coordinates.
    fn linearize(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let x = self.to_natural(theta);
        let model = DecayModel::from_params(self.kind, &x);
        let k = x.len();
        let n = self.points.len();
        let mut r = DVector::zeros(n);
        let mut j = DMatrix::zeros(n, k);
        for (row, pt) in self.points.iter().enumerate() {
            let s = pt.variance.sqrt();
            let m = pt.m as f64;
            r[row] = (pt.value - model.evaluate(m)) / s;
            for (col, g) in model.gradient(m).into_iter().enumerate() {
                let chain = if self.kind.is_rate(col) {
                    x[col] * (1.0 - x[col])
                } else {
                    1.0
                };
                j[(row, col)] = g * chain / s;
            }
        }
        (r, j)
    }
}

struct Solution {
    theta: Vec<f64>,
    objective: f64,
    iterations: usize,
    converged: bool,
}

fn levenberg_marquardt(problem: &Problem, start: Vec<f64>) -> Solution {
    let mut theta = start;
    let mut obj = problem.objective(&theta);
    let mut lambda = INITIAL_DAMPING;
    let mut iterations = 0;
    let (mut r, mut j) = problem.linearize(&theta);

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let jt = j.transpose();
        let h = &jt * &j;
        let g = &jt * &r;
        let mut damped = h.clone();
        for d in 0..h.nrows() {
            damped[(d, d)] += lambda * h[(d, d)].max(1e-12);
        }
        // model Jacobian is ∂f/∂θ, residual is y − f, so the step is +H⁻¹g
        let Some(step) = damped.cholesky().map(|c| c.solve(&g)) else {
            lambda *= 10.0;
            if lambda > MAX_DAMPING {
                return Solution { theta, objective: obj, iterations, converged: true };
            }
            continue;
        };
        if step.norm() < STEP_TOL {
            return Solution { theta, objective: obj, iterations, converged: true };
        }
        let trial: Vec<f64> = theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect();
        let trial_obj = problem.objective(&trial);
        if trial_obj.is_finite() && trial_obj < obj {
            let rel = (obj - trial_obj) / obj.max(f64::MIN_POSITIVE);
            theta = trial;
            obj = trial_obj;
            lambda = (lambda * 0.1).max(1e-15);
            if rel < REL_TOL || obj == 0.0 {
                return Solution { theta, objective: obj, iterations, converged: true };
            }
            (r, j) = problem.linearize(&theta);
        } else {
            lambda *= 10.0;
            if lambda > MAX_DAMPING {
                return Solution { theta, objective: obj, iterations, converged: true };
            }
        }
    }
    Solution { theta, objective: obj, iterations, converged: false }
}

/// Slope and intercept of ln(max(y, ε)) against m over the first half
/// of the lengths.
fn log_linear_seed(points: &[SeriesPoint]) -> (f64, f64) {
    let mut ms: Vec<u32> = points.iter().map(|p| p.m).collect();
    ms.dedup();
    let cutoff = ms[(ms.len().div_ceil(2)).max(2).min(ms.len()) - 1];
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.m <= cutoff)
        .map(|p| (p.m as f64, p.value.max(LOG_FLOOR).ln()))
        .collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|v| v.0).sum::<f64>() / n;
    let my = xy.iter().map(|v| v.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|v| (v.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

fn clip_rate(p: f64) -> f64 {
    p.clamp(1e-6, 1.0 - 1e-9)
}

fn default_start(kind: ModelKind, points: &[SeriesPoint]) -> Vec<f64> {
    let (slope, intercept) = log_linear_seed(points);
    let p0 = clip_rate(slope.exp());
    let a0 = intercept.exp();
    let b0 = points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    match kind {
        ModelKind::NoConstant => vec![a0, p0],
        ModelKind::ZeroOrder | ModelKind::ResidualSpam => vec![(a0 - b0).max(1e-3), p0, b0],
        ModelKind::TwoFidelity => {
            let q0 = (p0 - 3.0 * (1.0 - p0)).clamp(p0 * 1e-3, p0 * (1.0 - 1e-6));
            vec![a0 / 2.0, p0, q0]
        }
    }
}

fn sorted_points(series: &DecaySeries) -> Vec<SeriesPoint> {
    let mut pts = series.points.clone();
    pts.sort_by(|a, b| {
        a.m.cmp(&b.m)
            .then(a.value.total_cmp(&b.value))
            .then(a.variance.total_cmp(&b.variance))
    });
    pts
}

/// Natural-coordinate covariance `(JᵀWJ)⁻¹`, pseudo-inverted when singular.
fn covariance(model: &DecayModel, points: &[SeriesPoint]) -> DMatrix<f64> {
    let k = model.kind().param_count();
    let mut j = DMatrix::zeros(points.len(), k);
    for (row, pt) in points.iter().enumerate() {
        let s = pt.variance.sqrt();
        for (col, g) in model.gradient(pt.m as f64).into_iter().enumerate() {
            j[(row, col)] = g / s;
        }
    }
    let h = j.transpose() * &j;
    let inv = h
        .clone()
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()) && (0..k).all(|d| m[(d, d)] >= 0.0))
        .unwrap_or_else(|| {
            let scale = h.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            h.pseudo_inverse(scale * 1e-12).unwrap_or_else(|_| DMatrix::zeros(k, k))
        });
    (&inv + inv.transpose()) * 0.5
}

/// Fits `kind` to `series` by weighted least squares.
///
/// Non-convergence is not an error: the best point found is returned with
/// `converged = false`.
pub fn fit(kind: ModelKind, series: &DecaySeries) -> Result<FitResult> {
    let points = sorted_points(series);
    let k = kind.param_count();
    let distinct = {
        let mut ms: Vec<u32> = points.iter().map(|p| p.m).collect();
        ms.dedup();
        ms.len()
    };
    if distinct < k + 1 {
        return Err(Error::DegenerateData { kind, needed: k + 1, got: distinct });
    }
    if let Some(bad) = points.iter().find(|p| !(p.variance > 0.0 && p.variance.is_finite())) {
        return Err(Error::Dataset(format!("non-positive variance at m={}", bad.m)));
    }

    let problem = Problem { kind, points: &points };
    let mut starts = vec![default_start(kind, &points)];
    if kind != ModelKind::NoConstant {
        // second start from the single-exponential solution
        let nc_problem = Problem { kind: ModelKind::NoConstant, points: &points };
        let nc_start = nc_problem.to_transformed(&default_start(ModelKind::NoConstant, &points));
        let nc = nc_problem.to_natural(&levenberg_marquardt(&nc_problem, nc_start).theta);
        let (a, p) = (nc[0], clip_rate(nc[1]));
        starts.push(match kind {
            ModelKind::TwoFidelity => {
                let q = (p - 3.0 * (1.0 - p)).clamp(p * 1e-3, p * (1.0 - 1e-6));
                vec![a / 2.0, p, q]
            }
            _ => vec![a, p, 0.0],
        });
    }

    let mut best: Option<Solution> = None;
    let mut total_iterations = 0;
    for start in starts {
        let sol = levenberg_marquardt(&problem, problem.to_transformed(&start));
        total_iterations += sol.iterations;
        let better = match &best {
            None => true,
            Some(b) => match sol.objective.partial_cmp(&b.objective) {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => sol.converged && !b.converged,
                _ => false,
            },
        };
        if better {
            best = Some(sol);
        }
    }
    let best = best.expect("at least one start");

    let mut model = problem.model(&best.theta);
    if let DecayModel::TwoFidelity { a, p, q } = model {
        if q > p {
            model = DecayModel::TwoFidelity { a, p: q, q: p };
        }
    }
    let cov = covariance(&model, &points);
    let std_errors = (0..k).map(|d| cov[(d, d)].max(0.0).sqrt()).collect();
    let canonical = DecaySeries { kind: series.kind, points };
    let ll = log_likelihood(&model, &canonical);
    if !best.converged {
        log::warn!("{kind} fit did not converge in {MAX_ITERATIONS} iterations");
    }
    Ok(FitResult {
        model,
        param_names: kind.param_names().iter().map(|s| s.to_string()).collect(),
        std_errors,
        covariance: (0..k).map(|r| (0..k).map(|c| cov[(r, c)]).collect()).collect(),
        rss: best.objective,
        log_likelihood: ll,
        aic: aic(k, ll),
        k,
        n_points: canonical.points.len(),
        converged: best.converged,
        iterations: total_iterations,
        series_id: canonical.id(),
    })
}

/// Fits several models to the same series in parallel; results keep the
/// order of `kinds`.
pub fn fit_models(kinds: &[ModelKind], series: &DecaySeries) -> Vec<Result<FitResult>> {
    kinds.par_iter().map(|&k| fit(k, series)).collect()
}

/// Weighted coefficient of determination of `model` on `series`.
pub fn weighted_r_squared(model: &DecayModel, series: &DecaySeries) -> f64 {
    let w: Vec<f64> = series.points.iter().map(|p| 1.0 / p.variance).collect();
    let wsum: f64 = w.iter().sum();
    let mean = series.points.iter().zip(&w).map(|(p, w)| w * p.value).sum::<f64>() / wsum;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for (p, w) in series.points.iter().zip(&w) {
        ss_res += w * (p.value - model.evaluate(p.m as f64)).powi(2);
        ss_tot += w * (p.value - mean).powi(2);
    }
    1.0 - ss_res / ss_tot
}
