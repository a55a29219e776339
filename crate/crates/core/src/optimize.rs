//! Gradient descent, variable-metric descent, single-sample stochastic descent
//! and L-BFGS over sampling schemes.
//!
//! Every run records `(iteration, Ξ_t, J(Ξ_t))` at `t = 0`, at every multiple
//! of `record_every` and at the last iterate.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::analysis::PsdProfile;
use crate::batch::BatchJ1;
use crate::error::{invalid, Error, Result};
use crate::fourier::{check_len, SamplingScheme, Signal};
use crate::objective::{eval_j, grad_fd, grad_j1, ObjectiveSpec};
use crate::reconstruct::ReconstructorKind;
use crate::signals::RectangleModel;

/// Samples of `ρ_P` are clamped below at this fraction of their maximum.
pub const METRIC_FLOOR: f64 = 1e-8;
pub const ARMIJO: f64 = 1e-4;
pub const MAX_HALVINGS: usize = 50;
/// Curvature pairs with `sᵀy` at or below this are skipped.
pub const CURVATURE_TOL: f64 = 1e-12;
/// L-BFGS stops once an accepted step lowers `J` by less than this fraction of `max(|J|, 1)`.
pub const LBFGS_FTOL: f64 = 1e-13;

/// Something with a value and a gradient in the sampling frequencies.
pub trait Objective {
    fn value(&self, xs: &[f64]) -> Result<f64>;
    fn value_and_gradient(&self, xs: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl Objective for BatchJ1 {
    fn value(&self, xs: &[f64]) -> Result<f64> {
        Ok(BatchJ1::value(self, xs))
    }

    fn value_and_gradient(&self, xs: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok(BatchJ1::value_and_gradient(self, xs))
    }
}

/// Reference objective on an [`ObjectiveSpec`]: analytic gradient for
/// back-projection, central differences otherwise or when `fd_step` is set.
#[derive(Clone, Debug)]
pub struct SpecObjective {
    pub spec: ObjectiveSpec,
    pub fd_step: Option<f64>,
}

impl SpecObjective {
    pub fn new(spec: ObjectiveSpec, fd_step: Option<f64>) -> Result<Self> {
        if spec.kind() != ReconstructorKind::BackProjection && fd_step.is_none() {
            return Err(invalid("only back-projection has an analytic gradient; set a finite-difference step"));
        }
        Ok(Self { spec, fd_step })
    }
}

impl Objective for SpecObjective {
    fn value(&self, xs: &[f64]) -> Result<f64> {
        Ok(eval_j(&self.spec, &SamplingScheme::new(xs.to_vec())?)?.value)
    }

    fn value_and_gradient(&self, xs: &[f64]) -> Result<(f64, Vec<f64>)> {
        let s = SamplingScheme::new(xs.to_vec())?;
        let v = eval_j(&self.spec, &s)?.value;
        let g = match self.fd_step {
            Some(h) => grad_fd(&self.spec, &s, h)?,
            None => grad_j1(&self.spec, &s)?,
        };
        Ok((v, g))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gd,
    VarMetricGd,
    Sgd,
    VarMetricSgd,
    Lbfgs,
}

impl Method {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, Method::Sgd | Method::VarMetricSgd)
    }

    pub fn uses_metric(&self) -> bool {
        matches!(self, Method::VarMetricGd | Method::VarMetricSgd)
    }
}

fn default_beta() -> f64 {
    1.0
}
fn default_memory() -> usize {
    8
}
fn default_record_every() -> usize {
    1
}
fn default_window() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Fixed step for the descent methods; initial inverse-Hessian scale for L-BFGS.
    pub step: f64,
    pub iters: usize,
    /// Exponent of the variable metric `ρ_P^{−β}`.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_memory")]
    pub lbfgs_memory: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    /// Number of final iterates averaged into `smoothed_final` for stochastic methods.
    #[serde(default = "default_window")]
    pub smoothing_window: usize,
}

impl OptimizerConfig {
    pub fn new(method: Method, step: f64, iters: usize) -> Self {
        Self {
            method,
            step,
            iters,
            beta: default_beta(),
            lbfgs_memory: default_memory(),
            seed: 0,
            record_every: default_record_every(),
            smoothing_window: default_window(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step >= 0.0 && self.step.is_finite()) {
            return Err(invalid(format!("step must be finite and nonnegative (got {})", self.step)));
        }
        if self.iters == 0 {
            return Err(invalid("iters must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every must be at least 1"));
        }
        if !(1.0..=2.0).contains(&self.beta) {
            return Err(invalid(format!("beta must lie in [1, 2] (got {})", self.beta)));
        }
        if self.method.is_stochastic() && self.smoothing_window == 0 {
            return Err(invalid("smoothing_window must be at least 1"));
        }
        Ok(())
    }

    fn expect(&self, allowed: &[Method], who: &str) -> Result<()> {
        self.validate()?;
        if !allowed.contains(&self.method) {
            return Err(invalid(format!("{who} cannot run method {:?}", self.method)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub iteration: usize,
    pub xi: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub final_xi: Vec<f64>,
    pub final_value: f64,
    /// Mean of the last `smoothing_window` iterates (stochastic methods only).
    pub smoothed_final: Option<Vec<f64>>,
    /// Iterations actually performed.
    pub iterations: usize,
    /// L-BFGS line searches that ended with a zero step.
    pub stalls: usize,
}

impl Trajectory {
    /// Recorded value at the last snapshot with `iteration <= t`.
    pub fn value_at(&self, t: usize) -> Option<f64> {
        self.snapshots.iter().rev().find(|s| s.iteration <= t).map(|s| s.value)
    }
}

/// Periodic piecewise-linear `ρ_P` on a uniform grid over `[−N/2, N/2)`.
#[derive(Clone, Debug)]
pub struct MetricInterp {
    len: usize,
    samples: Vec<f64>,
}

impl MetricInterp {
    pub fn new(len: usize, samples: Vec<f64>) -> Result<Self> {
        check_len(len)?;
        if samples.is_empty() || samples.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("metric samples must be finite, nonnegative and nonempty"));
        }
        let top = samples.iter().copied().fold(0.0, f64::max);
        if top <= 0.0 {
            return Err(invalid("metric samples are all zero"));
        }
        let floor = METRIC_FLOOR * top;
        Ok(Self {
            len,
            samples: samples.into_iter().map(|v| v.max(floor)).collect(),
        })
    }

    pub fn from_psd(profile: &PsdProfile) -> Result<Self> {
        Self::new(profile.len, profile.rho.clone())
    }

    /// `ρ ≡ 1`.
    pub fn flat(len: usize) -> Result<Self> {
        Self::new(len, vec![1.0; len])
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let n = self.samples.len();
        let period = self.len as f64;
        let t = (xi + period / 2.0).rem_euclid(period) * n as f64 / period;
        let k = (t.floor() as usize).min(n - 1);
        let frac = t - k as f64;
        if frac == 0.0 {
            return self.samples[k];
        }
        self.samples[k] * (1.0 - frac) + self.samples[(k + 1) % n] * frac
    }

    /// `ρ(ξ)^{−β}`.
    pub fn scale(&self, xi: f64, beta: f64) -> f64 {
        self.eval(xi).powf(-beta)
    }
}

struct Recorder {
    every: usize,
    snapshots: Vec<Snapshot>,
}

impl Recorder {
    fn new(every: usize) -> Self {
        Self {
            every,
            snapshots: Vec::new(),
        }
    }

    fn wants(&self, t: usize) -> bool {
        t % self.every == 0
    }

    fn push(&mut self, t: usize, xs: &[f64], value: f64) {
        if self.snapshots.last().is_some_and(|s| s.iteration == t) {
            return;
        }
        self.snapshots.push(Snapshot {
            iteration: t,
            xi: xs.to_vec(),
            value,
        });
    }
}

fn finite_or_abort(value: f64, grad: &[f64], t: usize, xs: &[f64]) -> Result<()> {
    if value.is_finite() && grad.iter().all(|g| g.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            iteration: t,
            xi: xs.to_vec(),
        })
    }
}

fn descend(
    objective: &dyn Objective,
    xi0: &[f64],
    cfg: &OptimizerConfig,
    metric: Option<&MetricInterp>,
) -> Result<Trajectory> {
    let mut xs = xi0.to_vec();
    let mut rec = Recorder::new(cfg.record_every);
    for t in 0..cfg.iters {
        let (v, g) = objective.value_and_gradient(&xs)?;
        finite_or_abort(v, &g, t, &xs)?;
        if rec.wants(t) {
            rec.push(t, &xs, v);
        }
        step_in_place(&mut xs, &g, cfg, metric);
    }
    let final_value = objective.value(&xs)?;
    finite_or_abort(final_value, &[], cfg.iters, &xs)?;
    rec.push(cfg.iters, &xs, final_value);
    Ok(Trajectory {
        snapshots: rec.snapshots,
        final_xi: xs,
        final_value,
        smoothed_final: None,
        iterations: cfg.iters,
        stalls: 0,
    })
}

fn step_in_place(xs: &mut [f64], g: &[f64], cfg: &OptimizerConfig, metric: Option<&MetricInterp>) {
    for (x, &gm) in xs.iter_mut().zip(g) {
        let scale = metric.map_or(1.0, |mt| mt.scale(*x, cfg.beta));
        *x -= cfg.step * scale * gm;
    }
}

/// `Ξ_{t+1} = Ξ_t − step ∇J(Ξ_t)`.
pub fn run_gd(objective: &dyn Objective, xi0: &[f64], cfg: &OptimizerConfig) -> Result<Trajectory> {
    cfg.expect(&[Method::Gd], "run_gd")?;
    descend(objective, xi0, cfg, None)
}

/// Gradient descent with each coordinate scaled by `ρ_P(ξ_m)^{−β}`.
pub fn run_var_metric(
    objective: &dyn Objective,
    xi0: &[f64],
    cfg: &OptimizerConfig,
    metric: &MetricInterp,
) -> Result<Trajectory> {
    cfg.expect(&[Method::VarMetricGd], "run_var_metric")?;
    descend(objective, xi0, cfg, Some(metric))
}

/// Source of one training signal per stochastic iteration.
pub trait SignalSampler {
    fn sample(&mut self, iteration: usize) -> Signal;
}

/// Always returns the same signal.
pub struct FixedSampler(pub Signal);

impl SignalSampler for FixedSampler {
    fn sample(&mut self, _iteration: usize) -> Signal {
        self.0.clone()
    }
}

/// Fresh rectangle draw `model.signal(offset + t)` at iteration `t`.
pub struct RectangleSampler {
    pub model: RectangleModel,
    pub offset: u64,
}

impl SignalSampler for RectangleSampler {
    fn sample(&mut self, iteration: usize) -> Signal {
        self.model.signal(self.offset + iteration as u64)
    }
}

/// Single-sample stochastic descent, optionally with the variable metric.
///
/// Recorded values come from `monitor` when given and from the current sample otherwise.
pub fn run_sgd(
    sampler: &mut dyn SignalSampler,
    sigma: f64,
    xi0: &[f64],
    cfg: &OptimizerConfig,
    metric: Option<&MetricInterp>,
    monitor: Option<&dyn Objective>,
) -> Result<Trajectory> {
    cfg.expect(&[Method::Sgd, Method::VarMetricSgd], "run_sgd")?;
    let metric = match (cfg.method, metric) {
        (Method::VarMetricSgd, None) => return Err(invalid("variable-metric SGD needs a metric")),
        (Method::Sgd, _) => None,
        (_, m) => m,
    };
    let mut xs = xi0.to_vec();
    let mut rec = Recorder::new(cfg.record_every);
    let window_start = cfg.iters.saturating_sub(cfg.smoothing_window) + 1;
    let mut sum = vec![0.0; xs.len()];
    let mut last = None;
    for t in 0..cfg.iters {
        let batch = BatchJ1::new(&[sampler.sample(t)], sigma)?;
        let (v, g) = batch.value_and_gradient(&xs);
        finite_or_abort(v, &g, t, &xs)?;
        if rec.wants(t) {
            let value = match monitor {
                Some(m) => m.value(&xs)?,
                None => v,
            };
            rec.push(t, &xs, value);
        }
        step_in_place(&mut xs, &g, cfg, metric);
        if t + 1 >= window_start {
            for (s, x) in sum.iter_mut().zip(&xs) {
                *s += x;
            }
        }
        last = Some(batch);
    }
    let final_value = match monitor {
        Some(m) => m.value(&xs)?,
        None => last.expect("at least one iteration").value(&xs),
    };
    finite_or_abort(final_value, &[], cfg.iters, &xs)?;
    rec.push(cfg.iters, &xs, final_value);
    let count = (cfg.iters + 1 - window_start) as f64;
    Ok(Trajectory {
        snapshots: rec.snapshots,
        final_xi: xs,
        final_value,
        smoothed_final: Some(sum.into_iter().map(|s| s / count).collect()),
        iterations: cfg.iters,
        stalls: 0,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `−H g` by the two-loop recursion.
fn lbfgs_direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, step: f64) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    let gamma = match pairs.back() {
        Some((s, y, _)) => dot(s, y) / dot(y, y),
        None => step,
    };
    for qi in q.iter_mut() {
        *qi *= gamma;
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q.iter().map(|v| -v).collect()
}

fn along(xs: &[f64], d: &[f64], alpha: f64) -> Vec<f64> {
    xs.iter().zip(d).map(|(x, di)| x + alpha * di).collect()
}

/// Accepted step `α`, the value there and, for the unit step, the gradient.
type Accepted = (f64, f64, Option<Vec<f64>>);

/// Backtracking Armijo search. The unit step is tried first (with its
/// gradient, reused on acceptance), then the minimizer of the quadratic through
/// `f(0)`, `f'(0)` and `f(1)` clamped to `[0.1, 0.5]`, then halvings.
fn line_search(objective: &dyn Objective, xs: &[f64], f0: f64, d: &[f64], slope: f64) -> Result<Option<Accepted>> {
    let armijo = |alpha: f64, f: f64| f.is_finite() && f <= f0 + ARMIJO * alpha * slope;
    let (f1, g1) = objective.value_and_gradient(&along(xs, d, 1.0))?;
    if armijo(1.0, f1) && g1.iter().all(|v| v.is_finite()) {
        return Ok(Some((1.0, f1, Some(g1))));
    }
    let curvature = f1 - f0 - slope;
    let mut alpha = if f1.is_finite() && curvature > 0.0 {
        (-slope / (2.0 * curvature)).clamp(0.1, 0.5)
    } else {
        0.5
    };
    for _ in 0..MAX_HALVINGS {
        let f = objective.value(&along(xs, d, alpha))?;
        if armijo(alpha, f) {
            return Ok(Some((alpha, f, None)));
        }
        alpha *= 0.5;
    }
    Ok(None)
}

/// L-BFGS with the last `lbfgs_memory` curvature pairs and an Armijo line search.
///
/// A failed line search takes a zero step, clears the memory and counts a
/// stall; two consecutive stalls, a zero gradient or a relative decrease below
/// [`LBFGS_FTOL`] end the run.
pub fn run_lbfgs(objective: &dyn Objective, xi0: &[f64], cfg: &OptimizerConfig) -> Result<Trajectory> {
    cfg.expect(&[Method::Lbfgs], "run_lbfgs")?;
    let mut xs = xi0.to_vec();
    let (mut f, mut g) = objective.value_and_gradient(&xs)?;
    finite_or_abort(f, &g, 0, &xs)?;
    let mut rec = Recorder::new(cfg.record_every);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let (mut stalls, mut consecutive) = (0, 0);
    let mut done = cfg.iters;
    for t in 0..cfg.iters {
        if rec.wants(t) {
            rec.push(t, &xs, f);
        }
        if g.iter().all(|&v| v == 0.0) {
            done = t;
            break;
        }
        let mut d = lbfgs_direction(&g, &pairs, cfg.step);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            pairs.clear();
            d = g.iter().map(|v| -cfg.step * v).collect();
            slope = dot(&g, &d);
        }
        let accepted = if slope < 0.0 {
            line_search(objective, &xs, f, &d, slope)?
        } else {
            None
        };
        let Some((alpha, f_acc, grad)) = accepted else {
            stalls += 1;
            consecutive += 1;
            pairs.clear();
            if consecutive >= 2 {
                done = t + 1;
                break;
            }
            continue;
        };
        consecutive = 0;
        let next = along(&xs, &d, alpha);
        let (f_new, g_new) = match grad {
            Some(g1) => (f_acc, g1),
            None => objective.value_and_gradient(&next)?,
        };
        finite_or_abort(f_new, &g_new, t + 1, &next)?;
        let s: Vec<f64> = next.iter().zip(&xs).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if cfg.lbfgs_memory > 0 && sy > CURVATURE_TOL {
            if pairs.len() == cfg.lbfgs_memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        let converged = f - f_new <= LBFGS_FTOL * f.abs().max(1.0);
        xs = next;
        f = f_new;
        g = g_new;
        if converged {
            done = t + 1;
            break;
        }
    }
    rec.push(done, &xs, f);
    Ok(Trajectory {
        snapshots: rec.snapshots,
        final_xi: xs,
        final_value: f,
        smoothed_final: None,
        iterations: done,
        stalls,
    })
}

/// Mean reconstruction error of a scheme over a dataset.
pub fn evaluate_scheme(xi: &[f64], dataset: &[Signal], kind: ReconstructorKind, sigma: f64) -> Result<f64> {
    let spec = ObjectiveSpec::new(kind, sigma, dataset.to_vec())?;
    Ok(eval_j(&spec, &SamplingScheme::new(xi.to_vec())?)?.value)
}
