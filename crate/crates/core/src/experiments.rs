//! Drivers for the desk-scale experiments: spectral-density profiles of
//! growing datasets and the six-strategy cross-evaluation.

use serde::{Deserialize, Serialize};

use crate::analysis::{psd, PsdProfile, DEFAULT_PSD_POINTS};
use crate::batch::BatchJ1;
use crate::error::{invalid, Result};
use crate::optimize::{
    evaluate_scheme, run_gd, run_lbfgs, run_sgd, run_var_metric, Method, MetricInterp, OptimizerConfig,
    RectangleSampler, Trajectory,
};
use crate::reconstruct::ReconstructorKind;
use crate::signals::RectangleModel;

/// `M` points `−N/2, −N/2 + 2, …`.
pub fn subgrid_init(len: usize, m: usize) -> Vec<f64> {
    (0..m).map(|k| -(len as f64) / 2.0 + 2.0 * k as f64).collect()
}

/// Profiles of the first `P` rectangle draws for each requested `P` (nested datasets).
pub fn psd_trend(len: usize, seed: u64, sizes: &[usize], points_per_unit: usize) -> Result<Vec<PsdProfile>> {
    let model = RectangleModel::new(len, seed)?;
    let largest = sizes.iter().copied().max().ok_or_else(|| invalid("no dataset sizes given"))?;
    let data = model.dataset(largest);
    sizes.iter().map(|&p| psd(&data[..p], points_per_unit)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Gradient descent on the first training signal only.
    #[serde(rename = "gd_p1")]
    GdSingle,
    Gd,
    VarMetricGd,
    Lbfgs,
    Sgd,
    VarMetricSgd,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::GdSingle,
        Strategy::Gd,
        Strategy::VarMetricGd,
        Strategy::Lbfgs,
        Strategy::Sgd,
        Strategy::VarMetricSgd,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Strategy::GdSingle => "gd_p1",
            Strategy::Gd => "gd",
            Strategy::VarMetricGd => "var_metric_gd",
            Strategy::Lbfgs => "lbfgs",
            Strategy::Sgd => "sgd",
            Strategy::VarMetricSgd => "var_metric_sgd",
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Strategy::GdSingle | Strategy::Gd => Method::Gd,
            Strategy::VarMetricGd => Method::VarMetricGd,
            Strategy::Lbfgs => Method::Lbfgs,
            Strategy::Sgd => Method::Sgd,
            Strategy::VarMetricSgd => Method::VarMetricSgd,
        }
    }
}

/// Step size per strategy; there are no defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySteps {
    pub gd_p1: f64,
    pub gd: f64,
    pub var_metric_gd: f64,
    pub lbfgs: f64,
    pub sgd: f64,
    pub var_metric_sgd: f64,
}

impl StrategySteps {
    pub fn get(&self, s: Strategy) -> f64 {
        match s {
            Strategy::GdSingle => self.gd_p1,
            Strategy::Gd => self.gd,
            Strategy::VarMetricGd => self.var_metric_gd,
            Strategy::Lbfgs => self.lbfgs,
            Strategy::Sgd => self.sgd,
            Strategy::VarMetricSgd => self.var_metric_sgd,
        }
    }
}

fn d_len() -> usize {
    128
}
fn d_m() -> usize {
    64
}
fn d_size() -> usize {
    1000
}
fn d_iters() -> usize {
    100_000
}
fn d_record() -> usize {
    100
}
fn d_beta() -> f64 {
    1.0
}
fn d_memory() -> usize {
    8
}
fn d_window() -> usize {
    10_000
}
fn d_points() -> usize {
    DEFAULT_PSD_POINTS
}
fn d_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Table1Config {
    #[serde(default = "d_len")]
    pub len: usize,
    #[serde(default = "d_m")]
    pub m: usize,
    #[serde(default = "d_size")]
    pub dataset_size: usize,
    pub dataset_seed: u64,
    /// Seed of the rectangle stream drawn by the stochastic strategies.
    pub sgd_seed: u64,
    #[serde(default = "d_iters")]
    pub iters: usize,
    #[serde(default = "d_record")]
    pub record_every: usize,
    pub steps: StrategySteps,
    #[serde(default = "d_beta")]
    pub beta: f64,
    #[serde(default = "d_memory")]
    pub lbfgs_memory: usize,
    #[serde(default = "d_window")]
    pub smoothing_window: usize,
    #[serde(default = "d_points")]
    pub psd_points: usize,
    #[serde(default = "d_strategies")]
    pub strategies: Vec<Strategy>,
}

impl Table1Config {
    pub fn optimizer(&self, s: Strategy) -> OptimizerConfig {
        OptimizerConfig {
            method: s.method(),
            step: self.steps.get(s),
            iters: self.iters,
            beta: self.beta,
            lbfgs_memory: self.lbfgs_memory,
            seed: self.sgd_seed,
            record_every: self.record_every,
            smoothing_window: self.smoothing_window,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StrategyResult {
    pub strategy: Strategy,
    /// Mean `J₁` of the reported scheme over the training dataset.
    pub score: f64,
    /// The smoothed final scheme for stochastic strategies, the last iterate otherwise.
    pub scheme: Vec<f64>,
    pub trajectory: Trajectory,
}

/// Shared inputs of the strategies.
pub struct Table1Setup {
    pub dataset: Vec<crate::fourier::Signal>,
    pub metric: MetricInterp,
    pub init: Vec<f64>,
}

pub fn table1_setup(cfg: &Table1Config) -> Result<Table1Setup> {
    if cfg.m == 0 || 2 * cfg.m > cfg.len {
        return Err(invalid(format!("need 1 <= M <= N/2 for the spacing-2 start (got M = {})", cfg.m)));
    }
    if cfg.dataset_size == 0 {
        return Err(invalid("dataset_size must be at least 1"));
    }
    let dataset = RectangleModel::new(cfg.len, cfg.dataset_seed)?.dataset(cfg.dataset_size);
    let metric = MetricInterp::from_psd(&psd(&dataset, cfg.psd_points)?)?;
    Ok(Table1Setup {
        dataset,
        metric,
        init: subgrid_init(cfg.len, cfg.m),
    })
}

pub fn run_strategy(cfg: &Table1Config, setup: &Table1Setup, strategy: Strategy) -> Result<StrategyResult> {
    let opt = cfg.optimizer(strategy);
    let trajectory = match strategy {
        Strategy::GdSingle => run_gd(&BatchJ1::new(&setup.dataset[..1], 0.0)?, &setup.init, &opt)?,
        Strategy::Gd => run_gd(&BatchJ1::new(&setup.dataset, 0.0)?, &setup.init, &opt)?,
        Strategy::VarMetricGd => run_var_metric(&BatchJ1::new(&setup.dataset, 0.0)?, &setup.init, &opt, &setup.metric)?,
        Strategy::Lbfgs => run_lbfgs(&BatchJ1::new(&setup.dataset, 0.0)?, &setup.init, &opt)?,
        Strategy::Sgd | Strategy::VarMetricSgd => {
            let mut sampler = RectangleSampler {
                model: RectangleModel::new(cfg.len, cfg.sgd_seed)?,
                offset: 0,
            };
            let metric = (strategy == Strategy::VarMetricSgd).then_some(&setup.metric);
            run_sgd(&mut sampler, 0.0, &setup.init, &opt, metric, None)?
        }
    };
    let scheme = trajectory
        .smoothed_final
        .clone()
        .unwrap_or_else(|| trajectory.final_xi.clone());
    let score = evaluate_scheme(&scheme, &setup.dataset, ReconstructorKind::BackProjection, 0.0)?;
    Ok(StrategyResult {
        strategy,
        score,
        scheme,
        trajectory,
    })
}

/// Runs every configured strategy from the same start and scores each on the training dataset.
pub fn run_table1(cfg: &Table1Config) -> Result<Vec<StrategyResult>> {
    for s in &cfg.strategies {
        cfg.optimizer(*s).validate()?;
    }
    let setup = table1_setup(cfg)?;
    cfg.strategies.iter().map(|&s| run_strategy(cfg, &setup, s)).collect()
}
