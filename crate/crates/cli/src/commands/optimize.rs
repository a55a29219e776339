use fsopt::analysis::DEFAULT_PSD_POINTS;
use fsopt::experiments::subgrid_init;
use fsopt::optimize::{FixedSampler, Objective, RectangleSampler, SignalSampler, SpecObjective};
use fsopt::signals::{RectangleModel, SignalSource};
use fsopt::{
    evaluate_scheme, psd, run_gd, run_lbfgs, run_sgd, run_var_metric, BatchJ1, Method, MetricInterp, ObjectiveSpec,
    OptimizerConfig, ReconstructorKind, Trajectory,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt, strings, Output};

/// Starting scheme: explicit frequencies or the spacing-2 subgrid with `subgrid` points.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Init {
    Points(Vec<f64>),
    Subgrid { subgrid: usize },
}

fn default_kind() -> ReconstructorKind {
    ReconstructorKind::BackProjection
}
fn default_points() -> usize {
    DEFAULT_PSD_POINTS
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeParams {
    pub len: usize,
    /// Training dataset; stochastic methods draw fresh rectangles with the optimizer seed.
    pub signal: SignalSource,
    pub init: Init,
    pub optimizer: OptimizerConfig,
    #[serde(default = "default_kind")]
    pub kind: ReconstructorKind,
    #[serde(default)]
    pub sigma: f64,
    /// Central-difference step; required for reconstructors other than back-projection.
    #[serde(default)]
    pub fd_step: Option<f64>,
    #[serde(default = "default_points")]
    pub psd_points: usize,
}

pub fn trajectory_rows(t: &Trajectory) -> (Vec<String>, Vec<Vec<String>>) {
    let m = t.final_xi.len();
    let mut header = vec!["iteration".to_string()];
    header.extend((1..=m).map(|k| format!("xi_{k}")));
    header.push("J".into());
    let rows = t
        .snapshots
        .iter()
        .map(|s| {
            let mut row = vec![s.iteration.to_string()];
            row.extend(strings(&s.xi));
            row.push(fmt(s.value));
            row
        })
        .collect();
    (header, rows)
}

pub fn run(cfg: &RunConfig<OptimizeParams>) -> CliResult<()> {
    let p = &cfg.params;
    let opt = &p.optimizer;
    opt.validate()?;
    p.kind.validate()?;
    let dataset = p.signal.signals(p.len)?;
    let xi0 = match &p.init {
        Init::Points(x) => x.clone(),
        Init::Subgrid { subgrid } => {
            if *subgrid == 0 || 2 * subgrid > p.len {
                return Err(CliError::Config(format!("subgrid init needs 1 <= M <= N/2 (got {subgrid})")));
            }
            subgrid_init(p.len, *subgrid)
        }
    };
    if xi0.is_empty() {
        return Err(CliError::Config("the initial scheme is empty".into()));
    }
    let metric = if opt.method.uses_metric() {
        Some(MetricInterp::from_psd(&psd(&dataset, p.psd_points)?)?)
    } else {
        None
    };
    let fast = p.kind == ReconstructorKind::BackProjection && p.fd_step.is_none();
    let objective: Box<dyn Objective> = if fast {
        Box::new(BatchJ1::new(&dataset, p.sigma)?)
    } else {
        Box::new(SpecObjective::new(ObjectiveSpec::new(p.kind, p.sigma, dataset.clone())?, p.fd_step)?)
    };
    let traj = match opt.method {
        Method::Gd => run_gd(objective.as_ref(), &xi0, opt)?,
        Method::VarMetricGd => run_var_metric(objective.as_ref(), &xi0, opt, metric.as_ref().unwrap())?,
        Method::Lbfgs => run_lbfgs(objective.as_ref(), &xi0, opt)?,
        Method::Sgd | Method::VarMetricSgd => {
            if !fast {
                return Err(CliError::Config("stochastic methods use the analytic back-projection gradient".into()));
            }
            let mut sampler: Box<dyn SignalSampler> = match (&p.signal, dataset.len()) {
                (SignalSource::Rectangles { .. }, _) => Box::new(RectangleSampler {
                    model: RectangleModel::new(p.len, opt.seed)?,
                    offset: 0,
                }),
                (_, 1) => Box::new(FixedSampler(dataset[0].clone())),
                _ => {
                    return Err(CliError::Config(
                        "stochastic methods need the rectangle family or a single signal".into(),
                    ))
                }
            };
            run_sgd(sampler.as_mut(), p.sigma, &xi0, opt, metric.as_ref(), Some(objective.as_ref()))?
        }
    };
    let smoothed_value = match &traj.smoothed_final {
        Some(x) => Some(evaluate_scheme(x, &dataset, p.kind, p.sigma)?),
        None => None,
    };
    let out = Output::create(cfg)?;
    let (header, rows) = trajectory_rows(&traj);
    out.csv("trajectory.csv", &header, rows)?;
    out.json(
        "final.json",
        json!({
            "final_xi": traj.final_xi,
            "final_value": traj.final_value,
            "smoothed_final": traj.smoothed_final,
            "smoothed_value": smoothed_value,
            "iterations": traj.iterations,
            "stalls": traj.stalls,
        }),
    )?;
    println!("J = {:.6e} after {} iterations", traj.final_value, traj.iterations);
    if let Some(v) = smoothed_value {
        println!("smoothed J = {v:.6e}");
    }
    Ok(())
}
