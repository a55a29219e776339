use fsopt::analysis::DEFAULT_PSD_POINTS;
use fsopt::psd;
use fsopt::signals::SignalSource;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{fmt, Output};

fn default_points() -> usize {
    DEFAULT_PSD_POINTS
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdParams {
    pub len: usize,
    pub signal: SignalSource,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Dataset prefixes to profile; the whole dataset when absent.
    #[serde(default)]
    pub sizes: Option<Vec<usize>>,
}

pub fn run(cfg: &RunConfig<PsdParams>) -> CliResult<()> {
    let p = &cfg.params;
    let signals = p.signal.signals(p.len)?;
    let sizes = p.sizes.clone().unwrap_or_else(|| vec![signals.len()]);
    if sizes.is_empty() || sizes.iter().any(|&s| s == 0 || s > signals.len()) {
        return Err(CliError::Config(format!(
            "sizes must be nonempty and between 1 and the dataset size {}",
            signals.len()
        )));
    }
    let profiles = sizes.iter().map(|&s| psd(&signals[..s], p.points)).collect::<Result<Vec<_>, _>>()?;
    let out = Output::create(cfg)?;
    let mut summary = Vec::new();
    for (size, prof) in sizes.iter().zip(&profiles) {
        let rows = prof.grid.iter().zip(&prof.rho).map(|(&x, &r)| vec![fmt(x), fmt(r)]);
        out.csv(&format!("psd_p{size}.csv"), &["xi".into(), "rho".into()], rows)?;
        let maxima: Vec<f64> = prof.maxima.iter().map(|&i| prof.grid[i]).collect();
        println!(
            "P = {size}: {} maxima, max curvature {:.3e}, secondary {:.3e}",
            maxima.len(),
            prof.max_curvature(),
            prof.max_secondary_curvature()
        );
        summary.push(json!({
            "p": size,
            "count": maxima.len(),
            "maxima": maxima,
            "curvatures": prof.maxima_curvatures(),
            "max_curvature": prof.max_curvature(),
            "max_secondary_curvature": prof.max_secondary_curvature(),
        }));
    }
    out.json("psd_maxima.json", json!({"profiles": summary}))?;
    Ok(())
}
