use fsopt::objective::DEFAULT_FD_STEP;
use fsopt::{grad_fd, grad_j1, Complex64, ObjectiveSpec, ReconstructorKind, SamplingScheme, Signal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Output;

fn default_instances() -> usize {
    100
}
fn default_max_len() -> usize {
    64
}
fn default_max_m() -> usize {
    16
}
fn default_sigmas() -> Vec<f64> {
    vec![0.0, 0.1]
}
fn default_h() -> f64 {
    DEFAULT_FD_STEP
}
fn default_tolerance() -> f64 {
    1e-5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradcheckParams {
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_max_len")]
    pub max_len: usize,
    #[serde(default = "default_max_m")]
    pub max_m: usize,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

/// Largest `‖∇J₁ − ∇_h J₁‖∞ / ‖∇_h J₁‖∞` over random back-projection instances.
pub fn max_relative_error(p: &GradcheckParams) -> CliResult<f64> {
    if p.max_len < 2 || p.max_m == 0 || p.sigmas.is_empty() {
        return Err(CliError::Config("need max_len >= 2, max_m >= 1 and at least one sigma".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut worst: f64 = 0.0;
    for i in 0..p.instances {
        let len = 2 * rng.random_range(1..=p.max_len / 2);
        let m = rng.random_range(1..=p.max_m.min(len));
        let half = len as f64 / 2.0;
        let scheme = SamplingScheme::new((0..m).map(|_| rng.random_range(-half..half)).collect())?;
        let values = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let u = Signal::new(values)?.normalized();
        let sigma = p.sigmas[i % p.sigmas.len()];
        let spec = ObjectiveSpec::single(ReconstructorKind::BackProjection, sigma, u)?;
        let g = grad_j1(&spec, &scheme)?;
        let fd = grad_fd(&spec, &scheme, p.h)?;
        let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = fd.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-12);
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}

pub fn run(cfg: &RunConfig<GradcheckParams>) -> CliResult<()> {
    let p = &cfg.params;
    let worst = max_relative_error(p)?;
    let passed = worst < p.tolerance;
    let out = Output::create(cfg)?;
    out.json(
        "gradcheck.json",
        json!({"instances": p.instances, "max_rel_error": worst, "tolerance": p.tolerance, "passed": passed}),
    )?;
    println!("max relative error {worst:.3e} over {} instances", p.instances);
    if passed {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "gradient check failed: {worst:.3e} >= {}",
            p.tolerance
        )))
    }
}
