use fsopt::analysis::{corollary_grid, fit_curvature, COROLLARY_CURVATURE, COROLLARY_RADIUS};
use fsopt::signals::SignalSource;
use fsopt::{certify_spurious, corollary_count, ReconstructorKind};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Output;

fn default_signal() -> SignalSource {
    SignalSource::Cosine
}
fn default_r() -> f64 {
    COROLLARY_RADIUS
}
fn default_kind() -> ReconstructorKind {
    ReconstructorKind::BackProjection
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyParams {
    pub len: usize,
    #[serde(default = "default_signal")]
    pub signal: SignalSource,
    /// Candidate maximizers; the `2⌊√N⌋`-spaced grid when absent.
    #[serde(default)]
    pub z: Option<Vec<f64>>,
    #[serde(default = "default_r")]
    pub r: f64,
    /// Curvature constant; the cosine constant when absent.
    #[serde(default)]
    pub c: Option<f64>,
    /// Use the curvature fitted on the sampled neighborhoods instead of `c`.
    #[serde(default)]
    pub fit_c: bool,
    /// Number of sampling points; `⌊η√N⌋` when absent.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "default_kind")]
    pub kind: ReconstructorKind,
}

pub fn run(cfg: &RunConfig<CertifyParams>) -> CliResult<()> {
    let p = &cfg.params;
    if p.fit_c && p.c.is_some() {
        return Err(CliError::Config("set either `c` or `fit_c`, not both".into()));
    }
    let signals = p.signal.signals(p.len)?;
    let z = match &p.z {
        Some(z) => z.clone(),
        None => corollary_grid(p.len)?.1,
    };
    let corollary = if p.len % 4 == 0 {
        Some(corollary_count(p.len, p.sigma, p.kind)?)
    } else {
        None
    };
    let m = match (p.m, &corollary) {
        (Some(m), _) => m,
        (None, Some(c)) => c.m,
        (None, None) => return Err(CliError::Config("`m` is required when N is not divisible by 4".into())),
    };
    if m == 0 {
        return Err(CliError::Config(format!("floor(eta sqrt(N)) = 0 for N = {}; set `m` explicitly", p.len)));
    }
    let c = if p.fit_c {
        fit_curvature(&signals, &z, p.r)
    } else {
        p.c.unwrap_or(COROLLARY_CURVATURE)
    };
    let cert = certify_spurious(&signals, &z, p.r, c, m, p.sigma, p.kind)?;
    let out = Output::create(cfg)?;
    out.json("certificate.json", json!({"certificate": cert, "corollary": corollary}))?;
    println!("holds = {} (M = {m}, K = {}, c = {c})", cert.holds, cert.k);
    if let Some(reason) = &cert.reason {
        println!("reason: {reason}");
    }
    if let Some(n) = &cert.count_lower_bound {
        println!("local minimizers >= {n}");
    }
    if let Some(cc) = &corollary {
        println!(
            "(1/(2 eta))^(eta sqrt(N)) = {:.6e} with eta = {}, exact count K!/(K-M)! = {}",
            cc.asymptotic_bound, cc.eta, cc.exact_count
        );
    }
    Ok(())
}
