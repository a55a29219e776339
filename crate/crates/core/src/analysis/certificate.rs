use std::f64::consts::PI;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::fourier::{check_len, min_distance, torus_dist, SamplingScheme, Signal};
use crate::reconstruct::ReconstructorKind;

/// Curvature constant of the cosine family used by the counting corollary.
pub const COROLLARY_CURVATURE: f64 = PI * PI * std::f64::consts::SQRT_2 / 8.0;
/// Concavity radius used by the counting corollary.
pub const COROLLARY_RADIUS: f64 = 0.25;

/// Spectral deviation bounds `‖Q − Id‖ ≤ a` and `‖R*R − Id‖ ≤ b` for `ε = 1/md(Ξ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeviationConstants {
    pub a: f64,
    pub b: f64,
}

pub fn deviation_constants(kind: ReconstructorKind, eps: f64) -> Result<DeviationConstants> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("deviation bounds need 0 < eps < 1 (got {eps})")));
    }
    let ratio = eps / (1.0 - eps);
    Ok(match kind {
        ReconstructorKind::BackProjection => DeviationConstants { a: 0.0, b: eps },
        ReconstructorKind::PseudoInverse => DeviationConstants { a: ratio, b: ratio },
        ReconstructorKind::Tikhonov { .. } => DeviationConstants {
            a: ratio,
            b: 4.0 * eps / ((1.0 - eps) * (1.0 - eps)),
        },
    })
}

fn big_as_string<S: Serializer>(v: &Option<BigUint>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(n) => s.serialize_str(&n.to_string()),
        None => s.serialize_none(),
    }
}

fn big_string<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Outcome of checking the spurious-minimizer hypotheses on a candidate set `Z`.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub z: Vec<f64>,
    pub r: f64,
    pub c: f64,
    /// `md(Z)`.
    pub delta: f64,
    pub m: usize,
    pub k: usize,
    pub sigma: f64,
    pub kind: ReconstructorKind,
    /// `1/(δ − 2r)` when it is below one.
    pub epsilon: Option<f64>,
    pub constants: Option<DeviationConstants>,
    /// `c r² / 2`.
    pub curvature_margin: f64,
    /// `(b + 2a) S + b M σ²` with `S` the sum of the `M` largest `ρ(ζ_k)`.
    pub energy_bound: Option<f64>,
    pub top_energy: f64,
    /// Whether `ρ(ζ) − ρ(ζ + h) ≥ c h²/2` held on the sampled neighborhoods.
    pub concavity_holds: bool,
    /// Smallest `2(ρ(ζ) − ρ(ζ + h))/h²` seen on the sampled neighborhoods.
    pub fitted_curvature: f64,
    pub holds: bool,
    pub reason: Option<String>,
    /// `binom(K, M)·M!` when the certificate holds.
    #[serde(serialize_with = "big_as_string")]
    pub count_lower_bound: Option<BigUint>,
}

/// `ρ(ξ) = (1/P) Σ_p |û_p(ξ)|²`.
fn rho(signals: &[Signal], xi: f64) -> f64 {
    signals.iter().map(|u| u.transform(xi).norm_sqr()).sum::<f64>() / signals.len() as f64
}

/// Offsets `±r·k/100`, `k = 1..=100`.
fn offsets(r: f64) -> impl Iterator<Item = f64> {
    (1..=100).flat_map(move |k| {
        let h = r * k as f64 / 100.0;
        [h, -h]
    })
}

/// Largest `c` with `ρ(ζ) − ρ(ζ + h) ≥ c h²/2` on the sampled neighborhoods of every `ζ ∈ Z`.
pub fn fit_curvature(signals: &[Signal], z: &[f64], r: f64) -> f64 {
    let mut best = f64::INFINITY;
    for &zeta in z {
        let top = rho(signals, zeta);
        for h in offsets(r) {
            best = best.min(2.0 * (top - rho(signals, zeta + h)) / (h * h));
        }
    }
    best
}

/// `K!/(K − M)!`.
fn falling_factorial(k: usize, m: usize) -> BigUint {
    ((k - m + 1)..=k).fold(BigUint::from(1u32), |acc, v| acc * BigUint::from(v))
}

#[allow(clippy::too_many_arguments)]
pub fn certify_spurious(
    signals: &[Signal],
    z: &[f64],
    r: f64,
    c: f64,
    m: usize,
    sigma: f64,
    kind: ReconstructorKind,
) -> Result<Certificate> {
    kind.validate()?;
    let len = signals.first().ok_or_else(|| invalid("at least one signal is required"))?.len();
    if let Some(bad) = signals.iter().find(|s| s.len() != len) {
        return Err(Error::LengthMismatch {
            expected: len,
            found: bad.len(),
        });
    }
    if !(r > 0.0 && c > 0.0 && sigma >= 0.0) {
        return Err(invalid("certificate needs r > 0, c > 0 and sigma >= 0"));
    }
    if m == 0 {
        return Err(invalid("certificate needs M >= 1"));
    }
    let scheme = SamplingScheme::new(z.to_vec())?;
    for (i, &a) in z.iter().enumerate() {
        if z[i + 1..].iter().any(|&b| torus_dist(a, b, len) == 0.0) {
            return Err(invalid("candidate frequencies must be distinct modulo N"));
        }
    }
    let k = z.len();
    let delta = min_distance(&scheme, len);
    let mut energies: Vec<f64> = z.iter().map(|&x| rho(signals, x)).collect();
    energies.sort_by(|a, b| b.total_cmp(a));
    let top_energy: f64 = energies.iter().take(m).sum();
    let fitted = fit_curvature(signals, z, r);
    let concavity_holds = z.iter().all(|&zeta| {
        let top = rho(signals, zeta);
        offsets(r).all(|h| top - rho(signals, zeta + h) >= c * h * h / 2.0 - 1e-12)
    });
    let curvature_margin = c * r * r / 2.0;
    let mut cert = Certificate {
        z: z.to_vec(),
        r,
        c,
        delta,
        m,
        k,
        sigma,
        kind,
        epsilon: None,
        constants: None,
        curvature_margin,
        energy_bound: None,
        top_energy,
        concavity_holds,
        fitted_curvature: fitted,
        holds: false,
        reason: None,
        count_lower_bound: None,
    };
    if delta <= 1.0 + 2.0 * r {
        cert.reason = Some(format!("separation {delta} does not exceed 1 + 2r = {}", 1.0 + 2.0 * r));
        return Ok(cert);
    }
    let eps = 1.0 / (delta - 2.0 * r);
    let dc = deviation_constants(kind, eps)?;
    let bound = (dc.b + 2.0 * dc.a) * top_energy + dc.b * m as f64 * sigma * sigma;
    cert.epsilon = Some(eps);
    cert.constants = Some(dc);
    cert.energy_bound = Some(bound);
    if k < m {
        cert.reason = Some(format!("only {k} candidates for {m} points"));
    } else if !concavity_holds {
        cert.reason = Some(format!("local concavity with c = {c} fails (fitted c = {fitted})"));
    } else if curvature_margin <= bound {
        cert.reason = Some(format!("c r^2/2 = {curvature_margin} does not exceed the energy bound {bound}"));
    } else {
        cert.holds = true;
        cert.count_lower_bound = Some(falling_factorial(k, m));
    }
    Ok(cert)
}

/// Candidate grid `Z = 2p·Z ∩ [−N/2, N/2)` with `p = ⌊√N⌋`.
pub fn corollary_grid(len: usize) -> Result<(usize, Vec<f64>)> {
    check_len(len)?;
    let p = isqrt(len);
    let step = 2 * p as i64;
    let half = (len / 2) as i64;
    let lo = (-half).div_euclid(step) + i64::from((-half).rem_euclid(step) != 0);
    let z = (lo..)
        .map(|q| q * step)
        .take_while(|&v| v < half)
        .map(|v| v as f64)
        .collect();
    Ok((p, z))
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Count of spurious minimizers predicted for the cosine family.
#[derive(Clone, Debug, Serialize)]
pub struct CorollaryCount {
    pub len: usize,
    pub sigma: f64,
    /// `π²√2 / (256 (20 + 16σ²))`.
    pub eta_formula: f64,
    /// Constant used for `M`: 1.09e-1 without noise under back-projection, 3e-3 for σ ≤ 1, the formula otherwise.
    pub eta: f64,
    /// `⌊η √N⌋`.
    pub m: usize,
    /// Number of candidate maximizers `K`.
    pub k: usize,
    /// `(1/(2η))^{η√N}`.
    pub asymptotic_bound: f64,
    /// `(K/M)^M`, a lower bound on `binom(K, M)`; 1 when `M = 0`.
    pub binomial_bound: f64,
    /// `binom(K, M)·M!`.
    #[serde(serialize_with = "big_string")]
    pub exact_count: BigUint,
}

pub fn corollary_count(len: usize, sigma: f64, kind: ReconstructorKind) -> Result<CorollaryCount> {
    if len == 0 || len % 4 != 0 {
        return Err(invalid(format!("the corollary needs N divisible by 4 (got {len})")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("noise level must be finite and nonnegative (got {sigma})")));
    }
    kind.validate()?;
    let eta_formula = PI * PI * std::f64::consts::SQRT_2 / (256.0 * (20.0 + 16.0 * sigma * sigma));
    let eta = if sigma == 0.0 && kind == ReconstructorKind::BackProjection {
        1.09e-1
    } else if sigma <= 1.0 {
        3e-3
    } else {
        eta_formula
    };
    let root = (len as f64).sqrt();
    let m = (eta * root).floor() as usize;
    let (_, z) = corollary_grid(len)?;
    let k = z.len();
    let exact_count = if m <= k { falling_factorial(k, m) } else { BigUint::from(0u32) };
    let binomial_bound = if m == 0 { 1.0 } else { (k as f64 / m as f64).powi(m as i32) };
    Ok(CorollaryCount {
        len,
        sigma,
        eta_formula,
        eta,
        m,
        k,
        asymptotic_bound: (1.0 / (2.0 * eta)).powf(eta * root),
        binomial_bound,
        exact_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signals::gen_cosine;

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn deviation_table() {
        let bp = deviation_constants(ReconstructorKind::BackProjection, 0.5).unwrap();
        assert_eq!((bp.a, bp.b), (0.0, 0.5));
        let pi = deviation_constants(ReconstructorKind::PseudoInverse, 0.5).unwrap();
        assert_eq!((pi.a, pi.b), (1.0, 1.0));
        let tk = deviation_constants(ReconstructorKind::tikhonov(1.0).unwrap(), 0.5).unwrap();
        assert_eq!((tk.a, tk.b), (1.0, 8.0));
        assert!(deviation_constants(ReconstructorKind::BackProjection, 1.0).is_err());
        assert!(deviation_constants(ReconstructorKind::BackProjection, 0.0).is_err());
    }

    #[test]
    fn deviation_constants_are_monotone() {
        for kind in [
            ReconstructorKind::BackProjection,
            ReconstructorKind::PseudoInverse,
            ReconstructorKind::tikhonov(1.0).unwrap(),
        ] {
            let mut last = DeviationConstants { a: -1.0, b: -1.0 };
            for i in 1..100 {
                let d = deviation_constants(kind, i as f64 / 100.0).unwrap();
                assert!(d.a >= last.a && d.b >= last.b);
                last = d;
            }
        }
    }

    #[test]
    fn corollary_grid_shapes() {
        let (p, z) = corollary_grid(1024).unwrap();
        assert_eq!(p, 32);
        assert_eq!(z.len(), 16);
        assert_eq!(z[0], -512.0);
        let (p, z) = corollary_grid(64).unwrap();
        assert_eq!((p, z), (8, vec![-32.0, -16.0, 0.0, 16.0]));
        let (_, z) = corollary_grid(108).unwrap();
        assert_eq!(z, vec![-40.0, -20.0, 0.0, 20.0, 40.0]);
    }

    #[test]
    fn large_cosine_certificate_holds_with_quoted_constants() {
        let u = gen_cosine(1024).unwrap();
        let (_, z) = corollary_grid(1024).unwrap();
        let count = corollary_count(1024, 0.0, ReconstructorKind::BackProjection).unwrap();
        assert_eq!(count.m, 3);
        let cert = certify_spurious(
            &[u.clone()],
            &z,
            COROLLARY_RADIUS,
            COROLLARY_CURVATURE,
            count.m,
            0.0,
            ReconstructorKind::BackProjection,
        )
        .unwrap();
        assert!(cert.holds, "{:?}", cert.reason);
        assert_eq!(cert.count_lower_bound, Some(BigUint::from(16u32 * 15 * 14)));
        let too_many =
            certify_spurious(&[u], &z, COROLLARY_RADIUS, COROLLARY_CURVATURE, 17, 0.0, ReconstructorKind::BackProjection)
                .unwrap();
        assert!(!too_many.holds);
        assert!(too_many.count_lower_bound.is_none());
    }

    #[test]
    fn noise_threshold_flips_certificate() {
        let u = gen_cosine(1024).unwrap();
        let (_, z) = corollary_grid(1024).unwrap();
        let (r, c, m) = (COROLLARY_RADIUS, COROLLARY_CURVATURE, 3usize);
        let eps = 1.0 / (64.0 - 2.0 * r);
        // (b + 2a)M + bMσ² = c r²/2 with a = 0, b = ε and ‖û(Ξ̄)‖² = M
        let threshold = (c * r * r / (2.0 * eps * m as f64) - 1.0).sqrt();
        let run = |sigma| {
            certify_spurious(&[u.clone()], &z, r, c, m, sigma, ReconstructorKind::BackProjection)
                .unwrap()
                .holds
        };
        assert!(run(threshold * (1.0 - 1e-6)));
        assert!(!run(threshold * (1.0 + 1e-6)));
    }

    #[test]
    fn separation_failure_is_reported() {
        let u = gen_cosine(16).unwrap();
        let cert = certify_spurious(&[u], &[0.0, 1.2], 0.25, 1.0, 1, 0.0, ReconstructorKind::BackProjection).unwrap();
        assert!(!cert.holds);
        assert!(cert.reason.unwrap().contains("separation"));
    }

    #[test]
    fn invalid_inputs_are_errors() {
        let u = gen_cosine(16).unwrap();
        let bp = ReconstructorKind::BackProjection;
        assert!(certify_spurious(&[u.clone()], &[0.0, 16.0], 0.25, 1.0, 1, 0.0, bp).is_err());
        assert!(certify_spurious(&[u.clone()], &[0.0, 4.0], 0.0, 1.0, 1, 0.0, bp).is_err());
        assert!(certify_spurious(&[u], &[0.0, 4.0], 0.25, -1.0, 1, 0.0, bp).is_err());
    }

    #[test]
    fn cosine_fitted_curvature() {
        let u = gen_cosine(64).unwrap();
        let (_, z) = corollary_grid(64).unwrap();
        let c = fit_curvature(&[u], &z, 0.25);
        // 2(1 − cos²(πh/2))/h² is smallest at h = r
        let want = 2.0 * (PI * 0.125).sin().powi(2) / 0.0625;
        assert!((c - want).abs() < 1e-9);
        assert!(c > COROLLARY_CURVATURE);
    }

    #[test]
    fn corollary_constants() {
        let c = corollary_count(1024, 0.0, ReconstructorKind::BackProjection).unwrap();
        assert_eq!((c.eta, c.m, c.k), (0.109, 3, 16));
        assert_eq!(c.exact_count, BigUint::from(3360u32));
        for kind in [ReconstructorKind::PseudoInverse, ReconstructorKind::tikhonov(0.5).unwrap()] {
            assert_eq!(corollary_count(1024, 1.0, kind).unwrap().eta, 3e-3);
        }
        assert_eq!(corollary_count(1024, 0.5, ReconstructorKind::BackProjection).unwrap().eta, 3e-3);
        let big = corollary_count(1024, 2.0, ReconstructorKind::BackProjection).unwrap();
        assert_eq!(big.eta, big.eta_formula);
        assert!(corollary_count(1022, 0.0, ReconstructorKind::BackProjection).is_err());
    }

    #[test]
    fn binomial_bound_below_exact_count() {
        for len in (4..=4096).step_by(4) {
            for (sigma, kind) in [(0.0, ReconstructorKind::BackProjection), (0.5, ReconstructorKind::PseudoInverse)] {
                let c = corollary_count(len, sigma, kind).unwrap();
                if c.m > c.k {
                    continue;
                }
                let exact = binom(c.k as u64, c.m as u64) * (1..=c.m as u64).product::<u64>();
                assert_eq!(c.exact_count, BigUint::from(exact));
                assert!(c.binomial_bound <= exact as f64 * (1.0 + 1e-12));
            }
        }
    }
}
