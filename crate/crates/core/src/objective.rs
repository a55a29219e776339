//! Expected reconstruction error
//!
//! ```text
//! J(Ξ) = E_w ½‖R(Ξ)(A(Ξ)* u + w) − u‖²
//!      = ½‖u‖² − Re⟨Q û, û⟩ + ½ û* Q L Q û + ½ σ² tr(Q L Q)
//! ```
//!
//! with `w` circularly-symmetric complex Gaussian, `E[w w*] = σ² Id`. For a list
//! of signals the signal-dependent part is averaged and the noise part is
//! counted once.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fourier::{
    check_len, gram_closed_form, gram_kernel_derivative, min_distance, nuft_adjoint, nuft_forward,
    GramMatrix, SamplingScheme, Signal,
};
use crate::linalg::{mat_vec, quad_form};
use crate::reconstruct::{factors, ReconstructorKind};

/// Central-difference step used when none is given.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Reconstructor, noise level and the signals the error is averaged over.
#[derive(Clone, Debug)]
pub struct ObjectiveSpec {
    kind: ReconstructorKind,
    sigma: f64,
    signals: Vec<Signal>,
}

impl ObjectiveSpec {
    pub fn new(kind: ReconstructorKind, sigma: f64, signals: Vec<Signal>) -> Result<Self> {
        kind.validate()?;
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("noise level must be finite and nonnegative (got {sigma})")));
        }
        let first = signals.first().ok_or_else(|| invalid("at least one signal is required"))?;
        let len = first.len();
        if let Some(bad) = signals.iter().find(|s| s.len() != len) {
            return Err(Error::LengthMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        Ok(Self { kind, sigma, signals })
    }

    pub fn single(kind: ReconstructorKind, sigma: f64, signal: Signal) -> Result<Self> {
        Self::new(kind, sigma, vec![signal])
    }

    pub fn kind(&self) -> ReconstructorKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn signals(&self) -> &[Signal] {
        &self.signals
    }

    /// Signal length `N`.
    pub fn len(&self) -> usize {
        self.signals[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Decomposition `J = ½‖u‖² − F + G + noise_term`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Terms {
    pub f: f64,
    pub g: f64,
    pub noise_term: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveEval {
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
    pub terms: Option<Terms>,
}

/// Averaged pieces of `J` on precomputed transforms.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Parts {
    pub value: f64,
    /// Mean `½‖û(Ξ)‖²`.
    pub f: f64,
    /// Mean `½⟨(L − Id) û, û⟩`.
    pub g1: f64,
    /// Mean `½⟨(Id − Q) û, û⟩`.
    pub g_q: f64,
    pub noise_term: f64,
}

pub(crate) fn evaluate_parts(
    kind: ReconstructorKind,
    sigma: f64,
    norms_sq: &[f64],
    uhats: &[Vec<Complex64>],
    gram: &GramMatrix,
) -> Result<Parts> {
    let fac = factors(kind, gram)?;
    let weight = 1.0 / uhats.len() as f64;
    let (mut half_norm, mut f, mut q_term, mut rr_term, mut l_term) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (uh, &ns) in uhats.iter().zip(norms_sq) {
        half_norm += 0.5 * ns;
        f += 0.5 * uh.iter().map(|v| v.norm_sqr()).sum::<f64>();
        q_term += quad_form(&fac.q, uh);
        rr_term += quad_form(&fac.rr, uh);
        l_term += quad_form(gram.matrix(), uh);
    }
    let trace_rr: f64 = fac.rr.diagonal().iter().map(|v| v.re).sum();
    let noise_term = 0.5 * sigma * sigma * trace_rr;
    let (half_norm, f, q_term, rr_term, l_term) =
        (half_norm * weight, f * weight, q_term * weight, rr_term * weight, l_term * weight);
    Ok(Parts {
        value: half_norm - q_term + 0.5 * rr_term + noise_term,
        f,
        g1: 0.5 * l_term - f,
        g_q: f - 0.5 * q_term,
        noise_term,
    })
}

fn parts(spec: &ObjectiveSpec, scheme: &SamplingScheme) -> Result<Parts> {
    let gram = gram_closed_form(scheme, spec.len())?;
    let uhats: Vec<_> = spec.signals.iter().map(|u| nuft_adjoint(u, scheme)).collect();
    let norms: Vec<_> = spec.signals.iter().map(Signal::norm_sq).collect();
    evaluate_parts(spec.kind, spec.sigma, &norms, &uhats, &gram)
}

/// Exact value of `J(Ξ)`.
pub fn eval_j(spec: &ObjectiveSpec, scheme: &SamplingScheme) -> Result<ObjectiveEval> {
    Ok(ObjectiveEval {
        value: parts(spec, scheme)?.value,
        gradient: None,
        terms: None,
    })
}

/// Value together with the analytic gradient (back-projection only) and terms
/// (back-projection and pseudo-inverse) whenever they are defined.
pub fn eval_full(spec: &ObjectiveSpec, scheme: &SamplingScheme) -> Result<ObjectiveEval> {
    let p = parts(spec, scheme)?;
    let gradient = match spec.kind {
        ReconstructorKind::BackProjection => Some(grad_j1(spec, scheme)?),
        _ => None,
    };
    Ok(ObjectiveEval {
        value: p.value,
        gradient,
        terms: terms_from_parts(spec.kind, &p).ok(),
    })
}

fn terms_from_parts(kind: ReconstructorKind, p: &Parts) -> Result<Terms> {
    let g = match kind {
        ReconstructorKind::BackProjection => p.g1,
        ReconstructorKind::PseudoInverse => p.g_q,
        ReconstructorKind::Tikhonov { .. } => return Err(Error::Unsupported("the F/G decomposition")),
    };
    Ok(Terms {
        f: p.f,
        g,
        noise_term: p.noise_term,
    })
}

/// `F = ½‖û(Ξ)‖²` and `G₁ = ½⟨(L − Id)û, û⟩` or `G₂ = ½⟨(Id − L⁺)û, û⟩`, averaged over signals.
pub fn eval_terms(spec: &ObjectiveSpec, scheme: &SamplingScheme) -> Result<Terms> {
    if let ReconstructorKind::Tikhonov { .. } = spec.kind {
        return Err(Error::Unsupported("the F/G decomposition"));
    }
    terms_from_parts(spec.kind, &parts(spec, scheme)?)
}

/// Back-projection residual and its transforms for one signal.
#[derive(Clone, Debug)]
pub struct Residual {
    /// `r = A A* u − u`.
    pub r: Signal,
    /// `r̂ = A* r = (L − Id) û(Ξ)`.
    pub r_hat: Vec<Complex64>,
    /// Derivative of `a(ξ)* r` at `ξ_m` with `r` frozen.
    pub r_hat_prime: Vec<Complex64>,
    /// `Σ_{m' ≠ m} ∂L_{m,m'}/∂ξ_m û(ξ_{m'})`, the Gram-coupling part of `r_hat_prime`.
    pub r_hat_coupling: Vec<Complex64>,
}

fn coupling(xs: &[f64], len: usize, uh: &[Complex64]) -> Vec<Complex64> {
    let m = xs.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        for j in i + 1..m {
            let d = gram_kernel_derivative(xs[i] - xs[j], len);
            out[i] += d * uh[j];
            // ∂L_{j,i}/∂ξ_j = -conj(∂L_{i,j}/∂ξ_i)
            out[j] -= d.conj() * uh[i];
        }
    }
    out
}

pub fn residual(u: &Signal, scheme: &SamplingScheme) -> Result<Residual> {
    let len = u.len();
    let uh = nuft_adjoint(u, scheme);
    let back = nuft_forward(&uh, scheme, len)?;
    let r = Signal::new(back.values().iter().zip(u.values()).map(|(a, b)| a - b).collect())?;
    let gram = gram_closed_form(scheme, len)?;
    let lu = mat_vec(gram.matrix(), &uh);
    let r_hat = lu.iter().zip(&uh).map(|(a, b)| a - b).collect();
    let r_hat_prime = scheme.freqs().iter().map(|&xi| r.transform_derivative(xi)).collect();
    Ok(Residual {
        r,
        r_hat,
        r_hat_prime,
        r_hat_coupling: coupling(scheme.freqs(), len, &uh),
    })
}

/// Per-signal `∂J₁/∂ξ_m = Re(conj(r̂'_m) û_m + û'_m conj(r̂_m))`.
fn grad_single(u: &Signal, xs: &[f64], gram: &GramMatrix) -> Vec<f64> {
    let len = u.len();
    let uh: Vec<_> = xs.iter().map(|&x| u.transform(x)).collect();
    let duh: Vec<_> = xs.iter().map(|&x| u.transform_derivative(x)).collect();
    let lu = mat_vec(gram.matrix(), &uh);
    let cp = coupling(xs, len, &uh);
    let self_slope = Complex64::new(0.0, PI / len as f64);
    (0..xs.len())
        .map(|m| {
            let r_hat = lu[m] - uh[m];
            let r_hat_prime = cp[m] + self_slope * uh[m] - duh[m];
            (r_hat_prime.conj() * uh[m] + duh[m] * r_hat.conj()).re
        })
        .collect()
}

/// Analytic gradient of `J₁`, averaged over signals. The noise term is constant.
pub fn grad_j1(spec: &ObjectiveSpec, scheme: &SamplingScheme) -> Result<Vec<f64>> {
    if spec.kind != ReconstructorKind::BackProjection {
        return Err(Error::Unsupported("the analytic gradient"));
    }
    let gram = gram_closed_form(scheme, spec.len())?;
    let mut total = vec![0.0; scheme.len()];
    for u in &spec.signals {
        for (t, g) in total.iter_mut().zip(grad_single(u, scheme.freqs(), &gram)) {
            *t += g;
        }
    }
    let w = 1.0 / spec.signals.len() as f64;
    Ok(total.into_iter().map(|g| g * w).collect())
}

/// Central finite differences of `J` per coordinate.
pub fn grad_fd(spec: &ObjectiveSpec, scheme: &SamplingScheme, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("finite-difference step must be positive (got {h})")));
    }
    let base = scheme.freqs().to_vec();
    let mut out = Vec::with_capacity(base.len());
    for m in 0..base.len() {
        let mut plus = base.clone();
        plus[m] += h;
        let mut minus = base.clone();
        minus[m] -= h;
        let jp = eval_j(spec, &SamplingScheme::new(plus)?)?.value;
        let jm = eval_j(spec, &SamplingScheme::new(minus)?)?.value;
        out.push((jp - jm) / (2.0 * h));
    }
    Ok(out)
}

/// Size of one partial derivative of `J₁` against its a priori bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientBound {
    /// `|∂J₁/∂ξ_m|`.
    pub lhs: f64,
    /// `|û'_m| ‖û‖₂ / md + |û_m| ‖û‖₁ (π/N + 4/md) + |û_m| |û'_m|`.
    pub rhs: f64,
    /// The same bound without the `|û_m| |û'_m|` self-interaction term.
    pub rhs_without_self: f64,
}

pub fn vanishing_gradient_bound(u: &Signal, scheme: &SamplingScheme, m: usize) -> Result<GradientBound> {
    let len = u.len();
    check_len(len)?;
    if m >= scheme.len() {
        return Err(invalid(format!("coordinate {m} out of range for {} points", scheme.len())));
    }
    let md = min_distance(scheme, len);
    if md <= 0.0 {
        return Err(invalid("the bound needs pairwise distinct frequencies"));
    }
    let gram = gram_closed_form(scheme, len)?;
    let lhs = grad_single(u, scheme.freqs(), &gram)[m].abs();
    let uh = nuft_adjoint(u, scheme);
    let l2 = uh.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let l1: f64 = uh.iter().map(|v| v.norm()).sum();
    let um = uh[m].norm();
    let dm = u.transform_derivative(scheme.freqs()[m]).norm();
    let rhs_without_self = dm * l2 / md + um * l1 * (PI / len as f64 + 4.0 / md);
    Ok(GradientBound {
        lhs,
        rhs: rhs_without_self + um * dm,
        rhs_without_self,
    })
}
