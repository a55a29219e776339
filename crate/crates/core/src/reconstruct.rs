//! Linear reconstructors written as `R(Ξ) = A(Ξ) Q(Ξ)`.
//!
//! | kind           | `Q(Ξ)`                  |
//! |----------------|-------------------------|
//! | BackProjection | `Id`                    |
//! | PseudoInverse  | `L⁺`                    |
//! | Tikhonov(λ)    | `(1 + λ)(L + λ Id)⁻¹`   |
//!
//! All solves happen in the M×M Gram domain through one Hermitian
//! eigendecomposition of `L`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{gram_closed_form, nuft_forward, GramMatrix, SamplingScheme, Signal};
use crate::linalg::{hermitian_eigen, mat_vec};

/// Eigenvalues of `L` below this fraction of the largest one are dropped by the pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReconstructorKind {
    BackProjection,
    PseudoInverse,
    Tikhonov {
        lambda: f64,
        /// Drop the `(1 + λ)` factor and use the textbook `(L + λ Id)⁻¹`.
        #[serde(default)]
        standard: bool,
    },
}

impl ReconstructorKind {
    pub fn tikhonov(lambda: f64) -> Result<Self> {
        let kind = Self::Tikhonov { lambda, standard: false };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Tikhonov { lambda, .. } if !(lambda > 0.0 && lambda.is_finite()) => {
                Err(Error::InvalidLambda(lambda))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::BackProjection => "back_projection",
            Self::PseudoInverse => "pseudo_inverse",
            Self::Tikhonov { .. } => "tikhonov",
        }
    }

    /// Scalar map `τ ↦ q(τ)` applied to the eigenvalues of `L`; `lambda_max` sets the pseudo-inverse cutoff.
    fn spectral(&self, tau: f64, lambda_max: f64) -> f64 {
        match *self {
            Self::BackProjection => 1.0,
            Self::PseudoInverse => {
                if tau > PINV_CUTOFF * lambda_max {
                    1.0 / tau
                } else {
                    0.0
                }
            }
            Self::Tikhonov { lambda, standard } => {
                let scale = if standard { 1.0 } else { 1.0 + lambda };
                scale / (tau + lambda)
            }
        }
    }
}

/// Hermitian factor `Q(Ξ)`.
#[derive(Clone, Debug)]
pub struct QFactor {
    matrix: DMatrix<Complex64>,
}

impl QFactor {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

/// `Q` and `R*R = Q L Q` from a single eigendecomposition.
#[derive(Clone, Debug)]
pub struct Factors {
    pub q: DMatrix<Complex64>,
    pub rr: DMatrix<Complex64>,
}

pub fn factors(kind: ReconstructorKind, gram: &GramMatrix) -> Result<Factors> {
    kind.validate()?;
    let l = gram.matrix();
    if kind == ReconstructorKind::BackProjection {
        return Ok(Factors {
            q: DMatrix::identity(l.nrows(), l.ncols()),
            rr: l.clone(),
        });
    }
    let eig = hermitian_eigen(l);
    let lambda_max = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let q = eig.apply(|t| kind.spectral(t, lambda_max));
    let rr = eig.apply(|t| {
        let qt = kind.spectral(t, lambda_max);
        t.max(0.0) * qt * qt
    });
    Ok(Factors { q, rr })
}

pub fn q_factor(kind: ReconstructorKind, gram: &GramMatrix) -> Result<QFactor> {
    Ok(QFactor {
        matrix: factors(kind, gram)?.q,
    })
}

/// `R(Ξ)* R(Ξ) = Q L Q`, Hermitian positive semidefinite.
pub fn rr_factor(kind: ReconstructorKind, gram: &GramMatrix) -> Result<DMatrix<Complex64>> {
    Ok(factors(kind, gram)?.rr)
}

/// `R(Ξ) y = A(Ξ) Q(Ξ) y`.
pub fn reconstruct(
    kind: ReconstructorKind,
    y: &[Complex64],
    scheme: &SamplingScheme,
    len: usize,
) -> Result<Signal> {
    let gram = gram_closed_form(scheme, len)?;
    let q = q_factor(kind, &gram)?;
    if y.len() != scheme.len() {
        return Err(Error::LengthMismatch {
            expected: scheme.len(),
            found: y.len(),
        });
    }
    nuft_forward(&mat_vec(q.matrix(), y), scheme, len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::{min_distance, nuft_adjoint, NuftMatrix};
    use crate::linalg::max_abs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_signal(rng: &mut ChaCha8Rng, len: usize) -> Signal {
        Signal::new(
            (0..len)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    fn separated_scheme(rng: &mut ChaCha8Rng, len: usize, m: usize, min_gap: f64) -> SamplingScheme {
        let half = len as f64 / 2.0;
        loop {
            let s = SamplingScheme::new((0..m).map(|_| rng.random_range(-half..half)).collect()).unwrap();
            if m < 2 || min_distance(&s, len) > min_gap {
                return s;
            }
        }
    }

    fn identity(m: usize) -> DMatrix<Complex64> {
        DMatrix::identity(m, m)
    }

    #[test]
    fn tikhonov_rejects_nonpositive_lambda() {
        assert!(ReconstructorKind::tikhonov(0.0).is_err());
        assert!(ReconstructorKind::tikhonov(-1.0).is_err());
        assert!(ReconstructorKind::tikhonov(f64::NAN).is_err());
        let gram = gram_closed_form(&SamplingScheme::new(vec![0.0]).unwrap(), 8).unwrap();
        let bad = ReconstructorKind::Tikhonov { lambda: 0.0, standard: false };
        assert!(q_factor(bad, &gram).is_err());
    }

    #[test]
    fn back_projection_is_exact_identity() {
        let s = SamplingScheme::new(vec![0.1, 0.7, 3.3]).unwrap();
        let gram = gram_closed_form(&s, 16).unwrap();
        let q = q_factor(ReconstructorKind::BackProjection, &gram).unwrap();
        assert_eq!(q.matrix(), &identity(3));
        assert_eq!(&rr_factor(ReconstructorKind::BackProjection, &gram).unwrap(), gram.matrix());
    }

    #[test]
    fn subgrid_factors_are_identity() {
        let s = SamplingScheme::new(vec![-3.0, 0.0, 4.0, 5.0]).unwrap();
        let gram = gram_closed_form(&s, 16).unwrap();
        for kind in [ReconstructorKind::PseudoInverse, ReconstructorKind::tikhonov(0.5).unwrap()] {
            let q = q_factor(kind, &gram).unwrap();
            assert!(max_abs(&(q.matrix() - identity(4))) < 1e-12);
        }
    }

    #[test]
    fn pseudo_inverse_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let len = 2 * rng.random_range(4..64);
            let m = rng.random_range(2..8);
            let s = separated_scheme(&mut rng, len, m, 1.2);
            let gram = gram_closed_form(&s, len).unwrap();
            let q = q_factor(ReconstructorKind::PseudoInverse, &gram).unwrap();
            let l = gram.matrix();
            let q = q.matrix();
            assert!(max_abs(&(q * l * q - q)) < 1e-10);
            assert!(max_abs(&(l * q * l - l)) < 1e-10);
        }
    }

    #[test]
    fn pseudo_inverse_handles_collisions() {
        let s = SamplingScheme::new(vec![1.0, 1.0, 4.5]).unwrap();
        let gram = gram_closed_form(&s, 16).unwrap();
        let q = q_factor(ReconstructorKind::PseudoInverse, &gram).unwrap();
        assert!(q.matrix().iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        let l = gram.matrix();
        assert!(max_abs(&(l * q.matrix() * l - l)) < 1e-10);
    }

    #[test]
    fn rr_of_pseudo_inverse_is_inverse() {
        let s = SamplingScheme::new(vec![-5.2, 0.3, 2.9, 6.1]).unwrap();
        let gram = gram_closed_form(&s, 16).unwrap();
        let rr = rr_factor(ReconstructorKind::PseudoInverse, &gram).unwrap();
        let inv = gram.matrix().clone().try_inverse().unwrap();
        assert!(max_abs(&(rr - inv)) < 1e-10);
    }

    #[test]
    fn tikhonov_rr_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for &lambda in &[1e-2, 1.0, 10.0] {
            let s = separated_scheme(&mut rng, 32, 6, 0.5);
            let gram = gram_closed_form(&s, 32).unwrap();
            let kind = ReconstructorKind::tikhonov(lambda).unwrap();
            let rr = rr_factor(kind, &gram).unwrap();
            let got = crate::linalg::hermitian_eigen(&rr).values;
            let mut want: Vec<f64> = gram
                .eigenvalues()
                .iter()
                .map(|&t| (1.0 + lambda).powi(2) * t / (t + lambda).powi(2))
                .collect();
            want.sort_by(f64::total_cmp);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tikhonov_tends_to_pseudo_inverse() {
        let s = SamplingScheme::new(vec![-5.2, 0.3, 2.9, 6.1]).unwrap();
        let gram = gram_closed_form(&s, 16).unwrap();
        let q2 = q_factor(ReconstructorKind::PseudoInverse, &gram).unwrap();
        let mut last = f64::INFINITY;
        for lambda in [1e-2, 1e-4, 1e-6] {
            let q3 = q_factor(ReconstructorKind::tikhonov(lambda).unwrap(), &gram).unwrap();
            let d = max_abs(&(q3.matrix() - q2.matrix()));
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn full_subgrid_pseudo_inverse_recovers_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let len = 16;
        let s = SamplingScheme::uniform(-8.0, 1.0, len).unwrap();
        let u = random_signal(&mut rng, len);
        let y = nuft_adjoint(&u, &s);
        let back = reconstruct(ReconstructorKind::PseudoInverse, &y, &s, len).unwrap();
        let err: f64 = back.values().iter().zip(u.values()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(err.sqrt() < 1e-10 * u.norm_sq().sqrt());
    }

    #[test]
    fn back_projection_on_subgrid_is_orthogonal_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let len = 16;
        let s = SamplingScheme::new(vec![-6.0, -1.0, 2.0, 3.0, 7.0]).unwrap();
        let u = random_signal(&mut rng, len);
        let y = nuft_adjoint(&u, &s);
        let back = reconstruct(ReconstructorKind::BackProjection, &y, &s, len).unwrap();
        // projector onto span of DFT basis vectors at the sampled integers
        let a = NuftMatrix::new(&s, len).unwrap();
        let a = a.matrix();
        let gram_inv = (a.adjoint() * a).try_inverse().unwrap();
        let proj = a * gram_inv * a.adjoint();
        let expected = mat_vec(&proj, u.values());
        for (x, e) in back.values().iter().zip(&expected) {
            assert!((x - e).norm() < 1e-12);
        }
    }

    #[test]
    fn tikhonov_matches_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..20 {
            let len = 2 * rng.random_range(2..=16);
            let m = rng.random_range(1..6);
            let s = separated_scheme(&mut rng, len, m, 0.0);
            let lambda = rng.random_range(0.01..5.0);
            let y: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let kind = ReconstructorKind::tikhonov(lambda).unwrap();
            let got = reconstruct(kind, &y, &s, len).unwrap();
            let a = NuftMatrix::new(&s, len).unwrap();
            let a = a.matrix();
            let big = (a * a.adjoint() + DMatrix::identity(len, len) * Complex64::new(lambda, 0.0))
                .try_inverse()
                .unwrap();
            let r3 = big * a * Complex64::new(1.0 + lambda, 0.0);
            let want = mat_vec(&r3, &y);
            let scale = want.iter().map(|v| v.norm()).fold(1.0, f64::max);
            for (g, w) in got.values().iter().zip(&want) {
                assert!((g - w).norm() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn reconstruction_lies_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let len = 24;
        let s = separated_scheme(&mut rng, len, 5, 0.7);
        let y: Vec<Complex64> = (0..5).map(|_| Complex64::new(rng.random_range(-1.0..1.0), 0.3)).collect();
        let a = NuftMatrix::new(&s, len).unwrap();
        let a = a.matrix();
        let proj = a * (a.adjoint() * a).try_inverse().unwrap() * a.adjoint();
        for kind in [
            ReconstructorKind::BackProjection,
            ReconstructorKind::PseudoInverse,
            ReconstructorKind::tikhonov(0.3).unwrap(),
        ] {
            let x = reconstruct(kind, &y, &s, len).unwrap();
            let px = mat_vec(&proj, x.values());
            let res: f64 = px.iter().zip(x.values()).map(|(a, b)| (a - b).norm_sqr()).sum();
            assert!(res.sqrt() < 1e-10);
        }
    }

    #[test]
    fn kind_serde_round_trip() {
        let k = ReconstructorKind::tikhonov(0.25).unwrap();
        let j = serde_json::to_string(&k).unwrap();
        assert_eq!(j, r#"{"kind":"tikhonov","lambda":0.25,"standard":false}"#);
        let back: ReconstructorKind = serde_json::from_str(r#"{"kind":"tikhonov","lambda":0.25}"#).unwrap();
        assert_eq!(back, k);
        let bp: ReconstructorKind = serde_json::from_str(r#"{"kind":"back_projection"}"#).unwrap();
        assert_eq!(bp, ReconstructorKind::BackProjection);
    }
}
