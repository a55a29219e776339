//! Signals, sampling schemes and the nonuniform Fourier operators.
//!
//! A signal `u ∈ C^N` (N even) is indexed by `n ∈ [-N/2, N/2 - 1]`; storage
//! slot `k` holds `u[k - N/2]`. The Fourier atom at a real frequency `ξ` is
//!
//! ```text
//! a(ξ)[n] = exp(+2iπ ξ n / N) / √N
//! ```
//!
//! and the transform of a signal uses the opposite sign,
//!
//! ```text
//! û(ξ) = Σ_n u[n] exp(-2iπ ξ n / N) / √N = a(ξ)* u,
//! ```
//!
//! so that `û(Ξ) = A(Ξ)* u` with `A(Ξ) = [a(ξ_1), …, a(ξ_M)]`. Keep this sign
//! pairing in mind when comparing with FFT conventions.
//!
//! Every operator is a direct O(NM) sum.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `|sin(πδ/N)|` below this value is treated as the removable singularity of the Gram kernel.
pub const GRAM_SINGULARITY_TOL: f64 = 1e-12;

/// A discrete signal of even length `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    values: Vec<Complex64>,
}

impl Signal {
    /// Wraps storage-ordered samples (slot `k` is `u[k - N/2]`).
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        let n = values.len();
        if n == 0 || n % 2 != 0 {
            return Err(Error::InvalidSignalLength(n));
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len])
    }

    /// Builds a signal from a function of the signed index `n`.
    pub fn from_fn(len: usize, mut f: impl FnMut(i64) -> Complex64) -> Result<Self> {
        let half = (len / 2) as i64;
        Self::new((0..len as i64).map(|k| f(k - half)).collect())
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Storage slot of the signed index `n`, or `None` when out of range.
    pub fn slot(&self, n: i64) -> Option<usize> {
        let k = n + (self.len() / 2) as i64;
        (0..self.len() as i64).contains(&k).then_some(k as usize)
    }

    /// `u[n]` for a signed index; zero outside `[-N/2, N/2 - 1]`.
    pub fn at(&self, n: i64) -> Complex64 {
        self.slot(n)
            .map(|k| self.values[k])
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Signed indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let half = (self.len() / 2) as i64;
        -half..half
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// The same signal scaled to unit ℓ² norm. Zero signals are returned unchanged.
    pub fn normalized(&self) -> Self {
        let norm = self.norm_sq().sqrt();
        if norm == 0.0 {
            return self.clone();
        }
        Self {
            values: self.values.iter().map(|v| v / norm).collect(),
        }
    }

    /// `û(ξ)`.
    pub fn transform(&self, xi: f64) -> Complex64 {
        let len = self.len();
        let sum: Complex64 = self
            .indices()
            .zip(&self.values)
            .map(|(n, u)| u * unit_phase(xi, n, len).conj())
            .sum();
        sum / (len as f64).sqrt()
    }

    /// `û'(ξ)`, the derivative of the transform computed from the differentiated sum.
    pub fn transform_derivative(&self, xi: f64) -> Complex64 {
        let len = self.len();
        let scale = TAU / len as f64;
        let sum: Complex64 = self
            .indices()
            .zip(&self.values)
            .map(|(n, u)| u * unit_phase(xi, n, len).conj() * Complex64::new(0.0, -scale * n as f64))
            .sum();
        sum / (len as f64).sqrt()
    }
}

/// An ordered list of sampling frequencies, stored unreduced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SamplingScheme {
    freqs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for SamplingScheme {
    type Error = Error;

    fn try_from(freqs: Vec<f64>) -> Result<Self> {
        SamplingScheme::new(freqs)
    }
}

impl From<SamplingScheme> for Vec<f64> {
    fn from(s: SamplingScheme) -> Self {
        s.freqs
    }
}

impl SamplingScheme {
    pub fn new(freqs: Vec<f64>) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::EmptyScheme);
        }
        if let Some(i) = freqs.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteFrequency(i));
        }
        Ok(Self { freqs })
    }

    /// `count` points `start, start + spacing, …`.
    pub fn uniform(start: f64, spacing: f64, count: usize) -> Result<Self> {
        Self::new((0..count).map(|i| start + spacing * i as f64).collect())
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn into_freqs(self) -> Vec<f64> {
        self.freqs
    }

    /// Every frequency reduced modulo `len` into `[-len/2, len/2)`.
    pub fn canonicalized(&self, len: usize) -> Self {
        Self {
            freqs: self.freqs.iter().map(|&x| canonical_frequency(x, len)).collect(),
        }
    }

    /// True when all pairwise differences are nonzero integers.
    pub fn is_subgrid(&self) -> bool {
        self.freqs.iter().enumerate().all(|(i, &x)| {
            self.freqs[i + 1..].iter().all(|&y| {
                let d = x - y;
                d != 0.0 && d.fract() == 0.0
            })
        })
    }
}

/// Reduces `xi` modulo `len` into `[-len/2, len/2)`.
pub fn canonical_frequency(xi: f64, len: usize) -> f64 {
    let period = len as f64;
    let half = period / 2.0;
    let r = (xi + half).rem_euclid(period) - half;
    // rem_euclid may round up to `period` for tiny negative inputs
    if r >= half {
        r - period
    } else {
        r
    }
}

/// `exp(2iπ ξ n / N)` with the argument reduced modulo one period before evaluation,
/// so that `ξ` and `ξ + kN` give identical results whenever both are exact.
#[inline]
pub fn unit_phase(xi: f64, n: i64, len: usize) -> Complex64 {
    let period = len as f64;
    let turns = (xi.rem_euclid(period) * n as f64).rem_euclid(period) / period;
    let (s, c) = (TAU * turns).sin_cos();
    Complex64::new(c, s)
}

/// Distance on the period-`len` torus.
pub fn torus_dist(x: f64, y: f64, len: usize) -> f64 {
    let period = len as f64;
    let d = (x - y).rem_euclid(period);
    d.min(period - d)
}

/// Smallest pairwise torus distance; `len / 2` for a single point.
pub fn min_distance(scheme: &SamplingScheme, len: usize) -> f64 {
    let xs = scheme.freqs();
    if xs.len() < 2 {
        return len as f64 / 2.0;
    }
    let mut best = f64::INFINITY;
    for (i, &x) in xs.iter().enumerate() {
        for &y in &xs[i + 1..] {
            best = best.min(torus_dist(x, y, len));
        }
    }
    best
}

/// The Fourier atom `a(ξ)` in storage order.
pub fn atom(xi: f64, len: usize) -> Vec<Complex64> {
    let half = (len / 2) as i64;
    let scale = 1.0 / (len as f64).sqrt();
    (-half..half).map(|n| unit_phase(xi, n, len) * scale).collect()
}

/// The normalized Vandermonde matrix `A(Ξ)` (N × M).
#[derive(Clone, Debug)]
pub struct NuftMatrix {
    matrix: DMatrix<Complex64>,
}

impl NuftMatrix {
    pub fn new(scheme: &SamplingScheme, len: usize) -> Result<Self> {
        check_len(len)?;
        let cols: Vec<Complex64> = scheme.freqs().iter().flat_map(|&xi| atom(xi, len)).collect();
        Ok(Self {
            matrix: DMatrix::from_vec(len, scheme.len(), cols),
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn column(&self, m: usize) -> Vec<Complex64> {
        self.matrix.column(m).iter().copied().collect()
    }

    /// `A(Ξ)* A(Ξ)` by dense multiplication.
    pub fn gram(&self) -> GramMatrix {
        GramMatrix {
            matrix: self.matrix.adjoint() * &self.matrix,
        }
    }
}

/// `û(Ξ) = A(Ξ)* u`.
pub fn nuft_adjoint(u: &Signal, scheme: &SamplingScheme) -> Vec<Complex64> {
    scheme.freqs().iter().map(|&xi| u.transform(xi)).collect()
}

/// `A(Ξ) y`.
pub fn nuft_forward(y: &[Complex64], scheme: &SamplingScheme, len: usize) -> Result<Signal> {
    check_len(len)?;
    if y.len() != scheme.len() {
        return Err(invalid(format!(
            "measurement length {} does not match scheme length {}",
            y.len(),
            scheme.len()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (&xi, &ym) in scheme.freqs().iter().zip(y) {
        for (o, a) in out.iter_mut().zip(atom(xi, len)) {
            *o += a * ym;
        }
    }
    Signal::new(out)
}

/// Hermitian Gram matrix `L(Ξ) = A(Ξ)* A(Ξ)`.
#[derive(Clone, Debug)]
pub struct GramMatrix {
    matrix: DMatrix<Complex64>,
}

impl GramMatrix {
    pub fn from_matrix(matrix: DMatrix<Complex64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        crate::linalg::hermitian_eigen(&self.matrix).values
    }
}

/// Trigonometric values shared by the kernel and its derivative.
struct KernelTrig {
    period: f64,
    /// `δ` reduced to `[-N/2, N/2]`.
    reduced: f64,
    /// `sin(πδ/N)`, `cos(πδ/N)`.
    sn: f64,
    cn: f64,
    /// `sin(πδ)`, `cos(πδ)`.
    s: f64,
    c: f64,
}

fn kernel_trig(delta: f64, len: usize) -> KernelTrig {
    let period = len as f64;
    let reduced = delta - period * (delta / period).round();
    let (sn, cn) = (PI * reduced / period).sin_cos();
    let k = reduced.round();
    let (s, c) = (PI * (reduced - k)).sin_cos();
    let sign = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
    KernelTrig {
        period,
        reduced,
        sn,
        cn,
        s: sign * s,
        c: sign * c,
    }
}

fn kernel_value(t: &KernelTrig) -> Complex64 {
    if t.sn.abs() < GRAM_SINGULARITY_TOL {
        return Complex64::new(1.0, 0.0);
    }
    if t.reduced.fract() == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let ratio = t.s / (t.period * t.sn);
    Complex64::new(ratio * t.cn, ratio * t.sn)
}

fn kernel_derivative(t: &KernelTrig, len: usize) -> Complex64 {
    if t.reduced.abs() < 0.25 {
        // the closed form cancels catastrophically near the singularity
        return dirichlet_derivative_sum(t.reduced, len);
    }
    let (period, sn, cn) = (t.period, t.sn, t.cn);
    let ratio = t.s / sn;
    let ratio_prime = PI * (t.c * sn - t.s * cn / period) / (sn * sn);
    Complex64::new(cn, sn) * Complex64::new(ratio_prime, PI / period * ratio) / period
}

/// One Gram entry `a(ξ_m)* a(ξ_m')` as a function of `δ = ξ_m - ξ_m'`:
/// `exp(iπδ/N) sin(πδ) / (N sin(πδ/N))`.
pub fn gram_kernel(delta: f64, len: usize) -> Complex64 {
    kernel_value(&kernel_trig(delta, len))
}

/// Derivative of [`gram_kernel`] with respect to `δ`, i.e. `∂L_{m,m'}/∂ξ_m`.
pub fn gram_kernel_derivative(delta: f64, len: usize) -> Complex64 {
    kernel_derivative(&kernel_trig(delta, len), len)
}

/// [`gram_kernel`] and [`gram_kernel_derivative`] from one set of trigonometric evaluations.
pub fn gram_kernel_with_derivative(delta: f64, len: usize) -> (Complex64, Complex64) {
    let t = kernel_trig(delta, len);
    (kernel_value(&t), kernel_derivative(&t, len))
}

/// `(1/N) Σ_n (-2iπn/N) exp(-2iπδn/N)`, the derivative of the kernel as a direct sum.
fn dirichlet_derivative_sum(delta: f64, len: usize) -> Complex64 {
    let half = (len / 2) as i64;
    let scale = TAU / len as f64;
    let sum: Complex64 = (-half..half)
        .map(|n| unit_phase(delta, n, len).conj() * Complex64::new(0.0, -scale * n as f64))
        .sum();
    sum / len as f64
}

/// `L(Ξ)` from the Dirichlet-kernel closed form.
pub fn gram_closed_form(scheme: &SamplingScheme, len: usize) -> Result<GramMatrix> {
    check_len(len)?;
    let xs = scheme.freqs();
    let m = xs.len();
    let mut matrix = DMatrix::from_element(m, m, Complex64::new(1.0, 0.0));
    for i in 0..m {
        for j in i + 1..m {
            let v = gram_kernel(xs[i] - xs[j], len);
            matrix[(i, j)] = v;
            matrix[(j, i)] = v.conj();
        }
    }
    Ok(GramMatrix { matrix })
}

/// `∂L_{m,m'}/∂ξ_m` for `m ≠ m'`.
pub fn gram_partial(scheme: &SamplingScheme, len: usize, m: usize, m_prime: usize) -> Result<Complex64> {
    check_len(len)?;
    let xs = scheme.freqs();
    if m >= xs.len() || m_prime >= xs.len() {
        return Err(invalid(format!("index out of range for a scheme of {} points", xs.len())));
    }
    if m == m_prime {
        return Err(invalid("gram_partial is only defined off the diagonal"));
    }
    Ok(gram_kernel_derivative(xs[m] - xs[m_prime], len))
}

pub(crate) fn check_len(len: usize) -> Result<()> {
    if len == 0 || len % 2 != 0 {
        Err(Error::InvalidSignalLength(len))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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

    fn random_scheme(rng: &mut ChaCha8Rng, len: usize, m: usize) -> SamplingScheme {
        let half = len as f64 / 2.0;
        SamplingScheme::new((0..m).map(|_| rng.random_range(-half..half)).collect()).unwrap()
    }

    #[test]
    fn storage_slot_maps_signed_index() {
        let u = Signal::from_fn(8, |n| Complex64::new(n as f64, 0.0)).unwrap();
        assert_eq!(u.values()[0].re, -4.0);
        assert_eq!(u.values()[7].re, 3.0);
        assert_eq!(u.slot(-4), Some(0));
        assert_eq!(u.slot(4), None);
        assert_eq!(u.at(2).re, 2.0);
    }

    #[test]
    fn rejects_odd_or_empty_signals() {
        assert!(Signal::zeros(0).is_err());
        assert!(Signal::zeros(7).is_err());
        assert!(SamplingScheme::new(vec![]).is_err());
        assert!(SamplingScheme::new(vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn torus_distance_examples() {
        assert_eq!(torus_dist(7.5, -8.0, 16), 0.5);
        assert_eq!(torus_dist(3.0, 3.0, 16), 0.0);
    }

    #[test]
    fn torus_distance_matches_shift_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let len = 2 * rng.random_range(1..64);
            let p = len as f64;
            let x = rng.random_range(-p..p);
            let y = rng.random_range(-p..p);
            let brute = (-2..=2)
                .map(|k| (x - y - k as f64 * p).abs())
                .fold(f64::INFINITY, f64::min);
            let d = torus_dist(x, y, len);
            assert!((d - brute).abs() < 1e-12, "{x} {y} {len}");
            assert!((0.0..=p / 2.0).contains(&d));
        }
    }

    #[test]
    fn min_distance_examples() {
        let grid = SamplingScheme::uniform(-8.0, 2.0, 8).unwrap();
        assert_eq!(min_distance(&grid, 16), 2.0);
        let pair = SamplingScheme::new(vec![0.0, 0.25]).unwrap();
        assert_eq!(min_distance(&pair, 16), 0.25);
        let single = SamplingScheme::new(vec![3.0]).unwrap();
        assert_eq!(min_distance(&single, 16), 8.0);
    }

    #[test]
    fn canonicalization_lands_in_half_open_interval() {
        let s = SamplingScheme::new(vec![8.0, -8.0, 23.5, -0.0, -40.25]).unwrap();
        let c = s.canonicalized(16);
        assert_eq!(c.freqs(), &[-8.0, -8.0, 7.5, 0.0, -8.25 + 16.0]);
    }

    #[test]
    fn atoms_have_unit_norm() {
        for &xi in &[0.0, 0.3, -7.77, 123.456] {
            let a = atom(xi, 32);
            let norm: f64 = a.iter().map(|v| v.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-14);
            for v in &a {
                assert!((v.norm() - 1.0 / 32f64.sqrt()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn matrix_columns_are_atoms() {
        let scheme = SamplingScheme::new(vec![0.5, -3.25, 6.0]).unwrap();
        let a = NuftMatrix::new(&scheme, 16).unwrap();
        for (m, &xi) in scheme.freqs().iter().enumerate() {
            assert_eq!(a.column(m), atom(xi, 16));
        }
    }

    #[test]
    fn adjoint_of_zero_signal_is_zero() {
        let u = Signal::zeros(16).unwrap();
        let s = SamplingScheme::new(vec![0.1, 2.0]).unwrap();
        assert!(nuft_adjoint(&u, &s).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn adjoint_matches_dft_at_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let len = 16;
        let u = random_signal(&mut rng, len);
        for k in -8..8 {
            // independent DFT over storage slots, shifted index n = j - N/2
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..len {
                let n = j as f64 - 8.0;
                let ang = -TAU * (k as f64) * n / len as f64;
                acc += u.values()[j] * Complex64::new(ang.cos(), ang.sin());
            }
            acc /= (len as f64).sqrt();
            let s = SamplingScheme::new(vec![k as f64]).unwrap();
            assert!((nuft_adjoint(&u, &s)[0] - acc).norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_is_exactly_periodic_on_dyadic_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_signal(&mut rng, 32);
        for _ in 0..100 {
            let xi = (rng.random_range(-16.0..16.0f64) * 1024.0).round() / 1024.0;
            let k = rng.random_range(-5..5) as f64;
            let a = nuft_adjoint(&u, &SamplingScheme::new(vec![xi]).unwrap());
            let b = nuft_adjoint(&u, &SamplingScheme::new(vec![xi + 32.0 * k]).unwrap());
            assert_eq!(a, b);
        }
    }

    #[test]
    fn forward_of_unit_vector_is_column() {
        let scheme = SamplingScheme::new(vec![0.5, -3.25]).unwrap();
        let y = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let out = nuft_forward(&y, &scheme, 16).unwrap();
        assert_eq!(out.values(), atom(-3.25, 16).as_slice());
    }

    #[test]
    fn forward_and_adjoint_are_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let len = 2 * rng.random_range(2..40);
            let m = rng.random_range(1..10);
            let scheme = random_scheme(&mut rng, len, m);
            let u = random_signal(&mut rng, len);
            let y: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let ay = nuft_forward(&y, &scheme, len).unwrap();
            let lhs: Complex64 = ay.values().iter().zip(u.values()).map(|(a, b)| b.conj() * a).sum();
            let uh = nuft_adjoint(&u, &scheme);
            let rhs: Complex64 = y.iter().zip(&uh).map(|(a, b)| b.conj() * a).sum();
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0));
        }
    }

    #[test]
    fn full_subgrid_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let len = 16;
        let scheme = SamplingScheme::uniform(-8.0, 1.0, len).unwrap();
        let u = random_signal(&mut rng, len);
        let back = nuft_forward(&nuft_adjoint(&u, &scheme), &scheme, len).unwrap();
        let err: f64 = back.values().iter().zip(u.values()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(err.sqrt() <= 1e-12 * u.norm_sq().sqrt());
    }

    #[test]
    fn gram_closed_form_matches_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..60 {
            let len = 2 * rng.random_range(1..=128);
            let m = rng.random_range(1..=64);
            let scheme = random_scheme(&mut rng, len, m);
            let closed = gram_closed_form(&scheme, len).unwrap();
            let direct = NuftMatrix::new(&scheme, len).unwrap().gram();
            let err = (closed.matrix() - direct.matrix()).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "len {len} m {m} err {err}");
        }
    }

    #[test]
    fn gram_on_subgrid_is_identity() {
        let scheme = SamplingScheme::new(vec![-5.0, -2.0, 0.0, 1.0, 7.0, 6.0]).unwrap();
        let l = gram_closed_form(&scheme, 16).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_eq!(l.matrix()[(i, j)], Complex64::new(expected, 0.0));
            }
        }
    }

    #[test]
    fn gram_limit_at_multiples_of_period() {
        assert_eq!(gram_kernel(0.0, 16), Complex64::new(1.0, 0.0));
        assert_eq!(gram_kernel(32.0, 16), Complex64::new(1.0, 0.0));
        assert_eq!(gram_kernel(1.0, 16), Complex64::new(0.0, 0.0));
        // near the singularity the kernel stays close to 1
        assert!((gram_kernel(1e-9, 16) - Complex64::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn gram_partial_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for _ in 0..2000 {
            let len = 2 * rng.random_range(2..128);
            let p = len as f64;
            let delta = rng.random_range(-p..p);
            let d = gram_kernel_derivative(delta, len);
            let fd = (gram_kernel(delta + h, len) - gram_kernel(delta - h, len)) / (2.0 * h);
            assert!((d - fd).norm() <= 1e-5 * fd.norm().max(1.0), "delta {delta} len {len}: {d} vs {fd}");
        }
    }

    #[test]
    fn gram_partial_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10_000 {
            let len = 2 * rng.random_range(1..256);
            let p = len as f64;
            let delta = rng.random_range(-p..p);
            let dist = torus_dist(delta, 0.0, len);
            if dist == 0.0 {
                continue;
            }
            let bound = PI / p + 4.0 / dist;
            assert!(gram_kernel_derivative(delta, len).norm() <= bound * (1.0 + 1e-12));
        }
        // symmetric point δ = N/2
        for len in [8usize, 16, 64, 256] {
            let p = len as f64;
            let v = gram_kernel_derivative(p / 2.0, len).norm();
            assert!(v.is_finite() && v <= PI / p + 8.0 / p);
        }
    }

    #[test]
    fn gram_partial_rejects_diagonal() {
        let s = SamplingScheme::new(vec![0.0, 1.5]).unwrap();
        assert!(gram_partial(&s, 16, 0, 0).is_err());
        assert!(gram_partial(&s, 16, 0, 1).is_ok());
    }

    #[test]
    fn gram_spectrum_within_conditioning_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 200 {
            let len = 2 * rng.random_range(4..=128);
            let m = rng.random_range(2..=12);
            let scheme = random_scheme(&mut rng, len, m);
            let md = min_distance(&scheme, len);
            if md <= 1.0 {
                continue;
            }
            for ev in gram_closed_form(&scheme, len).unwrap().eigenvalues() {
                assert!((ev - 1.0).abs() <= 1.0 / md + 1e-12);
            }
            checked += 1;
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u = random_signal(&mut rng, 32);
        for _ in 0..20 {
            let xi = rng.random_range(-16.0..16.0);
            let h = 1e-6;
            let fd = (u.transform(xi + h) - u.transform(xi - h)) / (2.0 * h);
            assert!((u.transform_derivative(xi) - fd).norm() < 1e-7 * fd.norm().max(1.0));
        }
    }
}
