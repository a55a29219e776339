//! Dense evaluation of the back-projection objective `J₁` and its gradient for
//! many signals at once.
//!
//! All signal-dependent quantities of `J₁` are quadratic in `u`, so a dataset
//! only enters through `Σ_p u_p u_p*`. When there are more signals than
//! samples the dataset is replaced by the scaled eigenvectors of that sum.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::fourier::{check_len, gram_kernel, gram_kernel_with_derivative, unit_phase, Signal};
use crate::linalg::hermitian_eigen;

/// Spacing of exactly evaluated phases in the transform tables.
const PHASE_ANCHOR: usize = 16;

/// Real and imaginary parts of a set of (possibly compressed) signals, one per column.
#[derive(Clone, Debug)]
pub(crate) struct SignalBlock {
    pub len: usize,
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
    /// `1/P` for the original dataset.
    pub weight: f64,
    /// `Σ_p ‖u_p‖²`.
    pub norm_sum: f64,
    /// Every column is real, so `im` is identically zero.
    pub real: bool,
}

impl SignalBlock {
    pub fn new(signals: &[Signal]) -> Result<Self> {
        let first = signals.first().ok_or_else(|| invalid("at least one signal is required"))?;
        let len = first.len();
        check_len(len)?;
        if let Some(bad) = signals.iter().find(|s| s.len() != len) {
            return Err(Error::LengthMismatch {
                expected: len,
                found: bad.len(),
            });
        }
        let weight = 1.0 / signals.len() as f64;
        let norm_sum = signals.iter().map(Signal::norm_sq).sum();
        let real = signals.iter().all(Signal::is_real);
        let columns: Vec<Vec<Complex64>> = if signals.len() > len && real {
            compress_real(signals, len)
        } else if signals.len() > len {
            compress(signals, len)
        } else {
            signals.iter().map(|s| s.values().to_vec()).collect()
        };
        let cols = columns.len().max(1);
        let mut re = DMatrix::zeros(len, cols);
        let mut im = DMatrix::zeros(len, cols);
        for (j, c) in columns.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                re[(i, j)] = v.re;
                im[(i, j)] = v.im;
            }
        }
        Ok(Self {
            len,
            re,
            im,
            weight,
            norm_sum,
            real,
        })
    }

    /// `Re` and `Im` of `A(Ξ)* U` and `A'(Ξ)* U` (M × columns).
    pub fn transforms(&self, xs: &[f64], with_derivative: bool) -> Transforms {
        let n = self.len;
        let half = (n / 2) as i64;
        let (c, s) = phase_tables(xs, n);
        // û = Σ (c − i s)(Ur + i Ui)
        let (re, im) = if self.real {
            (&c * &self.re, -(&s * &self.re))
        } else {
            (&c * &self.re + &s * &self.im, &c * &self.im - &s * &self.re)
        };
        let derivative = with_derivative.then(|| {
            let omega = std::f64::consts::TAU / n as f64;
            let mut cn = c;
            let mut sn = s;
            for (k, idx) in (-half..half).enumerate() {
                let f = omega * idx as f64;
                cn.column_mut(k).scale_mut(f);
                sn.column_mut(k).scale_mut(f);
            }
            // û' = Σ (−iω n)(c − i s) u = Σ ω n (−s − i c) u
            if self.real {
                (-(&sn * &self.re), -(&cn * &self.re))
            } else {
                (&cn * &self.im - &sn * &self.re, -(&sn * &self.im) - &cn * &self.re)
            }
        });
        Transforms { re, im, derivative }
    }
}

/// `c + i s = A(Ξ)ᵀ`, i.e. `exp(2iπ ξ_m n / N)/√N` (M × N, columns `n = −N/2..N/2`).
fn phase_tables(xs: &[f64], n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let m = xs.len();
    let half = (n / 2) as i64;
    let scale = 1.0 / (n as f64).sqrt();
    let mut c = DMatrix::zeros(m, n);
    let mut s = DMatrix::zeros(m, n);
    let mut steps = [Complex64::new(0.0, 0.0); PHASE_ANCHOR];
    for (r, &x) in xs.iter().enumerate() {
        for (j, st) in steps.iter_mut().enumerate() {
            *st = unit_phase(x, j as i64, n);
        }
        // exact anchors every PHASE_ANCHOR indices, one product in between
        for (k0, idx0) in (-half..half).step_by(PHASE_ANCHOR).enumerate() {
            let base = unit_phase(x, idx0, n);
            for (j, st) in steps.iter().enumerate().take(n - k0 * PHASE_ANCHOR) {
                let p = base * st;
                c[(r, k0 * PHASE_ANCHOR + j)] = p.re * scale;
                s[(r, k0 * PHASE_ANCHOR + j)] = p.im * scale;
            }
        }
    }
    (c, s)
}

pub(crate) struct Transforms {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
    pub derivative: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

/// Scaled eigenvectors of `Σ_p u_p u_pᵀ` for real signals, kept real.
fn compress_real(signals: &[Signal], len: usize) -> Vec<Vec<Complex64>> {
    let mut data = DMatrix::<f64>::zeros(len, signals.len());
    for (j, s) in signals.iter().enumerate() {
        for (i, v) in s.values().iter().enumerate() {
            data[(i, j)] = v.re;
        }
    }
    let eig = SymmetricEigen::new(&data * data.transpose());
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    (0..len)
        .filter(|&k| eig.eigenvalues[k] > 1e-14 * top)
        .map(|k| {
            let w = eig.eigenvalues[k].sqrt();
            eig.eigenvectors.column(k).iter().map(|&v| Complex64::new(v * w, 0.0)).collect()
        })
        .collect()
}

/// Scaled eigenvectors `√s_k v_k` of `Σ_p u_p u_p*` with nonzero eigenvalue.
fn compress(signals: &[Signal], len: usize) -> Vec<Vec<Complex64>> {
    let mut cov = DMatrix::<Complex64>::zeros(len, len);
    for s in signals {
        let v = s.values();
        for j in 0..len {
            let vj = v[j].conj();
            if vj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..len {
                cov[(i, j)] += v[i] * vj;
            }
        }
    }
    let eig = hermitian_eigen(&cov);
    let top = eig.values.last().copied().unwrap_or(0.0);
    eig.values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1e-14 * top)
        .map(|(k, &s)| eig.vectors.column(k).iter().map(|v| v * s.sqrt()).collect())
        .collect()
}

/// `J₁` with back-projection over a fixed dataset, with a fast value/gradient path.
#[derive(Clone, Debug)]
pub struct BatchJ1 {
    block: SignalBlock,
    /// `C = U U*` of the (compressed) columns; the imaginary part is absent for real data.
    cov_re: DMatrix<f64>,
    cov_im: Option<DMatrix<f64>>,
    sigma: f64,
}

/// Real and imaginary parts of `K = Û Û*` and, with the gradient, `Y = Û' Û*`.
struct Products {
    kre: DMatrix<f64>,
    kim: DMatrix<f64>,
    y: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl BatchJ1 {
    pub fn new(signals: &[Signal], sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(invalid(format!("noise level must be finite and nonnegative (got {sigma})")));
        }
        let block = SignalBlock::new(signals)?;
        let (ur, ui) = (&block.re, &block.im);
        let (cov_re, cov_im) = if block.real {
            (ur * ur.transpose(), None)
        } else {
            (
                ur * ur.transpose() + ui * ui.transpose(),
                Some(ui * ur.transpose() - ur * ui.transpose()),
            )
        };
        Ok(Self {
            block,
            cov_re,
            cov_im,
            sigma,
        })
    }

    /// Signal length `N`.
    pub fn len(&self) -> usize {
        self.block.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, xs: &[f64]) -> f64 {
        self.eval(xs, false).0
    }

    pub fn value_and_gradient(&self, xs: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = self.eval(xs, true);
        (v, g.expect("gradient requested"))
    }

    /// Multiply-adds of the column path relative to the covariance path.
    fn columns_are_cheaper(&self, m: usize) -> bool {
        let (n, cols) = (self.block.len, self.block.re.ncols());
        let complex = if self.block.real { 1 } else { 2 };
        let by_columns = cols * (complex * 4 * m * n + 8 * m * m);
        let by_covariance = complex * 2 * m * n * n + 8 * m * m * n;
        by_columns <= by_covariance
    }

    fn products_by_columns(&self, xs: &[f64], with_gradient: bool) -> Products {
        let t = self.block.transforms(xs, with_gradient);
        let kre = &t.re * t.re.transpose() + &t.im * t.im.transpose();
        let kim = &t.im * t.re.transpose() - &t.re * t.im.transpose();
        let y = t.derivative.map(|(dre, dim)| {
            (
                &dre * t.re.transpose() + &dim * t.im.transpose(),
                &dim * t.re.transpose() - &dre * t.im.transpose(),
            )
        });
        Products { kre, kim, y }
    }

    /// `K = A* C A` and `Y = A* D C A` with `D = diag(−2iπn/N)`.
    fn products_by_covariance(&self, xs: &[f64], with_gradient: bool) -> Products {
        let m = xs.len();
        let n = self.block.len;
        let (c, s) = phase_tables(xs, n);
        // A = cᵀ + i sᵀ
        let mut at = DMatrix::zeros(n, 2 * m);
        at.columns_mut(0, m).copy_from(&c.transpose());
        at.columns_mut(m, m).copy_from(&s.transpose());
        let g = &self.cov_re * &at;
        let (gre, gim) = match &self.cov_im {
            None => (g.columns(0, m).into_owned(), g.columns(m, m).into_owned()),
            Some(ci) => {
                let h = ci * &at;
                (
                    g.columns(0, m) - h.columns(m, m),
                    g.columns(m, m) + h.columns(0, m),
                )
            }
        };
        let blocks = if with_gradient { 4 } else { 2 };
        let mut b = DMatrix::zeros(n, blocks * m);
        b.columns_mut(0, m).copy_from(&gre);
        b.columns_mut(m, m).copy_from(&gim);
        if with_gradient {
            // D G = ωn Gi − i ωn Gr
            let omega = std::f64::consts::TAU / n as f64;
            let half = (n / 2) as f64;
            for k in 0..n {
                let f = omega * (k as f64 - half);
                for j in 0..m {
                    b[(k, 2 * m + j)] = f * gim[(k, j)];
                    b[(k, 3 * m + j)] = -f * gre[(k, j)];
                }
            }
        }
        let cb = &c * &b;
        let sb = &s * &b;
        // A* X = (c − i s)(Xr + i Xi)
        let part = |re: usize, im: usize| {
            (
                cb.columns(re * m, m) + sb.columns(im * m, m),
                cb.columns(im * m, m) - sb.columns(re * m, m),
            )
        };
        let (kre, kim) = part(0, 1);
        let y = with_gradient.then(|| part(2, 3));
        Products { kre, kim, y }
    }

    fn eval(&self, xs: &[f64], with_gradient: bool) -> (f64, Option<Vec<f64>>) {
        let m = xs.len();
        let n = self.block.len;
        let Products { kre, kim, y } = if self.columns_are_cheaper(m) {
            self.products_by_columns(xs, with_gradient)
        } else {
            self.products_by_covariance(xs, with_gradient)
        };
        let mut l = vec![Complex64::new(0.0, 0.0); m * m];
        let mut d = vec![Complex64::new(0.0, 0.0); if with_gradient { m * m } else { 0 }];
        for i in 0..m {
            l[i * m + i] = Complex64::new(1.0, 0.0);
            for j in i + 1..m {
                let delta = xs[i] - xs[j];
                if with_gradient {
                    let (v, dv) = gram_kernel_with_derivative(delta, n);
                    l[i * m + j] = v;
                    l[j * m + i] = v.conj();
                    d[i * m + j] = dv;
                    d[j * m + i] = -dv.conj();
                } else {
                    let v = gram_kernel(delta, n);
                    l[i * m + j] = v;
                    l[j * m + i] = v.conj();
                }
            }
        }
        let mut trace_k = 0.0;
        let mut tr_lk = 0.0;
        for i in 0..m {
            trace_k += kre[(i, i)];
            for j in 0..m {
                // Σ L_ij K_ji = Σ L_ij conj(K_ij)
                let lij = l[i * m + j];
                tr_lk += lij.re * kre[(i, j)] + lij.im * kim[(i, j)];
            }
        }
        let w = self.block.weight;
        let value = w * (0.5 * self.block.norm_sum - trace_k + 0.5 * tr_lk) + 0.5 * self.sigma * self.sigma * m as f64;
        let Some((yre, yim)) = y else {
            return (value, None);
        };
        let grad = (0..m)
            .map(|i| {
                let mut acc = -yre[(i, i)];
                for j in 0..m {
                    if j == i {
                        continue;
                    }
                    let dij = d[i * m + j];
                    let lij = l[i * m + j];
                    // Re(conj(D) K) + Re(conj(L) Y)
                    acc += dij.re * kre[(i, j)] + dij.im * kim[(i, j)];
                    acc += lij.re * yre[(i, j)] + lij.im * yim[(i, j)];
                }
                w * acc
            })
            .collect();
        (value, Some(grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::SamplingScheme;
    use crate::objective::{eval_j, grad_j1, ObjectiveSpec};
    use crate::reconstruct::ReconstructorKind;
    use crate::signals::RectangleModel;
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

    fn check_against_reference(signals: Vec<Signal>, xs: Vec<f64>, sigma: f64) {
        let batch = BatchJ1::new(&signals, sigma).unwrap();
        let spec = ObjectiveSpec::new(ReconstructorKind::BackProjection, sigma, signals).unwrap();
        let s = SamplingScheme::new(xs.clone()).unwrap();
        let (v, g) = batch.value_and_gradient(&xs);
        let want_v = eval_j(&spec, &s).unwrap().value;
        let want_g = grad_j1(&spec, &s).unwrap();
        assert!((v - want_v).abs() < 1e-11 * want_v.abs().max(1.0), "{v} vs {want_v}");
        assert_eq!(batch.value(&xs), v);
        for (a, b) in g.iter().zip(&want_g) {
            assert!((a - b).abs() < 1e-11 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn matches_reference_on_random_complex_signals() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..30 {
            let len = 2 * rng.random_range(2..24);
            let p = rng.random_range(1..5);
            let m = rng.random_range(1..10);
            let signals = (0..p).map(|_| random_signal(&mut rng, len)).collect();
            let half = len as f64 / 2.0;
            let xs = (0..m).map(|_| rng.random_range(-half..half)).collect();
            check_against_reference(signals, xs, rng.random_range(0.0..0.3));
        }
    }

    #[test]
    fn compressed_dataset_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let len = 16;
        let signals: Vec<Signal> = (0..40).map(|_| random_signal(&mut rng, len)).collect();
        let block = SignalBlock::new(&signals).unwrap();
        assert!(block.re.ncols() <= len);
        let xs = (0..6).map(|_| rng.random_range(-8.0..8.0)).collect();
        check_against_reference(signals, xs, 0.1);
    }

    #[test]
    fn compressed_rectangles_match_reference() {
        let signals = RectangleModel::new(32, 7).unwrap().dataset(100);
        let xs = (0..16).map(|k| -16.0 + 2.0 * k as f64 + 0.1 * (k % 3) as f64).collect();
        check_against_reference(signals, xs, 0.0);
    }

    #[test]
    fn near_collisions_stay_accurate() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let signals = vec![random_signal(&mut rng, 32)];
        check_against_reference(signals, vec![1.0, 1.0 + 1e-7, 5.5, 5.5 + 0.2], 0.0);
    }
}
