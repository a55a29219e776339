use crate::analysis::extrema::local_maxima_1d;
use crate::batch::SignalBlock;
use crate::error::{invalid, Result};
use crate::fourier::Signal;

/// Samples per unit frequency used when none is given.
pub const DEFAULT_PSD_POINTS: usize = 20;

/// `ρ_P(ξ) = (1/P) Σ_p |û_p(ξ)|²` on a uniform grid over one period.
#[derive(Clone, Debug)]
pub struct PsdProfile {
    pub len: usize,
    pub grid: Vec<f64>,
    pub rho: Vec<f64>,
    /// Grid indices of local maxima.
    pub maxima: Vec<usize>,
}

impl PsdProfile {
    pub fn spacing(&self) -> f64 {
        self.len as f64 / self.grid.len() as f64
    }

    /// `−(ρ[i−1] − 2ρ[i] + ρ[i+1]) / h²` with periodic neighbors.
    pub fn curvature(&self, i: usize) -> f64 {
        let n = self.rho.len();
        let h = self.spacing();
        -(self.rho[(i + n - 1) % n] - 2.0 * self.rho[i] + self.rho[(i + 1) % n]) / (h * h)
    }

    pub fn maxima_curvatures(&self) -> Vec<f64> {
        self.maxima.iter().map(|&i| self.curvature(i)).collect()
    }

    /// Largest curvature over all local maxima, or 0 without maxima.
    pub fn max_curvature(&self) -> f64 {
        self.maxima_curvatures().into_iter().fold(0.0, f64::max)
    }

    /// Index of the highest local maximum.
    pub fn global_maximum(&self) -> Option<usize> {
        self.maxima.iter().copied().max_by(|&a, &b| self.rho[a].total_cmp(&self.rho[b]))
    }

    /// Largest curvature over local maxima other than the highest one, or 0 when there are none.
    pub fn max_secondary_curvature(&self) -> f64 {
        let top = self.global_maximum();
        self.maxima
            .iter()
            .filter(|&&i| Some(i) != top)
            .map(|&i| self.curvature(i))
            .fold(0.0, f64::max)
    }

    /// Value at an arbitrary frequency by periodic linear interpolation.
    pub fn interpolate(&self, xi: f64) -> f64 {
        let n = self.rho.len();
        let period = self.len as f64;
        let t = (xi + period / 2.0).rem_euclid(period) / self.spacing();
        let k = (t.floor() as usize).min(n - 1);
        let frac = t - k as f64;
        if frac == 0.0 {
            return self.rho[k];
        }
        self.rho[k] * (1.0 - frac) + self.rho[(k + 1) % n] * frac
    }
}

/// Spectral density on `points_per_unit × N` samples over `[−N/2, N/2)`.
pub fn psd(signals: &[Signal], points_per_unit: usize) -> Result<PsdProfile> {
    if points_per_unit == 0 {
        return Err(invalid("psd needs at least one point per unit frequency"));
    }
    let block = SignalBlock::new(signals)?;
    let len = block.len;
    let count = points_per_unit * len;
    let grid: Vec<f64> = (0..count)
        .map(|i| -(len as f64) / 2.0 + i as f64 / points_per_unit as f64)
        .collect();
    let mut rho = vec![0.0; count];
    // chunks keep the dense phase matrices small
    for (chunk_idx, chunk) in grid.chunks(1024).enumerate() {
        let t = block.transforms(chunk, false);
        for r in 0..chunk.len() {
            let mut acc = 0.0;
            for c in 0..t.re.ncols() {
                acc += t.re[(r, c)].powi(2) + t.im[(r, c)].powi(2);
            }
            rho[chunk_idx * 1024 + r] = acc * block.weight;
        }
    }
    let maxima = local_maxima_1d(&rho);
    Ok(PsdProfile { len, grid, rho, maxima })
}
