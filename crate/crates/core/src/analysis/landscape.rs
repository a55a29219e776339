use serde::{Deserialize, Serialize};

use crate::analysis::extrema::local_minima_2d;
use crate::error::{invalid, Result};
use crate::fourier::{gram_kernel, GramMatrix, Signal};
use crate::objective::{evaluate_parts, ObjectiveSpec};
use crate::reconstruct::ReconstructorKind;

pub const DEFAULT_LANDSCAPE_RES: usize = 256;

/// Quantity scanned over two-point schemes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    /// The full objective with the reconstructor of the [`ObjectiveSpec`].
    J,
    /// `½⟨(L − Id)û, û⟩`, back-projection only.
    G1,
    /// `½⟨(Id − L⁺)û, û⟩`, pseudo-inverse only.
    G2,
    /// `−½‖û(Ξ)‖²`.
    NegF,
}

impl Term {
    pub fn check(&self, kind: ReconstructorKind) -> Result<()> {
        match (self, kind) {
            (Term::G1, ReconstructorKind::BackProjection) | (Term::G2, ReconstructorKind::PseudoInverse) => Ok(()),
            (Term::G1, _) => Err(invalid("G1 needs the back-projection reconstructor")),
            (Term::G2, _) => Err(invalid("G2 needs the pseudo-inverse reconstructor")),
            _ => Ok(()),
        }
    }
}

/// Values over the uniform grid `ξ_i = −N/2 + i·N/res` on both axes.
#[derive(Clone, Debug)]
pub struct LandscapeGrid {
    pub len: usize,
    pub res: usize,
    /// Row-major: `values[i * res + j]` is the value at `(ξ_i, ξ_j)`.
    pub values: Vec<f64>,
    /// Grid indices `(i, j)` of local minima.
    pub minima: Vec<(usize, usize)>,
}

impl LandscapeGrid {
    pub fn coord(&self, i: usize) -> f64 {
        grid_coord(self.len, self.res, i)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.res + j]
    }

    pub fn minima_coords(&self) -> Vec<[f64; 2]> {
        self.minima.iter().map(|&(i, j)| [self.coord(i), self.coord(j)]).collect()
    }

    /// Largest `|v(i, j) − v(j, i)|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.res {
            for j in 0..i {
                worst = worst.max((self.value(i, j) - self.value(j, i)).abs());
            }
        }
        worst
    }
}

fn grid_coord(len: usize, res: usize, i: usize) -> f64 {
    -(len as f64) / 2.0 + i as f64 * len as f64 / res as f64
}

/// Scans `term` over all two-point schemes on a `res × res` grid.
pub fn scan_landscape(spec: &ObjectiveSpec, term: Term, res: usize) -> Result<LandscapeGrid> {
    if res < 8 {
        return Err(invalid(format!("landscape resolution must be at least 8 (got {res})")));
    }
    term.check(spec.kind())?;
    let len = spec.len();
    let xs: Vec<f64> = (0..res).map(|i| grid_coord(len, res, i)).collect();
    let transforms: Vec<Vec<_>> = spec
        .signals()
        .iter()
        .map(|u| xs.iter().map(|&x| u.transform(x)).collect())
        .collect();
    let norms: Vec<f64> = spec.signals().iter().map(Signal::norm_sq).collect();
    // L_{12} only depends on the index difference modulo res
    let kernel: Vec<_> = (0..res).map(|d| gram_kernel(d as f64 * len as f64 / res as f64, len)).collect();
    let mut values = vec![0.0; res * res];
    for i in 0..res {
        for j in i..res {
            let l12 = kernel[(i + res - j) % res];
            let gram = GramMatrix::from_matrix(nalgebra::DMatrix::from_row_slice(
                2,
                2,
                &[num_complex::Complex64::new(1.0, 0.0), l12, l12.conj(), num_complex::Complex64::new(1.0, 0.0)],
            ));
            let uhats: Vec<Vec<_>> = transforms.iter().map(|t| vec![t[i], t[j]]).collect();
            let p = evaluate_parts(spec.kind(), spec.sigma(), &norms, &uhats, &gram)?;
            let v = match term {
                Term::J => p.value,
                Term::G1 => p.g1,
                Term::G2 => p.g_q,
                Term::NegF => -p.f,
            };
            values[i * res + j] = v;
            values[j * res + i] = v;
        }
    }
    let minima = local_minima_2d(&values, res);
    Ok(LandscapeGrid { len, res, values, minima })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::SamplingScheme;
    use crate::objective::{eval_j, eval_terms};
    use crate::signals::{gen_cosine, gen_low_sine};

    fn even(x: f64) -> bool {
        (x / 2.0).fract() == 0.0
    }

    #[test]
    fn cosine_neg_f_minima_sit_on_even_pairs() {
        let spec = ObjectiveSpec::single(ReconstructorKind::BackProjection, 0.0, gen_cosine(16).unwrap()).unwrap();
        let grid = scan_landscape(&spec, Term::NegF, 64).unwrap();
        assert!(!grid.minima.is_empty());
        for [a, b] in grid.minima_coords() {
            assert!(even(a) && even(b), "({a}, {b})");
        }
    }

    #[test]
    fn grid_values_match_direct_evaluation() {
        let u = gen_low_sine(16, 1).unwrap();
        for kind in [
            ReconstructorKind::BackProjection,
            ReconstructorKind::PseudoInverse,
            ReconstructorKind::tikhonov(0.1).unwrap(),
        ] {
            let spec = ObjectiveSpec::single(kind, 0.2, u.clone()).unwrap();
            let grid = scan_landscape(&spec, Term::J, 16).unwrap();
            for (i, j) in [(0, 3), (5, 2), (7, 11), (15, 0)] {
                let s = SamplingScheme::new(vec![grid.coord(i), grid.coord(j)]).unwrap();
                let direct = eval_j(&spec, &s).unwrap().value;
                assert!((grid.value(i, j) - direct).abs() < 1e-12);
                // the swapped scheme evaluated independently
                let swapped = SamplingScheme::new(vec![grid.coord(j), grid.coord(i)]).unwrap();
                assert!((grid.value(i, j) - eval_j(&spec, &swapped).unwrap().value).abs() < 1e-10);
            }
            assert!(grid.max_asymmetry() < 1e-10);
        }
        let spec = ObjectiveSpec::single(ReconstructorKind::PseudoInverse, 0.0, u).unwrap();
        let grid = scan_landscape(&spec, Term::G2, 16).unwrap();
        let s = SamplingScheme::new(vec![grid.coord(3), grid.coord(9)]).unwrap();
        assert!((grid.value(3, 9) - eval_terms(&spec, &s).unwrap().g).abs() < 1e-12);
    }

    #[test]
    fn incompatible_terms_are_rejected() {
        let u = gen_cosine(16).unwrap();
        let pi = ObjectiveSpec::single(ReconstructorKind::PseudoInverse, 0.0, u.clone()).unwrap();
        assert!(scan_landscape(&pi, Term::G1, 16).is_err());
        let bp = ObjectiveSpec::single(ReconstructorKind::BackProjection, 0.0, u).unwrap();
        assert!(scan_landscape(&bp, Term::G2, 16).is_err());
        assert!(scan_landscape(&bp, Term::J, 4).is_err());
    }

    #[test]
    fn low_sine_has_fewer_minima_than_cosine() {
        let count = |u| {
            let spec = ObjectiveSpec::single(ReconstructorKind::BackProjection, 0.0, u).unwrap();
            scan_landscape(&spec, Term::NegF, 64).unwrap().minima.len()
        };
        assert!(count(gen_low_sine(16, 1).unwrap()) < count(gen_cosine(16).unwrap()));
    }
}
