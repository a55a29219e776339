//! Landscape scans, spectral-density profiles and spurious-minimizer certificates.

mod certificate;
mod extrema;
mod landscape;
mod psd;

pub use certificate::{
    certify_spurious, corollary_count, corollary_grid, deviation_constants, fit_curvature, Certificate,
    CorollaryCount, DeviationConstants, COROLLARY_CURVATURE, COROLLARY_RADIUS,
};
pub use extrema::{local_maxima_1d, local_minima_2d};
pub use landscape::{scan_landscape, LandscapeGrid, Term, DEFAULT_LANDSCAPE_RES};
pub use psd::{psd, PsdProfile, DEFAULT_PSD_POINTS};
