//! Optimization of non-Cartesian Fourier sampling schemes for 1D discrete
//! signals reconstructed by a linear operator.
//!
//! The crate covers the nonuniform Fourier operators ([`fourier`]), the linear
//! reconstructors ([`reconstruct`]), the reconstruction-error objectives and
//! their gradients ([`objective`], [`batch`]), landscape and certificate
//! analysis ([`analysis`]), first-order and quasi-Newton optimizers
//! ([`optimize`]), signal generators ([`signals`]) and the experiment drivers
//! ([`experiments`]).

pub mod analysis;
pub mod batch;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod linalg;
pub mod objective;
pub mod optimize;
pub mod reconstruct;
pub mod signals;

pub use num_complex::Complex64;

pub use analysis::{
    certify_spurious, corollary_count, deviation_constants, psd, scan_landscape, Certificate,
    CorollaryCount, DeviationConstants, LandscapeGrid, PsdProfile, Term,
};
pub use batch::BatchJ1;
pub use error::{Error, Result};
pub use fourier::{
    gram_closed_form, gram_partial, min_distance, nuft_adjoint, nuft_forward, torus_dist,
    GramMatrix, NuftMatrix, SamplingScheme, Signal,
};
pub use objective::{
    eval_j, eval_terms, grad_fd, grad_j1, residual, vanishing_gradient_bound, ObjectiveEval,
    ObjectiveSpec, Residual, Terms,
};
pub use optimize::{
    evaluate_scheme, run_gd, run_lbfgs, run_sgd, run_var_metric, Method, MetricInterp,
    OptimizerConfig, Trajectory,
};
pub use reconstruct::{q_factor, reconstruct, rr_factor, QFactor, ReconstructorKind};
