//! Projection-ridge estimation for high-dimensional linear models with a
//! deterministic design (`p ≫ n`).
//!
//! When `p` exceeds the rank of `X`, only the projection `θ = QQ′β` of the
//! regression vector onto the row space of `X` is identifiable. This crate
//! estimates `θ` by ridge regression computed through the thin SVD, sharpens
//! it by hard thresholding, tunes the threshold and regularization constants
//! with a closed-form leave-one-out criterion, and provides LASSO/elastic-net
//! baselines, seeded study generators, and the per-replication evaluation
//! used by the simulation harness.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod error;
pub mod linalg;
pub mod ridge;
pub mod rng;
pub mod simgen;
pub mod study;
pub mod threshold;
pub mod tuning;

pub use error::{Error, Result};
pub use linalg::{
    factorize, nonidentifiable_pair, project, spectral_diagnostics, DesignMatrix, Matrix,
    ProjectionVector, SpectralDiagnostics, SvdFactorization,
};
pub use ridge::{
    bias_variance_oracle, effective_dof, expected_l2_error, fit_ridge, leverages,
    prediction_mse, variance_along, BiasVarianceOracle, RidgeFit,
};
pub use threshold::{
    apply_threshold, band_factor, fit_thresholded, index_set, regularization_value,
    selection_band_check, sparsity_profile, threshold_value, BandCheck, Regime, ScheduleParams,
    ScheduleWarning, SparsityProfile, ThresholdedFit,
};
pub use tuning::{psi_hat, psi_hat_at, tune, CvResult, TuningGrid};
