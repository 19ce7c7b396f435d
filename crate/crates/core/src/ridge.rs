//! Ridge estimator of the projection vector, computed in the dual (`n × n`)
//! form through the cached SVD, plus the closed-form bias, variance and
//! expected-error expressions used as oracles.
//!
//! With `X = PDQ′`, `(X′X + hI_p)⁻¹X′y = X′(XX′ + hI_n)⁻¹y = Q·D(D² + hI)⁻¹·P′y`,
//! so no `p × p` matrix is ever formed and every fit lies in the row space.

use alloc::vec::Vec;

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::linalg::{norm2, ProjectionVector, SvdFactorization};

/// A fitted ridge estimate `θ̂` together with its regularization and the
/// diagonal of the ridge hat matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub theta_hat: Vec<f64>,
    pub h: f64,
    /// `w_i = x_i′(X′X + hI)⁻¹x_i`.
    pub leverages: Vec<f64>,
}

fn check_h(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveRegularization)
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter("noise standard deviation must be nonnegative".into()))
    }
}

pub fn fit_ridge(f: &SvdFactorization, y: &[f64], h: f64) -> Result<RidgeFit> {
    check_h(h)?;
    ensure_len(f.n(), y.len())?;
    ensure_finite(y, "response")?;

    let d = f.singular_values();
    let py = f.p_tr(y);
    let coef: Vec<f64> = d
        .iter()
        .zip(&py)
        .map(|(&dj, &c)| dj / (dj * dj + h) * c)
        .collect();
    let theta_hat = f.q_apply(&coef);
    Ok(RidgeFit {
        theta_hat,
        h,
        leverages: leverages(f, h),
    })
}

/// Ridge hat-matrix diagonal, `w_i = Σ_j d_j²/(d_j² + h)·P_ij²`.
pub fn leverages(f: &SvdFactorization, h: f64) -> Vec<f64> {
    let shrink: Vec<f64> = f
        .singular_values()
        .iter()
        .map(|&d| d * d / (d * d + h))
        .collect();
    let pm = f.left();
    (0..f.n())
        .map(|i| {
            pm.row(i)
                .iter()
                .zip(&shrink)
                .map(|(&pij, &s)| s * pij * pij)
                .sum()
        })
        .collect()
}

/// Effective degrees of freedom `Σ_j d_j²/(d_j² + h)`, the trace of the hat matrix.
pub fn effective_dof(f: &SvdFactorization, h: f64) -> f64 {
    f.singular_values()
        .iter()
        .map(|&d| d * d / (d * d + h))
        .sum()
}

/// Closed-form bias of `θ̂` and the scalar variance bound `σ²/h`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasVarianceOracle {
    /// `−Q(h⁻¹D² + I)⁻¹Q′θ`.
    pub bias: Vec<f64>,
    /// `σ²/h`, an upper bound on `l′var(θ̂)l` for unit `l`.
    pub var_bound: f64,
}

fn row_space_coords(f: &SvdFactorization, theta: &ProjectionVector) -> Result<Vec<f64>> {
    ensure_len(f.p(), theta.len())?;
    let residual = f.row_space_residual(theta.as_slice());
    if residual > 1e-9 * norm2(theta.as_slice()).max(1.0) {
        return Err(Error::NotInRowSpace { residual });
    }
    Ok(f.q_tr(theta.as_slice()))
}

pub fn bias_variance_oracle(
    f: &SvdFactorization,
    theta: &ProjectionVector,
    h: f64,
    sigma: f64,
) -> Result<BiasVarianceOracle> {
    check_h(h)?;
    check_sigma(sigma)?;
    let c = row_space_coords(f, theta)?;
    let scaled: Vec<f64> = f
        .singular_values()
        .iter()
        .zip(&c)
        .map(|(&d, &cj)| -h / (d * d + h) * cj)
        .collect();
    Ok(BiasVarianceOracle {
        bias: f.q_apply(&scaled),
        var_bound: sigma * sigma / h,
    })
}

/// `l′var(θ̂)l = σ²Σ_j d_j²/(d_j² + h)²·(Q′l)_j²`.
pub fn variance_along(f: &SvdFactorization, l: &[f64], h: f64, sigma: f64) -> Result<f64> {
    check_h(h)?;
    check_sigma(sigma)?;
    ensure_len(f.p(), l.len())?;
    let ql = f.q_tr(l);
    let s: f64 = f
        .singular_values()
        .iter()
        .zip(&ql)
        .map(|(&d, &c)| {
            let g = d / (d * d + h);
            g * g * c * c
        })
        .sum();
    Ok(sigma * sigma * s)
}

/// Exact finite-sample `n⁻¹E‖Xθ̂ − Xθ‖²`:
/// `n⁻¹(σ²Σ_j d_j⁴/(d_j² + h)² + ‖X·bias‖²)`, evaluated in the spectral basis.
pub fn expected_l2_error(
    f: &SvdFactorization,
    theta: &ProjectionVector,
    h: f64,
    sigma: f64,
) -> Result<f64> {
    check_h(h)?;
    check_sigma(sigma)?;
    let c = row_space_coords(f, theta)?;
    let mut trace = 0.0;
    let mut bias_sq = 0.0;
    for (&d, &cj) in f.singular_values().iter().zip(&c) {
        let d2 = d * d;
        let s = d2 / (d2 + h);
        trace += s * s;
        let b = d * h / (d2 + h) * cj;
        bias_sq += b * b;
    }
    Ok((sigma * sigma * trace + bias_sq) / f.n() as f64)
}

/// Average prediction mean squared error `σ² + n⁻¹E‖Xθ̂ − Xθ‖²`.
pub fn prediction_mse(
    f: &SvdFactorization,
    theta: &ProjectionVector,
    h: f64,
    sigma: f64,
) -> Result<f64> {
    Ok(sigma * sigma + expected_l2_error(f, theta, h, sigma)?)
}
