//! Data-driven choice of the schedule constants `(C1, C2)` by minimizing the
//! leave-one-out shortcut
//!
//! ```text
//! ψ̂(C) = n⁻¹ Σ_i ((y_i − x_i′θ̃)/(1 − w_i))²,   w_i = x_i′(X′X + h_n I)⁻¹x_i
//! ```
//!
//! For pure ridge (no thresholding) this is exactly the leave-one-out
//! prediction error. With thresholding active it is an approximation, since
//! `θ̃` is not linear in `y`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::linalg::SvdFactorization;
use crate::ridge::fit_ridge;
use crate::threshold::{apply_threshold, regularization_value, threshold_value, Regime, ScheduleParams};

/// Leverages this close to one are treated as degenerate.
pub const LEVERAGE_MARGIN: f64 = 1e-12;

/// `ψ̂` at an explicit threshold `a ≥ 0` and regularization `h > 0`.
pub fn psi_hat_at(f: &SvdFactorization, y: &[f64], a: f64, h: f64) -> Result<f64> {
    ensure_len(f.n(), y.len())?;
    let fit = fit_ridge(f, y, h)?;
    if fit.leverages.iter().any(|&w| w >= 1.0 - LEVERAGE_MARGIN) {
        return Err(Error::DegenerateLeverage);
    }
    let t = apply_threshold(&fit, a)?;
    let fitted = f.design().apply(&t.theta_tilde);
    let n = f.n() as f64;
    let s: f64 = y
        .iter()
        .zip(&fitted)
        .zip(&fit.leverages)
        .map(|((yi, fi), wi)| {
            let r = (yi - fi) / (1.0 - wi);
            r * r
        })
        .sum();
    Ok(s / n)
}

/// `ψ̂(C)` with `a_n` and `h_n` taken from the schedules.
pub fn psi_hat(f: &SvdFactorization, y: &[f64], s: &ScheduleParams) -> Result<f64> {
    let a = threshold_value(f.n(), s)?;
    let h = regularization_value(f.n(), f.p(), s)?;
    psi_hat_at(f, y, a, h)
}

/// Candidate values for `(C1, C2)`; the threshold exponent is held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningGrid {
    pub c1_values: Vec<f64>,
    pub c2_values: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub regime: Regime,
}

fn default_alpha() -> f64 {
    0.5
}

impl TuningGrid {
    /// `C1 ∈ σ̂_y·{2⁻⁸, …, 2⁻¹, 1}`, `C2 ∈ {10⁻⁴, …, 10²}`, `α = 1/2`,
    /// with `σ̂_y` the sample standard deviation of `y`.
    pub fn default_for(y: &[f64]) -> Self {
        let sd = sample_sd(y);
        let scale = if sd > 0.0 { sd } else { 1.0 };
        let c1_values = (0..=8).rev().map(|k| scale / (1u32 << k) as f64).collect();
        let c2_values = (-4..=2).map(|e| libm::pow(10.0, e as f64)).collect();
        Self {
            c1_values,
            c2_values,
            alpha: default_alpha(),
            regime: Regime::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, vals) in [("c1_values", &self.c1_values), ("c2_values", &self.c2_values)] {
            if vals.is_empty() {
                return Err(Error::Parameter(alloc::format!("{name} is empty")));
            }
            if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::Parameter(alloc::format!(
                    "{name} must be positive and finite"
                )));
            }
            if vals.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Parameter(alloc::format!("{name} must be ascending")));
            }
        }
        Ok(())
    }

    pub fn schedule(&self, c1: f64, c2: f64) -> ScheduleParams {
        ScheduleParams {
            c1,
            alpha: self.alpha,
            c2,
            regime: self.regime,
        }
    }
}

pub(crate) fn sample_sd(y: &[f64]) -> f64 {
    let n = y.len();
    if n < 2 {
        return 0.0;
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let ss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    libm::sqrt(ss / (n - 1) as f64)
}

/// Outcome of a grid search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_c1: f64,
    pub best_c2: f64,
    /// `psi_hat[i][j]` at `(c1_values[i], c2_values[j])`; `None` where the
    /// point was inadmissible.
    pub psi_hat: Vec<Vec<Option<f64>>>,
    pub best_value: f64,
    pub alpha: f64,
    pub regime: Regime,
}

impl CvResult {
    pub fn best_schedule(&self) -> ScheduleParams {
        ScheduleParams {
            c1: self.best_c1,
            alpha: self.alpha,
            c2: self.best_c2,
            regime: self.regime,
        }
    }
}

/// Evaluates `ψ̂` over the whole grid and returns the minimizer. Ties go to
/// the smallest `c1`, then the smallest `c2`.
pub fn tune(f: &SvdFactorization, y: &[f64], grid: &TuningGrid) -> Result<CvResult> {
    grid.validate()?;
    ensure_len(f.n(), y.len())?;
    ensure_finite(y, "response")?;

    let mut table = Vec::with_capacity(grid.c1_values.len());
    let mut best: Option<(f64, f64, f64)> = None;
    for &c1 in &grid.c1_values {
        let mut row = Vec::with_capacity(grid.c2_values.len());
        for &c2 in &grid.c2_values {
            let v = psi_hat(f, y, &grid.schedule(c1, c2)).ok().filter(|v| v.is_finite());
            if let Some(v) = v {
                if best.map_or(true, |(b, _, _)| v < b) {
                    best = Some((v, c1, c2));
                }
            }
            row.push(v);
        }
        table.push(row);
    }
    let (best_value, best_c1, best_c2) = best.ok_or(Error::NoAdmissiblePoint)?;
    Ok(CvResult {
        best_c1,
        best_c2,
        psi_hat: table,
        best_value,
        alpha: grid.alpha,
        regime: grid.regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use crate::linalg::{factorize, DesignMatrix, Matrix};
    use alloc::vec;

    fn small_design() -> SvdFactorization {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| {
                (0..40)
                    .map(|j| libm::sin((i * 41 + j * 17) as f64 * 0.37) + if j == i { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        factorize(&DesignMatrix::new(Matrix::from_rows(&rows).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn identity_design_recovers_response() {
        let f = factorize(&DesignMatrix::new(Matrix::identity(3)).unwrap()).unwrap();
        let y = [1.0, 2.0, 3.0];
        let h = 1e-9;
        let fit = fit_ridge(&f, &y, h).unwrap();
        // residual_i = y_i·h/(1+h), 1 − w_i = h/(1+h): ratio is exactly y_i.
        let v = psi_hat_at(&f, &y, 0.0, h).unwrap();
        assert!((v - (1.0 + 4.0 + 9.0) / 3.0).abs() < 1e-6);
        assert!(fit.leverages.iter().all(|&w| w < 1.0));
    }

    #[test]
    fn zero_residual_gives_zero() {
        let f = small_design();
        let y = vec![0.0; 20];
        assert_eq!(psi_hat_at(&f, &y, 0.1, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_leverage_rejected() {
        let f = factorize(&DesignMatrix::new(Matrix::identity(3)).unwrap()).unwrap();
        let err = psi_hat_at(&f, &[1.0, 2.0, 3.0], 0.0, 1e-14).unwrap_err();
        assert_eq!(err.to_string(), "degenerate leverage; increase regularization");
    }

    #[test]
    fn singleton_grid() {
        let f = small_design();
        let y: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).cos() * 3.0).collect();
        let grid = TuningGrid {
            c1_values: vec![0.5],
            c2_values: vec![0.1],
            alpha: 0.5,
            regime: Regime::Gaussian,
        };
        let cv = tune(&f, &y, &grid).unwrap();
        assert_eq!((cv.best_c1, cv.best_c2), (0.5, 0.1));
        let direct = psi_hat(&f, &y, &grid.schedule(0.5, 0.1)).unwrap();
        assert_eq!(cv.best_value, direct);
    }

    #[test]
    fn duplicate_points_keep_first() {
        let f = small_design();
        let y: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin() * 2.0).collect();
        let grid = TuningGrid {
            c1_values: vec![0.3, 0.3],
            c2_values: vec![1.0, 1.0],
            alpha: 0.5,
            regime: Regime::Gaussian,
        };
        let cv = tune(&f, &y, &grid).unwrap();
        assert_eq!(cv.psi_hat[0][0], cv.psi_hat[1][1]);
        assert_eq!(cv.best_value, cv.psi_hat[0][0].unwrap());
    }

    #[test]
    fn invalid_grids() {
        let f = small_design();
        let y = vec![1.0; 20];
        let mut grid = TuningGrid::default_for(&y);
        grid.c1_values.clear();
        assert!(matches!(tune(&f, &y, &grid), Err(Error::Parameter(_))));
        let mut grid = TuningGrid::default_for(&y);
        grid.c2_values = vec![2.0, 1.0];
        assert!(matches!(tune(&f, &y, &grid), Err(Error::Parameter(_))));
    }

    #[test]
    fn default_grid_shape() {
        let y = [1.0, 3.0];
        let g = TuningGrid::default_for(&y);
        let sd = sample_sd(&y);
        assert!((sd - core::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!(g.c1_values.len(), 9);
        assert_eq!(*g.c1_values.last().unwrap(), sd);
        assert_eq!(g.c1_values[0], sd / 256.0);
        assert_eq!(g.c2_values.len(), 7);
        assert!(g.validate().is_ok());
    }
}
