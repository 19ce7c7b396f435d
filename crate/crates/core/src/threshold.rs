//! Hard-thresholded ridge estimator, the `a_n`/`h_n` schedules, index sets
//! `M_{ξ,c} = { j : |ξ_j| > c }`, and the sparsity quantities that govern
//! when thresholding recovers the large components of `θ`.
//!
//! Logarithms are natural. The schedules need `log log n > 1`, so `n ≥ 16`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::linalg::SvdFactorization;
use crate::ridge::{fit_ridge, RidgeFit};

/// Smallest sample size for which the schedules are defined.
pub const MIN_SCHEDULE_N: usize = 16;

/// Noise assumption selecting the regularization schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Regime {
    /// Normal errors; `h_n = C2·a_n⁻²·(log log n)³·log(n ∨ p)`.
    #[default]
    Gaussian,
    /// Errors with a finite even moment of order `k` and `p = O(n^l)`;
    /// `h_n = C2·a_n⁻²·(log log n)²·(n ∨ p)^{2ξ/(3l)}`, `ξ = 3l(t+1)/k`.
    Moment { l: f64, k: u64, t: f64 },
}

/// Constants of the threshold and regularization schedules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    pub c1: f64,
    pub alpha: f64,
    pub c2: f64,
    #[serde(default)]
    pub regime: Regime,
}

/// Non-fatal findings from [`ScheduleParams::validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleWarning {
    /// `ξ = 3l(t+1)/k ≥ 1`: the moment order is too small for the requested rate.
    MomentOrderTooSmall { xi: f64 },
}

impl ScheduleParams {
    pub fn gaussian(c1: f64, alpha: f64, c2: f64) -> Self {
        Self {
            c1,
            alpha,
            c2,
            regime: Regime::Gaussian,
        }
    }

    pub fn validate(&self) -> Result<Vec<ScheduleWarning>> {
        if !(self.alpha > 0.0 && self.alpha <= 0.5) {
            return Err(Error::Parameter(alloc::format!(
                "threshold exponent alpha must lie in (0, 1/2], got {}",
                self.alpha
            )));
        }
        if !(self.c1 > 0.0 && self.c1.is_finite()) {
            return Err(Error::Parameter("C1 must be positive".into()));
        }
        if !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(Error::Parameter("C2 must be positive".into()));
        }
        let mut warnings = Vec::new();
        if let Regime::Moment { l, k, t } = self.regime {
            if !(l >= 1.0 && l.is_finite()) {
                return Err(Error::Parameter("dimension exponent l must be ≥ 1".into()));
            }
            if k == 0 || k % 2 != 0 {
                return Err(Error::Parameter("moment order k must be even and positive".into()));
            }
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Parameter("rate exponent t must be positive".into()));
            }
            let xi = moment_xi(l, k, t);
            if xi >= 1.0 {
                warnings.push(ScheduleWarning::MomentOrderTooSmall { xi });
            }
        }
        Ok(warnings)
    }
}

fn moment_xi(l: f64, k: u64, t: f64) -> f64 {
    3.0 * l * (t + 1.0) / k as f64
}

fn log_log(n: usize) -> Result<f64> {
    if n < MIN_SCHEDULE_N {
        return Err(Error::ScheduleUndefined);
    }
    Ok(libm::log(libm::log(n as f64)))
}

/// `a_n = C1·n^{−α}`.
pub fn threshold_value(n: usize, s: &ScheduleParams) -> Result<f64> {
    s.validate()?;
    if n == 0 {
        return Err(Error::Parameter("n must be positive".into()));
    }
    Ok(s.c1 * libm::pow(n as f64, -s.alpha))
}

/// Regularization `h_n` for the selected regime.
pub fn regularization_value(n: usize, p: usize, s: &ScheduleParams) -> Result<f64> {
    let a = threshold_value(n, s)?;
    let ll = log_log(n)?;
    let np = n.max(p) as f64;
    let h = match s.regime {
        Regime::Gaussian => s.c2 / (a * a) * ll * ll * ll * libm::log(np),
        Regime::Moment { l, k, t } => {
            let xi = moment_xi(l, k, t);
            s.c2 / (a * a) * ll * ll * libm::pow(np, 2.0 * xi / (3.0 * l))
        }
    };
    Ok(h)
}

/// `u_n = 1 + 1/log log n`.
pub fn band_factor(n: usize) -> Result<f64> {
    Ok(1.0 + 1.0 / log_log(n)?)
}

/// `M_{ξ,c}`: zero-based indices with `|ξ_j| > c`, ascending.
pub fn index_set(xi: &[f64], c: f64) -> Vec<usize> {
    xi.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > c)
        .map(|(j, _)| j)
        .collect()
}

/// `θ̃` with the selection it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdedFit {
    pub theta_tilde: Vec<f64>,
    /// Zero-based indices kept, ascending.
    pub selected: Vec<usize>,
    pub a_n: f64,
    pub h_n: f64,
    pub base: RidgeFit,
}

/// Keeps `θ̂_j` when `|θ̂_j| > a`, zeroes it otherwise (ties are zeroed).
/// `a = 0` keeps every nonzero component.
pub fn apply_threshold(fit: &RidgeFit, a: f64) -> Result<ThresholdedFit> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Parameter("threshold must be nonnegative".into()));
    }
    let selected = index_set(&fit.theta_hat, a);
    let mut theta_tilde = alloc::vec![0.0; fit.theta_hat.len()];
    for &j in &selected {
        theta_tilde[j] = fit.theta_hat[j];
    }
    Ok(ThresholdedFit {
        theta_tilde,
        selected,
        a_n: a,
        h_n: fit.h,
        base: fit.clone(),
    })
}

/// Ridge fit at the scheduled `h_n`, thresholded at the scheduled `a_n`.
pub fn fit_thresholded(
    f: &SvdFactorization,
    y: &[f64],
    s: &ScheduleParams,
) -> Result<ThresholdedFit> {
    let a = threshold_value(f.n(), s)?;
    let h = regularization_value(f.n(), f.p(), s)?;
    apply_threshold(&fit_ridge(f, y, h)?, a)
}

/// Counts and small-component mass of `θ` around the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityProfile {
    /// `|M_{θ,a}|`.
    pub q_n: usize,
    /// `|M_{θ,a·u}|`.
    pub q_minus: usize,
    /// `|M_{θ,a/u}|`.
    pub q_plus: usize,
    /// `Σ_{|θ_j| ≤ a} |θ_j|`.
    pub v_n: f64,
    pub u_n: f64,
    pub a_n: f64,
}

pub fn sparsity_profile(theta: &[f64], n: usize, a: f64) -> Result<SparsityProfile> {
    let u = band_factor(n)?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Parameter("threshold must be positive".into()));
    }
    let count = |c: f64| theta.iter().filter(|t| t.abs() > c).count();
    let v_n = theta.iter().map(|t| t.abs()).filter(|&t| t <= a).sum();
    Ok(SparsityProfile {
        q_n: count(a),
        q_minus: count(a * u),
        q_plus: count(a / u),
        v_n,
        u_n: u,
        a_n: a,
    })
}

/// Outcome of testing `M_{θ,a·u} ⊆ selected ⊆ M_{θ,a/u}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
}

impl BandCheck {
    pub fn holds(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

pub fn selection_band_check(
    theta: &[f64],
    tfit: &ThresholdedFit,
    profile: &SparsityProfile,
) -> Result<BandCheck> {
    ensure_len(theta.len(), tfit.theta_tilde.len())?;
    let a = tfit.a_n;
    let u = profile.u_n;
    let lower = index_set(theta, a * u);
    let upper = index_set(theta, a / u);
    Ok(BandCheck {
        lower_ok: is_subset(&lower, &tfit.selected),
        upper_ok: is_subset(&tfit.selected, &upper),
    })
}

/// Both inputs sorted ascending.
pub(crate) fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn fit_of(theta_hat: Vec<f64>) -> RidgeFit {
        RidgeFit {
            leverages: vec![0.0; 1],
            theta_hat,
            h: 1.0,
        }
    }

    #[test]
    fn threshold_direct_values() {
        let s = ScheduleParams::gaussian(1.0, 0.5, 1.0);
        assert!((threshold_value(100, &s).unwrap() - 0.1).abs() < 1e-15);
        let s = ScheduleParams::gaussian(2.0, 0.5, 1.0);
        assert_eq!(threshold_value(4, &s).unwrap(), 1.0);
    }

    #[test]
    fn alpha_domain() {
        for alpha in [0.0, -0.1, 0.51, f64::NAN] {
            let s = ScheduleParams::gaussian(1.0, alpha, 1.0);
            assert!(matches!(threshold_value(100, &s), Err(Error::Parameter(_))));
        }
        let s = ScheduleParams::gaussian(1.0, 0.5, 1.0);
        assert!(threshold_value(100, &s).is_ok());
    }

    #[test]
    fn tiny_n_schedule_error() {
        let s = ScheduleParams::gaussian(1.0, 0.5, 1.0);
        let err = regularization_value(15, 100, &s).unwrap_err();
        assert_eq!(err.to_string(), "schedule undefined for tiny n; supply h explicitly");
        assert!(regularization_value(16, 100, &s).is_ok());
        assert!(band_factor(16).unwrap() < 2.0 && band_factor(16).unwrap() > 1.0);
    }

    #[test]
    fn gaussian_schedule_formula() {
        let s = ScheduleParams::gaussian(1.0, 0.5, 1.0);
        let h = regularization_value(100, 500, &s).unwrap();
        // a_n = 0.1, so C2·a⁻² = 100.
        let ll = (100f64).ln().ln();
        let expect = 100.0 * ll.powi(3) * (500f64).ln();
        assert!((h - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn c2_is_linear() {
        let s1 = ScheduleParams::gaussian(0.7, 0.3, 1.3);
        let s2 = ScheduleParams { c2: 2.6, ..s1 };
        for (n, p) in [(20, 10), (100, 5000)] {
            let h1 = regularization_value(n, p, &s1).unwrap();
            let h2 = regularization_value(n, p, &s2).unwrap();
            assert_eq!(h2, 2.0 * h1);
        }
    }

    #[test]
    fn moment_schedule_zero_exponent_limit() {
        // Huge even k drives ξ and the dimension factor's exponent to zero.
        let s = ScheduleParams {
            c1: 1.0,
            alpha: 0.5,
            c2: 3.0,
            regime: Regime::Moment {
                l: 1.0,
                k: 1 << 60,
                t: 1.0,
            },
        };
        let h = regularization_value(400, 10_000, &s).unwrap();
        let ll = (400f64).ln().ln();
        let expect = 3.0 * 400.0 * ll * ll;
        assert!((h - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn moment_validation() {
        let mk = |l, k, t| ScheduleParams {
            c1: 1.0,
            alpha: 0.5,
            c2: 1.0,
            regime: Regime::Moment { l, k, t },
        };
        assert!(mk(1.0, 3, 1.0).validate().is_err());
        assert!(mk(0.5, 4, 1.0).validate().is_err());
        assert_eq!(
            mk(1.0, 4, 1.0).validate().unwrap(),
            vec![ScheduleWarning::MomentOrderTooSmall { xi: 1.5 }]
        );
        assert!(mk(1.0, 12, 1.0).validate().unwrap().is_empty());
    }

    #[test]
    fn hard_threshold_componentwise() {
        let t = apply_threshold(&fit_of(vec![0.5, 0.05, -0.3]), 0.1).unwrap();
        assert_eq!(t.theta_tilde, vec![0.5, 0.0, -0.3]);
        assert_eq!(t.selected, vec![0, 2]);
    }

    #[test]
    fn tie_is_zeroed() {
        let t = apply_threshold(&fit_of(vec![0.25, -0.25, 0.3]), 0.25).unwrap();
        assert_eq!(t.theta_tilde, vec![0.0, 0.0, 0.3]);
        assert_eq!(t.selected, vec![2]);
    }

    #[test]
    fn total_shrinkage() {
        let t = apply_threshold(&fit_of(vec![0.25, -0.5, 0.3]), 0.6).unwrap();
        assert!(t.theta_tilde.iter().all(|&v| v == 0.0));
        assert!(t.selected.is_empty());
    }

    #[test]
    fn index_sets() {
        assert_eq!(index_set(&[2.0, -1.0, 0.5], 1.0), vec![0]);
        assert_eq!(index_set(&[2.0, -1.0, 0.5], 0.0), vec![0, 1, 2]);
        assert!(index_set(&[0.0; 4], 0.0).is_empty());
        assert!(index_set(&[0.0; 4], 3.0).is_empty());
    }

    #[test]
    fn sparsity_counts() {
        let p = sparsity_profile(&[1.0, 0.01, 0.02], 1_000_000, 0.1).unwrap();
        assert_eq!((p.q_minus, p.q_n, p.q_plus), (1, 1, 1));
        assert!((p.v_n - 0.03).abs() < 1e-15);

        let p = sparsity_profile(&[1.0, -2.0, 3.0], 100, 0.1).unwrap();
        assert_eq!((p.q_minus, p.q_n, p.q_plus), (3, 3, 3));
        assert_eq!(p.v_n, 0.0);

        assert_eq!(
            sparsity_profile(&[1.0], 10, 0.1).unwrap_err(),
            Error::ScheduleUndefined
        );
    }

    #[test]
    fn band_check_definitions() {
        let theta = vec![1.0, 0.5, 0.001, -0.8];
        let n = 100;
        let a = 0.2;
        let prof = sparsity_profile(&theta, n, a).unwrap();

        let exact = apply_threshold(&fit_of(theta.clone()), a).unwrap();
        let ok = selection_band_check(&theta, &exact, &prof).unwrap();
        assert!(ok.lower_ok && ok.upper_ok);

        // Drop index 0, which is well above a·u.
        let mut missing = exact.clone();
        missing.selected.retain(|&j| j != 0);
        missing.theta_tilde[0] = 0.0;
        let bad = selection_band_check(&theta, &missing, &prof).unwrap();
        assert!(!bad.lower_ok && bad.upper_ok);

        // Select index 2, which is far below a/u.
        let mut extra = exact;
        extra.selected = vec![0, 1, 2, 3];
        let bad = selection_band_check(&theta, &extra, &prof).unwrap();
        assert!(bad.lower_ok && !bad.upper_ok);
    }

    #[test]
    fn subset_on_sorted_indices() {
        assert!(is_subset(&[], &[1, 2]));
        assert!(is_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_subset(&[1, 4], &[0, 1, 2, 3]));
        assert!(!is_subset(&[0], &[]));
    }
}
