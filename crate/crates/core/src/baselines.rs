//! LASSO and elastic-net comparison estimators by cyclic coordinate descent,
//! with seeded k-fold cross-validation, plus k-fold tuning of plain ridge.
//!
//! Objective: `(1/2n)‖y − Xb‖² + λ‖b‖₁ + (λ₂/2)‖b‖²`. Columns are used as
//! given, without standardization or intercept.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_len, Error, Result};
use crate::linalg::{axpy, cholesky_solve, dot, factorize, DesignMatrix, Matrix};
use crate::ridge::fit_ridge;
use crate::rng::{Purpose, Stream};

pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_FOLDS: usize = 5;

/// Cycles with an unchanged support and sign pattern before the exact
/// solve on that support is attempted.
const STABLE_CYCLES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyConfig {
    pub lambda: f64,
    pub lambda2: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl PenaltyConfig {
    pub fn lasso(lambda: f64) -> Self {
        Self::enet(lambda, 0.0)
    }

    pub fn enet(lambda: f64, lambda2: f64) -> Self {
        Self {
            lambda,
            lambda2,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Parameter("lambda must be nonnegative".into()));
        }
        if !(self.lambda2 >= 0.0 && self.lambda2.is_finite()) {
            return Err(Error::Parameter("lambda2 must be nonnegative".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Parameter("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedFit {
    pub coef: Vec<f64>,
    pub converged: bool,
    /// Coordinate cycles performed (full sweeps and active-set sweeps).
    pub cycles: usize,
    /// Objective after every cycle, when requested.
    pub objective_trace: Option<Vec<f64>>,
}

/// Column-major view of a design with cached squared column norms over `n`.
#[derive(Debug, Clone)]
pub struct CdProblem {
    cols: Matrix,
    col_sq: Vec<f64>,
    n: usize,
}

impl CdProblem {
    pub fn new(x: &DesignMatrix) -> Self {
        let cols = x.matrix().transpose();
        let n = x.n();
        let col_sq = (0..cols.nrows())
            .map(|j| dot(cols.row(j), cols.row(j)) / n as f64)
            .collect();
        Self { cols, col_sq, n }
    }

    fn from_rows(x: &Matrix) -> Self {
        let cols = x.transpose();
        let n = x.nrows();
        let col_sq = (0..cols.nrows())
            .map(|j| dot(cols.row(j), cols.row(j)) / n as f64)
            .collect();
        Self { cols, col_sq, n }
    }

    pub fn p(&self) -> usize {
        self.cols.nrows()
    }

    /// `max_j |x_j′y|/n`, the smallest `λ` with an all-zero LASSO solution.
    pub fn lambda_max(&self, y: &[f64]) -> f64 {
        (0..self.p())
            .map(|j| dot(self.cols.row(j), y).abs() / self.n as f64)
            .fold(0.0, f64::max)
    }

    pub fn objective(&self, y: &[f64], b: &[f64], cfg: &PenaltyConfig) -> f64 {
        let r = self.residual(y, b);
        objective_from_residual(&r, b, cfg, self.n)
    }

    fn residual(&self, y: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r = y.to_vec();
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0.0 {
                axpy(-bj, self.cols.row(j), &mut r);
            }
        }
        r
    }

    /// Largest violation of the optimality conditions at `b`:
    /// `|g_j| ≤ λ` where `b_j = 0`, `g_j = λ·sign(b_j)` otherwise, with
    /// `g_j = x_j′(y − Xb)/n − λ₂b_j`.
    pub fn kkt_violation(&self, y: &[f64], b: &[f64], lambda: f64, lambda2: f64) -> f64 {
        let r = self.residual(y, b);
        let mut worst = 0.0_f64;
        for (j, &bj) in b.iter().enumerate() {
            let g = dot(self.cols.row(j), &r) / self.n as f64 - lambda2 * bj;
            let v = if bj == 0.0 {
                (g.abs() - lambda).max(0.0)
            } else {
                (g - lambda * bj.signum()).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Coordinate descent from `start` (zero if `None`).
    pub fn solve(
        &self,
        y: &[f64],
        cfg: &PenaltyConfig,
        start: Option<&[f64]>,
        trace: bool,
    ) -> Result<PenalizedFit> {
        cfg.validate()?;
        ensure_len(self.n, y.len())?;
        let p = self.p();
        let mut b = match start {
            Some(s) => {
                ensure_len(p, s.len())?;
                s.to_vec()
            }
            None => vec![0.0; p],
        };
        let mut r = self.residual(y, &b);
        let nf = self.n as f64;
        let mut objective_trace = trace.then(Vec::new);
        let mut cycles = 0;
        let mut converged = false;
        let mut full = true;
        let mut active: Vec<usize> = Vec::new();
        let mut last_support: Vec<(usize, bool)> = Vec::new();
        let mut stable = 0;

        while cycles < cfg.max_iter {
            cycles += 1;
            let mut max_change = 0.0_f64;
            let visit = |j: usize, b: &mut [f64], r: &mut [f64]| {
                let cj = self.col_sq[j];
                if cj == 0.0 {
                    return 0.0;
                }
                let col = self.cols.row(j);
                let old = b[j];
                let z = dot(col, r) / nf + cj * old;
                let new = soft(z, cfg.lambda) / (cj + cfg.lambda2);
                if new != old {
                    axpy(old - new, col, r);
                    b[j] = new;
                }
                (new - old).abs()
            };
            if full {
                for j in 0..p {
                    max_change = max_change.max(visit(j, &mut b, &mut r));
                }
            } else {
                for &j in &active {
                    max_change = max_change.max(visit(j, &mut b, &mut r));
                }
            }
            if let Some(t) = objective_trace.as_mut() {
                t.push(objective_from_residual(&r, &b, cfg, self.n));
            }
            if max_change < cfg.tol {
                if full {
                    converged = true;
                    break;
                }
                full = true;
                continue;
            }
            let support: Vec<(usize, bool)> =
                (0..p).filter(|&j| b[j] != 0.0).map(|j| (j, b[j] > 0.0)).collect();
            stable = if support == last_support { stable + 1 } else { 0 };
            if stable >= STABLE_CYCLES && !support.is_empty() {
                stable = 0;
                if self.try_support_solve(y, cfg, &support, &mut b, &mut r) {
                    // Confirm with a full sweep.
                    full = true;
                    last_support = support;
                    continue;
                }
            }
            if full {
                active = support.iter().map(|&(j, _)| j).collect();
                full = active.is_empty();
            }
            last_support = support;
        }
        Ok(PenalizedFit {
            coef: b,
            converged,
            cycles,
            objective_trace,
        })
    }
}

impl CdProblem {
    /// With the support and signs fixed, the objective is a smooth quadratic
    /// whose minimizer solves `(X_A′X_A/n + λ₂I)b_A = X_A′y/n − λs_A`. The
    /// solution replaces `b` only if it keeps every sign and lowers the
    /// objective; coordinate descent then resumes from it.
    fn try_support_solve(
        &self,
        y: &[f64],
        cfg: &PenaltyConfig,
        support: &[(usize, bool)],
        b: &mut [f64],
        r: &mut [f64],
    ) -> bool {
        let k = support.len();
        if k > self.n.max(64) && cfg.lambda2 == 0.0 {
            return false;
        }
        let nf = self.n as f64;
        let mut g = Matrix::zeros(k, k);
        let mut rhs = Vec::with_capacity(k);
        for (a, &(ja, sa)) in support.iter().enumerate() {
            let ca = self.cols.row(ja);
            for (c, &(jc, _)) in support.iter().enumerate().take(a + 1) {
                let v = dot(ca, self.cols.row(jc)) / nf;
                g[(a, c)] = v;
                g[(c, a)] = v;
            }
            g[(a, a)] += cfg.lambda2;
            let sign = if sa { 1.0 } else { -1.0 };
            rhs.push(dot(ca, y) / nf - cfg.lambda * sign);
        }
        let Some(sol) = cholesky_solve(&g, &rhs) else {
            return false;
        };
        if support.iter().zip(&sol).any(|(&(_, sa), &v)| if sa { v <= 0.0 } else { v >= 0.0 }) {
            return false;
        }
        let mut trial = b.to_vec();
        for (&(j, _), &v) in support.iter().zip(&sol) {
            trial[j] = v;
        }
        let new_r = self.residual(y, &trial);
        if objective_from_residual(&new_r, &trial, cfg, self.n) <= objective_from_residual(r, b, cfg, self.n) {
            b.copy_from_slice(&trial);
            r.copy_from_slice(&new_r);
            true
        } else {
            false
        }
    }
}

fn objective_from_residual(r: &[f64], b: &[f64], cfg: &PenaltyConfig, n: usize) -> f64 {
    let l1: f64 = b.iter().map(|v| v.abs()).sum();
    let l2: f64 = dot(b, b);
    dot(r, r) / (2.0 * n as f64) + cfg.lambda * l1 + 0.5 * cfg.lambda2 * l2
}

#[inline]
fn soft(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

pub fn fit_lasso(x: &DesignMatrix, y: &[f64], cfg: &PenaltyConfig) -> Result<PenalizedFit> {
    if cfg.lambda2 != 0.0 {
        return Err(Error::Parameter("LASSO requires lambda2 = 0".into()));
    }
    fit_enet(x, y, cfg)
}

pub fn fit_enet(x: &DesignMatrix, y: &[f64], cfg: &PenaltyConfig) -> Result<PenalizedFit> {
    ensure_finite(y, "response")?;
    CdProblem::new(x).solve(y, cfg, None, false)
}

/// `count` log-spaced values from `λ_max` down to `λ_max·ratio`.
pub fn lambda_path(lambda_max: f64, count: usize, ratio: f64) -> Vec<f64> {
    if count == 1 {
        return vec![lambda_max];
    }
    let step = libm::log(ratio) / (count - 1) as f64;
    (0..count)
        .map(|k| lambda_max * libm::exp(step * k as f64))
        .collect()
}

/// Default LASSO/ENET path for `(X, y)`: 50 points down to `λ_max/1000`.
pub fn default_lambda_grid(x: &DesignMatrix, y: &[f64]) -> Result<Vec<f64>> {
    ensure_len(x.n(), y.len())?;
    let lm = CdProblem::new(x).lambda_max(y);
    if !(lm > 0.0) {
        return Err(Error::Input("response is orthogonal to every column".into()));
    }
    Ok(lambda_path(lm, 50, 1e-3))
}

/// Balanced assignment of `n` observations to folds `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub fold_of: Vec<u8>,
    pub seed: u64,
}

impl FoldAssignment {
    pub fn new(n: usize, k: usize, seed: u64) -> Result<Self> {
        if !(2..=255).contains(&k) || n < k {
            return Err(Error::Parameter(alloc::format!(
                "cannot split {n} observations into {k} folds"
            )));
        }
        let mut fold_of: Vec<u8> = (0..n).map(|i| (i % k + 1) as u8).collect();
        Stream::new(seed, Purpose::Folds, 0).shuffle(&mut fold_of);
        Ok(Self { fold_of, seed })
    }

    pub fn folds(&self) -> usize {
        self.fold_of.iter().copied().max().unwrap_or(0) as usize
    }

    /// `(train, test)` row indices for fold `k` (1-based).
    pub fn split(&self, k: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.fold_of.iter().enumerate() {
            if f as usize == k {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }
}

fn sq_error(x_test: &Matrix, y_test: &[f64], b: &[f64]) -> f64 {
    y_test
        .iter()
        .enumerate()
        .map(|(i, yi)| {
            let e = yi - dot(x_test.row(i), b);
            e * e
        })
        .sum()
}

/// Cross-validated penalty choice together with the full error table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KfoldResult {
    pub config: PenaltyConfig,
    /// `cv_error[a][b]` at `(lambda2_grid[a], lambda_grid[b])`: mean held-out
    /// squared error, `None` where some fold failed or did not converge.
    pub cv_error: Vec<Vec<Option<f64>>>,
    pub best_value: f64,
}

/// k-fold tuning over `lambda2_grid × lambda_grid` with folds from `seed`.
pub fn tune_kfold(
    x: &DesignMatrix,
    y: &[f64],
    lambda_grid: &[f64],
    lambda2_grid: &[f64],
    seed: u64,
) -> Result<KfoldResult> {
    let folds = FoldAssignment::new(x.n(), DEFAULT_FOLDS, seed)?;
    tune_kfold_with(x, y, lambda_grid, lambda2_grid, &folds)
}

/// As [`tune_kfold`] with an explicit fold assignment.
pub fn tune_kfold_with(
    x: &DesignMatrix,
    y: &[f64],
    lambda_grid: &[f64],
    lambda2_grid: &[f64],
    folds: &FoldAssignment,
) -> Result<KfoldResult> {
    PenaltyCv::new(x, folds)?.tune(y, lambda_grid, lambda2_grid)
}

/// Per-fold training problems for LASSO/ENET tuning, reusable across
/// responses.
#[derive(Debug, Clone)]
pub struct PenaltyCv {
    n: usize,
    folds: Vec<PenaltyFold>,
}

#[derive(Debug, Clone)]
struct PenaltyFold {
    train_rows: Vec<usize>,
    test_rows: Vec<usize>,
    train: CdProblem,
    x_test: Matrix,
}

impl PenaltyCv {
    pub fn new(x: &DesignMatrix, folds: &FoldAssignment) -> Result<Self> {
        ensure_len(x.n(), folds.fold_of.len())?;
        let folds = (1..=folds.folds())
            .map(|k| {
                let (train_rows, test_rows) = folds.split(k);
                PenaltyFold {
                    train: CdProblem::from_rows(&x.matrix().select_rows(&train_rows)),
                    x_test: x.matrix().select_rows(&test_rows),
                    train_rows,
                    test_rows,
                }
            })
            .collect();
        Ok(Self { n: x.n(), folds })
    }

    /// Mean held-out squared error over `lambda2_grid × lambda_grid`. Within
    /// each fold the `λ` values are visited in descending order with warm
    /// starts. Ties go to the earlier `λ₂`, then the earlier `λ`.
    pub fn tune(&self, y: &[f64], lambda_grid: &[f64], lambda2_grid: &[f64]) -> Result<KfoldResult> {
        if lambda_grid.is_empty() || lambda2_grid.is_empty() {
            return Err(Error::Parameter("tuning grid is empty".into()));
        }
        ensure_len(self.n, y.len())?;
        ensure_finite(y, "response")?;

        let mut order: Vec<usize> = (0..lambda_grid.len()).collect();
        order.sort_by(|&a, &b| lambda_grid[b].total_cmp(&lambda_grid[a]));
        let n = self.n as f64;

        let mut table = Vec::with_capacity(lambda2_grid.len());
        let mut best: Option<(f64, PenaltyConfig)> = None;
        for &l2 in lambda2_grid {
            let mut sums: Vec<Option<f64>> = vec![Some(0.0); lambda_grid.len()];
            for fd in &self.folds {
                let y_train: Vec<f64> = fd.train_rows.iter().map(|&i| y[i]).collect();
                let y_test: Vec<f64> = fd.test_rows.iter().map(|&i| y[i]).collect();
                let mut warm: Option<Vec<f64>> = None;
                // Repeated λ values reuse the previous outcome exactly.
                let mut last: Option<(f64, Option<f64>)> = None;
                for &bi in &order {
                    let lambda = lambda_grid[bi];
                    let outcome = match last {
                        Some((l, e)) if l == lambda => e,
                        _ => {
                            let cfg = PenaltyConfig::enet(lambda, l2);
                            match fd.train.solve(&y_train, &cfg, warm.as_deref(), false) {
                                Ok(fit) if fit.converged => {
                                    let e = sq_error(&fd.x_test, &y_test, &fit.coef);
                                    warm = Some(fit.coef);
                                    Some(e)
                                }
                                _ => None,
                            }
                        }
                    };
                    last = Some((lambda, outcome));
                    match (sums[bi].as_mut(), outcome) {
                        (Some(s), Some(e)) => *s += e,
                        _ => sums[bi] = None,
                    }
                }
            }
            let row: Vec<Option<f64>> = sums.into_iter().map(|s| s.map(|v| v / n)).collect();
            for (bi, v) in row.iter().enumerate() {
                if let Some(v) = *v {
                    if v.is_finite() && best.is_none_or(|(b, _)| v < b) {
                        best = Some((v, PenaltyConfig::enet(lambda_grid[bi], l2)));
                    }
                }
            }
            table.push(row);
        }
        let (best_value, config) = best.ok_or(Error::NoAdmissiblePoint)?;
        Ok(KfoldResult {
            config,
            cv_error: table,
            best_value,
        })
    }
}

/// 50 log-spaced values from `10⁻³·λ_max(X′X)` to `10³·λ_max(X′X)`.
pub fn default_ridge_grid(x: &DesignMatrix) -> Result<Vec<f64>> {
    let f = factorize(x)?;
    let top = f.singular_values()[0];
    let hi = 1e3 * top * top;
    let mut g = lambda_path(hi, 50, 1e-6);
    g.reverse();
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeKfoldResult {
    pub h: f64,
    pub cv_error: Vec<Option<f64>>,
    pub best_value: f64,
}

/// Fold factorizations for k-fold ridge tuning; they depend only on `X`
/// and the fold assignment, so one cache serves every response.
#[derive(Debug, Clone)]
pub struct RidgeCv {
    n: usize,
    folds: Vec<RidgeFold>,
}

#[derive(Debug, Clone)]
struct RidgeFold {
    train: Vec<usize>,
    test: Vec<usize>,
    factorization: Option<crate::linalg::SvdFactorization>,
    x_test: Matrix,
}

impl RidgeCv {
    pub fn new(x: &DesignMatrix, folds: &FoldAssignment) -> Result<Self> {
        ensure_len(x.n(), folds.fold_of.len())?;
        let folds = (1..=folds.folds())
            .map(|k| {
                let (train, test) = folds.split(k);
                let factorization = DesignMatrix::new(x.matrix().select_rows(&train))
                    .and_then(|d| factorize(&d))
                    .ok();
                let x_test = x.matrix().select_rows(&test);
                RidgeFold {
                    train,
                    test,
                    factorization,
                    x_test,
                }
            })
            .collect();
        Ok(Self { n: x.n(), folds })
    }

    /// First minimizer of the mean held-out squared error over `h_grid`.
    pub fn tune(&self, y: &[f64], h_grid: &[f64]) -> Result<RidgeKfoldResult> {
        if h_grid.is_empty() {
            return Err(Error::Parameter("tuning grid is empty".into()));
        }
        ensure_len(self.n, y.len())?;
        ensure_finite(y, "response")?;
        let mut sums: Vec<Option<f64>> = vec![Some(0.0); h_grid.len()];
        for fold in &self.folds {
            let Some(f) = &fold.factorization else {
                sums.iter_mut().for_each(|s| *s = None);
                continue;
            };
            let y_train: Vec<f64> = fold.train.iter().map(|&i| y[i]).collect();
            let y_test: Vec<f64> = fold.test.iter().map(|&i| y[i]).collect();
            for (hi, &h) in h_grid.iter().enumerate() {
                match fit_ridge(f, &y_train, h) {
                    Ok(fit) => {
                        if let Some(s) = sums[hi].as_mut() {
                            *s += sq_error(&fold.x_test, &y_test, &fit.theta_hat);
                        }
                    }
                    Err(_) => sums[hi] = None,
                }
            }
        }
        let n = self.n as f64;
        let cv_error: Vec<Option<f64>> = sums.into_iter().map(|s| s.map(|v| v / n)).collect();
        let mut best: Option<(f64, f64)> = None;
        for (hi, v) in cv_error.iter().enumerate() {
            if let Some(v) = *v {
                if v.is_finite() && best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, h_grid[hi]));
                }
            }
        }
        let (best_value, h) = best.ok_or(Error::NoAdmissiblePoint)?;
        Ok(RidgeKfoldResult {
            h,
            cv_error,
            best_value,
        })
    }
}

/// k-fold choice of the ridge parameter `h`; first minimizer wins.
pub fn tune_ridge_kfold(
    x: &DesignMatrix,
    y: &[f64],
    h_grid: &[f64],
    folds: &FoldAssignment,
) -> Result<RidgeKfoldResult> {
    RidgeCv::new(x, folds)?.tune(y, h_grid)
}
