//! Per-replication evaluation of the four estimators, report assembly, the
//! cumulative-proportion curve of `θ`, and the scaling scenarios used to
//! check error rates in `n`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    default_lambda_grid, default_ridge_grid, CdProblem, FoldAssignment, PenaltyConfig, PenaltyCv,
    RidgeCv, DEFAULT_FOLDS,
};
use crate::error::{Error, Result};
use crate::linalg::{factorize, norm2, project, spectral_diagnostics, DesignMatrix, Matrix, ProjectionVector, SpectralDiagnostics, SvdFactorization};
use crate::ridge::{expected_l2_error, fit_ridge};
use crate::rng::{Purpose, Stream};
use crate::simgen::{gen_response, GeneratedInstance, StudyConfig};
use crate::threshold::{
    fit_thresholded, regularization_value, selection_band_check, sparsity_profile, threshold_value,
    BandCheck, ScheduleParams,
};
use crate::tuning::{tune, TuningGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ThresholdedRidge,
    Lasso,
    Enet,
    Ridge,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ThresholdedRidge, Method::Lasso, Method::Enet, Method::Ridge];

    pub fn all_vec() -> Vec<Method> {
        Self::ALL.to_vec()
    }

    pub fn key(self) -> &'static str {
        match self {
            Method::ThresholdedRidge => "thresholded_ridge",
            Method::Lasso => "lasso",
            Method::Enet => "enet",
            Method::Ridge => "ridge",
        }
    }

    /// Column heading in the summary table.
    pub fn heading(self) -> &'static str {
        match self {
            Method::ThresholdedRidge => "Thres. Ridge",
            Method::Lasso => "LASSO",
            Method::Enet => "ENET",
            Method::Ridge => "Ridge",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.key() == s)
    }
}

/// Tuned constants recorded with each replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tuned {
    Schedule { c1: f64, c2: f64, alpha: f64, a_n: f64, h_n: f64 },
    Ridge { h: f64 },
    Penalty { lambda: f64, lambda2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub replication: usize,
    pub method: Method,
    /// `n⁻¹‖Xβ − Xϑ̂‖²`; absent when the cell failed.
    pub l2_error: Option<f64>,
    pub failure: Option<String>,
    pub tuned: Option<Tuned>,
    /// Thresholded ridge only.
    pub selected_count: Option<usize>,
    pub band_check: Option<BandCheck>,
    /// LASSO/ENET only: largest optimality-condition violation of the final fit.
    pub kkt_violation: Option<f64>,
    pub converged: Option<bool>,
}

impl ReplicationResult {
    fn failed(replication: usize, method: Method, e: &Error) -> Self {
        Self {
            replication,
            method,
            l2_error: None,
            failure: Some(e.to_string()),
            tuned: None,
            selected_count: None,
            band_check: None,
            kkt_violation: None,
            converged: None,
        }
    }

    fn ok(replication: usize, method: Method, l2_error: f64, tuned: Tuned) -> Self {
        Self {
            replication,
            method,
            l2_error: Some(l2_error),
            failure: None,
            tuned: Some(tuned),
            selected_count: None,
            band_check: None,
            kkt_violation: None,
            converged: None,
        }
    }
}

/// `n⁻¹‖Xβ − Xb‖²` with `Xβ` precomputed.
pub fn l2_error(x: &DesignMatrix, xbeta: &[f64], b: &[f64]) -> f64 {
    let xb = x.apply(b);
    let s: f64 = xbeta.iter().zip(&xb).map(|(u, v)| (u - v) * (u - v)).sum();
    s / x.n() as f64
}

/// Everything about a study that does not change between replications.
pub struct StudyContext {
    pub cfg: StudyConfig,
    pub instance: GeneratedInstance,
    pub folds: FoldAssignment,
    xbeta: Vec<f64>,
    full: CdProblem,
    penalty_cv: PenaltyCv,
    ridge_cv: RidgeCv,
    ridge_grid: Vec<f64>,
}

impl StudyContext {
    pub fn new(cfg: StudyConfig, instance: GeneratedInstance) -> Result<Self> {
        let x = instance.design();
        let folds = FoldAssignment::new(x.n(), DEFAULT_FOLDS, cfg.master_seed)?;
        let xbeta = x.apply(&instance.beta);
        let full = CdProblem::new(x);
        let penalty_cv = PenaltyCv::new(x, &folds)?;
        let ridge_cv = RidgeCv::new(x, &folds)?;
        let ridge_grid = default_ridge_grid(x)?;
        Ok(Self {
            cfg,
            instance,
            folds,
            xbeta,
            full,
            penalty_cv,
            ridge_cv,
            ridge_grid,
        })
    }

    /// Results for every configured method, in configuration order.
    pub fn run_replication(&self, rep: usize) -> Vec<ReplicationResult> {
        let y = match gen_response(&self.instance, self.cfg.master_seed, rep as u64) {
            Ok(y) => y,
            Err(e) => {
                return self
                    .cfg
                    .methods
                    .iter()
                    .map(|&m| ReplicationResult::failed(rep, m, &e))
                    .collect()
            }
        };
        self.cfg
            .methods
            .iter()
            .map(|&m| self.evaluate(rep, m, &y).unwrap_or_else(|e| ReplicationResult::failed(rep, m, &e)))
            .collect()
    }

    pub fn evaluate(&self, rep: usize, method: Method, y: &[f64]) -> Result<ReplicationResult> {
        let f = &self.instance.factorization;
        let x = self.instance.design();
        match method {
            Method::ThresholdedRidge => {
                let grid = match &self.cfg.grid {
                    Some(g) => g.clone(),
                    None => TuningGrid::default_for(y),
                };
                let cv = tune(f, y, &grid)?;
                let s = cv.best_schedule();
                let t = fit_thresholded(f, y, &s)?;
                let err = l2_error(x, &self.xbeta, &t.theta_tilde);
                let profile = sparsity_profile(self.instance.theta.as_slice(), f.n(), t.a_n).ok();
                let band = match profile {
                    Some(p) => Some(selection_band_check(self.instance.theta.as_slice(), &t, &p)?),
                    None => None,
                };
                let mut r = ReplicationResult::ok(
                    rep,
                    method,
                    err,
                    Tuned::Schedule {
                        c1: s.c1,
                        c2: s.c2,
                        alpha: s.alpha,
                        a_n: t.a_n,
                        h_n: t.h_n,
                    },
                );
                r.selected_count = Some(t.selected.len());
                r.band_check = band;
                Ok(r)
            }
            Method::Ridge => {
                let cv = self.ridge_cv.tune(y, &self.ridge_grid)?;
                let fit = fit_ridge(f, y, cv.h)?;
                let err = l2_error(x, &self.xbeta, &fit.theta_hat);
                Ok(ReplicationResult::ok(rep, method, err, Tuned::Ridge { h: cv.h }))
            }
            Method::Lasso | Method::Enet => {
                let lambdas = default_lambda_grid(x, y)?;
                let l2_grid: &[f64] = if method == Method::Lasso { &[0.0] } else { &self.cfg.enet_lambda2_grid };
                let cv = self.penalty_cv.tune(y, &lambdas, l2_grid)?;
                let cfg = PenaltyConfig::enet(cv.config.lambda, cv.config.lambda2);
                let fit = self.full.solve(y, &cfg, None, false)?;
                let err = l2_error(x, &self.xbeta, &fit.coef);
                let mut r = ReplicationResult::ok(
                    rep,
                    method,
                    err,
                    Tuned::Penalty {
                        lambda: cfg.lambda,
                        lambda2: cfg.lambda2,
                    },
                );
                r.kkt_violation = Some(self.full.kkt_violation(y, &fit.coef, cfg.lambda, cfg.lambda2));
                r.converged = Some(fit.converged);
                Ok(r)
            }
        }
    }
}

/// `Σ_{j≤k} θ²_(j)/‖θ‖²` for `k = 1..p`, components sorted by decreasing `|θ_j|`.
pub fn cumulative_proportion(theta: &[f64]) -> Result<Vec<f64>> {
    let mut sq: Vec<f64> = theta.iter().map(|t| t * t).collect();
    let total: f64 = sq.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::UndefinedProportion);
    }
    sq.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut out: Vec<f64> = sq
        .iter()
        .map(|v| {
            acc += v;
            acc / total
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Mean of the successful replications.
    pub mean_l2_error: Option<f64>,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub config: StudyConfig,
    pub design_note: Option<String>,
    pub max_clip: Option<f64>,
    pub diagnostics: SpectralDiagnostics,
    pub theta_norm: f64,
    pub beta_norm: f64,
    pub summaries: Vec<MethodSummary>,
    /// Ordered by replication, then method in configuration order.
    pub results: Vec<ReplicationResult>,
    pub cumulative_proportion: Vec<f64>,
}

impl StudyReport {
    pub fn assemble(ctx: &StudyContext, results: Vec<ReplicationResult>) -> Self {
        let inst = &ctx.instance;
        let summaries = ctx
            .cfg
            .methods
            .iter()
            .map(|&m| {
                let errs: Vec<f64> = results
                    .iter()
                    .filter(|r| r.method == m)
                    .filter_map(|r| r.l2_error)
                    .collect();
                let total = results.iter().filter(|r| r.method == m).count();
                MethodSummary {
                    method: m,
                    mean_l2_error: (!errs.is_empty()).then(|| errs.iter().sum::<f64>() / errs.len() as f64),
                    successes: errs.len(),
                    failures: total - errs.len(),
                }
            })
            .collect();
        Self {
            config: ctx.cfg.clone(),
            design_note: ctx.cfg.design_note().map(String::from),
            max_clip: inst.max_clip,
            diagnostics: spectral_diagnostics(&inst.factorization),
            theta_norm: norm2(inst.theta.as_slice()),
            beta_norm: norm2(&inst.beta),
            summaries,
            results,
            cumulative_proportion: cumulative_proportion(inst.theta.as_slice()).unwrap_or_default(),
        }
    }

    pub fn mean(&self, m: Method) -> Option<f64> {
        self.summaries.iter().find(|s| s.method == m).and_then(|s| s.mean_l2_error)
    }

    pub fn errors(&self, m: Method) -> Vec<f64> {
        self.results.iter().filter(|r| r.method == m).filter_map(|r| r.l2_error).collect()
    }
}

/// Least-squares slope of `log y` on `log x` with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub slope: f64,
    pub std_error: f64,
}

pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<Slope> {
    if x.len() != y.len() {
        return Err(Error::Dimension { expected: x.len(), got: y.len() });
    }
    if x.len() < 4 {
        return Err(Error::Input("slope fit needs at least 4 points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Input("slope fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| libm::log(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| libm::log(*v)).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| {
            let e = b - my - slope * (a - mx);
            e * e
        })
        .sum();
    Ok(Slope {
        slope,
        std_error: libm::sqrt(rss / (m - 2.0) / sxx),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateClaim {
    /// Plain ridge expected error, exact formula.
    T1ii,
    /// Thresholded ridge against plain ridge at the same `h_n`.
    T3,
}

impl RateClaim {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "t1ii" => Some(Self::T1ii),
            "t3" => Some(Self::T3),
            _ => None,
        }
    }
}

/// Design `√n·[I_n | 0]` with `p = 2n` and `θ` holding `q` entries equal to
/// `value` in the leading coordinates. Rank grows like `n` and the number of
/// large components stays fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateScenario {
    pub name: String,
    pub claim: RateClaim,
    pub n_values: Vec<usize>,
    pub q: usize,
    pub value: f64,
    pub sigma: f64,
    /// Schedule giving `a_n` and `h_n`; for T1ii only `fixed_h` is used.
    pub schedule: ScheduleParams,
    pub fixed_h: Option<f64>,
    pub replications: usize,
    /// Predicted slope for ridge (T1ii) or required gap between the
    /// thresholded and ridge slopes (T3).
    pub target: f64,
    pub tolerance: f64,
}

impl RateScenario {
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "orthogonal-flat" => Some(Self {
                name: name.into(),
                claim: RateClaim::T1ii,
                n_values: vec![100, 200, 400, 800],
                q: 5,
                value: 2.0,
                sigma: 1.0,
                schedule: ScheduleParams::gaussian(1.0, 0.1, 0.01),
                fixed_h: Some(1.0),
                replications: 0,
                target: 0.0,
                tolerance: 0.1,
            }),
            "orthogonal-sparse" => Some(Self {
                name: name.into(),
                claim: RateClaim::T3,
                n_values: vec![100, 200, 400, 800],
                q: 5,
                value: 2.0,
                sigma: 1.0,
                schedule: ScheduleParams::gaussian(1.0, 0.1, 0.01),
                fixed_h: None,
                replications: 500,
                target: 0.3,
                tolerance: 0.0,
            }),
            _ => None,
        }
    }

    pub fn names() -> &'static [&'static str] {
        &["orthogonal-flat", "orthogonal-sparse"]
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_values.len() < 4 || self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Input("n_values must be ascending with at least 4 entries".into()));
        }
        if self.q == 0 || self.value == 0.0 {
            return Err(Error::Input("degenerate scenario: theta is zero".into()));
        }
        if self.n_values[0] < self.q {
            return Err(Error::Input("n must exceed the number of large components".into()));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Input("sigma must be positive".into()));
        }
        if self.claim == RateClaim::T3 && self.replications == 0 {
            return Err(Error::Input("Monte-Carlo scenario needs replications".into()));
        }
        self.schedule.validate()?;
        Ok(())
    }
}

pub fn orthogonal_design(n: usize) -> Result<DesignMatrix> {
    let mut m = Matrix::zeros(n, 2 * n);
    let s = libm::sqrt(n as f64);
    for i in 0..n {
        m[(i, i)] = s;
    }
    DesignMatrix::new(m)
}

/// One sample size of a [`RateScenario`].
pub struct RateContext {
    pub n: usize,
    pub h: f64,
    pub a: f64,
    pub sigma: f64,
    pub factorization: SvdFactorization,
    pub theta: ProjectionVector,
    xtheta: Vec<f64>,
}

impl RateContext {
    pub fn new(sc: &RateScenario, n: usize) -> Result<Self> {
        let x = orthogonal_design(n)?;
        let f = factorize(&x)?;
        let mut beta = vec![0.0; 2 * n];
        for b in beta.iter_mut().take(sc.q) {
            *b = sc.value;
        }
        let theta = project(&beta, &f)?;
        let a = threshold_value(n, &sc.schedule)?;
        let h = match sc.fixed_h {
            Some(h) => h,
            None => regularization_value(n, 2 * n, &sc.schedule)?,
        };
        let xtheta = x.apply(theta.as_slice());
        Ok(Self {
            n,
            h,
            a,
            sigma: sc.sigma,
            factorization: f,
            theta,
            xtheta,
        })
    }

    pub fn ridge_expected(&self) -> Result<f64> {
        expected_l2_error(&self.factorization, &self.theta, self.h, self.sigma)
    }

    /// Realized `n⁻¹‖Xθ̃ − Xθ‖²` of the thresholded fit for replication `rep`.
    pub fn thresholded_error(&self, seed: u64, rep: u64) -> Result<f64> {
        let index = ((self.n as u64) << 32) | rep;
        let mut s = Stream::new(seed, Purpose::RateCheck, index);
        let y: Vec<f64> = self.xtheta.iter().map(|m| m + self.sigma * s.standard_normal()).collect();
        let fit = fit_ridge(&self.factorization, &y, self.h)?;
        let t = crate::threshold::apply_threshold(&fit, self.a)?;
        Ok(l2_error(self.factorization.design(), &self.xtheta, &t.theta_tilde))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCheckReport {
    pub scenario: RateScenario,
    pub seed: u64,
    pub n_values: Vec<usize>,
    pub h_values: Vec<f64>,
    pub ridge_errors: Vec<f64>,
    pub ridge_slope: Slope,
    pub thresholded_errors: Option<Vec<f64>>,
    /// Monte-Carlo standard errors of the thresholded means.
    pub thresholded_std_errors: Option<Vec<f64>>,
    pub thresholded_slope: Option<Slope>,
    pub prediction: String,
    pub consistent: bool,
}

/// Builds the report from per-`n` ridge errors and, for T3, the Monte-Carlo
/// samples of the thresholded error.
pub fn assemble_rate_report(
    sc: &RateScenario,
    seed: u64,
    h_values: Vec<f64>,
    ridge_errors: Vec<f64>,
    thresholded_samples: Option<Vec<Vec<f64>>>,
) -> Result<RateCheckReport> {
    let ns: Vec<f64> = sc.n_values.iter().map(|&n| n as f64).collect();
    let ridge_slope = loglog_slope(&ns, &ridge_errors)?;
    let (thr, thr_se) = match &thresholded_samples {
        Some(samples) => {
            let mut means = Vec::new();
            let mut ses = Vec::new();
            for v in samples {
                let (m, se) = mean_and_se(v)?;
                means.push(m);
                ses.push(se);
            }
            (Some(means), Some(ses))
        }
        None => (None, None),
    };
    let thresholded_slope = match &thr {
        Some(m) => Some(loglog_slope(&ns, m)?),
        None => None,
    };
    let (prediction, consistent) = match sc.claim {
        RateClaim::T1ii => (
            alloc::format!("ridge slope {} ± {}", sc.target, sc.tolerance),
            (ridge_slope.slope - sc.target).abs() <= sc.tolerance,
        ),
        RateClaim::T3 => {
            let ts = thresholded_slope.ok_or(Error::Input("T3 needs Monte-Carlo samples".into()))?;
            (
                alloc::format!("thresholded slope ≤ ridge slope − {}", sc.target),
                ts.slope <= ridge_slope.slope - sc.target,
            )
        }
    };
    Ok(RateCheckReport {
        scenario: sc.clone(),
        seed,
        n_values: sc.n_values.clone(),
        h_values,
        ridge_errors,
        ridge_slope,
        thresholded_errors: thr,
        thresholded_std_errors: thr_se,
        thresholded_slope,
        prediction,
        consistent,
    })
}

pub fn mean_and_se(v: &[f64]) -> Result<(f64, f64)> {
    if v.len() < 2 {
        return Err(Error::Input("need at least two samples".into()));
    }
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    Ok((mean, libm::sqrt(var / m)))
}

/// Design for the selection-band experiment: `q` rows `c·e_j` on the first
/// `q` columns, the remaining rows Gaussian on the other columns. `θ` is
/// `value` on the first `q` coordinates and a small row-space vector of
/// sup-norm `small` elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandScenario {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub scale: f64,
    pub value: f64,
    /// Sup-norm of the small part as a fraction of `a_n/u_n`.
    pub small_fraction: f64,
    pub sigma: f64,
    pub schedule: ScheduleParams,
    pub replications: usize,
    pub seed: u64,
}

impl BandScenario {
    pub fn preset() -> Self {
        Self {
            n: 200,
            p: 1000,
            q: 10,
            scale: libm::sqrt(200.0),
            value: 2.0,
            small_fraction: 0.25,
            sigma: 1.0,
            schedule: ScheduleParams::gaussian(1.0, 0.1, 0.01),
            replications: 200,
            seed: 7,
        }
    }
}

pub struct BandContext {
    pub scenario: BandScenario,
    pub factorization: SvdFactorization,
    pub theta: ProjectionVector,
    pub a: f64,
    pub u: f64,
    xtheta: Vec<f64>,
}

impl BandContext {
    pub fn new(sc: &BandScenario) -> Result<Self> {
        let (n, p, q) = (sc.n, sc.p, sc.q);
        if q >= n || q >= p {
            return Err(Error::Input("q must be below n and p".into()));
        }
        let mut m = Matrix::zeros(n, p);
        for j in 0..q {
            m[(j, j)] = sc.scale;
        }
        let mut s = Stream::new(sc.seed, Purpose::Design, 0);
        for i in q..n {
            for j in q..p {
                m[(i, j)] = s.standard_normal();
            }
        }
        let x = DesignMatrix::new(m)?;
        let f = factorize(&x)?;
        let a = threshold_value(n, &sc.schedule)?;
        let u = crate::threshold::band_factor(n)?;

        // Small part: W′v for a random v, scaled to the requested sup-norm.
        let v: Vec<f64> = (0..n).map(|i| if i < q { 0.0 } else { s.standard_normal() }).collect();
        let mut small = x.matrix().tr_matvec(&v);
        let sup = small.iter().fold(0.0_f64, |acc, t| acc.max(t.abs()));
        let target = sc.small_fraction * a / u;
        for t in &mut small {
            *t *= target / sup;
        }
        for t in small.iter_mut().take(q) {
            *t = sc.value;
        }
        let theta = project(&small, &f)?;
        let xtheta = x.apply(theta.as_slice());
        Ok(Self {
            scenario: sc.clone(),
            factorization: f,
            theta,
            a,
            u,
            xtheta,
        })
    }

    pub fn h(&self) -> Result<f64> {
        regularization_value(self.scenario.n, self.scenario.p, &self.scenario.schedule)
    }

    /// Whether the band inclusion holds for replication `rep`.
    pub fn replicate(&self, rep: u64) -> Result<BandCheck> {
        let mut s = Stream::new(self.scenario.seed, Purpose::Noise, rep);
        let y: Vec<f64> = self
            .xtheta
            .iter()
            .map(|m| m + self.scenario.sigma * s.standard_normal())
            .collect();
        let t = fit_thresholded(&self.factorization, &y, &self.scenario.schedule)?;
        let profile = sparsity_profile(self.theta.as_slice(), self.scenario.n, t.a_n)?;
        selection_band_check(self.theta.as_slice(), &t, &profile)
    }

    /// `min |θ_j|` over `M_{θ,a/u}` and `max |θ_j|` outside it.
    pub fn separation(&self) -> (f64, f64) {
        let c = self.a / self.u;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for t in self.theta.as_slice() {
            if t.abs() > c {
                lo = lo.min(t.abs());
            } else {
                hi = hi.max(t.abs());
            }
        }
        (lo, hi)
    }
}
