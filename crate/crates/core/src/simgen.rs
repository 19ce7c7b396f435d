//! Seeded generators for the simulation designs, regression vectors and noise.
//!
//! Every draw comes from a [`Stream`] keyed by the study's master seed, so an
//! instance is a pure function of its [`StudyConfig`].

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{factorize, project, symmetric_eigen, DesignMatrix, Matrix, ProjectionVector, SvdFactorization};
use crate::rng::{Purpose, Stream};
use crate::study::Method;
use crate::tuning::TuningGrid;

/// Rows i.i.d. `N(0, (1−ρ)I + ρJ)` via `x = √ρ·z₀·1 + √(1−ρ)·z`.
pub fn gen_equicorrelated(n: usize, p: usize, rho: f64, seed: u64) -> Result<DesignMatrix> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Parameter("rho must lie in [0, 1)".into()));
    }
    let mut s = Stream::new(seed, Purpose::Design, 0);
    let a = libm::sqrt(rho);
    let b = libm::sqrt(1.0 - rho);
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let common = a * s.standard_normal();
        for _ in 0..p {
            data.push(common + b * s.standard_normal());
        }
    }
    DesignMatrix::new(Matrix::new(n, p, data)?)
}

/// `Σ_kl = base^|k−l|` for `|k−l| ≤ band`, zero beyond.
pub fn banded_covariance(p: usize, base: f64, band: usize) -> Matrix {
    let mut m = Matrix::zeros(p, p);
    for k in 0..p {
        for l in k.saturating_sub(band)..(k + band + 1).min(p) {
            m[(k, l)] = libm::pow(base, k.abs_diff(l) as f64);
        }
    }
    m
}

/// A banded-Gaussian design and the largest negative eigenvalue of `Σ` that
/// was clipped to zero (0 when `Σ` is positive semidefinite).
#[derive(Debug, Clone)]
pub struct BandedDesign {
    pub design: DesignMatrix,
    pub max_clip: f64,
}

/// Rows i.i.d. `N(0, Σ)` for the banded `Σ`, using the symmetric square root
/// of `Σ` with negative eigenvalues clipped at zero.
pub fn gen_banded(n: usize, p: usize, base: f64, band: usize, seed: u64) -> Result<BandedDesign> {
    if !(base.abs() < 1.0) {
        return Err(Error::Parameter("|base| must be below 1".into()));
    }
    let sigma = banded_covariance(p, base, band);
    let eig = symmetric_eigen(&sigma)?;
    let mut max_clip = 0.0_f64;
    let roots: Vec<f64> = eig
        .values
        .iter()
        .map(|&l| {
            if l < 0.0 {
                max_clip = max_clip.max(-l);
                0.0
            } else {
                libm::sqrt(l)
            }
        })
        .collect();
    // S = V·diag(√λ)·V′, assembled row by row.
    let v = &eig.vectors;
    let mut vs = v.clone();
    for k in 0..p {
        for (j, r) in vs.row_mut(k).iter_mut().zip(&roots) {
            *j *= r;
        }
    }
    let root = vs.matmul(&v.transpose());

    let mut s = Stream::new(seed, Purpose::Design, 0);
    let mut data = Vec::with_capacity(n * p);
    for _ in 0..n {
        let z = s.normal_vec(p, 1.0);
        data.extend(root.matvec(&z));
    }
    Ok(BandedDesign {
        design: DesignMatrix::new(Matrix::new(n, p, data)?)?,
        max_clip,
    })
}

/// Each column an independent uniform permutation of `{6i/n − 3 : i = 1..n}`.
pub fn gen_latin_hypercube(n: usize, p: usize, seed: u64) -> Result<DesignMatrix> {
    if n < 2 {
        return Err(Error::Parameter("Latin hypercube needs n ≥ 2".into()));
    }
    let levels: Vec<f64> = (1..=n).map(|i| 6.0 * (i as f64 / n as f64) - 3.0).collect();
    let mut s = Stream::new(seed, Purpose::Design, 0);
    let mut m = Matrix::zeros(n, p);
    let mut col = levels.clone();
    for j in 0..p {
        col.copy_from_slice(&levels);
        s.shuffle(&mut col);
        for (i, &v) in col.iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    DesignMatrix::new(m)
}

/// One nonzero of `β`; `index` is 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaEntry {
    pub index: usize,
    pub value: f64,
}

pub fn make_beta(p: usize, spec: &[BetaEntry]) -> Result<Vec<f64>> {
    let mut beta = vec![0.0; p];
    let mut seen = vec![false; p];
    for e in spec {
        if e.index == 0 || e.index > p {
            return Err(Error::Input(alloc::format!(
                "beta index {} outside 1..={p}",
                e.index
            )));
        }
        if seen[e.index - 1] {
            return Err(Error::Input(alloc::format!("duplicate beta index {}", e.index)));
        }
        if !e.value.is_finite() {
            return Err(Error::Input(alloc::format!("beta value at {} is not finite", e.index)));
        }
        seen[e.index - 1] = true;
        beta[e.index - 1] = e.value;
    }
    Ok(beta)
}

/// i.i.d. `N(0, σ²)` noise for replication `rep`.
pub fn gen_noise(n: usize, sigma: f64, master_seed: u64, rep: u64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter("sigma must be positive".into()));
    }
    Ok(Stream::new(master_seed, Purpose::Noise, rep).normal_vec(n, sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StudyKind {
    I,
    II,
    III,
    IV,
    #[serde(rename = "custom")]
    Custom,
}

impl StudyKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "I" | "i" | "1" => Some(Self::I),
            "II" | "ii" | "2" => Some(Self::II),
            "III" | "iii" | "3" => Some(Self::III),
            "IV" | "iv" | "4" => Some(Self::IV),
            "custom" => Some(Self::Custom),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::I => "I",
            Self::II => "II",
            Self::III => "III",
            Self::IV => "IV",
            Self::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignSource {
    Equicorrelated { rho: f64 },
    Banded { base: f64, band: usize },
    LatinHypercube,
    /// Latin hypercube standing in for a nearly orthogonal design that was
    /// not supplied.
    NolhSubstitute,
    /// CSV file, read by the caller.
    File { path: String },
}

fn default_lambda2_grid() -> Vec<f64> {
    vec![0.01, 0.1, 1.0, 10.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub study: StudyKind,
    pub n: usize,
    pub p: usize,
    pub sigma: f64,
    pub beta_spec: Vec<BetaEntry>,
    pub design_source: DesignSource,
    pub master_seed: u64,
    pub replications: usize,
    #[serde(default = "Method::all_vec")]
    pub methods: Vec<Method>,
    /// Grid for the thresholded ridge; derived from each response when absent.
    #[serde(default)]
    pub grid: Option<TuningGrid>,
    #[serde(default = "default_lambda2_grid")]
    pub enet_lambda2_grid: Vec<f64>,
}

pub const DEFAULT_MASTER_SEED: u64 = 20_110_601;

impl StudyConfig {
    /// Preset for one of the four studies at the given size.
    pub fn preset(study: StudyKind, n: usize, p: usize) -> Result<Self> {
        let first_twenty: Vec<BetaEntry> = (1..=20)
            .map(|j| BetaEntry {
                index: j,
                value: 1.0 + 0.1 * j as f64,
            })
            .collect();
        let (sigma, beta_spec, design_source) = match study {
            StudyKind::I => (10.0, first_twenty, DesignSource::Equicorrelated { rho: 0.75 }),
            // Noise level and β are carried over from study I.
            StudyKind::II => (10.0, first_twenty, DesignSource::Banded { base: 0.5, band: 10 }),
            StudyKind::III => {
                let beta = (1..=15)
                    .map(|j| BetaEntry {
                        index: j,
                        value: 0.2 * j as f64,
                    })
                    .collect();
                (8.0, beta, DesignSource::NolhSubstitute)
            }
            StudyKind::IV => (10.0, first_twenty, DesignSource::LatinHypercube),
            StudyKind::Custom => {
                return Err(Error::Parameter("custom studies need an explicit config".into()))
            }
        };
        let cfg = Self {
            study,
            n,
            p,
            sigma,
            beta_spec,
            design_source,
            master_seed: DEFAULT_MASTER_SEED,
            replications: 100,
            methods: Method::all_vec(),
            grid: None,
            enet_lambda2_grid: default_lambda2_grid(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::Input("n and p must be positive".into()));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Input("sigma must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::Input("replications must be positive".into()));
        }
        if self.enet_lambda2_grid.is_empty()
            || self.enet_lambda2_grid.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(Error::Input("enet_lambda2_grid must hold nonnegative values".into()));
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        make_beta(self.p, &self.beta_spec)?;
        Ok(())
    }

    /// Text attached to reports when the design is a stand-in.
    pub fn design_note(&self) -> Option<&'static str> {
        match self.design_source {
            DesignSource::NolhSubstitute => {
                Some("nearly orthogonal Latin hypercube not supplied; random Latin hypercube used")
            }
            _ => None,
        }
    }
}

/// Design, true vectors and noise level shared by all replications.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub factorization: SvdFactorization,
    pub beta: Vec<f64>,
    pub theta: ProjectionVector,
    pub sigma: f64,
    /// Largest clipped covariance eigenvalue magnitude (banded designs only).
    pub max_clip: Option<f64>,
}

impl GeneratedInstance {
    pub fn design(&self) -> &DesignMatrix {
        self.factorization.design()
    }
}

/// Generates the design named by `cfg.design_source`. File sources must be
/// loaded by the caller and passed to [`build_instance`].
pub fn generate_design(cfg: &StudyConfig) -> Result<(DesignMatrix, Option<f64>)> {
    let seed = cfg.master_seed;
    match &cfg.design_source {
        DesignSource::Equicorrelated { rho } => Ok((gen_equicorrelated(cfg.n, cfg.p, *rho, seed)?, None)),
        DesignSource::Banded { base, band } => {
            let b = gen_banded(cfg.n, cfg.p, *base, *band, seed)?;
            Ok((b.design, Some(b.max_clip)))
        }
        DesignSource::LatinHypercube | DesignSource::NolhSubstitute => {
            Ok((gen_latin_hypercube(cfg.n, cfg.p, seed)?, None))
        }
        DesignSource::File { path } => Err(Error::Input(alloc::format!(
            "design file {path} must be loaded before generation"
        ))),
    }
}

pub fn build_instance(cfg: &StudyConfig, design: DesignMatrix, max_clip: Option<f64>) -> Result<GeneratedInstance> {
    cfg.validate()?;
    if design.n() != cfg.n || design.p() != cfg.p {
        return Err(Error::Input(alloc::format!(
            "design is {}×{}, config says {}×{}",
            design.n(),
            design.p(),
            cfg.n,
            cfg.p
        )));
    }
    let beta = make_beta(cfg.p, &cfg.beta_spec)?;
    let factorization = factorize(&design)?;
    let theta = project(&beta, &factorization)?;
    Ok(GeneratedInstance {
        factorization,
        beta,
        theta,
        sigma: cfg.sigma,
        max_clip,
    })
}

pub fn generate_instance(cfg: &StudyConfig) -> Result<GeneratedInstance> {
    let (x, clip) = generate_design(cfg)?;
    build_instance(cfg, x, clip)
}

/// `y = Xβ + ε` for replication `rep`.
pub fn gen_response(inst: &GeneratedInstance, master_seed: u64, rep: u64) -> Result<Vec<f64>> {
    let mut y = inst.design().apply(&inst.beta);
    let e = gen_noise(y.len(), inst.sigma, master_seed, rep)?;
    for (yi, ei) in y.iter_mut().zip(e) {
        *yi += ei;
    }
    Ok(y)
}
