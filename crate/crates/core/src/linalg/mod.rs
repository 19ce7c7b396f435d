//! Thin SVD of the design, projection onto its row space, and the
//! non-identifiability construction for rank-deficient designs.
//!
//! The factorization works on the smaller Gram matrix (`XX′` for wide
//! designs, `X′X` for tall ones). Its eigenvectors give a nearly exact basis;
//! a one-sided Jacobi pass on the mapped columns then restores full relative
//! accuracy for small singular values, which the Gram route alone loses
//! below roughly `sqrt(eps)·s_max`.

mod eigen;
mod matrix;

pub use eigen::{symmetric_eigen, SymmetricEigen};
pub use matrix::{axpy, cholesky_solve, dot, norm2, Matrix};

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure_finite, ensure_len, Error, Result};

/// An `n × p` design with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix(Matrix);

impl DesignMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::Input("design must have n ≥ 1 and p ≥ 1".into()));
        }
        if !entries.is_finite() {
            return Err(Error::Input("design contains non-finite entries".into()));
        }
        Ok(Self(entries))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.0.ncols()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `X·b`.
    pub fn apply(&self, b: &[f64]) -> Vec<f64> {
        self.0.matvec(b)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Result<DesignMatrix> {
        DesignMatrix::new(self.0.select_rows(idx))
    }
}

/// Thin SVD `X = P·D·Q′` truncated at the numerical rank.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    design: DesignMatrix,
    /// `n × r`, orthonormal columns.
    p_mat: Matrix,
    /// Singular values, strictly positive and descending.
    singular: Vec<f64>,
    /// `p × r`, orthonormal columns.
    q_mat: Matrix,
    rank_tolerance: f64,
}

impl SvdFactorization {
    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }

    pub fn n(&self) -> usize {
        self.design.n()
    }

    pub fn p(&self) -> usize {
        self.design.p()
    }

    pub fn rank(&self) -> usize {
        self.singular.len()
    }

    pub fn left(&self) -> &Matrix {
        &self.p_mat
    }

    pub fn right(&self) -> &Matrix {
        &self.q_mat
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular
    }

    /// Absolute cutoff below which singular values were discarded.
    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tolerance
    }

    /// `Q′·v` for a p-vector.
    pub fn q_tr(&self, v: &[f64]) -> Vec<f64> {
        self.q_mat.tr_matvec(v)
    }

    /// `Q·c` for an r-vector.
    pub fn q_apply(&self, c: &[f64]) -> Vec<f64> {
        self.q_mat.matvec(c)
    }

    /// `P′·v` for an n-vector.
    pub fn p_tr(&self, v: &[f64]) -> Vec<f64> {
        self.p_mat.tr_matvec(v)
    }

    /// `‖v − QQ′v‖`.
    pub fn row_space_residual(&self, v: &[f64]) -> f64 {
        let proj = self.q_apply(&self.q_tr(v));
        let diff: Vec<f64> = v.iter().zip(&proj).map(|(a, b)| a - b).collect();
        norm2(&diff)
    }

    /// `P·D·Q′`, for reconstruction checks.
    pub fn reconstruct(&self) -> Matrix {
        let mut pd = self.p_mat.clone();
        for i in 0..pd.nrows() {
            for (x, s) in pd.row_mut(i).iter_mut().zip(&self.singular) {
                *x *= s;
            }
        }
        pd.matmul(&self.q_mat.transpose())
    }
}

/// Computes the thin SVD of `X` with numerical rank determination.
///
/// A singular value counts toward the rank iff it exceeds
/// `max(n, p)·eps·s_max`.
pub fn factorize(x: &DesignMatrix) -> Result<SvdFactorization> {
    let (n, p) = (x.n(), x.p());
    if x.matrix().max_abs() == 0.0 {
        return Err(Error::RankZero);
    }
    // Work on A (m × k, m ≤ k) so the Gram matrix is the small one.
    let wide = n <= p;
    let a_owned;
    let a = if wide {
        x.matrix()
    } else {
        a_owned = x.matrix().transpose();
        &a_owned
    };
    let m = a.nrows();
    let k = a.ncols();

    let eig = symmetric_eigen(&a.gram_rows())?;

    // Z = A′E, stored column-wise: columns[j] has length k.
    let mut columns: Vec<Vec<f64>> = (0..m).map(|j| a.tr_matvec(&eig.vectors.column(j))).collect();
    let mut rot = eig.vectors.transpose(); // rows of `rot` are columns of E·V

    let s_max_est = columns.iter().map(|c| norm2(c)).fold(0.0, f64::max);
    let tol = (n.max(p) as f64) * f64::EPSILON * s_max_est;
    one_sided_jacobi(&mut columns, &mut rot, tol);

    let norms: Vec<f64> = columns.iter().map(|c| norm2(c)).collect();
    let s_max = norms.iter().copied().fold(0.0, f64::max);
    let rank_tolerance = (n.max(p) as f64) * f64::EPSILON * s_max;
    let mut order: Vec<usize> = (0..m).filter(|&j| norms[j] > rank_tolerance).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let r = order.len();
    if r == 0 {
        return Err(Error::RankZero);
    }

    // Left factor of A is E·V (rows of `rot`), right factor is Z·V / s.
    let mut a_left = Matrix::zeros(m, r);
    let mut a_right = Matrix::zeros(k, r);
    let mut singular = Vec::with_capacity(r);
    for (c, &j) in order.iter().enumerate() {
        let s = norms[j];
        singular.push(s);
        for (i, &v) in rot.row(j).iter().enumerate() {
            a_left[(i, c)] = v;
        }
        for (i, &v) in columns[j].iter().enumerate() {
            a_right[(i, c)] = v / s;
        }
    }
    let (mut p_mat, mut q_mat) = if wide {
        (a_left, a_right)
    } else {
        (a_right, a_left)
    };

    // Each column of P gets a nonnegative entry of largest magnitude.
    for c in 0..r {
        let mut best = 0.0_f64;
        let mut sign = 1.0;
        for i in 0..n {
            let v = p_mat[(i, c)];
            if v.abs() > best {
                best = v.abs();
                sign = if v < 0.0 { -1.0 } else { 1.0 };
            }
        }
        if sign < 0.0 {
            for i in 0..n {
                p_mat[(i, c)] = -p_mat[(i, c)];
            }
            for i in 0..p {
                q_mat[(i, c)] = -q_mat[(i, c)];
            }
        }
    }

    Ok(SvdFactorization {
        design: x.clone(),
        p_mat,
        singular,
        q_mat,
        rank_tolerance,
    })
}

const MAX_JACOBI_SWEEPS: usize = 60;

/// Orthogonalizes `columns` by plane rotations, applying the same rotations
/// to the rows of `rot`. Columns with norm at or below `skip_below` are left
/// untouched; they are discarded by the rank cut.
fn one_sided_jacobi(columns: &mut [Vec<f64>], rot: &mut Matrix, skip_below: f64) {
    let m = columns.len();
    let skip_sq = skip_below * skip_below;
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut sq: Vec<f64> = columns.iter().map(|c| dot(c, c)).collect();
        let mut rotated = false;
        for i in 0..m {
            for j in (i + 1)..m {
                let (alpha, beta) = (sq[i], sq[j]);
                if alpha <= skip_sq || beta <= skip_sq {
                    continue;
                }
                let gamma = dot(&columns[i], &columns[j]);
                if gamma.abs() <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;

                let (lo, hi) = columns.split_at_mut(j);
                rotate_pair(&mut lo[i], &mut hi[0], c, s);
                let (ri, rj) = rot.two_rows_mut(i, j);
                rotate_pair(ri, rj, c, s);

                sq[i] = alpha - t * gamma;
                sq[j] = beta + t * gamma;
            }
        }
        if !rotated {
            break;
        }
    }
}

#[inline]
fn rotate_pair(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xv, yv) = (*x, *y);
        *x = c * xv - s * yv;
        *y = s * xv + c * yv;
    }
}

/// The component of β in the row space of `X`: `θ = QQ′β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionVector(Vec<f64>);

impl ProjectionVector {
    /// Wraps a vector after checking it lies in the row space of `f`.
    pub fn from_row_space(f: &SvdFactorization, theta: Vec<f64>) -> Result<Self> {
        ensure_len(f.p(), theta.len())?;
        ensure_finite(&theta, "theta")?;
        let residual = f.row_space_residual(&theta);
        if residual > 1e-9 * norm2(&theta).max(1.0) {
            return Err(Error::NotInRowSpace { residual });
        }
        Ok(Self(theta))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Projects β onto the row space of the factorized design.
pub fn project(beta: &[f64], f: &SvdFactorization) -> Result<ProjectionVector> {
    ensure_len(f.p(), beta.len())?;
    ensure_finite(beta, "beta")?;
    Ok(ProjectionVector(f.q_apply(&f.q_tr(beta))))
}

/// Returns `(β, β + z)` with `z` a unit vector orthogonal to the row space,
/// so both parameters produce the same mean response `Xβ`.
///
/// `z` is the normalized residual of the coordinate axis `e_j` least
/// captured by the row space (largest `1 − ‖Q_j·‖²`, first index on ties).
pub fn nonidentifiable_pair(f: &SvdFactorization, beta: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    ensure_len(f.p(), beta.len())?;
    if f.rank() >= f.p() {
        return Err(Error::FullColumnRank);
    }
    let q = f.right();
    let mut best = 0;
    let mut best_res = f64::NEG_INFINITY;
    for j in 0..f.p() {
        let res = 1.0 - dot(q.row(j), q.row(j));
        if res > best_res {
            best_res = res;
            best = j;
        }
    }
    let mut z = vec![0.0; f.p()];
    z[best] = 1.0;
    // Two rounds of orthogonalization against Q.
    for _ in 0..2 {
        let proj = f.q_apply(&f.q_tr(&z));
        for (zi, pi) in z.iter_mut().zip(&proj) {
            *zi -= pi;
        }
    }
    let nz = norm2(&z);
    if !(nz > 0.0) {
        return Err(Error::Numerical("failed to construct a null-space direction".into()));
    }
    for zi in &mut z {
        *zi /= nz;
    }
    let beta2 = beta.iter().zip(&z).map(|(b, zi)| b + zi).collect();
    Ok((beta.to_vec(), beta2))
}

/// Extreme positive eigenvalues of `X′X` and the rank.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectralDiagnostics {
    pub lambda_min_pos: f64,
    pub lambda_max: f64,
    pub rank: usize,
    /// Singular-value cutoff used for the rank decision.
    pub rank_tolerance: f64,
}

pub fn spectral_diagnostics(f: &SvdFactorization) -> SpectralDiagnostics {
    let s = f.singular_values();
    let smax = s[0];
    let smin = s[s.len() - 1];
    SpectralDiagnostics {
        lambda_min_pos: smin * smin,
        lambda_max: smax * smax,
        rank: f.rank(),
        rank_tolerance: f.rank_tolerance(),
    }
}
