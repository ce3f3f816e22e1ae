//! Thin SVD and singular value thresholding.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Thin singular value decomposition `a = u * diag(s) * v^T`.
///
/// With `r = min(rows, cols)`, `u` is `rows x r`, `v` is `cols x r` and `s`
/// holds `r` nonnegative values in nonincreasing order. Signs of singular
/// vector pairs are arbitrary.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl ThinSvd {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.reconstruct_with(|s| s)
    }

    /// `u * diag(f(s)) * v^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (k, mut col) in us.column_iter_mut().enumerate() {
            col *= f(self.s[k]);
        }
        us * self.v.transpose()
    }

    /// Mean of the singular values above the numerical rank cutoff, or `None`
    /// when the matrix is numerically zero.
    pub fn mean_nonzero(&self) -> Option<f64> {
        let cutoff = self.rank_cutoff();
        let nz: Vec<f64> = self.s.iter().copied().filter(|&v| v > cutoff).collect();
        (!nz.is_empty()).then(|| nz.iter().sum::<f64>() / nz.len() as f64)
    }

    pub fn rank(&self) -> usize {
        let cutoff = self.rank_cutoff();
        self.s.iter().filter(|&&v| v > cutoff).count()
    }

    fn rank_cutoff(&self) -> f64 {
        let smax = self.s.iter().copied().fold(0.0, f64::max);
        let dim = self.u.nrows().max(self.v.nrows()) as f64;
        smax * dim * f64::EPSILON
    }
}

pub fn thin_svd(a: &DMatrix<f64>) -> Result<ThinSvd> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Ok(ThinSvd {
            u: DMatrix::zeros(rows, 0),
            s: DVector::zeros(0),
            v: DMatrix::zeros(cols, 0),
        });
    }
    let svd = faer::Mat::from_fn(rows, cols, |i, j| a[(i, j)])
        .thin_svd()
        .map_err(|_| Error::SvdNoConvergence)?;
    let k = rows.min(cols);
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    Ok(ThinSvd {
        u: DMatrix::from_fn(rows, k, |i, j| u[(i, j)]),
        s: DVector::from_fn(k, |i, _| s[i]),
        v: DMatrix::from_fn(cols, k, |i, j| v[(i, j)]),
    })
}

/// Singular value thresholding `U (S - tau I)_+ V^T`, the proximal operator
/// of `tau * ||.||_*`.
pub fn svt(a: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    Ok(svt_from(&thin_svd(a)?, tau))
}

/// Thresholds an already computed decomposition.
pub fn svt_from(svd: &ThinSvd, tau: f64) -> DMatrix<f64> {
    let keep = svd.s.iter().take_while(|&&s| s > tau).count();
    let rows = svd.u.nrows();
    let cols = svd.v.nrows();
    if keep == 0 {
        return DMatrix::zeros(rows, cols);
    }
    let mut us = svd.u.columns(0, keep).into_owned();
    for (k, mut col) in us.column_iter_mut().enumerate() {
        col *= svd.s[k] - tau;
    }
    us * svd.v.columns(0, keep).transpose()
}

/// Sum of singular values.
pub fn nuclear_norm(a: &DMatrix<f64>) -> Result<f64> {
    Ok(thin_svd(a)?.s.sum())
}
