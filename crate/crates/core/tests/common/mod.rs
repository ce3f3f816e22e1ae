//! Reference implementations used as test oracles. They deliberately avoid
//! the library's unfold/fold, SVD and solver code paths.

#![allow(dead_code)]

use lrtc::{DenseTensor, ObservationMask};
use nalgebra::{DMatrix, SymmetricEigen};

/// Multi-index of linear position `lin` under first-index-fastest order.
pub fn multi_index(mut lin: usize, shape: &[usize]) -> Vec<usize> {
    shape
        .iter()
        .map(|&e| {
            let i = lin % e;
            lin /= e;
            i
        })
        .collect()
}

/// Mode-`n` unfolding by enumerating every multi-index.
pub fn unfold(data: &[f64], shape: &[usize], n: usize) -> DMatrix<f64> {
    let rows = shape[n];
    let cols: usize = shape.iter().product::<usize>() / rows;
    let mut m = DMatrix::zeros(rows, cols);
    for (lin, &v) in data.iter().enumerate() {
        let idx = multi_index(lin, shape);
        let mut col = 0;
        let mut stride = 1;
        for (k, (&i, &e)) in idx.iter().zip(shape).enumerate() {
            if k != n {
                col += i * stride;
                stride *= e;
            }
        }
        m[(idx[n], col)] = v;
    }
    m
}

/// Inverse of [`unfold`], also by enumeration.
pub fn fold(m: &DMatrix<f64>, shape: &[usize], n: usize) -> Vec<f64> {
    let total: usize = shape.iter().product();
    (0..total)
        .map(|lin| {
            let idx = multi_index(lin, shape);
            let mut col = 0;
            let mut stride = 1;
            for (k, (&i, &e)) in idx.iter().zip(shape).enumerate() {
                if k != n {
                    col += i * stride;
                    stride *= e;
                }
            }
            m[(idx[n], col)]
        })
        .collect()
}

/// SVT through the eigen-decomposition of the smaller Gram matrix.
pub fn svt(a: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let wide = a.nrows() <= a.ncols();
    let b = if wide { a.clone() } else { a.transpose() };
    let eig = SymmetricEigen::new(&b * b.transpose());
    let mut out = DMatrix::zeros(b.nrows(), b.ncols());
    for k in 0..eig.eigenvalues.len() {
        let sigma = eig.eigenvalues[k].max(0.0).sqrt();
        if sigma > tau {
            let u = eig.eigenvectors.column(k);
            let v = b.transpose() * u / sigma;
            out += (sigma - tau) * u * v.transpose();
        }
    }
    if wide {
        out
    } else {
        out.transpose()
    }
}

pub fn nuclear_norm(a: &DMatrix<f64>) -> f64 {
    let b = if a.nrows() <= a.ncols() { a.clone() } else { a.transpose() };
    SymmetricEigen::new(&b * b.transpose())
        .eigenvalues
        .iter()
        .map(|&e| e.max(0.0).sqrt())
        .sum()
}

/// Straight-line transcription of one ADMM run, with explicit lambda and
/// initial penalty, uniform mode weights and the rho-independent threshold.
pub struct Admm {
    pub shape: Vec<usize>,
    pub observed: Vec<f64>,
    pub flags: Vec<bool>,
    pub lambda: f64,
    pub xi: f64,
    pub adaptive: bool,
    pub rho: f64,
    pub x: Vec<f64>,
    pub m: Vec<DMatrix<f64>>,
    pub u: Vec<DMatrix<f64>>,
    pub last_r: f64,
    pub last_s: f64,
}

impl Admm {
    pub fn new(
        observed: &DenseTensor,
        mask: &ObservationMask,
        lambda: f64,
        rho: f64,
        xi: f64,
        adaptive: bool,
    ) -> Self {
        let shape = observed.shape().to_vec();
        let flags = mask.flags().to_vec();
        let data = observed.data().to_vec();
        let obs_vals: Vec<f64> = data
            .iter()
            .zip(&flags)
            .filter(|(_, &f)| f)
            .map(|(&v, _)| v)
            .collect();
        let mean = obs_vals.iter().sum::<f64>() / obs_vals.len() as f64;
        let x: Vec<f64> = data
            .iter()
            .zip(&flags)
            .map(|(&v, &f)| if f { v } else { mean })
            .collect();
        let order = shape.len();
        let alpha = 1.0 / order as f64;
        let m: Vec<_> = (0..order)
            .map(|n| svt(&unfold(&x, &shape, n), alpha * lambda))
            .collect();
        let u = m.iter().map(|mi| DMatrix::zeros(mi.nrows(), mi.ncols())).collect();
        Self {
            shape,
            observed: data,
            flags,
            lambda,
            xi,
            adaptive,
            rho,
            x,
            m,
            u,
            last_r: 0.0,
            last_s: 0.0,
        }
    }

    pub fn iterate(&mut self) {
        let order = self.shape.len();
        let alpha = 1.0 / order as f64;
        let total = self.x.len();

        // consensus average on unobserved entries, data on observed ones
        let mut avg = vec![0.0; total];
        for n in 0..order {
            let f = fold(&(&self.m[n] - &self.u[n]), &self.shape, n);
            for j in 0..total {
                avg[j] += f[j] / order as f64;
            }
        }
        for j in 0..total {
            self.x[j] = if self.flags[j] { self.observed[j] } else { avg[j] };
        }

        let mut r2 = 0.0;
        let mut s2 = 0.0;
        for n in 0..order {
            let xn = unfold(&self.x, &self.shape, n);
            let x_hat = self.xi * &xn + (1.0 - self.xi) * &self.m[n];
            let m_new = svt(&(&x_hat + &self.u[n]), alpha * self.lambda);
            self.u[n] = &self.u[n] + &x_hat - &m_new;
            r2 += (&xn - &m_new).norm_squared();
            s2 += (&m_new - &self.m[n]).norm_squared();
            self.m[n] = m_new;
        }
        self.last_r = r2.sqrt();
        self.last_s = self.rho * s2.sqrt();

        if self.adaptive {
            let old = self.rho;
            if self.last_r > 10.0 * self.last_s {
                self.rho = (2.0 * old).min(1000.0);
            } else if self.last_s > 10.0 * self.last_r {
                self.rho = (old / 2.0).max(0.01);
            }
            for un in &mut self.u {
                *un *= old / self.rho;
            }
        }
    }
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}
