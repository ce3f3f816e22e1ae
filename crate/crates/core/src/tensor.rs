//! Dense N-mode tensors, mode-n matricization and observation masks.
//!
//! Entries are stored in a flat buffer with the first index varying fastest:
//! the entry at multi-index `(i_0, i_1, ..., i_{N-1})` lives at
//!
//! ```text
//! i_0 + I_0 * (i_1 + I_1 * (i_2 + ...))
//! ```
//!
//! The mode-n unfolding places `i_n` on the rows. Its column index linearizes
//! the remaining indices in their original order (modes before `n`, then
//! modes after `n`), again first-listed fastest. Modes are zero-based.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Dense real tensor of arbitrary order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn check_shape(shape: &[usize]) -> Result<usize> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(Error::InvalidShape(shape.to_vec()));
    }
    Ok(shape.iter().product())
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_shape(&shape)?;
        if data.len() != len {
            return Err(Error::BufferLength {
                len: data.len(),
                shape,
            });
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Result<Self> {
        Self::filled(shape, 0.0)
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Result<Self> {
        let len = check_shape(&shape)?;
        Ok(Self {
            shape,
            data: vec![value; len],
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_shape(&shape)?;
        let mut idx = vec![0; shape.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for (k, extent) in shape.iter().enumerate() {
                idx[k] += 1;
                if idx[k] < *extent {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(Self { shape, data })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of modes.
    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.shape.len() {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: idx.to_vec(),
            });
        }
        let mut lin = 0;
        for (&i, &extent) in idx.iter().zip(&self.shape).rev() {
            if i >= extent {
                return Err(Error::IndexOutOfBounds { index: i, len: extent });
            }
            lin = lin * extent + i;
        }
        Ok(lin)
    }

    pub fn get(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.data[self.linear_index(idx)?])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Rows and columns of the mode-`mode` unfolding.
    pub fn unfolding_dims(&self, mode: usize) -> Result<(usize, usize)> {
        unfolding_dims(&self.shape, mode)
    }

    /// Mode-`mode` matricization, an `I_n x prod_{j != n} I_j` matrix.
    pub fn unfold(&self, mode: usize) -> Result<DMatrix<f64>> {
        let (left, rows, right) = split_extents(&self.shape, mode)?;
        let mut out = DMatrix::zeros(rows, left * right);
        let dst = out.as_mut_slice();
        for r in 0..right {
            for i in 0..rows {
                let src = left * (i + rows * r);
                for l in 0..left {
                    // column-major: row i, column l + left * r
                    dst[i + rows * (l + left * r)] = self.data[src + l];
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`DenseTensor::unfold`] for the same mode and shape.
    pub fn fold(matrix: &DMatrix<f64>, mode: usize, shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        let (left, rows, right) = split_extents(shape, mode)?;
        if matrix.nrows() != rows || matrix.ncols() != left * right {
            return Err(Error::ShapeMismatch {
                expected: vec![rows, left * right],
                found: vec![matrix.nrows(), matrix.ncols()],
            });
        }
        let src = matrix.as_slice();
        let mut data = vec![0.0; rows * left * right];
        for r in 0..right {
            for i in 0..rows {
                let dst = left * (i + rows * r);
                for l in 0..left {
                    data[dst + l] = src[i + rows * (l + left * r)];
                }
            }
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Zeroes every entry outside the observed set.
    pub fn apply_mask(&self, mask: &ObservationMask) -> Result<Self> {
        self.check_same_shape(mask.shape())?;
        let data = self
            .data
            .iter()
            .zip(mask.flags())
            .map(|(&v, &obs)| if obs { v } else { 0.0 })
            .collect();
        Ok(Self {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn clip(&self, lo: f64, hi: f64) -> Self {
        self.map(|v| v.clamp(lo, hi))
    }

    pub(crate) fn check_same_shape(&self, other: &[usize]) -> Result<()> {
        if self.shape != other {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: other.to_vec(),
            });
        }
        Ok(())
    }
}

/// Returns `(prod of extents before mode, extent of mode, prod after mode)`.
fn split_extents(shape: &[usize], mode: usize) -> Result<(usize, usize, usize)> {
    if mode >= shape.len() {
        return Err(Error::ModeOutOfRange {
            mode,
            order: shape.len(),
        });
    }
    let left = shape[..mode].iter().product();
    let right = shape[mode + 1..].iter().product();
    Ok((left, shape[mode], right))
}

pub fn unfolding_dims(shape: &[usize], mode: usize) -> Result<(usize, usize)> {
    let (left, rows, right) = split_extents(shape, mode)?;
    Ok((rows, left * right))
}

/// Normalized mean squared error `||estimate - truth||_F^2 / ||truth||_F^2`.
pub fn nmse(estimate: &DenseTensor, truth: &DenseTensor) -> Result<f64> {
    estimate.check_same_shape(truth.shape())?;
    let denom = truth.squared_norm();
    if denom == 0.0 {
        return Err(Error::UndefinedMetric);
    }
    let num: f64 = estimate
        .data
        .iter()
        .zip(&truth.data)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(num / denom)
}

/// The set of observed entries, stored as sorted unique linear indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMask {
    shape: Vec<usize>,
    observed: Vec<usize>,
    flags: Vec<bool>,
}

impl ObservationMask {
    /// Builds a mask from linear indices in any order. Duplicates and
    /// out-of-range indices are rejected.
    pub fn new(shape: Vec<usize>, mut indices: Vec<usize>) -> Result<Self> {
        let len = check_shape(&shape)?;
        indices.sort_unstable();
        let mut flags = vec![false; len];
        for &j in &indices {
            if j >= len {
                return Err(Error::IndexOutOfBounds { index: j, len });
            }
            if flags[j] {
                return Err(Error::DuplicateIndex(j));
            }
            flags[j] = true;
        }
        Ok(Self {
            shape,
            observed: indices,
            flags,
        })
    }

    pub fn from_flags(shape: Vec<usize>, flags: Vec<bool>) -> Result<Self> {
        let len = check_shape(&shape)?;
        if flags.len() != len {
            return Err(Error::BufferLength {
                len: flags.len(),
                shape,
            });
        }
        let observed = flags
            .iter()
            .enumerate()
            .filter_map(|(j, &o)| o.then_some(j))
            .collect();
        Ok(Self {
            shape,
            observed,
            flags,
        })
    }

    pub fn full(shape: Vec<usize>) -> Result<Self> {
        let len = check_shape(&shape)?;
        Self::from_flags(shape, vec![true; len])
    }

    pub fn empty(shape: Vec<usize>) -> Result<Self> {
        let len = check_shape(&shape)?;
        Self::from_flags(shape, vec![false; len])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Observed linear indices in increasing order.
    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn unobserved(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(j, &o)| (!o).then_some(j))
    }

    /// One flag per entry in linearization order.
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn is_observed(&self, index: usize) -> bool {
        self.flags.get(index).copied().unwrap_or(false)
    }

    pub fn num_observed(&self) -> usize {
        self.observed.len()
    }

    pub fn num_unobserved(&self) -> usize {
        self.flags.len() - self.observed.len()
    }

    pub fn total(&self) -> usize {
        self.flags.len()
    }

    pub fn ratio(&self) -> f64 {
        self.observed.len() as f64 / self.flags.len() as f64
    }
}
