//! Sum-of-nuclear-norms tensor completion by over-relaxed ADMM with an
//! adaptive penalty.
//!
//! The solver splits the objective `lambda * sum_n alpha_n ||X_(n)||_*` over
//! one auxiliary matrix `M_n` per mode unfolding, with scaled duals `U_n`:
//!
//! ```text
//! x_j    <- mean_n fold_n(M_n - U_n)_j       for unobserved j
//! x_j    <- t_j                              for observed j
//! Xh_n   <- xi * X_(n) + (1 - xi) * M_n
//! M_n    <- SVT_{tau_n}(Xh_n + U_n)
//! U_n    <- U_n + Xh_n - M_n
//! rho    <- residual balancing on r = ||X_(n) - M_n||, s = rho ||dM_n||
//! U_n    <- (rho_old / rho_new) U_n
//! ```
//!
//! The same state machine with `adaptive_rho = false` and `over_relax = false`
//! is textbook fixed-penalty consensus ADMM, which serves as the baseline.

use log::{debug, warn};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::svt::{svt, svt_from, thin_svd};
use crate::tensor::{nmse, DenseTensor, ObservationMask};

/// Data-driven lambda is the mean nonzero singular value divided by this.
pub const AUTO_LAMBDA_DIVISOR: f64 = 50.0;

/// How the SVT threshold of the `M_n` update relates to the penalty.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SvtScaling {
    /// `tau_n = alpha_n * lambda`, independent of `rho`.
    #[default]
    Fixed,
    /// `tau_n = alpha_n * lambda / rho`, the exact proximal step of the
    /// augmented Lagrangian.
    PenaltyScaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Regularization weight. `None` selects `sigma_bar / 50` at init time.
    pub lambda: Option<f64>,
    /// Mode weights summing to one. `None` means uniform.
    pub alphas: Option<Vec<f64>>,
    /// Over-relaxation factor, used when `over_relax` is set.
    pub xi: f64,
    /// Residual balance factor.
    pub mu: f64,
    /// Multiplicative penalty step.
    pub tau_adapt: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Explicit initial penalty; replaces the data-driven value.
    pub rho_init: Option<f64>,
    pub tol: f64,
    pub t_max: usize,
    pub adaptive_rho: bool,
    pub over_relax: bool,
    pub svt_scaling: SvtScaling,
    /// Output interval applied once to the returned estimate.
    pub clip_range: Option<[f64; 2]>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            alphas: None,
            xi: 1.7,
            mu: 10.0,
            tau_adapt: 2.0,
            rho_min: 0.01,
            rho_max: 1000.0,
            rho_init: None,
            tol: 1e-5,
            t_max: 2000,
            adaptive_rho: true,
            over_relax: true,
            svt_scaling: SvtScaling::Fixed,
            clip_range: None,
        }
    }
}

impl SolverConfig {
    /// Plain ADMM: constant penalty, no over-relaxation.
    pub fn fixed_penalty() -> Self {
        Self {
            adaptive_rho: false,
            over_relax: false,
            ..Self::default()
        }
    }

    pub fn effective_xi(&self) -> f64 {
        if self.over_relax {
            self.xi
        } else {
            1.0
        }
    }

    pub fn mode_weights(&self, order: usize) -> Vec<f64> {
        match &self.alphas {
            Some(a) => a.clone(),
            None => vec![1.0 / order as f64; order],
        }
    }

    pub fn validate(&self, order: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return bad(format!("lambda must be positive, got {l}"));
            }
        }
        if let Some(a) = &self.alphas {
            if a.len() != order {
                return bad(format!("{} mode weights for a tensor of order {order}", a.len()));
            }
            if a.iter().any(|&w| !(w >= 0.0)) {
                return bad("mode weights must be nonnegative".into());
            }
            let sum: f64 = a.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return bad(format!("mode weights sum to {sum}, expected 1"));
            }
        }
        if !(1.0..2.0).contains(&self.xi) {
            return bad(format!("xi must lie in [1, 2), got {}", self.xi));
        }
        if !(self.mu > 1.0) {
            return bad(format!("mu must exceed 1, got {}", self.mu));
        }
        if !(self.tau_adapt > 1.0) {
            return bad(format!("tau_adapt must exceed 1, got {}", self.tau_adapt));
        }
        if !(self.rho_min > 0.0 && self.rho_min <= self.rho_max && self.rho_max.is_finite()) {
            return bad(format!(
                "need 0 < rho_min <= rho_max, got [{}, {}]",
                self.rho_min, self.rho_max
            ));
        }
        if let Some(r) = self.rho_init {
            if !(r > 0.0 && r.is_finite()) {
                return bad(format!("rho_init must be positive, got {r}"));
            }
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.t_max < 1 {
            return bad("t_max must be at least 1".into());
        }
        if let Some([lo, hi]) = self.clip_range {
            if !(lo <= hi) {
                return bad(format!("empty clip range [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}

/// ADMM iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Current estimate; always agrees with the observations on the mask.
    pub x: DenseTensor,
    /// Auxiliary low-rank matrices, one per mode unfolding.
    pub m: Vec<DMatrix<f64>>,
    /// Scaled duals.
    pub u: Vec<DMatrix<f64>>,
    /// `m` from the previous iteration.
    pub m_prev: Vec<DMatrix<f64>>,
    pub rho: f64,
    pub t: usize,
    /// Regularization weight resolved at init time.
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    /// Primal residual.
    pub r: f64,
    /// Dual residual.
    pub s: f64,
    /// Penalty after this iteration's update.
    pub rho: f64,
    /// `lambda * sum_n alpha_n ||M_n||_*`.
    pub objective: f64,
    pub nmse: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIters,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub tensor: DenseTensor,
    pub history: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub lambda: f64,
    pub rho_init: f64,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }
}

fn check_inputs(observed: &DenseTensor, mask: &ObservationMask) -> Result<()> {
    observed.check_same_shape(mask.shape())?;
    if mask.num_observed() == 0 {
        return Err(Error::EmptyMask);
    }
    if !mask.observed().iter().all(|&j| observed.data()[j].is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Mean observed value, the fill for unobserved entries at start-up.
pub fn observed_mean(observed: &DenseTensor, mask: &ObservationMask) -> Result<f64> {
    if mask.num_observed() == 0 {
        return Err(Error::EmptyMask);
    }
    let sum: f64 = mask.observed().iter().map(|&j| observed.data()[j]).sum();
    Ok(sum / mask.num_observed() as f64)
}

/// Initial penalty `sigma_bar / (N * lambda)`, clamped to the penalty bounds.
///
/// `sigma_bar` is `None` when the initial estimate has no nonzero singular
/// values; the penalty then falls back to 1.
pub fn init_rho(sigma_bar: Option<f64>, order: usize, lambda: f64, cfg: &SolverConfig) -> f64 {
    let raw = match (cfg.rho_init, sigma_bar) {
        (Some(r), _) => r,
        (None, Some(sigma)) => sigma / (order as f64 * lambda),
        (None, None) => {
            warn!("initial estimate is all zero; falling back to rho0 = 1");
            1.0
        }
    };
    raw.clamp(cfg.rho_min, cfg.rho_max)
}

/// Mean nonzero singular value of each unfolding, averaged across modes.
pub fn mean_singular_value(x: &DenseTensor) -> Result<Option<f64>> {
    let per_mode = (0..x.order())
        .map(|n| Ok(thin_svd(&x.unfold(n)?)?.mean_nonzero()))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_of_modes(&per_mode))
}

fn mean_of_modes(per_mode: &[Option<f64>]) -> Option<f64> {
    let vals: Vec<f64> = per_mode.iter().flatten().copied().collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// Builds the starting state: observed entries from `observed`, the rest
/// filled with the observed mean, `M_n = SVT(X_(n))`, `U_n = 0`.
pub fn init_state(
    observed: &DenseTensor,
    mask: &ObservationMask,
    cfg: &SolverConfig,
) -> Result<SolverState> {
    init_state_with(observed, mask, cfg, None)
}

/// Like [`init_state`], but unobserved entries are taken from `warm_start`
/// when given. Duals always start at zero.
pub fn init_state_with(
    observed: &DenseTensor,
    mask: &ObservationMask,
    cfg: &SolverConfig,
    warm_start: Option<&DenseTensor>,
) -> Result<SolverState> {
    cfg.validate(observed.order())?;
    check_inputs(observed, mask)?;

    let mut x = match warm_start {
        Some(w) => {
            observed.check_same_shape(w.shape())?;
            if !w.is_finite() {
                return Err(Error::NonFinite);
            }
            w.clone()
        }
        None => DenseTensor::filled(observed.shape().to_vec(), observed_mean(observed, mask)?)?,
    };
    for &j in mask.observed() {
        x.data_mut()[j] = observed.data()[j];
    }

    let order = x.order();
    let svds = (0..order)
        .map(|n| thin_svd(&x.unfold(n)?))
        .collect::<Result<Vec<_>>>()?;
    let sigma_bar = mean_of_modes(&svds.iter().map(|s| s.mean_nonzero()).collect::<Vec<_>>());

    let lambda = match (cfg.lambda, sigma_bar) {
        (Some(l), _) => l,
        (None, Some(sigma)) => sigma / AUTO_LAMBDA_DIVISOR,
        (None, None) => {
            warn!("initial estimate is all zero; falling back to lambda = 1");
            1.0
        }
    };
    let alphas = cfg.mode_weights(order);
    let m: Vec<_> = svds
        .iter()
        .zip(&alphas)
        .map(|(svd, a)| svt_from(svd, a * lambda))
        .collect();
    let u = m.iter().map(|mi| DMatrix::zeros(mi.nrows(), mi.ncols())).collect();
    let rho = init_rho(sigma_bar, order, lambda, cfg);
    debug!("init: sigma_bar = {sigma_bar:?}, lambda = {lambda}, rho0 = {rho}");

    Ok(SolverState {
        x,
        m_prev: m.clone(),
        m,
        u,
        rho,
        t: 0,
        lambda,
    })
}

/// Consensus average of `fold_n(M_n - U_n)` on unobserved entries, the
/// observations on observed entries.
pub fn x_update(
    state: &SolverState,
    observed: &DenseTensor,
    mask: &ObservationMask,
) -> Result<DenseTensor> {
    observed.check_same_shape(mask.shape())?;
    observed.check_same_shape(state.x.shape())?;
    let shape = observed.shape();
    let order = state.m.len();
    let mut acc = vec![0.0; observed.len()];
    for (n, (m, u)) in state.m.iter().zip(&state.u).enumerate() {
        let folded = DenseTensor::fold(&(m - u), n, shape)?;
        for (a, v) in acc.iter_mut().zip(folded.data()) {
            *a += v;
        }
    }
    let inv = 1.0 / order as f64;
    let data = acc
        .into_iter()
        .zip(observed.data())
        .zip(mask.flags())
        .map(|((a, &obs), &is_obs)| if is_obs { obs } else { a * inv })
        .collect();
    DenseTensor::new(shape.to_vec(), data)
}

/// SVT threshold for mode `n` at the current penalty.
pub fn svt_threshold(state: &SolverState, cfg: &SolverConfig, alpha: f64) -> f64 {
    match cfg.svt_scaling {
        SvtScaling::Fixed => alpha * state.lambda,
        SvtScaling::PenaltyScaled => alpha * state.lambda / state.rho,
    }
}

/// Returns `(M_n_new, Xh_n)` for mode `n`.
pub fn m_update(
    state: &SolverState,
    x_new: &DenseTensor,
    cfg: &SolverConfig,
    n: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (m_new, x_hat, _) = m_update_inner(state, x_new, cfg, n)?;
    Ok((m_new, x_hat))
}

// Also returns the nuclear norm of the new M_n, which falls out of the SVT.
fn m_update_inner(
    state: &SolverState,
    x_new: &DenseTensor,
    cfg: &SolverConfig,
    n: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>, f64)> {
    let xi = cfg.effective_xi();
    let unfolded = x_new.unfold(n)?;
    let x_hat = if xi == 1.0 {
        unfolded
    } else {
        unfolded * xi + &state.m[n] * (1.0 - xi)
    };
    let alpha = cfg.mode_weights(state.m.len())[n];
    let tau = svt_threshold(state, cfg, alpha);
    let svd = thin_svd(&(&x_hat + &state.u[n]))?;
    let nuclear: f64 = svd.s.iter().map(|&s| (s - tau).max(0.0)).sum();
    Ok((svt_from(&svd, tau), x_hat, nuclear))
}

/// Scaled dual ascent `U + Xh - M_new`.
pub fn u_update(u: &DMatrix<f64>, x_hat: &DMatrix<f64>, m_new: &DMatrix<f64>) -> DMatrix<f64> {
    u + x_hat - m_new
}

/// Primal and dual residuals for a state whose `m` has just been updated
/// (`m_prev` holds the previous iterate) and the matching estimate `x_new`.
pub fn residuals(state: &SolverState, x_new: &DenseTensor) -> Result<(f64, f64)> {
    let mut primal = 0.0;
    let mut dual = 0.0;
    for (n, (m, m_prev)) in state.m.iter().zip(&state.m_prev).enumerate() {
        primal += (x_new.unfold(n)? - m).norm_squared();
        dual += (m - m_prev).norm_squared();
    }
    Ok((primal.sqrt(), state.rho * dual.sqrt()))
}

/// Residual balancing: grow the penalty when the primal residual dominates,
/// shrink it when the dual residual dominates.
pub fn rho_update(rho: f64, r: f64, s: f64, cfg: &SolverConfig) -> f64 {
    if !cfg.adaptive_rho {
        return rho;
    }
    if r > cfg.mu * s {
        (rho * cfg.tau_adapt).min(cfg.rho_max)
    } else if s > cfg.mu * r {
        (rho / cfg.tau_adapt).max(cfg.rho_min)
    } else {
        rho
    }
}

/// Keeps `rho * U_n` fixed across a penalty change.
pub fn rescale_duals(u: &mut [DMatrix<f64>], rho_old: f64, rho_new: f64) {
    if rho_old == rho_new {
        return;
    }
    let factor = rho_old / rho_new;
    for un in u {
        *un *= factor;
    }
}

pub fn objective(state: &SolverState, cfg: &SolverConfig) -> Result<f64> {
    let alphas = cfg.mode_weights(state.m.len());
    let mut total = 0.0;
    for (m, a) in state.m.iter().zip(alphas) {
        total += a * thin_svd(m)?.s.sum();
    }
    Ok(state.lambda * total)
}

/// `(r / max(1, ||X_(n)||), s / max(1, ||rho U_n||))`, both aggregated over modes.
pub fn relative_residuals(state: &SolverState, record: &IterationRecord) -> (f64, f64) {
    let order = state.m.len() as f64;
    let x_scale = (order * state.x.squared_norm()).sqrt().max(1.0);
    let u_norm: f64 = state.u.iter().map(|u| u.norm_squared()).sum::<f64>().sqrt();
    let u_scale = (state.rho * u_norm).max(1.0);
    (record.r / x_scale, record.s / u_scale)
}

/// One full iteration. Mode updates run concurrently; all read the same
/// estimate and state snapshot.
pub fn step(
    state: &mut SolverState,
    observed: &DenseTensor,
    mask: &ObservationMask,
    cfg: &SolverConfig,
) -> Result<IterationRecord> {
    let x_new = x_update(state, observed, mask)?;

    let snapshot: &SolverState = state;
    let updates = (0..snapshot.m.len())
        .into_par_iter()
        .map(|n| {
            let (m_new, x_hat, nuclear) = m_update_inner(snapshot, &x_new, cfg, n)?;
            let u_new = u_update(&snapshot.u[n], &x_hat, &m_new);
            Ok((m_new, u_new, nuclear))
        })
        .collect::<Result<Vec<_>>>()?;

    let alphas = cfg.mode_weights(state.m.len());
    let mut objective = 0.0;
    let mut m_new = Vec::with_capacity(updates.len());
    let mut u_new = Vec::with_capacity(updates.len());
    for ((m, u, nuclear), a) in updates.into_iter().zip(alphas) {
        objective += a * nuclear;
        m_new.push(m);
        u_new.push(u);
    }
    state.m_prev = std::mem::replace(&mut state.m, m_new);
    state.u = u_new;
    state.x = x_new;

    let (r, s) = residuals(state, &state.x)?;
    let rho_new = rho_update(state.rho, r, s, cfg);
    rescale_duals(&mut state.u, state.rho, rho_new);
    state.rho = rho_new;
    state.t += 1;

    Ok(IterationRecord {
        t: state.t,
        r,
        s,
        rho: rho_new,
        objective: state.lambda * objective,
        nmse: None,
    })
}

/// Runs the solver to convergence or `t_max`.
///
/// `warm_start` replaces the mean fill of unobserved entries. When `truth`
/// is given every history record carries the NMSE of the current estimate.
pub fn solve(
    observed: &DenseTensor,
    mask: &ObservationMask,
    cfg: &SolverConfig,
    warm_start: Option<&DenseTensor>,
    truth: Option<&DenseTensor>,
) -> Result<Solution> {
    if let Some(t) = truth {
        observed.check_same_shape(t.shape())?;
    }
    let mut state = init_state_with(observed, mask, cfg, warm_start)?;
    let rho_init = state.rho;
    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIters;
    // With nothing unobserved the estimate is pinned to the data.
    let pinned = mask.num_unobserved() == 0;

    while state.t < cfg.t_max {
        let mut record = step(&mut state, observed, mask, cfg)?;
        if let Some(t) = truth {
            record.nmse = Some(nmse(&state.x, t)?);
        }
        history.push(record);
        let (r_rel, s_rel) = relative_residuals(&state, &record);
        if !(r_rel.is_finite() && s_rel.is_finite()) {
            return Err(Error::NonFinite);
        }
        if pinned || r_rel.max(s_rel) < cfg.tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    debug!(
        "solve finished after {} iterations ({})",
        state.t,
        status.as_str()
    );

    let tensor = match cfg.clip_range {
        Some([lo, hi]) => state.x.clip(lo, hi),
        None => state.x,
    };
    Ok(Solution {
        tensor,
        history,
        status,
        lambda: state.lambda,
        rho_init,
    })
}

/// One soft-impute iteration `SVT_lambda(X + P_omega(O - X))` on a matrix.
/// The mask linearizes the matrix column-major, matching its storage order.
pub fn soft_impute_step(
    x_prev: &DMatrix<f64>,
    observed: &DMatrix<f64>,
    mask: &ObservationMask,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    let shape = vec![observed.nrows(), observed.ncols()];
    if x_prev.shape() != observed.shape() || mask.shape() != shape.as_slice() {
        return Err(Error::ShapeMismatch {
            expected: shape,
            found: mask.shape().to_vec(),
        });
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {lambda}")));
    }
    let mut filled = x_prev.clone();
    for &j in mask.observed() {
        filled.as_mut_slice()[j] = observed.as_slice()[j];
    }
    svt(&filled, lambda)
}

/// Iterates [`soft_impute_step`] from zero until the relative change drops
/// below `tol`. Returns the estimate and the number of iterations used.
pub fn soft_impute(
    observed: &DMatrix<f64>,
    mask: &ObservationMask,
    lambda: f64,
    max_iter: usize,
    tol: f64,
) -> Result<(DMatrix<f64>, usize)> {
    let mut x = DMatrix::zeros(observed.nrows(), observed.ncols());
    for it in 1..=max_iter {
        let next = soft_impute_step(&x, observed, mask, lambda)?;
        let change = (&next - &x).norm() / x.norm().max(1.0);
        x = next;
        if change < tol {
            return Ok((x, it));
        }
    }
    Ok((x, max_iter))
}
