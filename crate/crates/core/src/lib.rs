//! Low-rank tensor completion.
//!
//! Recovers a partially observed tensor by minimizing a weighted sum of the
//! nuclear norms of its mode unfoldings subject to agreement with the
//! observed entries. The main solver is an ADMM with over-relaxation and a
//! residual-balancing penalty; plain fixed-penalty ADMM and matrix
//! soft-impute are available as baselines.
//!
//! ```no_run
//! use lrtc::{experiments, io, solver};
//!
//! let truth = io::load_image("photo.png")?;
//! let mask = experiments::generate_mask(truth.shape(), 0.4, 7)?;
//! let observed = truth.apply_mask(&mask)?;
//! let cfg = solver::SolverConfig { clip_range: Some([0.0, 255.0]), ..Default::default() };
//! let solution = solver::solve(&observed, &mask, &cfg, None, Some(&truth))?;
//! io::save_image(&solution.tensor, "completed.png")?;
//! # Ok::<(), lrtc::Error>(())
//! ```

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod solver;
pub mod svt;
pub mod tensor;

pub use error::{Error, Result};
pub use solver::{solve, Solution, SolveStatus, SolverConfig, SvtScaling};
pub use tensor::{nmse, DenseTensor, ObservationMask};
