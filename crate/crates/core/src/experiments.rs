//! Seeded experiment harness: masks, synthetic low-rank ground truth,
//! observation-ratio sweeps and convergence CSVs.
//!
//! All randomness comes from ChaCha8 streams seeded explicitly, so masks and
//! synthetic tensors are identical across platforms for a given seed.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use log::info;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::load_image;
use crate::solver::{solve, IterationRecord, SolveStatus, Solution, SolverConfig};
use crate::tensor::{nmse, DenseTensor, ObservationMask};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly samples `round(ratio * total)` distinct entries.
pub fn generate_mask(shape: &[usize], ratio: f64, seed: u64) -> Result<ObservationMask> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidRatio(ratio));
    }
    let total: usize = shape.iter().product();
    let count = ((ratio * total as f64).round() as usize).min(total);
    let mut rng = rng(seed);
    let indices = rand::seq::index::sample(&mut rng, total, count).into_vec();
    ObservationMask::new(shape.to_vec(), indices)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    // Fill column by column so the draw order is independent of storage.
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = StandardNormal.sample(rng);
        }
    }
    m
}

/// Mode-`mode` product `t x_mode a`.
pub fn mode_product(t: &DenseTensor, a: &DMatrix<f64>, mode: usize) -> Result<DenseTensor> {
    let unfolded = t.unfold(mode)?;
    if a.ncols() != unfolded.nrows() {
        return Err(Error::ShapeMismatch {
            expected: vec![a.nrows(), unfolded.nrows()],
            found: vec![a.nrows(), a.ncols()],
        });
    }
    let mut shape = t.shape().to_vec();
    shape[mode] = a.nrows();
    DenseTensor::fold(&(a * unfolded), mode, &shape)
}

/// Tucker-form tensor with a Gaussian core of the given multilinear ranks
/// and random orthonormal factors, plus white noise of std `noise_std`.
///
/// The core is scaled so the noiseless entries have unit root-mean-square
/// in expectation.
pub fn synthetic_lowrank(
    shape: &[usize],
    ranks: &[usize],
    seed: u64,
    noise_std: f64,
) -> Result<DenseTensor> {
    if ranks.len() != shape.len() {
        return Err(Error::ShapeMismatch {
            expected: shape.to_vec(),
            found: ranks.to_vec(),
        });
    }
    for (mode, (&rank, &extent)) in ranks.iter().zip(shape).enumerate() {
        if rank > extent {
            return Err(Error::RankExceedsExtent { mode, rank, extent });
        }
    }
    let mut rng = rng(seed);
    let core_len: usize = ranks.iter().product();
    let total: usize = shape.iter().product();
    let scale = (total as f64 / core_len as f64).sqrt();
    let core_data = (0..core_len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            scale * z
        })
        .collect();
    let mut t = DenseTensor::new(ranks.to_vec(), core_data)?;
    for (mode, (&rank, &extent)) in ranks.iter().zip(shape).enumerate() {
        let q = gaussian_matrix(extent, rank, &mut rng).qr().q();
        t = mode_product(&t, &q, mode)?;
    }
    if noise_std > 0.0 {
        for v in t.data_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += noise_std * z;
        }
    }
    Ok(t)
}

/// Ground truth for a sweep.
#[derive(Debug, Clone)]
pub enum Instance {
    ImageFile(PathBuf),
    Tensor(DenseTensor),
    /// Regenerated per seed.
    Synthetic {
        shape: Vec<usize>,
        ranks: Vec<usize>,
        noise_std: f64,
    },
}

#[derive(Debug, Clone)]
pub struct NamedConfig {
    pub name: String,
    pub cfg: SolverConfig,
    /// Runs of this config start from the named config's result at the same
    /// ratio and seed.
    pub warm_start_from: Option<String>,
}

impl NamedConfig {
    pub fn new(name: impl Into<String>, cfg: SolverConfig) -> Self {
        Self {
            name: name.into(),
            cfg,
            warm_start_from: None,
        }
    }

    pub fn warm_started_from(mut self, provider: impl Into<String>) -> Self {
        self.warm_start_from = Some(provider.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub instance: Instance,
    /// Sorted, each in (0, 1].
    pub ratios: Vec<f64>,
    /// One mask (and synthetic instance) per seed and ratio.
    pub seeds: Vec<u64>,
    pub configs: Vec<NamedConfig>,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidExperiment(m));
        if self.configs.is_empty() {
            return bad("no solver configs".into());
        }
        if self.ratios.is_empty() || self.seeds.is_empty() {
            return bad("need at least one ratio and one seed".into());
        }
        if let Some(&r) = self.ratios.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidRatio(r));
        }
        if !self.ratios.windows(2).all(|w| w[0] < w[1]) {
            return bad("ratios must be strictly increasing".into());
        }
        let mut names = HashMap::new();
        for (k, c) in self.configs.iter().enumerate() {
            if names.insert(c.name.as_str(), k).is_some() {
                return bad(format!("duplicate config name {:?}", c.name));
            }
        }
        for (k, c) in self.configs.iter().enumerate() {
            if let Some(p) = &c.warm_start_from {
                match names.get(p.as_str()) {
                    None => return bad(format!("{:?} warm-starts from unknown {p:?}", c.name)),
                    Some(&pk) if self.configs[pk].warm_start_from.is_some() || pk == k => {
                        return bad(format!("warm-start provider {p:?} must be a cold-start config"))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

/// Mask seed for the `ratio_index`-th ratio under run seed `seed`.
pub fn mask_seed(seed: u64, ratio_index: usize) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(ratio_index as u64 + 1);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cfg: String,
    pub ratio: f64,
    pub seed: u64,
    pub nmse: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub wall_time: Duration,
    pub lambda: f64,
    pub history: Vec<IterationRecord>,
    pub estimate: DenseTensor,
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    /// Ordered by config, then ratio, then seed.
    pub cells: Vec<CellResult>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

impl SweepResult {
    pub fn cells_for<'a>(&'a self, cfg: &'a str, ratio: f64) -> impl Iterator<Item = &'a CellResult> {
        self.cells
            .iter()
            .filter(move |c| c.cfg == cfg && c.ratio == ratio)
    }

    pub fn cell<'a>(&'a self, cfg: &'a str, ratio: f64, seed: u64) -> Option<&'a CellResult> {
        self.cells_for(cfg, ratio).find(|c| c.seed == seed)
    }

    pub fn median_nmse(&self, cfg: &str, ratio: f64) -> Option<f64> {
        median(self.cells_for(cfg, ratio).map(|c| c.nmse).collect())
    }

    pub fn median_iterations(&self, cfg: &str, ratio: f64) -> Option<f64> {
        median(self.cells_for(cfg, ratio).map(|c| c.iterations as f64).collect())
    }

    /// `converged` when every seed converged, else `max_iters`.
    pub fn status(&self, cfg: &str, ratio: f64) -> Option<SolveStatus> {
        let mut any = false;
        for c in self.cells_for(cfg, ratio) {
            any = true;
            if c.status != SolveStatus::Converged {
                return Some(SolveStatus::MaxIters);
            }
        }
        any.then_some(SolveStatus::Converged)
    }

    /// Distinct `(cfg, ratio)` keys in cell order.
    pub fn keys(&self) -> Vec<(String, f64)> {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for c in &self.cells {
            if !keys.iter().any(|(n, r)| *n == c.cfg && *r == c.ratio) {
                keys.push((c.cfg.clone(), c.ratio));
            }
        }
        keys
    }
}

struct Prepared {
    truth: DenseTensor,
    observed: DenseTensor,
    mask: ObservationMask,
}

/// Runs every config at every ratio and seed. Within a (ratio, seed) pair
/// all configs share one mask. Cold-start cells run in parallel; warm-start
/// cells run afterwards from their provider's estimate.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<SweepResult> {
    spec.validate()?;

    let fixed_truth = match &spec.instance {
        Instance::ImageFile(p) => Some(load_image(p)?),
        Instance::Tensor(t) => Some(t.clone()),
        Instance::Synthetic { .. } => None,
    };
    let truths = spec
        .seeds
        .iter()
        .map(|&seed| match (&fixed_truth, &spec.instance) {
            (Some(t), _) => Ok(t.clone()),
            (None, Instance::Synthetic { shape, ranks, noise_std }) => {
                synthetic_lowrank(shape, ranks, seed, *noise_std)
            }
            _ => unreachable!(),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut prepared = Vec::new();
    for (ri, &ratio) in spec.ratios.iter().enumerate() {
        for (si, &seed) in spec.seeds.iter().enumerate() {
            let truth = &truths[si];
            let mask = generate_mask(truth.shape(), ratio, mask_seed(seed, ri))?;
            let observed = truth.apply_mask(&mask)?;
            prepared.push(((ri, si), Prepared { truth: truth.clone(), observed, mask }));
        }
    }
    let prepared: HashMap<_, _> = prepared.into_iter().collect();

    let run_cell = |ci: usize, ri: usize, si: usize, warm: Option<&DenseTensor>| -> Result<CellResult> {
        let named = &spec.configs[ci];
        let p = &prepared[&(ri, si)];
        let start = Instant::now();
        let sol: Solution = solve(&p.observed, &p.mask, &named.cfg, warm, Some(&p.truth))?;
        let wall_time = start.elapsed();
        let cell = CellResult {
            cfg: named.name.clone(),
            ratio: spec.ratios[ri],
            seed: spec.seeds[si],
            nmse: nmse(&sol.tensor, &p.truth)?,
            iterations: sol.iterations(),
            status: sol.status,
            wall_time,
            lambda: sol.lambda,
            history: sol.history,
            estimate: sol.tensor,
        };
        info!(
            "{} ratio={} seed={}: nmse={:.4e} iters={} ({})",
            cell.cfg,
            cell.ratio,
            cell.seed,
            cell.nmse,
            cell.iterations,
            cell.status.as_str()
        );
        Ok(cell)
    };

    let grid = |cold: bool| -> Vec<(usize, usize, usize)> {
        let mut v = Vec::new();
        for (ci, c) in spec.configs.iter().enumerate() {
            if c.warm_start_from.is_none() == cold {
                for ri in 0..spec.ratios.len() {
                    for si in 0..spec.seeds.len() {
                        v.push((ci, ri, si));
                    }
                }
            }
        }
        v
    };

    let cold: HashMap<(usize, usize, usize), CellResult> = grid(true)
        .into_par_iter()
        .map(|(ci, ri, si)| Ok(((ci, ri, si), run_cell(ci, ri, si, None)?)))
        .collect::<Result<_>>()?;

    let index_of = |name: &str| spec.configs.iter().position(|c| c.name == name);
    let warm: HashMap<(usize, usize, usize), CellResult> = grid(false)
        .into_par_iter()
        .map(|(ci, ri, si)| {
            let provider = spec.configs[ci]
                .warm_start_from
                .as_deref()
                .and_then(index_of)
                .expect("validated provider");
            let start = &cold[&(provider, ri, si)].estimate;
            Ok(((ci, ri, si), run_cell(ci, ri, si, Some(start))?))
        })
        .collect::<Result<_>>()?;

    let mut all: HashMap<_, _> = cold;
    all.extend(warm);
    let mut keys: Vec<_> = all.keys().copied().collect();
    keys.sort_unstable();
    let cells = keys.into_iter().map(|k| all.remove(&k).unwrap()).collect();
    Ok(SweepResult { cells })
}

const HISTORY_HEADER: [&str; 6] = ["t", "r", "s", "rho", "objective", "nmse"];

/// Writes a convergence history as CSV with columns `t,r,s,rho,objective,nmse`.
/// Floats are written in shortest round-trip form; a missing NMSE is empty.
pub fn write_history<W: Write>(history: &[IterationRecord], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    if history.is_empty() {
        w.write_record(HISTORY_HEADER)?;
    }
    for rec in history {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_history<R: Read>(source: R) -> Result<Vec<IterationRecord>> {
    let mut r = csv::Reader::from_reader(source);
    let header = r.headers()?;
    if header != HISTORY_HEADER.as_slice() {
        return Err(Error::CsvHeader(header.iter().collect::<Vec<_>>().join(",")));
    }
    let records = r.deserialize().collect::<std::result::Result<_, _>>()?;
    Ok(records)
}

/// One row per `(cfg, ratio)`: median NMSE and iterations over seeds.
pub fn write_summary<W: Write>(result: &SweepResult, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["cfg", "ratio", "nmse", "iters", "status"])?;
    for (cfg, ratio) in result.keys() {
        w.write_record([
            cfg.clone(),
            ratio.to_string(),
            result.median_nmse(&cfg, ratio).unwrap().to_string(),
            result.median_iterations(&cfg, ratio).unwrap().to_string(),
            result.status(&cfg, ratio).unwrap().as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svt::thin_svd;

    #[test]
    fn mask_sizes_and_determinism() {
        let m = generate_mask(&[10, 10, 3], 0.2, 1).unwrap();
        assert_eq!(m.num_observed(), 60);
        assert_eq!(m, generate_mask(&[10, 10, 3], 0.2, 1).unwrap());
        assert_ne!(m, generate_mask(&[10, 10, 3], 0.2, 2).unwrap());
        let full = generate_mask(&[4, 5], 1.0, 9).unwrap();
        assert_eq!(full.num_observed(), 20);
        assert!(matches!(generate_mask(&[4], 0.0, 0), Err(Error::InvalidRatio(_))));
        assert!(matches!(generate_mask(&[4], 1.5, 0), Err(Error::InvalidRatio(_))));
    }

    #[test]
    fn synthetic_rank_bounds() {
        let t = synthetic_lowrank(&[20, 20, 5], &[2, 2, 2], 3, 0.0).unwrap();
        for n in 0..3 {
            let s = thin_svd(&t.unfold(n).unwrap()).unwrap().s;
            assert!(s[2] < 1e-10 * s[0], "mode {n}: {s:?}");
        }
        let t = synthetic_lowrank(&[6, 5, 4], &[1, 1, 1], 3, 0.0).unwrap();
        for n in 0..3 {
            assert_eq!(thin_svd(&t.unfold(n).unwrap()).unwrap().rank(), 1);
        }
        let t = synthetic_lowrank(&[4, 3, 2], &[4, 3, 2], 3, 0.0).unwrap();
        for n in 0..3 {
            let (rows, _) = t.unfolding_dims(n).unwrap();
            assert_eq!(thin_svd(&t.unfold(n).unwrap()).unwrap().rank(), rows);
        }
        assert!(matches!(
            synthetic_lowrank(&[4, 3], &[5, 1], 0, 0.0),
            Err(Error::RankExceedsExtent { mode: 0, .. })
        ));
    }

    #[test]
    fn history_csv_shape() {
        let mut buf = Vec::new();
        write_history(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,r,s,rho,objective,nmse\n");

        let rec = IterationRecord { t: 1, r: 0.5, s: 0.25, rho: 2.0, objective: 3.0, nmse: None };
        let mut buf = Vec::new();
        write_history(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn read_history_rejects_garbage() {
        assert!(read_history("t,r\n".as_bytes()).is_err());
        assert!(read_history("t,r,s,rho,objective,nmse\n1,2,3\n".as_bytes()).is_err());
        assert!(read_history("t,r,s,rho,objective,nmse\n1,x,3,4,5,\n".as_bytes()).is_err());
    }

    #[test]
    fn spec_validation() {
        let base = ExperimentSpec {
            instance: Instance::Synthetic { shape: vec![4, 4, 2], ranks: vec![1, 1, 1], noise_std: 0.0 },
            ratios: vec![0.5],
            seeds: vec![0],
            configs: vec![NamedConfig::new("a", SolverConfig::default())],
        };
        assert!(base.validate().is_ok());
        let mut s = base.clone();
        s.configs.clear();
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.ratios = vec![0.6, 0.4];
        assert!(s.validate().is_err());
        let mut s = base.clone();
        s.configs.push(NamedConfig::new("b", SolverConfig::default()).warm_started_from("zzz"));
        assert!(s.validate().is_err());
        let mut s = base;
        s.configs.push(NamedConfig::new("a", SolverConfig::default()));
        assert!(s.validate().is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(vec![]), None);
    }
}
