//! Command-line driver behind the `lrtc` binary.
//!
//! Log verbosity follows the `LRTC_LOG` environment variable
//! (`error`, `warn`, `info`, `debug`, `trace`).

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use crate::config::{default_configs, RunFile};
use crate::error::{Error, Result};
use crate::experiments::{
    generate_mask, run_sweep, write_history, write_summary, ExperimentSpec, Instance, NamedConfig,
};
use crate::io::{load_image, load_mask, save_image, save_mask};
use crate::solver::{solve, SolveStatus, SolverConfig};
use crate::tensor::nmse;

const PIXEL_RANGE: [f64; 2] = [0.0, 255.0];

#[derive(Debug, Parser)]
#[command(name = "lrtc", version, about = "Low-rank tensor completion for images", arg_required_else_help = true)]
pub struct Args {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mask an image (or use a given mask) and complete it.
    Complete {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// PNG mask; nonzero pixels are observed. Overrides --ratio.
        #[arg(long)]
        mask: Option<PathBuf>,
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// PNG whose pixels initialize the unobserved entries.
        #[arg(long)]
        warm_start: Option<PathBuf>,
    },
    /// Run every solver config over a range of observation ratios.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',')]
        ratios: Option<Vec<f64>>,
        /// Number of seeds per ratio.
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Exact-recovery check on a synthetic multilinear rank-(2,2,2) tensor.
    SynthTest {
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

pub fn main(args: Args) -> ExitCode {
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_run_file(path: Option<&Path>) -> Result<(RunFile, Option<String>)> {
    match path {
        Some(p) => {
            let (file, text) = RunFile::load(p)?;
            Ok((file, Some(text)))
        }
        None => Ok((RunFile::default(), None)),
    }
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} not found", path.display()),
        )));
    }
    Ok(())
}

/// Executes a command. `Ok(false)` means the command ran but its check failed.
pub fn run(args: Args) -> Result<bool> {
    match args.command {
        Command::Complete {
            input,
            out,
            mask,
            ratio,
            seed,
            config,
            warm_start,
        } => {
            require_file(&input)?;
            for p in mask.iter().chain(&warm_start).chain(&config) {
                require_file(p)?;
            }
            let (mut file, original) = load_run_file(config.as_deref())?;
            file.ratio = ratio.unwrap_or(file.ratio);
            file.seed = seed.unwrap_or(file.seed);
            file.default_clip(PIXEL_RANGE);
            fs::create_dir_all(&out)?;
            complete(&file, &input, &out, mask.as_deref(), warm_start.as_deref())?;
            fs::write(out.join("manifest.toml"), file.manifest("complete", Some(&input), original.as_deref())?)?;
            Ok(true)
        }
        Command::Sweep {
            input,
            out,
            ratios,
            seeds,
            seed,
            config,
        } => {
            require_file(&input)?;
            if let Some(c) = &config {
                require_file(c)?;
            }
            let (mut file, original) = load_run_file(config.as_deref())?;
            if let Some(r) = ratios {
                file.ratios = r;
            }
            file.seeds = seeds.unwrap_or(file.seeds);
            file.seed = seed.unwrap_or(file.seed);
            if file.configs.is_empty() {
                file.configs = default_configs();
            }
            file.default_clip(PIXEL_RANGE);
            fs::create_dir_all(&out)?;
            sweep(&file, &input, &out)?;
            fs::write(out.join("manifest.toml"), file.manifest("sweep", Some(&input), original.as_deref())?)?;
            Ok(true)
        }
        Command::SynthTest { seeds, seed, config } => {
            if let Some(c) = &config {
                require_file(c)?;
            }
            let (mut file, _) = load_run_file(config.as_deref())?;
            file.seeds = seeds.unwrap_or(file.seeds);
            file.seed = seed.unwrap_or(file.seed);
            synth_test(&file)
        }
    }
}

fn complete(
    file: &RunFile,
    input: &Path,
    out: &Path,
    mask_path: Option<&Path>,
    warm_path: Option<&Path>,
) -> Result<()> {
    let truth = load_image(input)?;
    let mask = match mask_path {
        Some(p) => {
            let m = load_mask(p)?;
            truth.check_same_shape(m.shape())?;
            m
        }
        None => generate_mask(truth.shape(), file.ratio, file.seed)?,
    };
    let warm = warm_path.map(load_image).transpose()?;
    let observed = truth.apply_mask(&mask)?;
    info!(
        "completing {} ({:?}) from {:.1}% observed",
        input.display(),
        truth.shape(),
        100.0 * mask.ratio()
    );
    let sol = solve(&observed, &mask, &file.solver, warm.as_ref(), Some(&truth))?;
    info!(
        "{} after {} iterations, lambda = {:.4e}, NMSE = {:.4e}",
        sol.status.as_str(),
        sol.iterations(),
        sol.lambda,
        nmse(&sol.tensor, &truth)?
    );
    save_image(&sol.tensor, out.join("reconstruction.png"))?;
    save_image(&observed, out.join("observed.png"))?;
    save_mask(&mask, out.join("mask.png"))?;
    write_history(&sol.history, BufWriter::new(File::create(out.join("history.csv"))?))?;
    Ok(())
}

fn sweep(file: &RunFile, input: &Path, out: &Path) -> Result<()> {
    let spec = ExperimentSpec {
        instance: Instance::ImageFile(input.to_path_buf()),
        ratios: file.ratios.clone(),
        seeds: file.seed_list(),
        configs: file.named_configs(),
    };
    let result = run_sweep(&spec)?;

    write_summary(&result, BufWriter::new(File::create(out.join("summary.csv"))?))?;
    let hist_dir = out.join("history");
    let img_dir = out.join("images");
    fs::create_dir_all(&hist_dir)?;
    fs::create_dir_all(&img_dir)?;
    let first_seed = spec.seeds[0];
    for cell in &result.cells {
        let stem = format!("{}_r{:.2}_s{}", cell.cfg, cell.ratio, cell.seed);
        write_history(
            &cell.history,
            BufWriter::new(File::create(hist_dir.join(format!("{stem}.csv")))?),
        )?;
        if cell.seed == first_seed {
            save_image(&cell.estimate, img_dir.join(format!("{}_r{:.2}.png", cell.cfg, cell.ratio)))?;
        }
    }
    let truth = load_image(input)?;
    for (ri, &ratio) in spec.ratios.iter().enumerate() {
        let mask = generate_mask(truth.shape(), ratio, crate::experiments::mask_seed(first_seed, ri))?;
        save_image(&truth.apply_mask(&mask)?, img_dir.join(format!("observed_r{ratio:.2}.png")))?;
    }
    for (cfg, ratio) in result.keys() {
        println!(
            "{cfg:>10}  ratio {ratio:.2}  median NMSE {:.4e}  median iters {}",
            result.median_nmse(&cfg, ratio).unwrap(),
            result.median_iterations(&cfg, ratio).unwrap()
        );
    }
    Ok(())
}

/// Shape, ranks and ratio of the synthetic recovery check.
pub const SYNTH_SHAPE: [usize; 3] = [20, 20, 5];
pub const SYNTH_RANKS: [usize; 3] = [2, 2, 2];
pub const SYNTH_RATIO: f64 = 0.6;
pub const SYNTH_NMSE_BOUND: f64 = 1e-2;
/// Used when the config file leaves `lambda` unset.
pub const SYNTH_LAMBDA: f64 = 0.3;

fn synth_test(file: &RunFile) -> Result<bool> {
    let cfg = SolverConfig {
        clip_range: None,
        lambda: file.solver.lambda.or(Some(SYNTH_LAMBDA)),
        ..file.solver.clone()
    };
    let spec = ExperimentSpec {
        instance: Instance::Synthetic {
            shape: SYNTH_SHAPE.to_vec(),
            ranks: SYNTH_RANKS.to_vec(),
            noise_std: 0.0,
        },
        ratios: vec![SYNTH_RATIO],
        seeds: file.seed_list(),
        configs: vec![NamedConfig::new("adaptive", cfg)],
    };
    let result = run_sweep(&spec)?;
    for c in &result.cells {
        println!(
            "seed {}: NMSE {:.3e}, {} iterations, {}",
            c.seed,
            c.nmse,
            c.iterations,
            c.status.as_str()
        );
    }
    let median = result.median_nmse("adaptive", SYNTH_RATIO).unwrap();
    let converged = result.status("adaptive", SYNTH_RATIO) == Some(SolveStatus::Converged);
    let pass = median < SYNTH_NMSE_BOUND && converged;
    println!(
        "{}: median NMSE {median:.3e} (bound {SYNTH_NMSE_BOUND:e}), all converged: {converged}",
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(pass)
}
