//! Sweep observation ratios on a synthetic tensor and write summary.csv.

use std::fs::File;

use lrtc::experiments::{run_sweep, write_summary, ExperimentSpec, Instance, NamedConfig};
use lrtc::SolverConfig;

fn main() -> lrtc::Result<()> {
    let spec = ExperimentSpec {
        instance: Instance::Synthetic { shape: vec![15, 15, 4], ranks: vec![2, 2, 2], noise_std: 0.01 },
        ratios: vec![0.3, 0.5, 0.7],
        seeds: vec![0, 1, 2],
        configs: vec![
            NamedConfig::new("adaptive", SolverConfig { lambda: Some(0.3), ..Default::default() }),
            NamedConfig::new("fixed", SolverConfig { lambda: Some(0.3), ..SolverConfig::fixed_penalty() }),
        ],
    };
    let res = run_sweep(&spec)?;
    for (cfg, ratio) in res.keys() {
        println!(
            "{cfg:>8} {ratio:.1}: median NMSE {:.3e}, median iterations {}",
            res.median_nmse(&cfg, ratio).unwrap(),
            res.median_iterations(&cfg, ratio).unwrap()
        );
    }
    write_summary(&res, File::create("summary.csv")?)?;
    Ok(())
}
