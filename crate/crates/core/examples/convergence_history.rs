//! Step the solver by hand and log residuals and the penalty to history.csv.

use std::fs::File;

use lrtc::experiments::{generate_mask, synthetic_lowrank, write_history};
use lrtc::solver::{init_state, relative_residuals, step};
use lrtc::SolverConfig;

fn main() -> lrtc::Result<()> {
    let shape = [12, 10, 4];
    let truth = synthetic_lowrank(&shape, &[2, 2, 2], 5, 0.0)?;
    let mask = generate_mask(&shape, 0.5, 5)?;
    let observed = truth.apply_mask(&mask)?;
    let cfg = SolverConfig { lambda: Some(0.3), ..Default::default() };

    let mut state = init_state(&observed, &mask, &cfg)?;
    let mut history = Vec::new();
    for _ in 0..cfg.t_max {
        let rec = step(&mut state, &observed, &mask, &cfg)?;
        let (rel_r, rel_s) = relative_residuals(&state, &rec);
        if rec.t % 25 == 0 {
            println!("t {:>4}  r {:.3e}  s {:.3e}  rho {:.3}", rec.t, rec.r, rec.s, rec.rho);
        }
        history.push(rec);
        if rel_r.max(rel_s) < cfg.tol {
            break;
        }
    }
    write_history(&history, File::create("history.csv")?)?;
    println!("{} iterations written to history.csv", history.len());
    Ok(())
}
