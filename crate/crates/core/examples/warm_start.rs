//! Warm-start the adaptive solver from the fixed-penalty baseline's output.

use lrtc::experiments::generate_mask;
use lrtc::io::load_image;
use lrtc::{nmse, solve, SolverConfig};

fn main() -> lrtc::Result<()> {
    let truth = load_image(concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/astronaut_64.png"))?;
    let mask = generate_mask(truth.shape(), 0.6, 3)?;
    let observed = truth.apply_mask(&mask)?;
    let clip = Some([0.0, 255.0]);
    let adaptive = SolverConfig { clip_range: clip, ..Default::default() };
    let fixed = SolverConfig { clip_range: clip, ..SolverConfig::fixed_penalty() };

    let base = solve(&observed, &mask, &fixed, None, None)?;
    let cold = solve(&observed, &mask, &adaptive, None, None)?;
    let warm = solve(&observed, &mask, &adaptive, Some(&base.tensor), None)?;
    for (name, sol) in [("baseline", &base), ("cold", &cold), ("warm", &warm)] {
        println!("{name:>8}: {:>5} iterations, NMSE {:.5e}", sol.iterations(), nmse(&sol.tensor, &truth)?);
    }
    Ok(())
}
