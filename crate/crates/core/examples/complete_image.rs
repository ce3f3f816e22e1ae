//! Complete a 64x64 image from 40% of its pixels.
//!
//! cargo run --release --example complete_image -- [input.png] [out.png]

use lrtc::experiments::generate_mask;
use lrtc::io::{load_image, save_image};
use lrtc::{nmse, solve, SolverConfig};

fn main() -> lrtc::Result<()> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/testdata/astronaut_64.png").into());
    let out = args.next().unwrap_or_else(|| "completed.png".into());

    let truth = load_image(&input)?;
    let mask = generate_mask(truth.shape(), 0.4, 7)?;
    let observed = truth.apply_mask(&mask)?;
    let cfg = SolverConfig { clip_range: Some([0.0, 255.0]), ..Default::default() };
    let sol = solve(&observed, &mask, &cfg, None, None)?;
    println!(
        "{} in {} iterations (lambda {:.3}), NMSE {:.4e}",
        sol.status.as_str(),
        sol.iterations(),
        sol.lambda,
        nmse(&sol.tensor, &truth)?
    );
    save_image(&sol.tensor, &out)?;
    println!("wrote {out}");
    Ok(())
}
