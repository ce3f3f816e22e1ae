//! Matrix completion by Soft-Impute on a rank-2 matrix.

use lrtc::experiments::generate_mask;
use lrtc::solver::soft_impute;
use nalgebra::DMatrix;

fn main() -> lrtc::Result<()> {
    let (rows, cols) = (30, 25);
    let a = DMatrix::from_fn(rows, 2, |i, j| ((i * (j + 1)) % 7) as f64 - 3.0);
    let b = DMatrix::from_fn(2, cols, |i, j| ((j + 3 * i) % 5) as f64 - 2.0);
    let truth = a * b;
    let mask = generate_mask(&[rows, cols], 0.5, 1)?;
    let observed = DMatrix::from_fn(rows, cols, |i, j| if mask.is_observed(i + rows * j) { truth[(i, j)] } else { 0.0 });
    for lambda in [5.0, 1.0, 0.1] {
        let (x, iters) = soft_impute(&observed, &mask, lambda, 5000, 1e-8)?;
        let err = (&x - &truth).norm_squared() / truth.norm_squared();
        println!("lambda {lambda:>4}: {iters:>4} iterations, NMSE {err:.3e}");
    }
    Ok(())
}
