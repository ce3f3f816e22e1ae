//! Singular value thresholding and the nuclear norm.

use lrtc::svt::{nuclear_norm, svt, thin_svd};
use nalgebra::DMatrix;

fn show(s: &nalgebra::DVector<f64>) -> String {
    s.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
}

fn main() -> lrtc::Result<()> {
    let a = DMatrix::from_row_slice(3, 4, &[4.0, 1.0, 0.0, 2.0, 1.0, 3.0, 1.0, 0.0, 0.0, 1.0, 2.0, 1.0]);
    println!("singular values: {}", show(&thin_svd(&a)?.s));
    println!("nuclear norm: {:.4}", nuclear_norm(&a)?);
    for tau in [0.5, 2.0, 4.0] {
        let svd = thin_svd(&svt(&a, tau)?)?;
        println!("tau = {tau}: rank {}, singular values {}", svd.rank(), show(&svd.s));
    }
    Ok(())
}
