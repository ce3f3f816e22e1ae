//! Mode-n unfoldings of a small tensor and folding them back.

use lrtc::DenseTensor;

fn main() -> lrtc::Result<()> {
    let t = DenseTensor::from_fn(vec![2, 3, 2], |i| (i[0] + 10 * i[1] + 100 * i[2]) as f64)?;
    for n in 0..t.order() {
        let m = t.unfold(n)?;
        println!("mode {n}: {} x {}{m}", m.nrows(), m.ncols());
        assert_eq!(DenseTensor::fold(&m, n, t.shape())?, t);
    }
    Ok(())
}
