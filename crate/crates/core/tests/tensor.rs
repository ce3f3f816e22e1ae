mod common;

use lrtc::{nmse, DenseTensor, ObservationMask};
use proptest::collection::vec;
use proptest::prelude::*;

fn tensor_strategy() -> impl Strategy<Value = DenseTensor> {
    vec(1usize..=6, 1..=4).prop_flat_map(|shape| {
        let len = shape.iter().product::<usize>();
        vec(-100.0f64..100.0, len).prop_map(move |data| DenseTensor::new(shape.clone(), data).unwrap())
    })
}

fn tensor_and_mask() -> impl Strategy<Value = (DenseTensor, ObservationMask)> {
    tensor_strategy().prop_flat_map(|t| {
        let len = t.len();
        let shape = t.shape().to_vec();
        vec(any::<bool>(), len)
            .prop_map(move |flags| (t.clone(), ObservationMask::from_flags(shape.clone(), flags).unwrap()))
    })
}

#[test]
fn enumeration_oracle_agrees_on_2x2x2() {
    let data: Vec<f64> = (1..=8).map(f64::from).collect();
    let t = DenseTensor::new(vec![2, 2, 2], data.clone()).unwrap();
    for n in 0..3 {
        assert_eq!(t.unfold(n).unwrap(), common::unfold(&data, &[2, 2, 2], n));
    }
}

proptest! {
    #[test]
    fn fold_inverts_unfold(t in tensor_strategy()) {
        for n in 0..t.order() {
            let m = t.unfold(n).unwrap();
            prop_assert_eq!(&DenseTensor::fold(&m, n, t.shape()).unwrap(), &t);
        }
    }

    #[test]
    fn unfold_matches_enumeration(t in tensor_strategy()) {
        for n in 0..t.order() {
            let m = t.unfold(n).unwrap();
            prop_assert_eq!(&m, &common::unfold(t.data(), t.shape(), n));
            let (rows, cols) = t.unfolding_dims(n).unwrap();
            prop_assert_eq!((m.nrows(), m.ncols()), (rows, cols));
            prop_assert_eq!(rows * cols, t.len());
        }
    }

    #[test]
    fn unfold_preserves_entries_and_norm(t in tensor_strategy()) {
        let mut want: Vec<f64> = t.data().to_vec();
        want.sort_by(f64::total_cmp);
        for n in 0..t.order() {
            let m = t.unfold(n).unwrap();
            let mut got: Vec<f64> = m.iter().copied().collect();
            got.sort_by(f64::total_cmp);
            prop_assert_eq!(&got, &want);
            prop_assert!((m.norm() - t.frobenius_norm()).abs() <= 1e-12 * t.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn masking_is_idempotent((t, mask) in tensor_and_mask()) {
        let once = t.apply_mask(&mask).unwrap();
        prop_assert_eq!(&once.apply_mask(&mask).unwrap(), &once);
        prop_assert_eq!(mask.num_observed() + mask.num_unobserved(), t.len());
        prop_assert!(mask.observed().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn nmse_properties(t in tensor_strategy(), e in tensor_strategy()) {
        prop_assume!(t.squared_norm() > 0.0);
        prop_assert_eq!(nmse(&t, &t).unwrap(), 0.0);
        if e.shape() == t.shape() {
            let a = nmse(&e, &t).unwrap();
            let b = nmse(&e.map(|v| -v), &t.map(|v| -v)).unwrap();
            prop_assert!((a - b).abs() <= 1e-15 * a.max(1.0));
        }
    }
}
