use lrtc::experiments::{
    generate_mask, mask_seed, read_history, run_sweep, write_history, write_summary, ExperimentSpec,
    Instance, NamedConfig,
};
use lrtc::solver::{IterationRecord, SolverConfig};
use proptest::prelude::*;

fn small_spec() -> ExperimentSpec {
    ExperimentSpec {
        instance: Instance::Synthetic {
            shape: vec![6, 6, 3],
            ranks: vec![2, 2, 1],
            noise_std: 0.0,
        },
        ratios: vec![0.4, 0.7, 1.0],
        seeds: vec![3, 4],
        configs: vec![
            NamedConfig::new("adaptive", SolverConfig { t_max: 60, ..Default::default() }),
            NamedConfig::new("fixed", SolverConfig { t_max: 60, ..SolverConfig::fixed_penalty() }),
            NamedConfig::new("warm", SolverConfig { t_max: 60, ..Default::default() }).warm_started_from("fixed"),
        ],
    }
}

#[test]
fn sweep_grid_and_reproducibility() {
    let spec = small_spec();
    let a = run_sweep(&spec).unwrap();
    assert_eq!(a.cells.len(), 3 * 3 * 2);
    assert_eq!(a.keys().len(), 9);
    for c in a.cells.iter().filter(|c| c.ratio == 1.0) {
        assert_eq!(c.nmse, 0.0, "{} seed {}", c.cfg, c.seed);
    }
    let b = run_sweep(&spec).unwrap();
    for (x, y) in a.cells.iter().zip(&b.cells) {
        assert_eq!((&x.cfg, x.ratio, x.seed), (&y.cfg, y.ratio, y.seed));
        assert_eq!(x.nmse, y.nmse);
        assert_eq!(x.iterations, y.iterations);
        assert_eq!(x.history, y.history);
    }
}

#[test]
fn configs_share_masks() {
    // Identical configs under different names must produce identical cells,
    // which only happens if they see the same mask.
    let mut spec = small_spec();
    spec.configs = vec![
        NamedConfig::new("one", SolverConfig { t_max: 20, ..Default::default() }),
        NamedConfig::new("two", SolverConfig { t_max: 20, ..Default::default() }),
    ];
    let res = run_sweep(&spec).unwrap();
    for &ratio in &spec.ratios {
        for &seed in &spec.seeds {
            let a = res.cell("one", ratio, seed).unwrap();
            let b = res.cell("two", ratio, seed).unwrap();
            assert_eq!(a.history, b.history);
        }
    }
    let m0 = generate_mask(&[6, 6, 3], 0.4, mask_seed(3, 0)).unwrap();
    let m1 = generate_mask(&[6, 6, 3], 0.4, mask_seed(3, 1)).unwrap();
    assert_ne!(m0, m1);
}

#[test]
fn summary_has_one_row_per_key() {
    let res = run_sweep(&small_spec()).unwrap();
    let mut buf = Vec::new();
    write_summary(&res, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("cfg,ratio,nmse,iters,status"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows[0].starts_with("adaptive,0.4,"));
    assert!(rows.iter().all(|r| r.ends_with(",converged") || r.ends_with(",max_iters")));
}

#[test]
fn rejects_bad_specs() {
    let mut spec = small_spec();
    spec.ratios = vec![0.0, 0.5];
    assert!(run_sweep(&spec).is_err());
    let mut spec = small_spec();
    spec.instance = Instance::ImageFile("/nonexistent/image.png".into());
    assert!(run_sweep(&spec).is_err());
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e300f64..1e300,
        -1.0f64..1.0,
        Just(0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

fn record() -> impl Strategy<Value = IterationRecord> {
    (0usize..100_000, finite(), finite(), finite(), finite(), proptest::option::of(finite())).prop_map(
        |(t, r, s, rho, objective, nmse)| IterationRecord { t, r, s, rho, objective, nmse },
    )
}

proptest! {
    #[test]
    fn history_round_trips(h in proptest::collection::vec(record(), 0..20)) {
        let mut buf = Vec::new();
        write_history(&h, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        prop_assert_eq!(text.lines().count(), h.len() + 1);
        prop_assert_eq!(read_history(buf.as_slice()).unwrap(), h);
    }
}
