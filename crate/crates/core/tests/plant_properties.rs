use l1ilc_core::plant::{plant_step, slow_preset, trial_rng, DisturbanceSpec, PlantState, Wind};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn disturbance_is_lipschitz(v in -20.0..20.0f64, w in -20.0..20.0f64, t in 0.0..10.0f64) {
        let d = DisturbanceSpec::default();
        prop_assert!((d.eval(0, t, v) - d.eval(0, t, w)).abs() <= d.l * (v - w).abs() + 1e-15);
        prop_assert!(d.eval(0, t, w).abs() <= d.l * w.abs() + d.l0 + 1e-15);
    }
}

#[test]
fn seeded_runs_are_bit_identical() {
    let cfg = slow_preset();
    let mut dist = DisturbanceSpec::default();
    dist.wind.push(Wind {
        axis: 1,
        magnitude: 0.5,
        start: 0.1,
        end: 0.3,
        magnitude_std: 0.1,
    });
    let run = || {
        let mut rng = trial_rng(42, 1, 2);
        let dist = dist.realize(&mut rng);
        let mut p = PlantState::new(&cfg, rng).unwrap();
        p.reset(&[0.0, 0.0, 1.0]).unwrap();
        (0..500)
            .map(|k| plant_step(&mut p, &dist, &[0.1 * (k as f64).sin(), 0.2, -0.1], 1e-3).unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(run(), run());
}
