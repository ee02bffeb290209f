use l1ilc_core::qp::{kkt_residual, solve_qp, solve_qp_with_hint, QpProblem};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random strictly convex problem whose constraints hold at `x0`.
fn problem(seed: u64, n: usize, m: usize) -> (QpProblem, DVector<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let r = DMatrix::from_fn(n, n, |_, _| u(-1.0, 1.0));
    let h = &r * r.transpose() + DMatrix::identity(n, n) * 0.1;
    let g = DVector::from_fn(n, |_, _| u(-5.0, 5.0));
    let a = DMatrix::from_fn(m, n, |_, _| u(-1.0, 1.0));
    let x0 = DVector::from_fn(n, |_, _| u(-0.5, 0.5));
    let b = &a * &x0 + DVector::from_fn(m, |_, _| u(0.0, 1.0));
    (QpProblem::new(h, g, a, b).unwrap(), x0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn optimum_beats_random_feasible_points(seed in any::<u64>(), n in 2usize..12, m in 1usize..20) {
        let (p, x0) = problem(seed, n, m);
        let sol = solve_qp(&p).unwrap();
        let x = DVector::from_column_slice(&sol.x);
        let f = p.objective(&x);
        prop_assert!(kkt_residual(&p, &sol.x, &sol.lambdas) <= 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut tried = 0;
        while tried < 100 {
            // Shrink random directions toward the interior point until feasible.
            let dir = DVector::from_fn(n, |_, _| rng.random_range(-2.0..2.0));
            let mut t = 1.0;
            let cand = loop {
                let c = &x0 + &dir * t;
                if (&p.a * &c - &p.b).max() <= 0.0 {
                    break c;
                }
                t *= 0.5;
            };
            prop_assert!(f <= p.objective(&cand) + 1e-9 * (1.0 + f.abs()));
            tried += 1;
        }
    }

    #[test]
    fn warm_starts_give_the_same_optimum(seed in any::<u64>(), n in 2usize..12, m in 1usize..20) {
        let (p, _) = problem(seed, n, m);
        let cold = solve_qp(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let hint: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.5)).collect();
        let mut reversed: Vec<usize> = (0..m).collect();
        reversed.reverse();
        for h in [hint, reversed] {
            let warm = solve_qp_with_hint(&p, &h).unwrap();
            for (a, b) in cold.x.iter().zip(&warm.x) {
                prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
            }
        }
    }
}

#[test]
fn active_rows_are_independent_for_one_sided_bounds() {
    // Upper and lower acceleration rows: at most one of each pair is active.
    let n = 30;
    let dt = 0.1;
    let d = l1ilc_core::ilc::second_difference_matrix(n, dt).unwrap();
    let h = DMatrix::identity(n, n);
    let g = DVector::from_fn(n, |i, _| -10.0 * ((i as f64) * 0.7).sin());
    let mut a = DMatrix::zeros(2 * (n - 2), n);
    a.view_mut((0, 0), (n - 2, n)).copy_from(&d);
    a.view_mut((n - 2, 0), (n - 2, n)).copy_from(&(-&d));
    let b = DVector::from_element(2 * (n - 2), 50.0);
    let sol = solve_qp(&QpProblem::new(h, g, a.clone(), b).unwrap()).unwrap();
    assert!(!sol.active_set.is_empty());
    let rows: Vec<usize> = sol.active_set.iter().map(|&i| i % (n - 2)).collect();
    let mut uniq = rows.clone();
    uniq.dedup();
    assert_eq!(uniq.len(), rows.len());
    let act = DMatrix::from_fn(sol.active_set.len(), n, |r, c| a[(sol.active_set[r], c)]);
    assert_eq!(act.rank(1e-10), sol.active_set.len());
}
