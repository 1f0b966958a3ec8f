use igs_core::igs::{diamond, path2, theta};
use igs_core::pharmonic::*;
use igs_core::replacement::{word_of, LevelTower};
use proptest::prelude::*;

/// Series–parallel reduction of the diamond: M_p and the bridge/branch
/// gradients (a, b).
fn diamond_oracle(p: f64) -> (f64, f64, f64) {
    let r = 2f64.powf(-1.0 / (p - 1.0));
    let a = 1.0 / (2.0 + 2.0 * r);
    let b = a * r;
    (2.0 * a.powf(p) + 4.0 * b.powf(p), a, b)
}

#[test]
fn diamond_level_one() {
    let t = LevelTower::new(diamond()).unwrap();
    let prof = Profile::new(&t, 2.0).unwrap();
    assert!((prof.m_p - 1.0 / 3.0).abs() < 1e-8);
    let want = [1.0, 2.0 / 3.0, 0.5, 0.5, 1.0 / 3.0, 0.0];
    for (u, w) in prof.potential().iter().zip(want) {
        assert!((u - w).abs() < 1e-8);
    }
}

#[test]
fn diamond_flow_is_p_invariant() {
    let t = LevelTower::new(diamond()).unwrap();
    let reference = Profile::new(&t, 2.0).unwrap().solution.flow;
    let mags: Vec<f64> = reference.iter().map(|x| x.abs()).collect();
    for (m, w) in mags.iter().zip([1.0, 0.5, 0.5, 0.5, 0.5, 1.0]) {
        assert!((m - w).abs() < 1e-6);
    }
    for p in DEFAULT_P_GRID {
        let flow = Profile::new(&t, p).unwrap().solution.flow;
        for (a, b) in flow.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-6, "p={p}");
        }
    }
}

#[test]
fn capacity_scaling_and_gradient_products() {
    let mut t = LevelTower::new(diamond()).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let prof = Profile::new(&t, p).unwrap();
        let g1 = prof.gradient().to_vec();
        for n in 1..=3 {
            let sol = solve_level_n(&mut t, n, p).unwrap();
            let want = prof.m_p.powi(n as i32);
            assert!((sol.capacity - want).abs() <= 1e-6 * want);
            assert!((sol.duality_product() - 1.0).abs() < 1e-6);
            for e in 0..sol.gradient.len() {
                let prod: f64 = word_of(e, n, 6).iter().map(|&l| g1[l]).product();
                assert!((sol.gradient[e] - prod).abs() < 1e-6, "p={p} n={n} e={e}");
            }
        }
    }
}

#[test]
fn uniformity_on_symmetric_presets() {
    for igs in [diamond(), theta(2, 2).unwrap()] {
        let t = LevelTower::new(igs).unwrap();
        let rep = check_conductive_uniform(&t, &DEFAULT_P_GRID, 1e-7).unwrap();
        assert!(rep.checks.passed());
        assert!(rep.max_residual <= 1e-7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn path_capacity(p in 1.2f64..8.0) {
        let t = LevelTower::new(path2()).unwrap();
        let prof = Profile::new(&t, p).unwrap();
        prop_assert!((prof.m_p - 2f64.powf(1.0 - p)).abs() < 1e-8);
    }

    #[test]
    fn diamond_matches_series_parallel(p in 1.2f64..8.0) {
        let t = LevelTower::new(diamond()).unwrap();
        let prof = Profile::new(&t, p).unwrap();
        let (m, a, b) = diamond_oracle(p);
        prop_assert!((prof.m_p - m).abs() < 1e-8 * m.max(1e-300).max(1.0));
        let mut g = prof.gradient().to_vec();
        g.sort_by(f64::total_cmp);
        prop_assert!((g[0] - b).abs() < 1e-7 && (g[5] - a).abs() < 1e-7);
        prop_assert!((prof.solution.duality_product() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn theta_walk_dimension_is_p(p in 1.2f64..8.0) {
        let t = LevelTower::new(theta(2, 2).unwrap()).unwrap();
        let c = constants(&t, p).unwrap();
        prop_assert!((c.d_wp - p).abs() < 1e-6);
        prop_assert!(c.dwp_equals_p);
    }
}
