use igs_core::igs::{diamond, path2, pendant, theta};
use igs_core::measures::*;
use igs_core::pharmonic::{profiles, solve_capacity, Profile};
use igs_core::replacement::{word_of, LevelTower};

/// Symmetric reduction of the diamond: bridge gradient a, branch gradient b
/// with 2a + 2b = 1 and a^{p−1} = 2b^{p−1}.
fn diamond_bridge_weight(p: f64) -> f64 {
    let r = 2f64.powf(-1.0 / (p - 1.0));
    let a = 1.0 / (2.0 + 2.0 * r);
    let b = a * r;
    a.powf(p) / (2.0 * a.powf(p) + 4.0 * b.powf(p))
}

fn t(igs: igs_core::igs::Igs) -> LevelTower {
    LevelTower::new(igs).unwrap()
}

#[test]
fn weights_of_presets() {
    let d = t(diamond());
    let w = energy_measure_weights(&d, 2.0).unwrap();
    let bridges: Vec<usize> = (0..6).filter(|&e| w.weight[e] > 0.2).collect();
    assert_eq!(bridges.len(), 2);
    for (e, &x) in w.weight.iter().enumerate() {
        let want = if bridges.contains(&e) { 1.0 / 3.0 } else { 1.0 / 12.0 };
        assert!((x - want).abs() < 1e-9);
    }
    for p in [1.5, 3.0, 4.0] {
        let w = energy_measure_weights(&d, p).unwrap();
        let top = w.weight.iter().copied().fold(0.0, f64::max);
        assert!((top - diamond_bridge_weight(p)).abs() < 1e-9, "p={p}");
    }
    assert!((diamond_bridge_weight(3.0) - 0.292893218813).abs() < 1e-11);
    let th = energy_measure_weights(&t(theta(2, 2).unwrap()), 3.0).unwrap();
    assert!(th.weight.iter().all(|x| (x - 0.25).abs() < 1e-9));
    let pa = energy_measure_weights(&t(path2()), 1.5).unwrap();
    assert!(pa.weight.iter().all(|x| (x - 0.5).abs() < 1e-9));
}

#[test]
fn product_law_against_level_solve() {
    let mut d = t(diamond());
    d.ensure(2).unwrap();
    for p in [1.5, 2.0, 3.0] {
        let w = energy_measure_weights(&d, p).unwrap();
        let lvl = d.level(2).unwrap();
        let sol = solve_capacity(&lvl.graph, &d.i_plus(2).unwrap(), &d.i_minus(2).unwrap(), p).unwrap();
        for e in 0..lvl.edge_count() {
            let direct = sol.gradient[e].powf(p) / sol.capacity;
            assert!((w.word_measure(&word_of(e, 2, 6)) - direct).abs() < 1e-9);
        }
    }
}

#[test]
fn reference_classification() {
    for (igs, ac) in [(path2(), true), (theta(2, 2).unwrap(), true), (diamond(), false)] {
        let tw = t(igs);
        for p in [1.5, 2.0, 3.0] {
            let r = classify_vs_reference(&tw, &Profile::new(&tw, p).unwrap(), DEFAULT_TOL).unwrap();
            assert_eq!(r.verdict == ReferenceVerdict::AbsolutelyContinuous, ac);
        }
    }
}

#[test]
fn cross_and_sobolev() {
    let d = t(diamond());
    let grid = [1.25, 1.5, 2.0, 3.0, 4.0, 8.0];
    let profs = profiles(&d, &grid).unwrap();
    let c = classify_cross_p(&profs[2], &profs[3], DEFAULT_TOL);
    assert!(c.singular);
    let s = classify_sobolev(&profs, 2.0, 3.0, DEFAULT_TOL).unwrap();
    assert_eq!(s.verdict, SobolevVerdict::Singular);
    assert!(s.flow_deviation < 1e-6);

    let th = t(theta(2, 2).unwrap());
    let profs = profiles(&th, &grid).unwrap();
    assert!(!classify_cross_p(&profs[2], &profs[3], DEFAULT_TOL).singular);
    assert_eq!(classify_sobolev(&profs, 2.0, 3.0, DEFAULT_TOL).unwrap().verdict, SobolevVerdict::NotSingular);

    // the pendant edge carries no energy
    let pe = t(pendant());
    let profs = profiles(&pe, &grid).unwrap();
    assert_eq!(classify_sobolev(&profs, 2.0, 3.0, DEFAULT_TOL).unwrap().verdict, SobolevVerdict::Undecided);
    let rep = singularity_report(&pe, &profs, &grid, DEFAULT_TOL).unwrap();
    assert!(matches!(rep.per_p[2].doubling, DoublingReport::SigmaPorous { ref zero_edges, .. } if zero_edges == &vec![3]));
}

#[test]
fn doubling_constants() {
    let w = energy_measure_weights(&t(diamond()), 2.0).unwrap();
    match doubling_report(&w, DEFAULT_TOL) {
        DoublingReport::Doubling { constant, .. } => assert!((constant - 4.0).abs() < 1e-8),
        other => panic!("{other:?}"),
    }
    let w = energy_measure_weights(&t(theta(2, 2).unwrap()), 2.0).unwrap();
    match doubling_report(&w, DEFAULT_TOL) {
        DoublingReport::Doubling { constant, .. } => assert!((constant - 1.0).abs() < 1e-8),
        other => panic!("{other:?}"),
    }
}

#[test]
fn slln() {
    let d = t(diamond());
    let w = energy_measure_weights(&d, 2.0).unwrap();
    let uni = BernoulliWeights::uniform(6);
    let kl: f64 = w.weight.iter().map(|x| x * (6.0 * x).ln()).sum();
    let r = slln_experiment(&w, &uni, 2000, 300, 42, DEFAULT_ALPHA, DEFAULT_TOL).unwrap();
    assert!((r.kl_divergence - kl).abs() < 1e-12);
    assert!((r.mean - kl).abs() <= 3.0 * r.std_error, "{} vs {kl} ± {}", r.mean, r.std_error);
    assert_eq!(r.verdict, SllnVerdict::EmpiricallySingular);
    let again = slln_experiment(&w, &uni, 2000, 300, 42, DEFAULT_ALPHA, DEFAULT_TOL).unwrap();
    assert_eq!(r.mean.to_bits(), again.mean.to_bits());

    let th = energy_measure_weights(&t(theta(2, 2).unwrap()), 2.0).unwrap();
    let r = slln_experiment(&th, &BernoulliWeights::uniform(4), 2000, 300, 42, DEFAULT_ALPHA, DEFAULT_TOL).unwrap();
    assert_eq!(r.verdict, SllnVerdict::NotSeparated);

    let pe = energy_measure_weights(&t(pendant()), 2.0).unwrap();
    let r = slln_experiment(&BernoulliWeights::uniform(4), &pe, 50, 20, 1, DEFAULT_ALPHA, DEFAULT_TOL).unwrap();
    assert_eq!(r.verdict, SllnVerdict::SupportMismatch);
}
