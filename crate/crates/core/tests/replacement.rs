use igs_core::graph::MultiGraph;
use igs_core::igs::{preset, CONCRETE_PRESETS};
use igs_core::replacement::{edge_of_word, word_of, LevelTower, Proj};
use proptest::prelude::*;

fn tower(name: &str, n: usize) -> LevelTower {
    let mut t = LevelTower::new(preset(name).unwrap()).unwrap();
    t.ensure(n).unwrap();
    t
}

#[test]
fn structural_suite_on_all_presets() {
    for name in CONCRETE_PRESETS {
        let mut t = LevelTower::new(preset(name).unwrap()).unwrap();
        let rep = t.verify_sm(3).unwrap();
        for c in &rep.checks {
            assert!(c.passed, "{name} {}: {}", c.name, c.detail);
        }
    }
}

#[test]
fn level_counts_follow_the_replacement_rule() {
    for name in CONCRETE_PRESETS {
        let t = tower(name, 3);
        let igs = t.igs();
        let (v1, e1, k) = (igs.vertex_count(), igs.edge_count(), igs.gluing_size());
        // |V_{n+1}| = |E_n|(|V₁| − 2k) + |V_n| k: interior copies plus glued boundary
        for n in 1..3 {
            let (vn, en) = (t.level(n).unwrap().vertex_count(), t.level(n).unwrap().edge_count());
            assert_eq!(t.level(n + 1).unwrap().edge_count(), en * e1);
            assert_eq!(t.level(n + 1).unwrap().vertex_count(), en * (v1 - 2 * k) + vn * k, "{name} n={n}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_is_associative(pi in 0usize..3, e in any::<usize>(), f in any::<usize>(), n in 0usize..2, k in 0usize..2) {
        let name = ["diamond", "theta22", "pendant"][pi];
        let t = tower(name, 3);
        let m = 3 - n - k;
        let e = e % t.level(n).unwrap().edge_count();
        let f = f % t.level(k).unwrap().edge_count();
        let ef = t.concat_edges(e, f, k);
        let outer = t.sigma(n, e, k).unwrap();
        let inner = t.sigma(k, f, m).unwrap();
        let direct = t.sigma(n + k, ef, m).unwrap();
        for x in 0..inner.len() {
            // σ_{e,k+m} ∘ σ_{f,m} = σ_{e·f,m} with σ_{f,m} landing in V_{k+m}
            let via = t.sigma_vertex(n, e, k + m, inner[x]).unwrap();
            prop_assert_eq!(via, direct[x]);
        }
        prop_assert_eq!(outer.len(), t.level(k).unwrap().vertex_count());
    }

    #[test]
    fn projection_inverts_sigma_on_interiors(pi in 0usize..3, e in any::<usize>()) {
        let name = ["diamond", "theta22", "lopsided"][pi];
        let t = tower(name, 3);
        let e = e % t.level(1).unwrap().edge_count();
        for (x, &y) in t.sigma(1, e, 2).unwrap().iter().enumerate() {
            match t.project_vertex(2, 0, x).unwrap() {
                Proj::Edge(_) => prop_assert_eq!(t.project_vertex(3, 1, y).unwrap(), Proj::Edge(e)),
                Proj::Vertex(_) => {}
            }
        }
    }

    #[test]
    fn words_round_trip(e in 0usize..1296) {
        let w = word_of(e, 4, 6);
        prop_assert_eq!(w.len(), 4);
        prop_assert_eq!(edge_of_word(&w, 6).unwrap(), e);
    }

    #[test]
    fn graph_distance_is_a_metric(extra in proptest::collection::vec((0usize..8, 0usize..8), 0..10)) {
        let mut edges: Vec<(usize, usize)> = (0..7).map(|i| (i, i + 1)).collect();
        edges.extend(extra.into_iter().filter(|(a, b)| a != b));
        let g = MultiGraph::unlabeled(8, edges).unwrap();
        let d: Vec<Vec<usize>> = (0..8).map(|v| g.bfs_distances(&[v]).into_iter().map(Option::unwrap).collect()).collect();
        for a in 0..8 {
            prop_assert_eq!(d[a][a], 0);
            for b in 0..8 {
                prop_assert_eq!(d[a][b], d[b][a]);
                for c in 0..8 {
                    prop_assert!(d[a][c] <= d[a][b] + d[b][c]);
                }
            }
        }
    }

    #[test]
    fn automorphisms_form_a_group(extra in proptest::collection::vec((0usize..6, 0usize..6), 0..6)) {
        let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.extend(extra.into_iter().filter(|(a, b)| a != b));
        let g = MultiGraph::unlabeled(6, edges).unwrap();
        let auts = g.automorphisms().unwrap();
        prop_assert!(auts.contains(&(0..6).collect::<Vec<_>>()));
        for a in &auts {
            for b in &auts {
                let ab: Vec<usize> = (0..6).map(|v| a[b[v]]).collect();
                prop_assert!(auts.contains(&ab));
            }
        }
    }
}
