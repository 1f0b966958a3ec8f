use std::time::Instant;

use igs_core::igs::{diamond, path2, theta};
use igs_core::limit_metric::*;
use igs_core::replacement::{LevelTower, Proj};

/// Brute force over families of at most `max` cells of length ≤ n: the
/// union of their vertex sets must contain v, w and be connected through
/// shared vertices.
fn enumerate_dn(t: &LevelTower, n: usize, v: usize, w: usize, max: usize) -> f64 {
    let cx = CellComplex::new(t, n).unwrap();
    let l = t.igs().l_star().unwrap() as f64;
    let mut cells = Vec::new();
    for k in 0..=n {
        for e in 0..t.level(k).unwrap().edge_count() {
            cells.push((l.powi(-(k as i32)), cx.cell_vertices(k, e).unwrap()));
        }
    }
    let mut best = f64::INFINITY;
    let mut chosen = Vec::new();
    fn rec(cells: &[(f64, Vec<usize>)], start: usize, chosen: &mut Vec<usize>, max: usize, v: usize, w: usize, best: &mut f64) {
        if !chosen.is_empty() {
            let weight: f64 = chosen.iter().map(|&i| cells[i].0).sum();
            if weight < *best && admissible(cells, chosen, v, w) {
                *best = weight;
            }
        }
        if chosen.len() == max {
            return;
        }
        for i in start..cells.len() {
            chosen.push(i);
            rec(cells, i + 1, chosen, max, v, w, best);
            chosen.pop();
        }
    }
    fn admissible(cells: &[(f64, Vec<usize>)], chosen: &[usize], v: usize, w: usize) -> bool {
        let has = |c: usize, x: usize| cells[c].1.contains(&x);
        if !chosen.iter().any(|&c| has(c, v)) || !chosen.iter().any(|&c| has(c, w)) {
            return false;
        }
        let mut seen = vec![false; chosen.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..chosen.len() {
                if !seen[j] && cells[chosen[i]].1.iter().any(|x| cells[chosen[j]].1.contains(x)) {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
    rec(&cells, 0, &mut chosen, max, v, w, &mut best);
    best
}

#[test]
fn diamond_search_matches_enumeration() {
    let mut t = LevelTower::new(diamond()).unwrap();
    t.ensure(2).unwrap();
    let cx = CellComplex::new(&t, 2).unwrap();
    // two vertices strictly inside the first level-1 cell
    let inside: Vec<usize> = (0..t.level(2).unwrap().vertex_count())
        .filter(|&x| t.project_vertex(2, 1, x).unwrap() == Proj::Edge(0))
        .collect();
    assert!(inside.len() >= 2);
    for i in 0..inside.len() {
        for j in i + 1..inside.len() {
            let (v, w) = (inside[i], inside[j]);
            let d = cx.dn(v, w).unwrap();
            assert!(d <= 0.5 + 1e-12);
            let brute = enumerate_dn(&t, 2, v, w, 4);
            assert!((d - brute).abs() < 1e-12, "{v},{w}: {d} vs {brute}");
        }
    }
}

#[test]
fn visual_metric_on_diamond() {
    let mut t = LevelTower::new(diamond()).unwrap();
    t.ensure(6).unwrap();
    let start = Instant::now();
    let rep = check_visual_metric(&t, 6, 200, 42).unwrap();
    eprintln!("visual check {:?}, A = {}", start.elapsed(), rep.visual_constant);
    for c in &rep.checks.checks {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
    assert!(rep.visual_constant.is_finite() && rep.visual_constant <= 4.0);
}

#[test]
fn visual_metric_on_theta_and_path() {
    for igs in [theta(2, 2).unwrap(), path2()] {
        let mut t = LevelTower::new(igs).unwrap();
        t.ensure(5).unwrap();
        let rep = check_visual_metric(&t, 5, 100, 7).unwrap();
        assert!(rep.checks.passed(), "{:?}", rep.checks.failures().collect::<Vec<_>>());
    }
}

#[test]
fn triangle_with_slack() {
    for igs in [diamond(), theta(2, 2).unwrap()] {
        let mut t = LevelTower::new(igs).unwrap();
        t.ensure(3).unwrap();
        assert!(check_triangle(&t, 3, 200, 3).unwrap().passed());
    }
}

#[test]
fn cell_measures_and_diameters() {
    let mut t = LevelTower::new(diamond()).unwrap();
    t.ensure(3).unwrap();
    let g = cell_geometry(&t, 2, 1).unwrap();
    assert!((g.measure - 1.0 / 36.0).abs() < 1e-15);
    assert_eq!(g.diameter.len(), 36);
    assert!(g.diameter.iter().all(|&d| d <= g.bound + 1e-12));
}
