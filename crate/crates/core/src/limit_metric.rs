//! Finite-level approximations d_n of the limit-space metric.
//!
//! A family Ω of cells is admissible for (v, w) when the union of the cell
//! subgraphs is connected and contains both vertices. Any such family
//! contains a chain of cells c₁, …, c_k with v ∈ c₁, w ∈ c_k and consecutive
//! cells sharing a vertex: take a path from v to w inside the union and
//! record the cells it passes through, dropping repeats. A chain is itself
//! admissible and weighs no more than Ω, so the infimum is a node-weighted
//! shortest path in the bipartite graph of cells and vertices, cells
//! weighing L_*^{−|c|} and vertices nothing.

use rayon::prelude::*;
use serde::Serialize;

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::graph::node_weighted_search;
use crate::replacement::LevelTower;
use crate::rng::{derive_seed, rng};
use rand::Rng;

/// Absolute rounding allowance when comparing sums of powers of L_*.
const ROUNDING: f64 = 1e-12;

pub struct CellComplex<'a> {
    tower: &'a LevelTower,
    level: usize,
    letters: usize,
    vertices: usize,
    /// First node id of the cells of each length.
    offsets: Vec<usize>,
    weights: Vec<f64>,
}

impl<'a> CellComplex<'a> {
    pub fn new(tower: &'a LevelTower, level: usize) -> Result<Self> {
        let vertices = tower.level(level)?.vertex_count();
        let letters = tower.letters();
        let l = tower.igs().l_star()? as f64;
        let mut offsets = Vec::with_capacity(level + 2);
        let mut next = vertices;
        for k in 0..=level {
            offsets.push(next);
            next += letters.pow(k as u32);
        }
        offsets.push(next);
        Ok(CellComplex {
            tower,
            level,
            letters,
            vertices,
            offsets,
            weights: (0..=level).map(|k| l.powi(-(k as i32))).collect(),
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn cell_count(&self) -> usize {
        self.offsets[self.level + 1] - self.vertices
    }

    fn cell_of(&self, node: usize) -> (usize, usize) {
        let k = self.offsets.partition_point(|&o| o <= node) - 1;
        (k, node - self.offsets[k])
    }

    fn node_weight(&self, node: usize) -> f64 {
        if node < self.vertices {
            0.0
        } else {
            self.weights[self.cell_of(node).0]
        }
    }

    fn neighbors(&self, node: usize, visit: &mut dyn FnMut(usize)) {
        let top = self.tower.level(self.level).expect("level built");
        if node < self.vertices {
            for &g in top.graph.incident(node) {
                for k in 0..=self.level {
                    let span = self.letters.pow((self.level - k) as u32);
                    visit(self.offsets[k] + g / span);
                }
            }
        } else {
            let (k, e) = self.cell_of(node);
            let span = self.letters.pow((self.level - k) as u32);
            for g in e * span..(e + 1) * span {
                let (a, b) = top.graph.endpoints(g);
                visit(a);
                visit(b);
            }
        }
    }

    /// min over v ∈ from, w ∈ to of d_n(v, w).
    pub fn set_distance(&self, from: &[usize], to: &[usize]) -> Result<f64> {
        for &v in from.iter().chain(to) {
            if v >= self.vertices {
                return Err(Error::MalformedAddress(format!("vertex {v} at level {}", self.level)));
            }
        }
        let mut target = vec![false; self.vertices];
        for &w in to {
            target[w] = true;
        }
        let total = self.offsets[self.level + 1];
        let (dist, hit) = node_weighted_search(
            total,
            |x| self.node_weight(x),
            from,
            |x, visit| self.neighbors(x, visit),
            |x| x < self.vertices && target[x],
        );
        hit.map(|x| dist[x]).ok_or(Error::Disconnected)
    }

    pub fn dn(&self, v: usize, w: usize) -> Result<f64> {
        self.set_distance(&[v], &[w])
    }

    /// d_n between two edges of G_n, through their endpoints.
    pub fn edge_distance(&self, e: usize, f: usize) -> Result<f64> {
        let top = self.tower.level(self.level)?;
        let (a, b) = top.graph.endpoints(e);
        let (c, d) = top.graph.endpoints(f);
        self.set_distance(&[a, b], &[c, d])
    }

    /// Vertices of the cell of edge `e` at level `k` ≤ n.
    pub fn cell_vertices(&self, k: usize, e: usize) -> Result<Vec<usize>> {
        let top = self.tower.level(self.level)?;
        let span = self.letters.pow((self.level - k) as u32);
        let mut out: Vec<usize> = (e * span..(e + 1) * span)
            .flat_map(|g| {
                let (a, b) = top.graph.endpoints(g);
                [a, b]
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Largest n ≤ depth with e_n ∩ f_n ≠ ∅, for two edges of G_depth.
pub fn separation_level(tower: &LevelTower, depth: usize, e: usize, f: usize) -> Result<usize> {
    let letters = tower.letters();
    for n in (0..=depth).rev() {
        let span = letters.pow((depth - n) as u32);
        let lvl = tower.level(n)?;
        let (a, b) = lvl.graph.endpoints(e / span);
        let (c, d) = lvl.graph.endpoints(f / span);
        if a == c || a == d || b == c || b == d {
            return Ok(n);
        }
    }
    Err(Error::Internal("level-0 cells always intersect".into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSample {
    pub e: usize,
    pub f: usize,
    pub separation: usize,
    /// d_k(e_k, f_k) for k = 0..=depth.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VisualMetricReport {
    pub depth: usize,
    pub l_star: usize,
    pub seed: u64,
    /// Smallest A with A⁻¹L_*^{−n} ≤ d ≤ A·L_*^{−n} over separated pairs.
    pub visual_constant: f64,
    pub samples: Vec<PairSample>,
    pub checks: CheckReport,
}

/// Samples pairs of depth-`depth` words and checks the visual-metric bounds
/// L_*^{−(n+1)} ≤ d ≤ 2L_*^{−n} and the stability estimate
/// d_n ≤ d_{n+m} ≤ d_n + 2L_*^{−n} along every prefix.
pub fn check_visual_metric(tower: &LevelTower, depth: usize, pairs: usize, seed: u64) -> Result<VisualMetricReport> {
    if pairs == 0 {
        return Err(Error::InvalidArgument("need at least one pair".into()));
    }
    let l = tower.igs().l_star()?;
    let lf = l as f64;
    let complexes: Vec<CellComplex> = (0..=depth)
        .map(|k| CellComplex::new(tower, k))
        .collect::<Result<_>>()?;
    let words = tower.level(depth)?.edge_count();
    let letters = tower.letters();
    let mut r = rng(derive_seed(seed, 0));
    let picks: Vec<(usize, usize)> = (0..pairs)
        .map(|_| (r.gen_range(0..words), r.gen_range(0..words)))
        .collect();
    let samples: Vec<PairSample> = picks
        .par_iter()
        .map(|&(e, f)| {
            let distances = (0..=depth)
                .map(|k| {
                    let span = letters.pow((depth - k) as u32);
                    complexes[k].edge_distance(e / span, f / span)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PairSample {
                e,
                f,
                separation: separation_level(tower, depth, e, f)?,
                distances,
            })
        })
        .collect::<Result<_>>()?;

    let mut checks = CheckReport::new();
    let mut visual_constant: f64 = 1.0;
    let mut sandwich_fail = None;
    let mut stability_fail = None;
    for s in &samples {
        let n = s.separation;
        let d = s.distances[depth];
        let scale = lf.powi(-(n as i32));
        let upper_ok = d <= 2.0 * scale + ROUNDING;
        let lower_ok = n == depth || d + ROUNDING >= scale / lf;
        if n < depth {
            visual_constant = visual_constant.max(d / scale).max(scale / d);
        }
        if !(upper_ok && lower_ok) && sandwich_fail.is_none() {
            sandwich_fail = Some(format!("pair ({}, {}) separation {n}: d = {d:e}", s.e, s.f));
        }
        for a in 0..=depth {
            for b in a..=depth {
                let (da, db) = (s.distances[a], s.distances[b]);
                let ok = da <= db + ROUNDING && db <= da + 2.0 * lf.powi(-(a as i32)) + ROUNDING;
                if !ok && stability_fail.is_none() {
                    stability_fail = Some(format!(
                        "pair ({}, {}): d_{a} = {da:e}, d_{b} = {db:e}",
                        s.e, s.f
                    ));
                }
            }
        }
    }
    let separated = samples.iter().filter(|s| s.separation < depth).count();
    checks.push(
        format!("visual-sandwich[depth={depth}]"),
        sandwich_fail.is_none(),
        sandwich_fail.unwrap_or(format!(
            "{separated}/{pairs} separated pairs within [L^-(n+1), 2 L^-n]; A = {visual_constant:.6}"
        )),
    );
    checks.push(
        format!("stability-sandwich[depth={depth}]"),
        stability_fail.is_none(),
        stability_fail.unwrap_or(format!("d_n <= d_(n+m) <= d_n + 2 L^-n on all prefixes of {pairs} pairs")),
    );
    Ok(VisualMetricReport {
        depth,
        l_star: l,
        seed,
        visual_constant,
        samples,
        checks,
    })
}

/// Symmetry and the triangle inequality with slack L_*^{−n} on random
/// vertex triples of G_n.
pub fn check_triangle(tower: &LevelTower, n: usize, triples: usize, seed: u64) -> Result<CheckReport> {
    let cx = CellComplex::new(tower, n)?;
    let slack = (tower.igs().l_star()? as f64).powi(-(n as i32));
    let count = tower.level(n)?.vertex_count();
    let mut r = rng(derive_seed(seed, 1));
    let mut worst = f64::NEG_INFINITY;
    let mut asym: f64 = 0.0;
    for _ in 0..triples {
        let (a, b, c) = (r.gen_range(0..count), r.gen_range(0..count), r.gen_range(0..count));
        let ab = cx.dn(a, b)?;
        let bc = cx.dn(b, c)?;
        let ac = cx.dn(a, c)?;
        asym = asym.max((ab - cx.dn(b, a)?).abs());
        worst = worst.max(ac - ab - bc - slack);
    }
    let mut rep = CheckReport::new();
    rep.push(
        format!("dn-symmetry[n={n}]"),
        asym <= ROUNDING,
        format!("max |d(a,b) - d(b,a)| = {asym:e}"),
    );
    rep.push(
        format!("dn-triangle[n={n}]"),
        worst <= ROUNDING,
        format!("max d(a,c) - d(a,b) - d(b,c) - L^-n = {worst:e}"),
    );
    Ok(rep)
}

#[derive(Debug, Clone, Serialize)]
pub struct CellGeometry {
    pub level: usize,
    pub resolution: usize,
    /// Per cell of G_n: max d_{n+r} over the cell's vertices.
    pub diameter: Vec<f64>,
    pub measure: f64,
    pub bound: f64,
    /// max diameter / L_*^{−n} − 1, clamped below at 0.
    pub slack: f64,
}

/// Diameter proxies of the level-n cells measured in d_{n+r}, and their
/// reference measure |E₁|^{−n}.
pub fn cell_geometry(tower: &LevelTower, n: usize, r: usize) -> Result<CellGeometry> {
    let cx = CellComplex::new(tower, n + r)?;
    let cells = tower.level(n)?.edge_count();
    let diameter: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|e| {
            let vs = cx.cell_vertices(n, e)?;
            let mut best: f64 = 0.0;
            for i in 0..vs.len() {
                for j in i + 1..vs.len() {
                    best = best.max(cx.dn(vs[i], vs[j])?);
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;
    let bound = (tower.igs().l_star()? as f64).powi(-(n as i32));
    let worst = diameter.iter().copied().fold(0.0, f64::max);
    Ok(CellGeometry {
        level: n,
        resolution: r,
        measure: (tower.letters() as f64).powi(-(n as i32)),
        slack: (worst / bound - 1.0).max(0.0),
        diameter,
        bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::igs::{diamond, path2};

    #[test]
    fn path_distances_are_euclidean() {
        let mut t = LevelTower::new(path2()).unwrap();
        t.ensure(4).unwrap();
        let cx = CellComplex::new(&t, 4).unwrap();
        let g = &t.level(4).unwrap().graph;
        let pos = g.bfs_distances(&[0]);
        for a in 0..g.vertex_count() {
            for b in 0..g.vertex_count() {
                let want = (pos[a].unwrap() as f64 - pos[b].unwrap() as f64).abs() / 16.0;
                assert!((cx.dn(a, b).unwrap() - want).abs() < 1e-12);
            }
        }
        let (s, e) = (t.i_plus(4).unwrap()[0], t.i_minus(4).unwrap()[0]);
        assert_eq!(cx.dn(s, e).unwrap(), 1.0);
        assert_eq!(cx.cell_count(), 31);
    }

    #[test]
    fn separation_of_identical_words() {
        let mut t = LevelTower::new(diamond()).unwrap();
        t.ensure(3).unwrap();
        assert_eq!(separation_level(&t, 3, 17, 17).unwrap(), 3);
        let cx = CellComplex::new(&t, 3).unwrap();
        assert_eq!(cx.edge_distance(17, 17).unwrap(), 0.0);
    }

    #[test]
    fn geometry_of_small_levels() {
        let mut t = LevelTower::new(path2()).unwrap();
        t.ensure(4).unwrap();
        let g = cell_geometry(&t, 3, 1).unwrap();
        assert!(g.diameter.iter().all(|d| (d - 0.125).abs() < 1e-12));
        let g = cell_geometry(&t, 0, 1).unwrap();
        assert!(g.diameter[0] <= 1.0 && g.measure == 1.0);
    }
}
