//! Replacement graphs G_n and their symbolic bookkeeping.
//!
//! Edges of G_n are stored in address order: edge `k` is the word whose
//! base-|E₁| digits (most significant first) spell `k`, so the product e·f
//! of addresses is plain arithmetic. Vertices of G_{n+1} are classes of
//! V₁×E_n, each represented by its least member under (vertex, edge) order.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::graph::MultiGraph;
use crate::igs::Igs;

pub const DEFAULT_EDGE_CAP: usize = 1_000_000;

/// Image of a vertex under one projection step π_{n+1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Proj {
    Vertex(usize),
    Edge(usize),
}

#[derive(Debug, Clone)]
pub struct Level {
    pub n: usize,
    /// Edge `k` is stored as (e⁺, e⁻).
    pub graph: MultiGraph,
    /// Canonical (generator vertex, parent edge) of every vertex; empty at level 0.
    pub reps: Vec<(usize, usize)>,
    /// Vertex id of the class of (v, e), indexed by `e * |V₁| + v`.
    class_of: Vec<usize>,
    /// One projection step down to level n−1; empty at level 0.
    proj: Vec<Proj>,
}

impl Level {
    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn plus(&self, e: usize) -> usize {
        self.graph.endpoints(e).0
    }

    pub fn minus(&self, e: usize) -> usize {
        self.graph.endpoints(e).1
    }

    pub fn projection(&self, x: usize) -> Option<Proj> {
        self.proj.get(x).copied()
    }

    /// GraphViz rendering; vertex labels are canonical ids, edge labels are
    /// address words.
    pub fn to_dot(&self, letters: usize) -> String {
        let mut out = format!("graph G{} {{\n", self.n);
        for v in 0..self.vertex_count() {
            let _ = writeln!(out, "  n{v} [label=\"{}\"];", self.graph.label(v));
        }
        for e in 0..self.edge_count() {
            let (a, b) = self.graph.endpoints(e);
            let _ = writeln!(
                out,
                "  n{a} -- n{b} [label=\"{}\"];",
                word_text(&word_of(e, self.n, letters))
            );
        }
        out.push_str("}\n");
        out
    }
}

pub fn word_text(word: &[usize]) -> String {
    if word.is_empty() {
        return "e0".to_string();
    }
    word.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(".")
}

/// Letters of edge `e` at level `n`.
pub fn word_of(mut e: usize, n: usize, letters: usize) -> Vec<usize> {
    let mut w = vec![0; n];
    for slot in w.iter_mut().rev() {
        *slot = e % letters;
        e /= letters;
    }
    w
}

pub fn edge_of_word(word: &[usize], letters: usize) -> Result<usize> {
    let mut e = 0usize;
    for &l in word {
        if l >= letters {
            return Err(Error::MalformedAddress(format!(
                "letter {l} out of range (|E1| = {letters})"
            )));
        }
        e = e * letters + l;
    }
    Ok(e)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // keep the smaller id as root so roots are class minima
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }
}

fn level_zero() -> Level {
    Level {
        n: 0,
        graph: MultiGraph::new(vec!["v+", "v-"], vec![(0, 1)]).expect("G0"),
        reps: Vec::new(),
        class_of: Vec::new(),
        proj: Vec::new(),
    }
}

fn gluing_role(igs: &Igs, v: usize) -> Option<(bool, usize)> {
    if let Some(a) = igs.i_plus().iter().position(|&x| x == v) {
        return Some((true, a));
    }
    igs.i_minus().iter().position(|&x| x == v).map(|a| (false, a))
}

fn next_level(igs: &Igs, prev: &Level) -> Result<Level> {
    let nv1 = igs.vertex_count();
    let ne = prev.edge_count();
    let pair = |v: usize, e: usize| e * nv1 + v;
    let mut uf = UnionFind::new(nv1 * ne);

    for x in 0..prev.vertex_count() {
        let inc = prev.graph.incident(x);
        let Some((&first, rest)) = inc.split_first() else {
            continue;
        };
        let phi = |e: usize| {
            if prev.plus(e) == x {
                igs.i_plus()
            } else {
                igs.i_minus()
            }
        };
        for &f in rest {
            for (&a, &b) in phi(first).iter().zip(phi(f)) {
                uf.union(pair(a, first), pair(b, f));
            }
        }
    }

    // The pair index e*|V₁|+v orders by edge first; canonical order is by
    // vertex first, so pick each class minimum by (v, e) explicitly.
    let total = nv1 * ne;
    let mut best: Vec<usize> = vec![usize::MAX; total];
    for id in 0..total {
        let r = uf.find(id);
        let key = |i: usize| (i % nv1, i / nv1);
        if best[r] == usize::MAX || key(id) < key(best[r]) {
            best[r] = id;
        }
    }
    let mut classes: Vec<(usize, usize, usize)> = (0..total)
        .filter(|&id| uf.find(id) == id)
        .map(|r| (best[r] % nv1, best[r] / nv1, r))
        .collect();
    classes.sort_unstable();
    let mut root_to_vertex = vec![usize::MAX; total];
    for (k, &(_, _, r)) in classes.iter().enumerate() {
        root_to_vertex[r] = k;
    }
    let mut class_of = vec![0; total];
    for (id, slot) in class_of.iter_mut().enumerate() {
        *slot = root_to_vertex[uf.find(id)];
    }
    let reps: Vec<(usize, usize)> = classes.iter().map(|&(v, e, _)| (v, e)).collect();

    let g1 = igs.generator();
    let n = prev.n + 1;
    let letters = igs.edge_count();
    let labels: Vec<String> = reps
        .iter()
        .map(|&(v, e)| {
            if n == 1 {
                g1.label(v).to_string()
            } else {
                format!("{}@{}", g1.label(v), word_text(&word_of(e, prev.n, letters)))
            }
        })
        .collect();

    let mut proj = vec![None; reps.len()];
    for id in 0..total {
        let (v, e) = (id % nv1, id / nv1);
        let p = match gluing_role(igs, v) {
            Some((true, _)) => Proj::Vertex(prev.plus(e)),
            Some((false, _)) => Proj::Vertex(prev.minus(e)),
            None => Proj::Edge(e),
        };
        let x = class_of[id];
        match proj[x] {
            None => proj[x] = Some(p),
            Some(q) if q == p => {}
            Some(q) => {
                return Err(Error::Internal(format!(
                    "projection of vertex {} is ambiguous ({q:?} vs {p:?})",
                    labels[x]
                )))
            }
        }
    }
    let proj = proj.into_iter().map(Option::unwrap).collect();

    let mut edges = Vec::with_capacity(ne * letters);
    for e in 0..ne {
        for g in 0..letters {
            edges.push((class_of[pair(igs.plus(g), e)], class_of[pair(igs.minus(g), e)]));
        }
    }
    Ok(Level {
        n,
        graph: MultiGraph::new(labels, edges)?,
        reps,
        class_of,
        proj,
    })
}

fn edge_total(igs: &Igs, n: usize) -> u128 {
    (igs.edge_count() as u128).saturating_pow(n as u32)
}

/// Builds G_n from scratch.
pub fn build_level(igs: &Igs, n: usize) -> Result<Level> {
    let mut tower = LevelTower::new(igs.clone())?;
    tower.ensure(n)?;
    Ok(tower.levels.swap_remove(n))
}

/// Cache of G_0, …, G_n for one IGS together with the symbolic maps.
#[derive(Debug, Clone)]
pub struct LevelTower {
    igs: Igs,
    levels: Vec<Level>,
    cap: usize,
}

impl LevelTower {
    pub fn new(igs: Igs) -> Result<Self> {
        Self::with_cap(igs, DEFAULT_EDGE_CAP)
    }

    pub fn with_cap(igs: Igs, cap: usize) -> Result<Self> {
        igs.ensure_valid()?;
        let mut t = LevelTower {
            igs,
            levels: vec![level_zero()],
            cap,
        };
        t.ensure(1)?;
        Ok(t)
    }

    pub fn igs(&self) -> &Igs {
        &self.igs
    }

    pub fn letters(&self) -> usize {
        self.igs.edge_count()
    }

    pub fn built(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn ensure(&mut self, n: usize) -> Result<()> {
        let total = edge_total(&self.igs, n);
        if total > self.cap as u128 {
            return Err(Error::LevelTooLarge {
                edges: total,
                cap: self.cap,
            });
        }
        while self.levels.len() <= n {
            let next = next_level(&self.igs, self.levels.last().unwrap())?;
            self.levels.push(next);
        }
        Ok(())
    }

    pub fn level(&self, n: usize) -> Result<&Level> {
        self.levels.get(n).ok_or(Error::LevelNotBuilt(n))
    }

    fn pow(&self, k: usize) -> usize {
        self.letters().pow(k as u32)
    }

    /// e·f for e ∈ E_n and f ∈ E_m.
    pub fn concat_edges(&self, e: usize, f: usize, m: usize) -> usize {
        e * self.pow(m) + f
    }

    /// σ_{e,m}(x) for e ∈ E_n, x ∈ V_m.
    pub fn sigma_vertex(&self, n: usize, e: usize, m: usize, x: usize) -> Result<usize> {
        let top = self.level(n + m)?;
        let base = self.level(n)?;
        if e >= base.edge_count() {
            return Err(Error::MalformedAddress(format!("edge {e} at level {n}")));
        }
        if m == 0 {
            return match x {
                0 => Ok(base.plus(e)),
                1 => Ok(base.minus(e)),
                _ => Err(Error::MalformedAddress(format!("vertex {x} at level 0"))),
            };
        }
        let mid = self.level(m)?;
        let &(z, f) = mid
            .reps
            .get(x)
            .ok_or_else(|| Error::MalformedAddress(format!("vertex {x} at level {m}")))?;
        let ef = self.concat_edges(e, f, m - 1);
        Ok(top.class_of[ef * self.igs.vertex_count() + z])
    }

    /// The whole vertex map σ_{e,m}: V_m → V_{n+m}.
    pub fn sigma(&self, n: usize, e: usize, m: usize) -> Result<Vec<usize>> {
        let size = self.level(m)?.vertex_count();
        (0..size).map(|x| self.sigma_vertex(n, e, m, x)).collect()
    }

    /// σ for an explicit address word.
    pub fn sigma_word(&self, word: &[usize], m: usize) -> Result<Vec<usize>> {
        let e = edge_of_word(word, self.letters())?;
        self.sigma(word.len(), e, m)
    }

    pub fn project_edge(&self, n: usize, m: usize, e: usize) -> Result<usize> {
        if m > n {
            return Err(Error::InvalidArgument(format!("cannot project level {n} to {m}")));
        }
        if e >= self.level(n)?.edge_count() {
            return Err(Error::MalformedAddress(format!("edge {e} at level {n}")));
        }
        Ok(e / self.pow(n - m))
    }

    /// π_{n,m} of a vertex of G_n: a vertex or an edge of G_m.
    pub fn project_vertex(&self, n: usize, m: usize, x: usize) -> Result<Proj> {
        if m > n {
            return Err(Error::InvalidArgument(format!("cannot project level {n} to {m}")));
        }
        if x >= self.level(n)?.vertex_count() {
            return Err(Error::MalformedAddress(format!("vertex {x} at level {n}")));
        }
        let mut cur = Proj::Vertex(x);
        for k in (m + 1..=n).rev() {
            match cur {
                Proj::Vertex(y) => cur = self.levels[k].proj[y],
                Proj::Edge(f) => return Ok(Proj::Edge(self.project_edge(k, m, f)?)),
            }
        }
        Ok(cur)
    }

    /// Φ_{v,m}(a) for v ∈ V_n and a word a ∈ I^m; lands in V_{n+m}.
    pub fn gluing_map(&self, n: usize, v: usize, word: &[usize]) -> Result<usize> {
        let base = self.level(n)?;
        if v >= base.vertex_count() {
            return Err(Error::MalformedAddress(format!("vertex {v} at level {n}")));
        }
        if let Some(&a) = word.iter().find(|&&a| a >= self.igs.gluing_size()) {
            return Err(Error::MalformedAddress(format!("gluing symbol {a}")));
        }
        let Some(&root) = base.graph.incident(v).first() else {
            return Err(Error::Internal(format!("isolated vertex {v}")));
        };
        let nv1 = self.igs.vertex_count();
        let mut w = v;
        for (k, &a) in word.iter().enumerate() {
            let lvl = self.level(n + k)?;
            // the unique edge at w inside the cell root·G_k
            let f = if k == 0 {
                root
            } else {
                let inside: Vec<usize> = lvl
                    .graph
                    .incident(w)
                    .iter()
                    .copied()
                    .filter(|&f| f / self.pow(k) == root)
                    .collect();
                if inside.len() != 1 {
                    return Err(Error::Internal(format!(
                        "vertex {w} at level {} has {} edges in cell {root}",
                        n + k,
                        inside.len()
                    )));
                }
                inside[0]
            };
            let phi = if lvl.plus(f) == w {
                self.igs.i_plus()
            } else {
                self.igs.i_minus()
            };
            let next = self.level(n + k + 1)?;
            w = next.class_of[f * nv1 + phi[a]];
        }
        Ok(w)
    }

    /// Every word of I^m in lexicographic order.
    pub fn gluing_words(&self, m: usize) -> Vec<Vec<usize>> {
        let k = self.igs.gluing_size();
        let total = k.pow(m as u32);
        (0..total).map(|i| word_of(i, m, k)).collect()
    }

    /// The ancestor set π_{n+m,n}^{-1}(v), listed as Φ_{v,m}(I^m).
    pub fn ancestors(&self, n: usize, v: usize, m: usize) -> Result<Vec<usize>> {
        self.gluing_words(m)
            .iter()
            .map(|a| self.gluing_map(n, v, a))
            .collect()
    }

    /// I₊⁽ⁿ⁾ in the order of I^n words.
    pub fn i_plus(&self, n: usize) -> Result<Vec<usize>> {
        self.ancestors(0, 0, n)
    }

    pub fn i_minus(&self, n: usize) -> Result<Vec<usize>> {
        self.ancestors(0, 1, n)
    }

    /// Structural suite: covering/edge maps, cell intersections, partition,
    /// ancestor separation, boundary degrees and the degree bound.
    pub fn verify_sm(&mut self, n_max: usize) -> Result<CheckReport> {
        self.ensure(n_max)?;
        let mut report = CheckReport::new();
        let l_star = self.igs.l_star()?;
        let max_deg = self.igs.generator().max_degree();

        for n in 0..=n_max {
            let edges = self.level(n)?.edge_count();
            report.push(
                format!("edge-count[n={n}]"),
                edges as u128 == edge_total(&self.igs, n),
                format!("|E_{n}| = {edges}"),
            );
        }

        for total in 0..=n_max {
            for n in 0..=total {
                let m = total - n;
                report.extend(self.check_sm1(n, m)?);
                report.extend(self.check_sm3(n, m)?);
                if n >= 1 {
                    report.extend(self.check_sm2(n, m)?);
                }
                report.extend(self.check_ancestor_distance(n, m, l_star)?);
            }
        }

        for n in 1..=n_max {
            let lvl = self.level(n)?;
            let bdry: Vec<usize> = self.i_plus(n)?.into_iter().chain(self.i_minus(n)?).collect();
            let bad: Vec<&str> = bdry
                .iter()
                .filter(|&&v| lvl.graph.incident(v).len() != 1)
                .map(|&v| lvl.graph.label(v))
                .collect();
            report.push(
                format!("boundary-degree[n={n}]"),
                bad.is_empty(),
                if bad.is_empty() {
                    format!("{} boundary vertices of degree 1", bdry.len())
                } else {
                    format!("witness {bad:?}")
                },
            );
            let d = lvl.graph.max_degree();
            report.push(
                format!("degree-bound[n={n}]"),
                d == max_deg,
                format!("max degree {d}, generator {max_deg}"),
            );
        }
        Ok(report)
    }

    fn check_sm1(&self, n: usize, m: usize) -> Result<CheckReport> {
        let mut report = CheckReport::new();
        let top = self.level(n + m)?;
        let mid = self.level(m)?;
        let mut covered = vec![false; top.vertex_count()];
        let mut failure: Option<String> = None;
        for e in 0..self.level(n)?.edge_count() {
            let map = self.sigma(n, e, m)?;
            let mut hit = vec![false; top.vertex_count()];
            for (x, &y) in map.iter().enumerate() {
                if hit[y] && failure.is_none() {
                    failure = Some(format!("sigma_{e} not injective at vertex {x}"));
                }
                hit[y] = true;
                covered[y] = true;
            }
            for f in 0..mid.edge_count() {
                let ef = self.concat_edges(e, f, m);
                let want = top.graph.endpoints(ef);
                let got = (map[mid.plus(f)], map[mid.minus(f)]);
                if want != got && failure.is_none() {
                    failure = Some(format!(
                        "edge {f} of G_{m} maps to {got:?} but {}·{f} is {want:?}",
                        e
                    ));
                }
            }
            for (g, &(a, b)) in top.graph.edges().iter().enumerate() {
                if hit[a] && hit[b] && g / self.pow(m) != e && failure.is_none() {
                    failure = Some(format!(
                        "edge {} of G_{} joins two vertices of cell {e} from outside it",
                        top.graph.label(a),
                        n + m
                    ));
                }
            }
        }
        if failure.is_none() {
            if let Some(x) = covered.iter().position(|c| !c) {
                failure = Some(format!("vertex {} not covered", top.graph.label(x)));
            }
        }
        report.push(
            format!("SM1[n={n},m={m}]"),
            failure.is_none(),
            failure.unwrap_or_else(|| "covering, injective and orientation-preserving".into()),
        );
        Ok(report)
    }

    fn check_sm2(&self, n: usize, m: usize) -> Result<CheckReport> {
        let mut report = CheckReport::new();
        let base = self.level(n)?;
        let top = self.level(n + m)?;
        let mut cells_at: Vec<Vec<usize>> = vec![Vec::new(); top.vertex_count()];
        for e in 0..base.edge_count() {
            for y in self.sigma(n, e, m)? {
                cells_at[y].push(e);
            }
        }
        let mut actual: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (y, cells) in cells_at.iter().enumerate() {
            for i in 0..cells.len() {
                for j in i + 1..cells.len() {
                    let key = (cells[i].min(cells[j]), cells[i].max(cells[j]));
                    actual.entry(key).or_default().push(y);
                }
            }
        }
        let mut expected: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for v in 0..base.vertex_count() {
            let inc = base.graph.incident(v);
            let anc = self.ancestors(n, v, m)?;
            for i in 0..inc.len() {
                for j in i + 1..inc.len() {
                    let key = (inc[i].min(inc[j]), inc[i].max(inc[j]));
                    expected.entry(key).or_default().extend(anc.iter().copied());
                }
            }
        }
        for set in actual.values_mut().chain(expected.values_mut()) {
            set.sort_unstable();
            set.dedup();
        }
        let witness = expected
            .iter()
            .find(|(k, v)| actual.get(k) != Some(v))
            .map(|(k, _)| *k)
            .or_else(|| actual.keys().find(|k| !expected.contains_key(k)).copied());
        report.push(
            format!("SM2[n={n},m={m}]"),
            witness.is_none(),
            match witness {
                None => format!("{} intersecting cell pairs match ancestor sets", expected.len()),
                Some((e, f)) => format!("cells {e} and {f} intersect wrongly"),
            },
        );
        Ok(report)
    }

    fn check_sm3(&self, n: usize, m: usize) -> Result<CheckReport> {
        let mut report = CheckReport::new();
        let top = self.level(n + m)?;
        let base = self.level(n)?;
        let mut count = vec![0usize; base.edge_count()];
        let mut failure = None;
        for (g, &(a, b)) in top.graph.edges().iter().enumerate() {
            let e = self.project_edge(n + m, n, g)?;
            count[e] += 1;
            // endpoints must project into the closed cell e
            for x in [a, b] {
                let ok = match self.project_vertex(n + m, n, x)? {
                    Proj::Edge(f) => f == e,
                    Proj::Vertex(y) => y == base.plus(e) || y == base.minus(e),
                };
                if !ok && failure.is_none() {
                    failure = Some(format!("edge {g} has endpoint {} outside cell {e}", top.graph.label(x)));
                }
            }
        }
        let per = self.pow(m);
        if failure.is_none() {
            if let Some(e) = count.iter().position(|&c| c != per) {
                failure = Some(format!("cell {e} holds {} edges, expected {per}", count[e]));
            }
        }
        report.push(
            format!("SM3[n={n},m={m}]"),
            failure.is_none(),
            failure.unwrap_or_else(|| format!("cells partition E_{} into blocks of {per}", n + m)),
        );
        Ok(report)
    }

    /// Ancestor sets of distinct level-m vertices stay L_*^n apart in G_{n+m}.
    fn check_ancestor_distance(&self, n: usize, m: usize, l_star: usize) -> Result<CheckReport> {
        let mut report = CheckReport::new();
        let top = self.level(n + m)?;
        let count = self.level(m)?.vertex_count();
        let anc: Vec<Vec<usize>> = (0..count)
            .map(|v| self.ancestors(m, v, n))
            .collect::<Result<_>>()?;
        let bound = l_star.pow(n as u32);
        let mut min_seen = usize::MAX;
        let mut witness = None;
        for v in 0..count {
            let dist = top.graph.bfs_distances(&anc[v]);
            for w in 0..count {
                if w == v {
                    continue;
                }
                let d = anc[w].iter().filter_map(|&x| dist[x]).min().unwrap_or(usize::MAX);
                min_seen = min_seen.min(d);
                if d < bound && witness.is_none() {
                    witness = Some((v, w, d));
                }
            }
        }
        report.push(
            format!("ancestor-distance[n={n},m={m}]"),
            witness.is_none(),
            match witness {
                None => format!("min distance {min_seen} >= L_*^{n} = {bound}"),
                Some((v, w, d)) => format!("vertices {v},{w} of G_{m}: distance {d} < {bound}"),
            },
        );
        Ok(report)
    }

    pub fn address_table(&self, n: usize) -> Result<AddressTable> {
        let lvl = self.level(n)?;
        let g1 = self.igs.generator();
        let vertices = (0..lvl.vertex_count())
            .map(|x| VertexAddress {
                id: lvl.graph.label(x).to_string(),
                vertex: lvl.reps.get(x).map(|&(v, _)| g1.label(v).to_string()),
                parent_word: lvl
                    .reps
                    .get(x)
                    .map(|&(_, e)| word_of(e, n.saturating_sub(1), self.letters())),
            })
            .collect();
        let edges = (0..lvl.edge_count())
            .map(|e| EdgeAddress {
                index: e,
                word: word_of(e, n, self.letters()),
                plus: lvl.graph.label(lvl.plus(e)).to_string(),
                minus: lvl.graph.label(lvl.minus(e)).to_string(),
            })
            .collect();
        Ok(AddressTable {
            level: n,
            vertices,
            edges,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VertexAddress {
    pub id: String,
    pub vertex: Option<String>,
    pub parent_word: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeAddress {
    pub index: usize,
    pub word: Vec<usize>,
    pub plus: String,
    pub minus: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AddressTable {
    pub level: usize,
    pub vertices: Vec<VertexAddress>,
    pub edges: Vec<EdgeAddress>,
}
