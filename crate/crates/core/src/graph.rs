//! Finite multigraphs and the handful of combinatorial primitives the rest of
//! the crate needs.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::error::{Error, Result};

pub const DEFAULT_AUTOMORPHISM_BOUND: usize = 64;

/// Undirected multigraph without loops. Vertices are addressed by a dense
/// index; the original ids survive as labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGraph {
    labels: Vec<String>,
    lookup: HashMap<String, usize>,
    edges: Vec<(usize, usize)>,
    incidence: Vec<Vec<usize>>,
}

impl MultiGraph {
    pub fn new<S: Into<String>>(labels: Vec<S>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut lookup = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if lookup.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(l.clone()));
            }
        }
        let mut incidence = vec![Vec::new(); labels.len()];
        for (k, &(a, b)) in edges.iter().enumerate() {
            for x in [a, b] {
                if x >= labels.len() {
                    return Err(Error::UnknownVertex(x.to_string()));
                }
            }
            if a == b {
                return Err(Error::LoopEdge(labels[a].clone()));
            }
            incidence[a].push(k);
            incidence[b].push(k);
        }
        Ok(MultiGraph {
            labels,
            lookup,
            edges,
            incidence,
        })
    }

    /// Vertices labelled `0..n`.
    pub fn unlabeled(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()).collect(), edges)
    }

    pub fn from_labeled(labels: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let idx: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let find = |l: &str| idx.get(l).copied().ok_or_else(|| Error::UnknownVertex(l.to_string()));
        let mut es = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            es.push((find(a)?, find(b)?));
        }
        Self::new(labels.to_vec(), es)
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.lookup
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(label.to_string()))
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    /// Edge ids incident to `v`, parallel edges listed separately.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    fn check(&self, v: usize) -> Result<()> {
        if v < self.labels.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v.to_string()))
        }
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        self.check(v)?;
        Ok(self.incidence[v].len())
    }

    pub fn max_degree(&self) -> usize {
        self.incidence.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Hop distances from a set of sources; `None` for unreachable vertices.
    pub fn bfs_distances(&self, sources: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &e in &self.incidence[v] {
                let w = self.other_end(e, v);
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count() == 0 {
            return true;
        }
        self.bfs_distances(&[0]).iter().all(Option::is_some)
    }

    pub fn graph_distance(&self, a: &[usize], b: &[usize]) -> Result<usize> {
        for &v in a.iter().chain(b) {
            self.check(v)?;
        }
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidArgument("empty vertex set".into()));
        }
        let dist = self.bfs_distances(a);
        b.iter()
            .filter_map(|&v| dist[v])
            .min()
            .ok_or(Error::Disconnected)
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut member = vec![false; self.vertex_count()];
        for &v in set {
            member[v] = true;
        }
        self.edges.iter().all(|&(a, b)| !(member[a] && member[b]))
    }

    fn multiplicity_matrix(&self) -> Vec<u32> {
        let n = self.vertex_count();
        let mut m = vec![0u32; n * n];
        for &(a, b) in &self.edges {
            m[a * n + b] += 1;
            m[b * n + a] += 1;
        }
        m
    }

    /// Every multiplicity-preserving vertex bijection (as `image[v]`).
    pub fn automorphisms(&self) -> Result<Vec<Vec<usize>>> {
        self.automorphisms_with(DEFAULT_AUTOMORPHISM_BOUND, &[], None)
    }

    /// Backtracking search over bijections with some images pinned in
    /// advance. Stops after `limit` hits when given.
    pub fn automorphisms_with(
        &self,
        bound: usize,
        pinned: &[(usize, usize)],
        limit: Option<usize>,
    ) -> Result<Vec<Vec<usize>>> {
        let n = self.vertex_count();
        if n > bound {
            return Err(Error::TooLarge { vertices: n, bound });
        }
        let mult = self.multiplicity_matrix();
        let deg: Vec<usize> = self.incidence.iter().map(Vec::len).collect();

        let mut forced = vec![usize::MAX; n];
        for &(v, w) in pinned {
            self.check(v)?;
            self.check(w)?;
            if forced[v] != usize::MAX && forced[v] != w {
                return Ok(Vec::new());
            }
            forced[v] = w;
        }

        // Assign vertices in BFS order so that each new vertex is usually
        // adjacent to something already placed, which prunes early.
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for root in 0..n {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &e in &self.incidence[v] {
                    let w = self.other_end(e, v);
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }

        struct Search<'a> {
            n: usize,
            mult: &'a [u32],
            deg: &'a [usize],
            order: &'a [usize],
            forced: &'a [usize],
            image: Vec<usize>,
            used: Vec<bool>,
            found: Vec<Vec<usize>>,
            limit: Option<usize>,
        }

        impl Search<'_> {
            fn done(&self) -> bool {
                self.limit.is_some_and(|l| self.found.len() >= l)
            }

            fn fits(&self, k: usize, c: usize) -> bool {
                let v = self.order[k];
                if self.used[c] || self.deg[c] != self.deg[v] {
                    return false;
                }
                if self.forced[v] != usize::MAX && self.forced[v] != c {
                    return false;
                }
                self.order[..k].iter().all(|&u| {
                    self.mult[u * self.n + v] == self.mult[self.image[u] * self.n + c]
                })
            }

            fn run(&mut self, k: usize) {
                if self.done() {
                    return;
                }
                if k == self.n {
                    self.found.push(self.image.clone());
                    return;
                }
                let v = self.order[k];
                for c in 0..self.n {
                    if self.fits(k, c) {
                        self.image[v] = c;
                        self.used[c] = true;
                        self.run(k + 1);
                        self.used[c] = false;
                        if self.done() {
                            return;
                        }
                    }
                }
            }
        }

        let mut search = Search {
            n,
            mult: &mult,
            deg: &deg,
            order: &order,
            forced: &forced,
            image: vec![0; n],
            used: vec![false; n],
            found: Vec::new(),
            limit,
        };
        search.run(0);
        let mut found = search.found;
        found.sort();
        Ok(found)
    }

    /// Cheapest s–t path where the cost is the total weight of the vertices on
    /// it, both terminals included (so `s == t` costs `weights[s]`).
    pub fn node_weighted_shortest_path(&self, weights: &[f64], s: usize, t: usize) -> Result<f64> {
        self.check(s)?;
        self.check(t)?;
        if weights.len() != self.vertex_count() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} vertices",
                weights.len(),
                self.vertex_count()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("non-positive weight {w}")));
        }
        let (dist, hit) = node_weighted_search(
            self.vertex_count(),
            |v| weights[v],
            &[s],
            |v, visit| {
                for &e in &self.incidence[v] {
                    visit(self.other_end(e, v));
                }
            },
            |v| v == t,
        );
        hit.map(|v| dist[v]).ok_or(Error::Disconnected)
    }
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, ties broken by node id for determinism
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra on an implicit graph with non-negative node weights. A path costs
/// the sum of its node weights, sources included. Stops at the first settled
/// node satisfying `stop` and returns it alongside the distance table.
pub fn node_weighted_search<W, N, S>(
    n: usize,
    weight: W,
    sources: &[usize],
    neighbors: N,
    stop: S,
) -> (Vec<f64>, Option<usize>)
where
    W: Fn(usize) -> f64,
    N: Fn(usize, &mut dyn FnMut(usize)),
    S: Fn(usize) -> bool,
{
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        let c = weight(s);
        if c < dist[s] {
            dist[s] = c;
            heap.push(State { cost: c, node: s });
        }
    }
    while let Some(State { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        if stop(node) {
            return (dist, Some(node));
        }
        neighbors(node, &mut |next| {
            let c = cost + weight(next);
            if c < dist[next] {
                dist[next] = c;
                heap.push(State { cost: c, node: next });
            }
        });
    }
    (dist, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path2() -> MultiGraph {
        MultiGraph::unlabeled(3, vec![(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn loops_and_unknown_endpoints_rejected() {
        assert!(matches!(
            MultiGraph::unlabeled(2, vec![(1, 1)]),
            Err(Error::LoopEdge(_))
        ));
        assert!(matches!(
            MultiGraph::unlabeled(2, vec![(0, 2)]),
            Err(Error::UnknownVertex(_))
        ));
    }

    #[test]
    fn degree_counts_parallel_edges() {
        let g = MultiGraph::from_labeled(&["a", "b"], &[("a", "b"), ("a", "b")]).unwrap();
        assert_eq!(g.degree(g.index_of("a").unwrap()).unwrap(), 2);
        assert_eq!(path2().degree(1).unwrap(), 2);
        assert!(matches!(path2().degree(7), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn distances_on_path() {
        let g = path2();
        assert_eq!(g.graph_distance(&[0], &[2]).unwrap(), 2);
        assert_eq!(g.graph_distance(&[0, 1], &[1]).unwrap(), 0);
        let split = MultiGraph::unlabeled(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(split.graph_distance(&[0], &[3]), Err(Error::Disconnected));
    }

    #[test]
    fn independence() {
        let g = path2();
        assert!(g.is_independent(&[0, 2]));
        assert!(!g.is_independent(&[0, 1]));
    }

    #[test]
    fn small_automorphism_groups() {
        assert_eq!(
            path2().automorphisms().unwrap(),
            vec![vec![0, 1, 2], vec![2, 1, 0]]
        );
        let tri = MultiGraph::unlabeled(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(tri.automorphisms().unwrap().len(), 6);
        let big = MultiGraph::unlabeled(70, vec![]).unwrap();
        assert!(matches!(big.automorphisms(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn node_weighted_paths() {
        let g = path2();
        assert_eq!(g.node_weighted_shortest_path(&[1.0; 3], 0, 2).unwrap(), 3.0);
        assert_eq!(g.node_weighted_shortest_path(&[2.5, 1.0, 1.0], 0, 0).unwrap(), 2.5);
        let star = MultiGraph::unlabeled(4, vec![(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(
            star.node_weighted_shortest_path(&[10.0, 1.0, 1.0, 1.0], 1, 3).unwrap(),
            12.0
        );
        assert!(g.node_weighted_shortest_path(&[1.0, 0.0, 1.0], 0, 2).is_err());
    }
}
